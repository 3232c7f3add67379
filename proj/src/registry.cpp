#include "gstab/registry.hpp"

#include <cmath>

#include "gstab/errors.hpp"

namespace gstab {

std::vector<std::string> registered_systems() { return {"zero", "scalar_sine"}; }

CoefficientSystem make_registered_system(const std::string& name, std::size_t dim) {
    if (name == "zero") return zero_system(dim);
    if (name == "scalar_sine") {
        if (dim != 1) throw ConfigError("system scalar_sine is scalar; set dimension = 1");
        // f = -2x + 0.5 sin(y) + 0.3, g = 0, h = 0.2 cos(x).
        // |f(a) - f(b)|^2 <= (2|dx| + 0.5|dy|)^2 <= 4.25 (dx^2 + dy^2).
        auto f = [](std::span<const double> x, std::span<const double> y, std::span<double> out) {
            out[0] = -2.0 * x[0] + 0.5 * std::sin(y[0]) + 0.3;
        };
        auto g = [](std::span<const double>, std::span<const double>, std::span<double> out) { out[0] = 0.0; };
        auto h = [](std::span<const double> x, std::span<const double>, std::span<double> out) {
            out[0] = 0.2 * std::cos(x[0]);
        };
        return CoefficientSystem(1, f, g, h, 4.25, -1.0, "scalar_sine");
    }
    std::string known;
    for (const auto& n : registered_systems()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown system '" + name + "' (expected linear or one of: " + known + ")");
}

}  // namespace gstab
