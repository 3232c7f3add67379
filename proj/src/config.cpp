#include "gstab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "gstab/errors.hpp"
#include "gstab/format.hpp"
#include "gstab/registry.hpp"

namespace gstab {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(std::string_view k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    });
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& source) {
    Config cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError(source + ":" + std::to_string(line_no) + ": invalid key '" + std::string(key) + "'");
        cfg.set(std::string(key), std::string(value));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("invalid key '" + key + "'");
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

const std::string* Config::find(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return &v;
    return nullptr;
}

std::string Config::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
}

// ---------------------------------------------------------------- typed

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw ConfigError("config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    if (!v.empty() && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    if (ec != std::errc{} || ptr != e || !std::isfinite(out)) bad_value(key, v, "a finite number");
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
    return out;
}

std::vector<double> parse_vector(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string token;
    std::string s = v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    while (is >> token) out.push_back(parse_double(key, token));
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "a boolean (true/false)");
}

std::string fmt(double v) { return format_double(v); }

std::string fmt(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + format_double(v[i]);
    return out;
}

struct Field {
    const char* key;
    // Returns nullopt when the key should not be echoed (unset optional/empty matrix).
    std::function<std::optional<std::string>(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
};

template <class T>
Field number(const char* key, T ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) -> std::optional<std::string> {
                if constexpr (std::is_floating_point_v<T>)
                    return fmt(c.*member);
                else
                    return std::to_string(c.*member);
            },
            [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                if constexpr (std::is_floating_point_v<T>)
                    c.*member = parse_double(k, v);
                else
                    c.*member = static_cast<T>(parse_uint(k, v));
            }};
}

Field text(const char* key, std::string ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) -> std::optional<std::string> { return c.*member; },
            [member](ExperimentConfig& c, const std::string&, const std::string& v) { c.*member = v; }};
}

Field vec(const char* key, std::vector<double> ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) -> std::optional<std::string> { return fmt(c.*member); },
            [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_vector(k, v);
            }};
}

Field matrix(const char* key, std::vector<double> LinearSystem::*member) {
    return {key,
            [member](const ExperimentConfig& c) -> std::optional<std::string> {
                if ((c.linear.*member).empty()) return std::nullopt;
                return fmt(c.linear.*member);
            },
            [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.linear.*member = parse_vector(k, v);
            }};
}

Field optional_number(const char* key, std::optional<double> ExperimentConfig::*member) {
    return {key,
            [member](const ExperimentConfig& c) -> std::optional<std::string> {
                if (!(c.*member)) return std::nullopt;
                return fmt(*(c.*member));
            },
            [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                c.*member = parse_double(k, v);
            }};
}

template <class T>
Field fit_number(const char* key, T FitConfig::*member) {
    return {key,
            [member](const ExperimentConfig& c) -> std::optional<std::string> {
                if constexpr (std::is_floating_point_v<T>)
                    return fmt(c.fit.*member);
                else
                    return std::to_string(c.fit.*member);
            },
            [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
                if constexpr (std::is_floating_point_v<T>)
                    c.fit.*member = parse_double(k, v);
                else
                    c.fit.*member = static_cast<T>(parse_uint(k, v));
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> all = [] {
        std::vector<Field> f;
        f.push_back(text("pipeline", &ExperimentConfig::pipeline));
        f.push_back(text("system", &ExperimentConfig::system));
        f.push_back({"dimension",
                     [](const ExperimentConfig& c) -> std::optional<std::string> { return std::to_string(c.linear.dim); },
                     [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                         c.linear.dim = static_cast<std::size_t>(parse_uint(k, v));
                     }});
        f.push_back(matrix("A_f", &LinearSystem::A_f));
        f.push_back(matrix("B_f", &LinearSystem::B_f));
        f.push_back(matrix("c_f", &LinearSystem::c_f));
        f.push_back(matrix("A_g", &LinearSystem::A_g));
        f.push_back(matrix("B_g", &LinearSystem::B_g));
        f.push_back(matrix("c_g", &LinearSystem::c_g));
        f.push_back(matrix("A_h", &LinearSystem::A_h));
        f.push_back(matrix("B_h", &LinearSystem::B_h));
        f.push_back(matrix("c_h", &LinearSystem::c_h));
        f.push_back(number("sigma_lo", &ExperimentConfig::sigma_lo));
        f.push_back(number("sigma_hi", &ExperimentConfig::sigma_hi));
        f.push_back(number("tau_time", &ExperimentConfig::tau_time));
        f.push_back(number("steps_per_delay", &ExperimentConfig::steps_per_delay));
        f.push_back(number("horizon_time", &ExperimentConfig::horizon_time));
        f.push_back(text("initial_segment", &ExperimentConfig::initial_segment));
        f.push_back(vec("initial_value", &ExperimentConfig::initial_value));
        f.push_back(vec("initial_slope_per_time", &ExperimentConfig::initial_slope_per_time));
        f.push_back(number("p", &ExperimentConfig::p));
        f.push_back(number("scenarios", &ExperimentConfig::scenarios));
        f.push_back(number("paths_per_scenario", &ExperimentConfig::paths_per_scenario));
        f.push_back(number("seed", &ExperimentConfig::seed));
        f.push_back(number("refine_factor", &ExperimentConfig::refine_factor));
        f.push_back(number("magnitude_cap", &ExperimentConfig::magnitude_cap));
        f.push_back(number("h1_samples", &ExperimentConfig::h1_samples));
        f.push_back(fit_number("fit_tail_fraction", &FitConfig::tail_fraction));
        f.push_back(fit_number("fit_window_lo", &FitConfig::window_lo));
        f.push_back(fit_number("fit_window_hi", &FitConfig::window_hi));
        f.push_back(fit_number("fit_floor", &FitConfig::floor_eps));
        f.push_back(fit_number("fit_backfit_iterations", &FitConfig::backfit_iterations));
        f.push_back({"fit_inflate",
                     [](const ExperimentConfig& c) -> std::optional<std::string> {
                         return c.fit.inflate ? "true" : "false";
                     },
                     [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                         c.fit.inflate = parse_bool(k, v);
                     }});
        f.push_back(text("fit_target", &ExperimentConfig::fit_target));
        f.push_back(number("delta_conf", &ExperimentConfig::delta_conf));
        f.push_back(text("cert_start", &ExperimentConfig::cert_start));
        f.push_back(number("cert_M", &ExperimentConfig::cert_M));
        f.push_back(number("cert_lambda_per_time", &ExperimentConfig::cert_lambda_per_time));
        f.push_back(number("cert_d", &ExperimentConfig::cert_d));
        f.push_back(number("cert_norm_ratio", &ExperimentConfig::cert_norm_ratio));
        f.push_back(optional_number("cert_tau_time", &ExperimentConfig::cert_tau_time));
        f.push_back(optional_number("cert_step_time", &ExperimentConfig::cert_step_time));
        f.push_back(number("convergence_levels", &ExperimentConfig::convergence_levels));
        f.push_back(number("convergence_reference_factor", &ExperimentConfig::convergence_reference_factor));
        return f;
    }();
    return all;
}

}  // namespace

const std::vector<std::string>& pipeline_names() {
    static const std::vector<std::string> names{"simulate", "fit", "certify", "chain", "compare", "convergence"};
    return names;
}

ExperimentConfig ExperimentConfig::from(const Config& cfg) {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : cfg.entries()) {
        const bool known = std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return k == f.key; });
        if (!known) unknown.push_back(k);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ConfigError(msg);
    }
    ExperimentConfig out;
    for (const auto& f : fields())
        if (const auto* v = cfg.find(f.key)) f.set(out, f.key, *v);
    out.validate();
    return out;
}

Config ExperimentConfig::to_config() const {
    Config c;
    for (const auto& f : fields())
        if (auto v = f.get(*this)) c.set(f.key, *v);
    return c;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (std::find(pipeline_names().begin(), pipeline_names().end(), pipeline) == pipeline_names().end())
        fail("pipeline must be one of simulate, fit, certify, chain, compare, convergence (got '" + pipeline + "')");
    if (linear.dim == 0) fail("dimension must be positive");
    try {
        (void)gparams();
        (void)grid();
        (void)build_system();
        (void)initial_data();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (!(p >= 2.0)) fail("p must be >= 2");
    if (scenarios == 0) fail("scenarios must be positive");
    if (paths_per_scenario == 0) fail("paths_per_scenario must be positive");
    if (sigma_lo != sigma_hi && scenarios < 2) fail("scenarios must be >= 2 when sigma_lo < sigma_hi");
    if (refine_factor == 0) fail("refine_factor must be positive");
    if (!(magnitude_cap > 0.0)) fail("magnitude_cap must be positive");
    try {
        fit.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (fit_target != "x" && fit_target != "X" && fit_target != "y" && fit_target != "Y")
        fail("fit_target must be one of x, X, y, Y");
    if (!(delta_conf > 0.0 && delta_conf < 1.0)) fail("delta_conf must lie in (0, 1)");
    try {
        (void)system_kind_from_string(cert_start);
    } catch (const std::invalid_argument& e) {
        fail(std::string("cert_start: ") + e.what());
    }
    if (!(cert_M > 0.0)) fail("cert_M must be positive");
    if (!(cert_lambda_per_time > 0.0)) fail("cert_lambda_per_time must be positive");
    if (!(cert_d >= 0.0)) fail("cert_d must be >= 0");
    if (!(cert_norm_ratio >= 1.0)) fail("cert_norm_ratio must be >= 1");
    if (!(cert_tau() > 0.0)) fail("cert_tau_time must be positive");
    if (!(cert_step() > 0.0)) fail("cert_step_time must be positive");
    if (convergence_levels < 2 || convergence_levels > 12) fail("convergence_levels must lie in [2, 12]");
    if (convergence_reference_factor == 0) fail("convergence_reference_factor must be positive");
}

InitialSegment ExperimentConfig::initial_data() const {
    const std::size_t n = linear.dim;
    if (initial_value.size() != n) throw std::invalid_argument("initial_value must have `dimension` entries");
    if (initial_segment == "constant") return InitialSegment::constant(initial_value, steps_per_delay);
    if (initial_segment == "ramp") {
        if (initial_slope_per_time.size() != n)
            throw std::invalid_argument("initial_slope_per_time must have `dimension` entries");
        return InitialSegment::sample(n, grid(), [&](double theta, std::span<double> out) {
            for (std::size_t i = 0; i < n; ++i) out[i] = initial_value[i] + initial_slope_per_time[i] * theta;
        });
    }
    throw std::invalid_argument("initial_segment must be constant or ramp (got '" + initial_segment + "')");
}

CoefficientSystem ExperimentConfig::build_system() const {
    if (system == "linear") return linear.to_system("linear");
    return make_registered_system(system, linear.dim);
}

}  // namespace gstab
