#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gstab/model.hpp"

namespace gstab {

// Coefficient systems that configs can reference by name.
std::vector<std::string> registered_systems();
// Throws ConfigError for unknown names or unsupported dimensions.
CoefficientSystem make_registered_system(const std::string& name, std::size_t dim);

}  // namespace gstab
