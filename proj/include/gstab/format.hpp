#pragma once

#include <string>

namespace gstab {

// Shortest text with 17 significant digits, '.' decimal point, no locale.
std::string format_double(double v);

}  // namespace gstab
