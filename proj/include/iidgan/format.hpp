#pragma once

#include <string>

namespace iidgan {

/// Shortest decimal text that parses back to exactly `v` ('.' decimal
/// separator regardless of locale).
std::string format_double(double v);

}  // namespace iidgan
