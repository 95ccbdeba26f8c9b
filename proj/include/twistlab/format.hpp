#pragma once

#include <string>
#include <string_view>

namespace twistlab {

/// Shortest decimal text that parses back to the same double; "nan" for NaN.
std::string format_real(double v);

/// Inverse of format_real. Throws InvalidArgument on malformed text.
double parse_real(std::string_view s);

}  // namespace twistlab
