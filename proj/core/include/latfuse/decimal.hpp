#pragma once

#include <string>
#include <string_view>

namespace latfuse {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full decimal string; throws FormatError on junk or trailing text.
double parse_double(std::string_view text);

}  // namespace latfuse
