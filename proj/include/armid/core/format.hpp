#pragma once

#include <string>
#include <string_view>

namespace armid {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse: the whole of `text` must be a finite or infinite double.
bool parse_double(std::string_view text, double& out);

}  // namespace armid
