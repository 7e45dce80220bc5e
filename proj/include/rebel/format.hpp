#pragma once

#include <string>
#include <string_view>

namespace rebel {

/// Shortest decimal that parses back to the identical double.
std::string format_double(double value);

/// Parses the whole of `text` as a double; throws InputError otherwise.
double parse_double(std::string_view text);

}  // namespace rebel
