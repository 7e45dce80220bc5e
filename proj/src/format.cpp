#include "rebel/format.hpp"

#include <array>
#include <charconv>

#include "rebel/error.hpp"

namespace rebel {

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw InputError("cannot format value");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view text) {
  // from_chars rejects a leading '+', which CSV writers sometimes emit.
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end)
    throw InputError("not a number: '" + std::string(text) + "'");
  return value;
}

}  // namespace rebel
