#include "rebel/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace rebel {

unsigned default_workers() {
  const char* env = std::getenv("REBEL_WORKERS");
  if (env == nullptr) return 1;
  unsigned value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end || value == 0) return 1;
  return value;
}

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace rebel
