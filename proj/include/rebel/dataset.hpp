#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rebel/matrix.hpp"

namespace rebel {

/// Class labels are 0-based inside the library (0..K-1). Files and the CLI
/// use the original label tokens; see io.hpp for the mapping.
using ClassIndex = int;

/// N samples of d finite features with labels in 0..K-1.
struct Dataset {
  Matrix features;
  std::vector<ClassIndex> labels;
  int num_classes = 0;
  /// Original label tokens, index = class. Empty when built in memory.
  std::vector<std::string> label_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }
  std::span<const double> sample(std::size_t n) const { return features.row(n); }

  /// Throws InputError when any invariant fails.
  void validate() const;
};

}  // namespace rebel
