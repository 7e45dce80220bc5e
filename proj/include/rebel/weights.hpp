#pragma once

#include <cstddef>
#include <span>

#include "rebel/matrix.hpp"

namespace rebel {

/// Multi-class weights w+ = c+ * exp(H) and w- = c- * exp(-H), one K-vector
/// pair per sample. Owned by the trainer, read-shared during a search.
struct WeightState {
  Matrix plus;
  Matrix minus;

  std::size_t size() const noexcept { return plus.rows(); }
  std::size_t num_classes() const noexcept { return plus.cols(); }
};

}  // namespace rebel
