#include "rebel/dataset.hpp"

#include <cmath>

#include "rebel/error.hpp"

namespace rebel {

void Dataset::validate() const {
  if (labels.empty()) throw InputError("dataset is empty");
  if (features.rows() != labels.size())
    throw InputError("feature rows (" + std::to_string(features.rows()) + ") != labels (" +
                     std::to_string(labels.size()) + ")");
  if (features.cols() == 0) throw InputError("dataset has no features");
  if (num_classes < 1) throw InputError("dataset has no classes");
  for (std::size_t n = 0; n < size(); ++n) {
    if (labels[n] < 0 || labels[n] >= num_classes)
      throw InputError("label out of range at row " + std::to_string(n));
    const auto row = features.row(n);
    for (std::size_t j = 0; j < row.size(); ++j)
      if (!std::isfinite(row[j]))
        throw InputError("non-finite feature at row " + std::to_string(n) + ", column " +
                         std::to_string(j));
  }
  if (!label_names.empty() && label_names.size() != static_cast<std::size_t>(num_classes))
    throw InputError("label name count does not match class count");
}

}  // namespace rebel
