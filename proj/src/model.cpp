#include "rebel/model.hpp"

#include <algorithm>

#include "rebel/error.hpp"

namespace rebel {

StrongClassifier::StrongClassifier(int classes, std::size_t features)
    : num_classes(classes), num_features(features), a0(static_cast<std::size_t>(classes), 0.0) {}

void StrongClassifier::scores(std::span<const double> x, std::span<double> out) const {
  if (x.size() != num_features)
    throw InputError("sample has " + std::to_string(x.size()) + " features, model expects " +
                     std::to_string(num_features));
  std::copy(a0.begin(), a0.end(), out.begin());
  for (const auto& r : rounds) {
    const double f = r.learner(x);
    for (std::size_t k = 0; k < r.vote.size(); ++k) out[k] += f * r.vote[k];
  }
}

std::vector<double> StrongClassifier::scores(std::span<const double> x) const {
  std::vector<double> out(static_cast<std::size_t>(num_classes));
  scores(x, out);
  return out;
}

ClassIndex StrongClassifier::predict(std::span<const double> x) const { return argmax_class(scores(x)); }

StrongClassifier StrongClassifier::prefix(std::size_t count) const {
  StrongClassifier out = *this;
  if (count < out.rounds.size()) out.rounds.erase(out.rounds.begin() + static_cast<std::ptrdiff_t>(count), out.rounds.end());
  return out;
}

ClassIndex argmax_class(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return static_cast<ClassIndex>(best);
}

}  // namespace rebel
