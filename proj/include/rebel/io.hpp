#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rebel/boost.hpp"
#include "rebel/costs.hpp"
#include "rebel/dataset.hpp"
#include "rebel/model.hpp"

namespace rebel {

inline constexpr int kModelFormatVersion = 1;

/// Where the labels of a dataset CSV live.
///   "last" / "first"  a column of the CSV
///   "<n>"              1-based column number
///   "file:<path>"      one label per line in a separate file
struct LabelSpec {
  enum class Kind { Last, First, Column, File };
  Kind kind = Kind::Last;
  std::size_t column = 0;  ///< 0-based, Kind::Column only
  std::filesystem::path path;

  static LabelSpec parse(std::string_view text);
};

/// Distinct tokens in class order. All-integer tokens sort numerically,
/// anything else lexicographically.
std::vector<std::string> order_labels(std::vector<std::string> tokens);

/// Comma-separated rows. A first line whose feature fields are not all
/// numbers is a header and is skipped; blank lines are ignored. Features
/// must be finite. With `known_labels` the class order is fixed and any other
/// token is rejected; otherwise it comes from order_labels.
Dataset parse_dataset(std::string_view text, const LabelSpec& spec,
                      const std::vector<std::string>* known_labels = nullptr,
                      std::optional<std::string_view> label_text = std::nullopt);
Dataset load_dataset(const std::filesystem::path& path, const LabelSpec& spec,
                     const std::vector<std::string>* known_labels = nullptr);

/// A features-only CSV (no label column).
Matrix parse_features(std::string_view text);
Matrix load_features(const std::filesystem::path& path);

/// Features then the label token, no header.
void write_dataset(std::ostream& out, const Dataset& data);

/// K rows of K comma-separated values, no header.
CostMatrix parse_cost_matrix(std::string_view text);
CostMatrix load_cost_matrix(const std::filesystem::path& path);
std::string format_cost_matrix(const CostMatrix& costs);

/// Versioned text form; parse_model(serialize_model(m)) == m and the
/// serialization of the parsed model is byte-identical.
std::string serialize_model(const StrongClassifier& model);
/// Throws UnsupportedVersionError on another format version and ParseError
/// (with the byte offset) on malformed input.
StrongClassifier parse_model(std::string_view text);
void save_model(const std::filesystem::path& path, const StrongClassifier& model);
StrongClassifier load_model(const std::filesystem::path& path);

/// round,loss,loss_excess,gamma,phi,train_error,train_risk,features; round 0
/// is the state before the first learner.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace rebel
