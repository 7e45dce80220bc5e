#include "rebel/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "rebel/error.hpp"
#include "rebel/format.hpp"

namespace rebel {
namespace {

struct Line {
  std::size_t number = 0;  ///< 1-based
  std::size_t offset = 0;  ///< byte offset of the first character
  std::string_view text;   ///< without the line terminator
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0, number = 1;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view body = text.substr(start, end - start);
    if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
    lines.push_back({number++, start, body});
    start = end + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) { return trim(s).empty(); }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool is_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ptr == s.data() + s.size() && ec != std::errc::invalid_argument;
}

std::string where(std::size_t row, std::size_t column) {
  return "line " + std::to_string(row) + ", column " + std::to_string(column);
}

double parse_feature(std::string_view field, std::size_t row, std::size_t column) {
  double v = 0.0;
  try {
    v = parse_double(field);
  } catch (const InputError&) {
    throw InputError(where(row, column) + ": '" + std::string(field) + "' is not a representable number");
  }
  if (!std::isfinite(v)) throw InputError(where(row, column) + ": non-finite value '" + std::string(field) + "'");
  return v;
}

std::vector<Line> content_lines(std::string_view text) {
  std::vector<Line> lines = split_lines(text);
  std::erase_if(lines, [](const Line& l) { return blank(l.text); });
  return lines;
}

// Drops a header line when any of the given columns is not numeric.
void skip_header(std::vector<Line>& lines, std::size_t label_column) {
  if (lines.empty()) return;
  const auto fields = split_fields(lines.front().text);
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (c == label_column) continue;
    if (!is_number(fields[c])) {
      lines.erase(lines.begin());
      return;
    }
  }
}

std::optional<long long> as_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Line-oriented reader for the model format. Tokens are separated by single
// spaces; every error reports the byte offset where it was found.
class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : text_(text) {}

  struct Token {
    std::size_t offset;
    std::string_view text;
  };

  std::size_t offset() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ >= text_.size(); }

  [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw ParseError(at, what); }

  std::vector<Token> line() {
    if (at_end()) fail(pos_, "unexpected end of file");
    const std::size_t start = pos_;
    const std::size_t end = text_.find('\n', start);
    if (end == std::string_view::npos) fail(text_.size(), "missing newline at end of line");
    pos_ = end + 1;
    std::vector<Token> tokens;
    std::size_t t = start;
    while (true) {
      const std::size_t space = text_.find(' ', t);
      const std::size_t stop = (space == std::string_view::npos || space > end) ? end : space;
      if (stop == t) fail(t, "empty field");
      tokens.push_back({t, text_.substr(t, stop - t)});
      if (stop == end) break;
      t = stop + 1;
    }
    return tokens;
  }

  // A line "<key> <rest of line>", returning the raw remainder.
  std::string_view keyed_rest(std::string_view key) {
    if (at_end()) fail(pos_, "unexpected end of file");
    const std::size_t start = pos_;
    const std::size_t end = text_.find('\n', start);
    if (end == std::string_view::npos) fail(text_.size(), "missing newline at end of line");
    const std::string_view body = text_.substr(start, end - start);
    if (body.substr(0, key.size()) != key || body.size() <= key.size() || body[key.size()] != ' ')
      fail(start, "expected '" + std::string(key) + " <value>'");
    pos_ = end + 1;
    return body.substr(key.size() + 1);
  }

  std::vector<Token> keyed(std::string_view key, std::size_t values) {
    auto tokens = line();
    if (tokens.front().text != key) fail(tokens.front().offset, "expected '" + std::string(key) + "'");
    if (tokens.size() != values + 1)
      fail(tokens.front().offset, "'" + std::string(key) + "' needs " + std::to_string(values) + " value(s), got " +
                                      std::to_string(tokens.size() - 1));
    return tokens;
  }

  std::uint64_t unsigned_value(const Token& t, int base = 10) const {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v, base);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      fail(t.offset, "'" + std::string(t.text) + "' is not an unsigned integer");
    return v;
  }

  double double_value(const Token& t) const {
    double v = 0.0;
    try {
      v = parse_double(t.text);
    } catch (const InputError&) {
      fail(t.offset, "'" + std::string(t.text) + "' is not a number");
    }
    if (!std::isfinite(v)) fail(t.offset, "non-finite value");
    return v;
  }

  std::size_t keyed_count(std::string_view key, std::uint64_t limit) {
    const auto tokens = keyed(key, 1);
    const auto v = unsigned_value(tokens[1]);
    if (v > limit) fail(tokens[1].offset, "'" + std::string(key) + "' exceeds " + std::to_string(limit));
    return static_cast<std::size_t>(v);
  }

  std::vector<double> keyed_doubles(std::string_view key, std::size_t count) {
    const auto tokens = keyed(key, count);
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 1; i < tokens.size(); ++i) out.push_back(double_value(tokens[i]));
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

constexpr int kMaxTreeDepth = 16;

void append_values(std::string& out, std::string_view key, std::span<const double> values) {
  out += key;
  for (double v : values) {
    out += ' ';
    out += format_double(v);
  }
  out += '\n';
}

}  // namespace

LabelSpec LabelSpec::parse(std::string_view text) {
  LabelSpec spec;
  if (text == "last") return spec;
  if (text == "first") {
    spec.kind = Kind::First;
    return spec;
  }
  if (text.starts_with("file:") && text.size() > 5) {
    spec.kind = Kind::File;
    spec.path = std::string(text.substr(5));
    return spec;
  }
  if (const auto column = as_integer(text); column && *column >= 1) {
    spec.kind = Kind::Column;
    spec.column = static_cast<std::size_t>(*column - 1);
    return spec;
  }
  throw InputError("label spec must be 'last', 'first', a 1-based column number or 'file:PATH', got '" +
                   std::string(text) + "'");
}

std::vector<std::string> order_labels(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  const bool numeric = std::all_of(tokens.begin(), tokens.end(), [](const std::string& t) { return as_integer(t); });
  if (numeric) {
    std::stable_sort(tokens.begin(), tokens.end(),
                     [](const std::string& a, const std::string& b) { return *as_integer(a) < *as_integer(b); });
  }
  return tokens;
}

Dataset parse_dataset(std::string_view text, const LabelSpec& spec, const std::vector<std::string>* known_labels,
                      std::optional<std::string_view> label_text) {
  std::vector<Line> lines = content_lines(text);
  if (lines.empty()) throw InputError("dataset is empty");

  const std::size_t columns = split_fields(lines.front().text).size();
  std::size_t label_column = columns;  // none
  switch (spec.kind) {
    case LabelSpec::Kind::Last: label_column = columns - 1; break;
    case LabelSpec::Kind::First: label_column = 0; break;
    case LabelSpec::Kind::Column:
      if (spec.column >= columns)
        throw InputError("label column " + std::to_string(spec.column + 1) + " exceeds the " +
                         std::to_string(columns) + " columns of the file");
      label_column = spec.column;
      break;
    case LabelSpec::Kind::File: break;
  }
  skip_header(lines, label_column);
  if (lines.empty()) throw InputError("dataset has a header but no rows");
  const std::size_t dims = label_column < columns ? columns - 1 : columns;
  if (dims == 0) throw InputError("dataset has no feature columns");

  Dataset data;
  data.features = Matrix(lines.size(), dims);
  std::vector<std::string> tokens;
  tokens.reserve(lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r].text);
    if (fields.size() != columns)
      throw InputError("line " + std::to_string(lines[r].number) + ": expected " + std::to_string(columns) +
                       " fields, found " + std::to_string(fields.size()));
    std::size_t j = 0;
    for (std::size_t c = 0; c < columns; ++c) {
      if (c == label_column) {
        if (fields[c].empty()) throw InputError(where(lines[r].number, c + 1) + ": empty label");
        tokens.emplace_back(fields[c]);
      } else {
        data.features(r, j++) = parse_feature(fields[c], lines[r].number, c + 1);
      }
    }
  }

  if (spec.kind == LabelSpec::Kind::File) {
    const std::string owned = label_text ? std::string() : read_file(spec.path);
    for (const Line& l : content_lines(label_text ? *label_text : std::string_view(owned)))
      tokens.emplace_back(trim(l.text));
    if (tokens.size() != lines.size())
      throw InputError("label file has " + std::to_string(tokens.size()) + " labels for " +
                       std::to_string(lines.size()) + " rows");
  }

  data.label_names = known_labels ? *known_labels : order_labels(tokens);
  std::map<std::string, ClassIndex, std::less<>> index;
  for (std::size_t k = 0; k < data.label_names.size(); ++k)
    index.emplace(data.label_names[k], static_cast<ClassIndex>(k));
  data.labels.reserve(tokens.size());
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    const auto it = index.find(tokens[r]);
    if (it == index.end()) throw InputError("row " + std::to_string(r + 1) + ": unknown label '" + tokens[r] + "'");
    data.labels.push_back(it->second);
  }
  data.num_classes = static_cast<int>(data.label_names.size());
  data.validate();
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, const LabelSpec& spec,
                     const std::vector<std::string>* known_labels) {
  const std::string text = read_file(path);
  try {
    return parse_dataset(text, spec, known_labels);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Matrix parse_features(std::string_view text) {
  std::vector<Line> lines = content_lines(text);
  if (lines.empty()) throw InputError("feature file is empty");
  const std::size_t columns = split_fields(lines.front().text).size();
  skip_header(lines, columns);
  if (lines.empty()) throw InputError("feature file has a header but no rows");
  Matrix m(lines.size(), columns);
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r].text);
    if (fields.size() != columns)
      throw InputError("line " + std::to_string(lines[r].number) + ": expected " + std::to_string(columns) +
                       " fields, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < columns; ++c) m(r, c) = parse_feature(fields[c], lines[r].number, c + 1);
  }
  return m;
}

Matrix load_features(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_features(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (std::size_t n = 0; n < data.size(); ++n) {
    for (double v : data.sample(n)) out << format_double(v) << ',';
    const auto y = static_cast<std::size_t>(data.labels[n]);
    if (y < data.label_names.size())
      out << data.label_names[y];
    else
      out << y + 1;
    out << '\n';
  }
}

CostMatrix parse_cost_matrix(std::string_view text) {
  const std::vector<Line> lines = content_lines(text);
  if (lines.empty()) throw InputError("cost matrix file is empty");
  Matrix m(lines.size(), lines.size());
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split_fields(lines[r].text);
    if (fields.size() != lines.size())
      throw InputError("line " + std::to_string(lines[r].number) + ": expected " + std::to_string(lines.size()) +
                       " costs, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      try {
        m(r, c) = parse_double(fields[c]);
      } catch (const InputError&) {
        throw InputError(where(lines[r].number, c + 1) + ": '" + std::string(fields[c]) + "' is not a number");
      }
    }
  }
  return CostMatrix(std::move(m));
}

CostMatrix load_cost_matrix(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_cost_matrix(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string format_cost_matrix(const CostMatrix& costs) {
  std::string out;
  for (ClassIndex y = 0; y < costs.num_classes(); ++y) {
    const auto row = costs.row(y);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out += ',';
      out += format_double(row[k]);
    }
    out += '\n';
  }
  return out;
}

std::string serialize_model(const StrongClassifier& model) {
  const auto k_count = static_cast<std::size_t>(model.num_classes);
  if (model.num_classes < 2) throw InputError("model needs at least 2 classes");
  if (model.a0.size() != k_count) throw InputError("model a0 has the wrong size");
  if (!model.label_names.empty() && model.label_names.size() != k_count)
    throw InputError("model has " + std::to_string(model.label_names.size()) + " label names for " +
                     std::to_string(k_count) + " classes");

  std::string out = "rebel-model " + std::to_string(kModelFormatVersion) + "\n";
  out += "classes " + std::to_string(model.num_classes) + "\n";
  out += "features " + std::to_string(model.num_features) + "\n";
  out += "labels " + std::to_string(model.label_names.size()) + "\n";
  for (const auto& name : model.label_names) {
    if (name.empty() || name.find_first_of("\r\n") != std::string::npos)
      throw InputError("label names must be non-empty single-line strings");
    out += "label " + name + "\n";
  }
  char fingerprint[17];
  std::snprintf(fingerprint, sizeof fingerprint, "%016llx",
                static_cast<unsigned long long>(model.config_fingerprint));
  out += "fingerprint ";
  out += fingerprint;
  out += '\n';
  append_values(out, "a0", model.a0);
  out += "rounds " + std::to_string(model.rounds.size()) + "\n";
  for (const auto& round : model.rounds) {
    if (round.vote.size() != k_count) throw InputError("round vote has the wrong size");
    out += "tree " + std::to_string(round.learner.depth()) + "\n";
    for (const auto& node : round.learner.nodes()) {
      out += "node " + std::to_string(node.feature) + " " + format_double(node.threshold) + " " +
             std::to_string(node.polarity) + "\n";
    }
    append_values(out, "vote", round.vote);
  }
  out += "end\n";
  return out;
}

StrongClassifier parse_model(std::string_view text) {
  ModelReader in(text);
  {
    const auto header = in.line();
    if (header.front().text != "rebel-model" || header.size() != 2) in.fail(0, "not a rebel model file");
    const auto version = in.unsigned_value(header[1]);
    if (version != static_cast<std::uint64_t>(kModelFormatVersion))
      throw UnsupportedVersionError("unsupported model format version " + std::to_string(version) +
                                    " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
  }

  const std::size_t classes_at = in.offset();
  const std::size_t classes = in.keyed_count("classes", 1u << 20);
  if (classes < 2) in.fail(classes_at, "a model needs at least 2 classes");
  StrongClassifier model(static_cast<int>(classes), in.keyed_count("features", 1u << 30));

  const std::size_t labels_at = in.offset();
  const std::size_t labels = in.keyed_count("labels", classes);
  if (labels != 0 && labels != classes) in.fail(labels_at, "label count must be 0 or the class count");
  for (std::size_t k = 0; k < labels; ++k) model.label_names.emplace_back(in.keyed_rest("label"));

  {
    const auto tokens = in.keyed("fingerprint", 1);
    if (tokens[1].text.size() != 16) in.fail(tokens[1].offset, "fingerprint must be 16 hex digits");
    model.config_fingerprint = in.unsigned_value(tokens[1], 16);
  }
  model.a0 = in.keyed_doubles("a0", classes);

  const std::size_t rounds = in.keyed_count("rounds", 1u << 26);
  model.rounds.reserve(rounds);
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t depth_at = in.offset();
    const std::size_t depth = in.keyed_count("tree", kMaxTreeDepth);
    if (depth < 1) in.fail(depth_at, "tree depth must be at least 1");
    std::vector<Stump> nodes;
    const std::size_t node_count = (std::size_t{1} << depth) - 1;
    nodes.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) {
      const auto tokens = in.keyed("node", 3);
      Stump s;
      s.feature = static_cast<std::size_t>(in.unsigned_value(tokens[1]));
      if (s.feature >= model.num_features) in.fail(tokens[1].offset, "feature index out of range");
      s.threshold = in.double_value(tokens[2]);
      if (tokens[3].text == "1")
        s.polarity = 1;
      else if (tokens[3].text == "-1")
        s.polarity = -1;
      else
        in.fail(tokens[3].offset, "polarity must be 1 or -1");
      nodes.push_back(s);
    }
    Round round{Tree(static_cast<int>(depth), std::move(nodes)), in.keyed_doubles("vote", classes)};
    model.rounds.push_back(std::move(round));
  }

  const auto end = in.line();
  if (end.size() != 1 || end.front().text != "end") in.fail(end.front().offset, "expected 'end'");
  if (!in.at_end()) in.fail(in.offset(), "trailing content after 'end'");
  return model;
}

void save_model(const std::filesystem::path& path, const StrongClassifier& model) {
  write_file(path, serialize_model(model));
}

StrongClassifier load_model(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return parse_model(text);
  } catch (const ParseError& e) {
    throw ParseError(e.offset(), path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "round,loss,loss_excess,gamma,phi,train_error,train_risk,features\n";
  out << "0," << format_double(trace.initial_loss) << ',' << format_double(trace.initial_loss - trace.l_star)
      << ",,," << format_double(trace.initial_error) << ',' << format_double(trace.initial_risk) << ",\n";
  for (const auto& r : trace.rounds) {
    out << r.round << ',' << format_double(r.loss) << ',' << format_double(r.loss_excess) << ',' << opt(r.gamma)
        << ',' << opt(r.phi) << ',' << format_double(r.train_error) << ',' << format_double(r.train_risk) << ','
        << r.features << '\n';
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace rebel
