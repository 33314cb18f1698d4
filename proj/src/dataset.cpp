#include "auxmi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "auxmi/error.hpp"

namespace auxmi {

namespace {

constexpr double kMissingValue = std::numeric_limits<double>::quiet_NaN();

// Splits one CSV record. Handles quoted fields with doubled quotes; a quoted
// field may not span lines (no text variables are supported).
std::vector<std::string> split_record(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
  fields.push_back(std::move(field));
  return fields;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

// ---------------------------------------------------------------- VariableKind

VariableKind VariableKind::ordinal(std::vector<double> levels) {
  if (levels.size() < 2) throw ConfigError("ordinal variable needs at least 2 levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i])) throw ConfigError("ordinal level codes must be finite");
    for (std::size_t j = 0; j < i; ++j)
      if (levels[i] == levels[j]) throw ConfigError("ordinal level codes must be distinct");
  }
  return VariableKind(KindTag::Ordinal, std::move(levels));
}

bool VariableKind::accepts(double value) const noexcept {
  if (!std::isfinite(value)) return false;
  if (tag_ == KindTag::Continuous) return true;
  return rank_of(value) >= 0;
}

int VariableKind::rank_of(double code) const noexcept {
  for (std::size_t i = 0; i < levels_.size(); ++i)
    if (levels_[i] == code) return static_cast<int>(i);
  return -1;
}

std::string VariableKind::describe() const {
  switch (tag_) {
    case KindTag::Continuous:
      return "continuous";
    case KindTag::Binary:
      return "binary";
    case KindTag::Ordinal: {
      std::string s = "ordinal(";
      for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (i) s += ",";
        s += format_double(levels_[i]);
      }
      return s + ")";
    }
  }
  return "unknown";
}

// --------------------------------------------------------------------- Dataset

Dataset::Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> values,
                 std::vector<Mask> observed)
    : variables_(std::move(variables)), values_(std::move(values)), observed_(std::move(observed)) {
  n_rows_ = values_.empty() ? 0 : values_.front().size();
  validate();
  for (std::size_t c = 0; c < values_.size(); ++c)
    for (std::size_t r = 0; r < n_rows_; ++r)
      if (!observed_[c][r]) values_[c][r] = kMissingValue;
}

Dataset::Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> values)
    : Dataset(std::move(variables), values,
              std::vector<Mask>(values.size(), Mask(values.empty() ? 0 : values.front().size(), 1))) {}

void Dataset::validate() const {
  if (values_.size() != variables_.size() || observed_.size() != variables_.size())
    throw DataError("dataset: column count does not match variable count");
  std::unordered_set<std::string> names;
  for (std::size_t c = 0; c < variables_.size(); ++c) {
    const auto& var = variables_[c];
    if (var.name.empty()) throw DataError("dataset: empty variable name");
    if (!names.insert(var.name).second) throw DataError("dataset: duplicate variable '" + var.name + "'");
    if (values_[c].size() != n_rows_ || observed_[c].size() != n_rows_)
      throw DataError("dataset: column '" + var.name + "' has length " + std::to_string(values_[c].size()) +
                      ", expected " + std::to_string(n_rows_));
    for (std::size_t r = 0; r < n_rows_; ++r) {
      if (observed_[c][r] && !var.kind.accepts(values_[c][r]))
        throw DataError("dataset: row " + std::to_string(r + 1) + ", column '" + var.name + "': value " +
                        format_double(values_[c][r]) + " is not valid for " + var.kind.describe());
    }
  }
}

bool Dataset::has_variable(const std::string& name) const noexcept {
  return std::any_of(variables_.begin(), variables_.end(), [&](const Variable& v) { return v.name == name; });
}

std::size_t Dataset::index_of(const std::string& name) const {
  for (std::size_t c = 0; c < variables_.size(); ++c)
    if (variables_[c].name == name) return c;
  throw DataError("unknown variable '" + name + "'");
}

std::size_t Dataset::missing_count(std::size_t col) const {
  const auto& m = observed_.at(col);
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{0}));
}

bool Dataset::is_complete() const {
  for (std::size_t c = 0; c < n_vars(); ++c)
    if (missing_count(c) > 0) return false;
  return true;
}

Dataset Dataset::with_column(std::size_t col, std::vector<double> values, Mask observed) const {
  auto vals = values_;
  auto obs = observed_;
  vals.at(col) = std::move(values);
  obs.at(col) = std::move(observed);
  return Dataset(variables_, std::move(vals), std::move(obs));
}

Dataset Dataset::with_added_column(Variable variable, std::vector<double> values, Mask observed) const {
  auto vars = variables_;
  auto vals = values_;
  auto obs = observed_;
  vars.push_back(std::move(variable));
  vals.push_back(std::move(values));
  obs.push_back(std::move(observed));
  Dataset out;
  out.n_rows_ = vals.front().size();
  out.variables_ = std::move(vars);
  out.values_ = std::move(vals);
  out.observed_ = std::move(obs);
  out.validate();
  if (out.n_rows_ != n_rows_ && n_vars() > 0) throw DataError("dataset: appended column has wrong length");
  for (std::size_t r = 0; r < out.n_rows_; ++r)
    if (!out.observed_.back()[r]) out.values_.back()[r] = kMissingValue;
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n_rows_ = rows.size();
  out.variables_ = variables_;
  out.values_.resize(n_vars());
  out.observed_.resize(n_vars());
  for (std::size_t c = 0; c < n_vars(); ++c) {
    out.values_[c].reserve(rows.size());
    out.observed_[c].reserve(rows.size());
    for (std::size_t r : rows) {
      out.values_[c].push_back(values_[c].at(r));
      out.observed_[c].push_back(observed_[c][r]);
    }
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.n_rows_ != b.n_rows_ || a.variables_ != b.variables_ || a.observed_ != b.observed_) return false;
  for (std::size_t c = 0; c < a.n_vars(); ++c)
    for (std::size_t r = 0; r < a.n_rows_; ++r)
      if (a.observed_[c][r] && a.values_[c][r] != b.values_[c][r]) return false;
  return true;
}

// ---------------------------------------------------------------- ModelFormula

void ModelFormula::validate(const Dataset& d) const {
  d.index_of(response);
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    d.index_of(predictors[i]);
    if (predictors[i] == response)
      throw ConfigError("formula: response '" + response + "' listed as a predictor");
    for (std::size_t j = 0; j < i; ++j)
      if (predictors[i] == predictors[j]) throw ConfigError("formula: duplicate predictor '" + predictors[i] + "'");
  }
}

std::vector<std::string> ModelFormula::variables() const {
  std::vector<std::string> v{response};
  v.insert(v.end(), predictors.begin(), predictors.end());
  return v;
}

// ------------------------------------------------------------------------ CSV

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Dataset read_csv(std::istream& in, const std::vector<Variable>& specs, const CsvOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw DataError("csv: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_record(line, line_no);
  if (header.size() != specs.size()) {
    throw DataError("csv: header has " + std::to_string(header.size()) + " columns, expected " +
                    std::to_string(specs.size()));
  }
  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (trim(header[c]) != specs[c].name)
      throw DataError("csv: header column " + std::to_string(c + 1) + " is '" + trim(header[c]) + "', expected '" +
                      specs[c].name + "'");
  }

  std::vector<std::vector<double>> values(specs.size());
  std::vector<Mask> observed(specs.size());
  std::size_t row = 0;
  while (next_line()) {
    if (trim(line).empty()) continue;
    ++row;
    auto fields = split_record(line, line_no);
    if (fields.size() != specs.size())
      throw DataError("csv: row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(specs.size()));
    for (std::size_t c = 0; c < specs.size(); ++c) {
      std::string cell = trim(fields[c]);
      if (cell == options.missing_token) {
        values[c].push_back(kMissingValue);
        observed[c].push_back(0);
        continue;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
        throw DataError("csv: row " + std::to_string(row) + ", column '" + specs[c].name + "': cannot parse '" +
                        cell + "' as a number");
      if (!specs[c].kind.accepts(v))
        throw DataError("csv: row " + std::to_string(row) + ", column '" + specs[c].name + "': code " + cell +
                        " is not valid for " + specs[c].kind.describe());
      values[c].push_back(v);
      observed[c].push_back(1);
    }
  }
  return Dataset(specs, std::move(values), std::move(observed));
}

std::vector<std::string> csv_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> names;
  for (auto& field : split_record(line, 1)) names.push_back(trim(field));
  return names;
}

Dataset load_csv_inferred(const std::filesystem::path& path, const CsvOptions& options) {
  std::vector<Variable> specs;
  for (auto& name : csv_header(path)) specs.push_back({std::move(name), VariableKind::continuous()});
  Dataset raw = load_csv(path, specs, options);
  for (std::size_t c = 0; c < raw.n_vars(); ++c) {
    bool binary = raw.missing_count(c) < raw.n_rows();
    auto values = raw.column(c);
    for (std::size_t r = 0; r < raw.n_rows() && binary; ++r)
      if (raw.is_observed(c, r) && values[r] != 0.0 && values[r] != 1.0) binary = false;
    if (binary) specs[c].kind = VariableKind::binary();
  }
  std::vector<std::vector<double>> values;
  std::vector<Mask> observed;
  for (std::size_t c = 0; c < raw.n_vars(); ++c) {
    auto col = raw.column(c);
    values.emplace_back(col.begin(), col.end());
    observed.push_back(raw.observed(c));
  }
  return Dataset(std::move(specs), std::move(values), std::move(observed));
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<Variable>& specs, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("csv: cannot open '" + path.string() + "'");
  return read_csv(in, specs, options);
}

void write_csv(std::ostream& out, const Dataset& d, const CsvOptions& options) {
  for (std::size_t c = 0; c < d.n_vars(); ++c) out << (c ? "," : "") << d.variable(c).name;
  out << '\n';
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (std::size_t c = 0; c < d.n_vars(); ++c) {
      if (c) out << ',';
      if (d.is_observed(c, r))
        out << format_double(d.column(c)[r]);
      else
        out << options.missing_token;
    }
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Dataset& d, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw DataError("csv: cannot write '" + path.string() + "'");
  write_csv(out, d, options);
  if (!out) throw DataError("csv: write failed for '" + path.string() + "'");
}

// ------------------------------------------------------------ missing values

double missing_fraction(const Dataset& d, const std::string& var) {
  std::size_t col = d.index_of(var);
  if (d.n_rows() == 0) return 0.0;
  return static_cast<double>(d.missing_count(col)) / static_cast<double>(d.n_rows());
}

Dataset listwise_complete(const Dataset& d, const std::vector<std::string>& vars) {
  std::vector<std::size_t> cols;
  cols.reserve(vars.size());
  for (const auto& v : vars) cols.push_back(d.index_of(v));
  std::vector<std::size_t> keep;
  keep.reserve(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    bool ok = std::all_of(cols.begin(), cols.end(), [&](std::size_t c) { return d.is_observed(c, r); });
    if (ok) keep.push_back(r);
  }
  return d.select_rows(keep);
}

}  // namespace auxmi
