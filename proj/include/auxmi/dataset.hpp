#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace auxmi {

enum class KindTag { Continuous, Binary, Ordinal };

/// Measurement type of a variable. Binary columns hold exactly {0, 1};
/// ordinal columns hold one of `levels()`, whose list order is the ordering.
class VariableKind {
 public:
  static VariableKind continuous() { return VariableKind(KindTag::Continuous, {}); }
  static VariableKind binary() { return VariableKind(KindTag::Binary, {0.0, 1.0}); }
  /// Throws ConfigError unless there are at least two distinct levels.
  static VariableKind ordinal(std::vector<double> levels);

  KindTag tag() const noexcept { return tag_; }
  const std::vector<double>& levels() const noexcept { return levels_; }
  std::size_t level_count() const noexcept { return levels_.size(); }

  bool accepts(double value) const noexcept;
  /// Zero-based position of `code` in the level list, or -1.
  int rank_of(double code) const noexcept;

  std::string describe() const;

  friend bool operator==(const VariableKind&, const VariableKind&) = default;

 private:
  VariableKind(KindTag tag, std::vector<double> levels) : tag_(tag), levels_(std::move(levels)) {}

  KindTag tag_;
  std::vector<double> levels_;
};

struct Variable {
  std::string name;
  VariableKind kind;

  friend bool operator==(const Variable&, const Variable&) = default;
};

using Mask = std::vector<std::uint8_t>;  // 1 = observed, 0 = missing

/// Column-major table with an explicit observation mask. Immutable after
/// construction; every transformation returns a new Dataset. Cells that are
/// masked out store NaN so an accidental read cannot pass for data.
class Dataset {
 public:
  Dataset() = default;
  /// Validates column lengths, unique names and declared codes at observed cells.
  Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> values,
          std::vector<Mask> observed);
  /// Fully observed dataset.
  Dataset(std::vector<Variable> variables, std::vector<std::vector<double>> values);

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_vars() const noexcept { return variables_.size(); }

  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const Variable& variable(std::size_t col) const { return variables_.at(col); }
  bool has_variable(const std::string& name) const noexcept;
  /// Throws DataError for unknown names.
  std::size_t index_of(const std::string& name) const;

  std::span<const double> column(std::size_t col) const { return values_.at(col); }
  std::span<const double> column(const std::string& name) const { return column(index_of(name)); }
  const Mask& observed(std::size_t col) const { return observed_.at(col); }
  const Mask& observed(const std::string& name) const { return observed(index_of(name)); }

  bool is_observed(std::size_t col, std::size_t row) const { return observed_.at(col).at(row) != 0; }
  std::size_t missing_count(std::size_t col) const;
  bool is_complete() const;

  /// Copy with column `col` replaced.
  Dataset with_column(std::size_t col, std::vector<double> values, Mask observed) const;
  /// Copy with an extra column appended.
  Dataset with_added_column(Variable variable, std::vector<double> values, Mask observed) const;
  /// Rows in the given order.
  Dataset select_rows(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&);

 private:
  void validate() const;

  std::size_t n_rows_ = 0;
  std::vector<Variable> variables_;
  std::vector<std::vector<double>> values_;
  std::vector<Mask> observed_;
};

/// Regression of `response` on `predictors` (an intercept is implied by the
/// linear and logistic engines).
struct ModelFormula {
  std::string response;
  std::vector<std::string> predictors;

  /// Throws ConfigError on duplicates or response-as-predictor, DataError on unknown names.
  void validate(const Dataset& d) const;
  std::vector<std::string> variables() const;
};

struct CsvOptions {
  std::string missing_token = "NA";
};

/// Reads a CSV whose header must list exactly the names in `specs`, in order.
Dataset load_csv(const std::filesystem::path& path, const std::vector<Variable>& specs,
                 const CsvOptions& options = {});
Dataset read_csv(std::istream& in, const std::vector<Variable>& specs, const CsvOptions& options = {});

/// Column names from the header row of a CSV file.
std::vector<std::string> csv_header(const std::filesystem::path& path);

/// Loads a CSV without a schema: columns whose observed values are all 0 or 1
/// become binary, the rest continuous.
Dataset load_csv_inferred(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes values with shortest round-trip formatting; missing cells as the token.
void write_csv(std::ostream& out, const Dataset& d, const CsvOptions& options = {});
void save_csv(const std::filesystem::path& path, const Dataset& d, const CsvOptions& options = {});

double missing_fraction(const Dataset& d, const std::string& var);

/// Rows fully observed on `vars`, in original order.
Dataset listwise_complete(const Dataset& d, const std::vector<std::string>& vars);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace auxmi
