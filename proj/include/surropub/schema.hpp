#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "surropub/error.hpp"

namespace surropub {

enum class Dtype { IntegerCoded, StringCoded };

/// One categorical variable: ordered (code, meaning) pairs define its domain.
/// The value order is canonical; everything downstream (marginal cells, CPT
/// rows, binarization splits) indexes values by their position here.
struct VariableSpec {
  std::string name;
  std::string description;
  Dtype dtype = Dtype::IntegerCoded;
  std::vector<std::pair<std::string, std::string>> values;  // (code, meaning)

  std::size_t cardinality() const { return values.size(); }
  std::optional<std::size_t> index_of(std::string_view code) const;
  const std::string& code(std::size_t value_index) const { return values.at(value_index).first; }
};

struct DomainSize {
  std::uint64_t value = 1;
  bool saturated = false;  // product overflowed uint64
};

class Schema {
public:
  Schema(std::vector<VariableSpec> variables, std::string topic);

  /// Parses a schema document: a JSON object mapping variable name to
  /// {description, dtype, values: {code: meaning}}, in document order.
  /// An optional "_topic" string entry labels the dataset domain.
  /// Continuous variables (range instead of values) are rejected.
  static Schema parse(const std::string& text);
  std::string serialize() const;

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const VariableSpec& variable(std::size_t i) const { return variables_.at(i); }
  std::size_t variable_count() const { return variables_.size(); }
  const std::string& topic() const { return topic_; }

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t require(std::string_view name) const;  // throws if absent

  DomainSize domain_size() const;

  bool operator==(const Schema& other) const;

private:
  std::vector<VariableSpec> variables_;
  std::string topic_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

SchemaPtr load_schema_file(const std::string& path);

/// A schema-valid row, stored as value indices into each variable's domain.
struct Record {
  std::vector<std::uint16_t> cells;
  bool operator==(const Record&) const = default;
};

enum class DatasetRole { Private, Public, Surrogate };
enum class Split { None, Train, Valid, Test };

std::string_view to_string(DatasetRole role);
std::string_view to_string(Split split);

/// Immutable-after-construction record multiset with optional split labels.
class Dataset {
public:
  explicit Dataset(SchemaPtr schema, DatasetRole role = DatasetRole::Surrogate);

  const SchemaPtr& schema_ptr() const { return schema_; }
  const Schema& schema() const { return *schema_; }
  DatasetRole role() const { return role_; }

  void add(Record record);  // record must already be schema-valid
  void reserve(std::size_t n) { records_.reserve(n); }

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }
  const Record& record(std::size_t i) const { return records_.at(i); }
  const std::string& code_at(std::size_t row, std::size_t col) const;

  const std::vector<Split>& splits() const { return splits_; }
  void set_splits(std::vector<Split> splits);
  Dataset subset(Split split) const;
  std::size_t count_split(Split split) const;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
  /// Strict reader: throws listing every invalid row.
  static Dataset read_csv(SchemaPtr schema, std::istream& in,
                          DatasetRole role = DatasetRole::Surrogate);
  static Dataset read_csv_file(SchemaPtr schema, const std::string& path,
                               DatasetRole role = DatasetRole::Surrogate);
  void write_csv_file(const std::string& path) const;

private:
  SchemaPtr schema_;
  DatasetRole role_;
  std::vector<Record> records_;
  std::vector<Split> splits_;
};

/// Per-row validation. On rejection `problems` names every offending column.
struct RowValidation {
  std::optional<Record> record;
  std::vector<std::string> problems;
  bool ok() const { return record.has_value(); }
};

RowValidation validate_record(const Schema& schema, std::span<const std::string> tokens);
std::vector<std::string> split_csv_line(std::string_view line);

/// Labels records train/valid/test at 72:8:20 with largest-remainder
/// rounding; assignment is a seeded shuffle, so proportions are exact and
/// deterministic per seed. Requires at least 10 records.
Dataset split_dataset(const Dataset& data, std::uint64_t seed);

/// Downsamples the majority class of a binary target to the minority count,
/// uniformly without replacement. Split labels are dropped (resplit after).
Dataset balance_by_downsampling(const Dataset& data, std::string_view target,
                                std::uint64_t seed);

}  // namespace surropub
