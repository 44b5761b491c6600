#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "surropub/rng.hpp"
#include "surropub/schema.hpp"

namespace surropub {

Dataset::Dataset(SchemaPtr schema, DatasetRole role)
    : schema_(std::move(schema)), role_(role) {
  if (!schema_) throw Error("dataset requires a schema");
}

void Dataset::add(Record record) {
  if (record.cells.size() != schema_->variable_count())
    throw Error("record arity does not match schema");
  records_.push_back(std::move(record));
  splits_.push_back(Split::None);
}

const std::string& Dataset::code_at(std::size_t row, std::size_t col) const {
  return schema_->variable(col).code(records_.at(row).cells.at(col));
}

void Dataset::set_splits(std::vector<Split> splits) {
  if (splits.size() != records_.size())
    throw Error("split labels must cover every record");
  splits_ = std::move(splits);
}

Dataset Dataset::subset(Split split) const {
  Dataset out(schema_, role_);
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (splits_[i] == split) out.add(records_[i]);
  return out;
}

std::size_t Dataset::count_split(Split split) const {
  return static_cast<std::size_t>(std::count(splits_.begin(), splits_.end(), split));
}

void Dataset::write_csv(std::ostream& out) const {
  const auto& vars = schema_->variables();
  for (std::size_t c = 0; c < vars.size(); ++c) {
    if (c) out << ',';
    out << vars[c].name;
  }
  out << '\n';
  for (std::size_t r = 0; r < records_.size(); ++r) {
    for (std::size_t c = 0; c < vars.size(); ++c) {
      if (c) out << ',';
      out << vars[c].code(records_[r].cells[c]);
    }
    out << '\n';
  }
}

std::string Dataset::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

RowValidation validate_record(const Schema& schema, std::span<const std::string> tokens) {
  RowValidation out;
  const auto& vars = schema.variables();
  if (tokens.size() != vars.size()) {
    out.problems.push_back("expected " + std::to_string(vars.size()) + " cells, got " +
                           std::to_string(tokens.size()));
    return out;
  }
  Record rec;
  rec.cells.resize(vars.size());
  for (std::size_t c = 0; c < vars.size(); ++c) {
    auto idx = vars[c].index_of(tokens[c]);
    if (!idx) {
      out.problems.push_back("column '" + vars[c].name + "': unknown code '" +
                             tokens[c] + "'");
      continue;
    }
    rec.cells[c] = static_cast<std::uint16_t>(*idx);
  }
  if (out.problems.empty()) out.record = std::move(rec);
  return out;
}

Dataset Dataset::read_csv(SchemaPtr schema, std::istream& in, DatasetRole role) {
  Dataset out(schema, role);
  std::string line;
  if (!std::getline(in, line)) throw Error("CSV is empty (missing header)");
  const auto header = split_csv_line(line);
  const auto& vars = schema->variables();
  if (header.size() != vars.size())
    throw Error("CSV header has " + std::to_string(header.size()) + " columns, schema has " +
                std::to_string(vars.size()));
  for (std::size_t c = 0; c < vars.size(); ++c)
    if (header[c] != vars[c].name)
      throw Error("CSV header column " + std::to_string(c + 1) + " is '" + header[c] +
                  "', expected '" + vars[c].name + "'");

  std::vector<std::string> errors;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto tokens = split_csv_line(line);
    auto check = validate_record(*schema, tokens);
    if (check.ok()) {
      out.add(std::move(*check.record));
    } else {
      for (const auto& p : check.problems)
        errors.push_back("row " + std::to_string(row_no) + ": " + p);
    }
  }
  if (!errors.empty()) {
    std::string msg = "CSV contains invalid rows:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(msg);
  }
  return out;
}

Dataset Dataset::read_csv_file(SchemaPtr schema, const std::string& path, DatasetRole role) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file: " + path);
  return read_csv(std::move(schema), in, role);
}

void Dataset::write_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path);
  write_csv(out);
}

Dataset split_dataset(const Dataset& data, std::uint64_t seed) {
  const std::size_t n = data.size();
  if (n < 10) throw Error("split_dataset requires at least 10 records");

  // Largest-remainder apportionment of 72:8:20.
  const std::array<double, 3> ratio = {0.72, 0.08, 0.20};
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratio[i] * static_cast<double>(n);
    quota[i] = static_cast<std::size_t>(exact);
    remainder[i] = exact - static_cast<double>(quota[i]);
    assigned += quota[i];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) quota[order[i % 3]] += 1;

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  auto eng = rng::make_engine(seed, /*stream=*/1);
  rng::shuffle(eng, perm);

  std::vector<Split> labels(n, Split::None);
  std::size_t pos = 0;
  const std::array<Split, 3> kinds = {Split::Train, Split::Valid, Split::Test};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < quota[k]; ++i) labels[perm[pos++]] = kinds[k];

  Dataset out = data;
  out.set_splits(std::move(labels));
  return out;
}

Dataset balance_by_downsampling(const Dataset& data, std::string_view target,
                                std::uint64_t seed) {
  const std::size_t t = data.schema().require(target);
  const auto& spec = data.schema().variable(t);
  if (spec.cardinality() != 2)
    throw Error("balance_by_downsampling requires a binary target; '" + std::string(target) +
                "' has " + std::to_string(spec.cardinality()) + " values");

  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < data.size(); ++i)
    by_class[data.record(i).cells[t]].push_back(i);
  if (by_class[0].empty() || by_class[1].empty())
    throw Error("balance_by_downsampling: one class of '" + std::string(target) +
                "' is absent");

  const std::size_t minority = std::min(by_class[0].size(), by_class[1].size());
  auto eng = rng::make_engine(seed, /*stream=*/2);
  std::vector<std::size_t> keep;
  keep.reserve(2 * minority);
  for (auto& cls : by_class) {
    rng::shuffle(eng, cls);
    keep.insert(keep.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(minority));
  }
  std::sort(keep.begin(), keep.end());  // preserve original record order

  Dataset out(data.schema_ptr(), data.role());
  out.reserve(keep.size());
  for (std::size_t idx : keep) out.add(data.record(idx));
  return out;
}

}  // namespace surropub
