#pragma once

#include <string>
#include <vector>

#include "surropub/rng.hpp"
#include "surropub/schema.hpp"

namespace surropub::testing {

/// Schema with integer-coded variables of the given cardinalities; codes are
/// "1".."k", names A, B, C, ...
inline SchemaPtr make_schema(const std::vector<std::size_t>& cardinalities,
                             const std::string& topic = "testing") {
  std::vector<VariableSpec> vars;
  for (std::size_t i = 0; i < cardinalities.size(); ++i) {
    VariableSpec spec;
    spec.name = std::string(1, static_cast<char>('A' + i));
    spec.description = "variable " + spec.name;
    spec.dtype = Dtype::IntegerCoded;
    for (std::size_t v = 1; v <= cardinalities[i]; ++v)
      spec.values.emplace_back(std::to_string(v), "value " + std::to_string(v));
    vars.push_back(std::move(spec));
  }
  return std::make_shared<const Schema>(Schema(std::move(vars), topic));
}

inline Record make_record(std::initializer_list<std::uint16_t> cells) {
  Record rec;
  rec.cells.assign(cells);
  return rec;
}

inline Dataset make_dataset(SchemaPtr schema,
                            const std::vector<std::vector<std::uint16_t>>& rows,
                            DatasetRole role = DatasetRole::Private) {
  Dataset data(std::move(schema), role);
  for (const auto& row : rows) {
    Record rec;
    rec.cells.assign(row.begin(), row.end());
    data.add(std::move(rec));
  }
  return data;
}

inline Dataset random_dataset(SchemaPtr schema, std::size_t n, std::uint64_t seed,
                              DatasetRole role = DatasetRole::Private) {
  Dataset data(schema, role);
  auto eng = rng::make_engine(seed);
  for (std::size_t i = 0; i < n; ++i) {
    Record rec;
    rec.cells.resize(schema->variable_count());
    for (std::size_t c = 0; c < schema->variable_count(); ++c)
      rec.cells[c] = static_cast<std::uint16_t>(
          rng::uniform_below(eng, schema->variable(c).cardinality()));
    data.add(std::move(rec));
  }
  return data;
}

/// The schema excerpt shape used throughout: three coded survey variables.
inline const char* kEdadExcerpt = R"({
  "_topic": "disability survey",
  "RELACT": {
    "description": "Main labour market activity status",
    "dtype": "int64",
    "values": {
      "1": "Employed",
      "2": "Unemployed",
      "3": "Retired",
      "4": "Student",
      "5": "Unable to work",
      "6": "Doing unpaid social work or charitable activities",
      "7": "Other inactive person"
    }
  },
  "CERTIG": {
    "description": "Degree of disability",
    "dtype": "int64",
    "values": {
      "1": "0-32",
      "2": "33-44",
      "3": "45-64",
      "4": "65-74",
      "5": "75+",
      "6": "Not known"
    }
  },
  "AUDI_7_1": {
    "description": "Has significant difficulty hearing a conversation without a hearing aid",
    "dtype": "int64",
    "values": {
      "1": "Yes",
      "2": "No"
    }
  }
})";

}  // namespace surropub::testing
