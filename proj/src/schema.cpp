#include "surropub/schema.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace surropub {

using ordered_json = nlohmann::ordered_json;

std::optional<std::size_t> VariableSpec::index_of(std::string_view code) const {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].first == code) return i;
  }
  return std::nullopt;
}

Schema::Schema(std::vector<VariableSpec> variables, std::string topic)
    : variables_(std::move(variables)), topic_(std::move(topic)) {
  if (variables_.empty()) throw Error("schema must declare at least one variable");
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& v = variables_[i];
    if (v.values.empty())
      throw Error("variable '" + v.name + "' has an empty values list");
    for (std::size_t a = 0; a < v.values.size(); ++a)
      for (std::size_t b = a + 1; b < v.values.size(); ++b)
        if (v.values[a].first == v.values[b].first)
          throw Error("variable '" + v.name + "' repeats code '" + v.values[a].first + "'");
    if (!index_.emplace(v.name, i).second)
      throw Error("duplicate variable name '" + v.name + "'");
  }
}

namespace {

Dtype parse_dtype(const std::string& text, const std::string& var) {
  if (text.find("int") != std::string::npos) return Dtype::IntegerCoded;
  if (text.find("str") != std::string::npos || text == "object")
    return Dtype::StringCoded;
  if (text.find("float") != std::string::npos || text.find("double") != std::string::npos)
    throw ParseError("variable '" + var + "': continuous dtype '" + text +
                     "' is not supported; only categorical variables are accepted");
  throw ParseError("variable '" + var + "': unrecognized dtype '" + text + "'");
}

std::string dtype_name(Dtype d) {
  return d == Dtype::IntegerCoded ? "int64" : "str";
}

}  // namespace

Schema Schema::parse(const std::string& text) {
  // Duplicate top-level keys would silently collapse in the JSON object, so
  // catch them during parsing.
  std::vector<std::string> top_level_keys;
  std::string duplicate;
  const auto watch_keys = [&](int depth, ordered_json::parse_event_t event,
                              ordered_json& parsed) {
    if (event == ordered_json::parse_event_t::key && depth == 1) {
      const auto key = parsed.get<std::string>();
      if (std::find(top_level_keys.begin(), top_level_keys.end(), key) !=
          top_level_keys.end())
        duplicate = key;
      top_level_keys.push_back(key);
    }
    return true;
  };

  ordered_json doc;
  try {
    doc = ordered_json::parse(text, watch_keys);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("schema document is not valid JSON: ") + e.what());
  }
  if (!duplicate.empty())
    throw ParseError("duplicate variable name '" + duplicate + "'");
  if (!doc.is_object()) throw ParseError("schema document must be a JSON object");

  std::string topic;
  std::vector<VariableSpec> variables;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& name = it.key();
    if (name == "_topic") {
      if (!it.value().is_string())
        throw ParseError("'_topic' must be a string");
      topic = it.value().get<std::string>();
      continue;
    }
    const auto& body = it.value();
    if (!body.is_object())
      throw ParseError("variable '" + name + "' must map to an object");
    if (body.contains("range") || body.contains("min") || body.contains("max"))
      throw ParseError("variable '" + name +
                       "' declares a continuous range; only categorical variables are supported");
    VariableSpec spec;
    spec.name = name;
    spec.description = body.value("description", "");
    spec.dtype = parse_dtype(body.value("dtype", "str"), name);
    if (!body.contains("values") || !body.at("values").is_object())
      throw ParseError("variable '" + name + "' is missing its values map");
    for (auto vit = body.at("values").begin(); vit != body.at("values").end(); ++vit) {
      if (!vit.value().is_string())
        throw ParseError("variable '" + name + "': meaning of code '" + vit.key() +
                         "' must be a string");
      spec.values.emplace_back(vit.key(), vit.value().get<std::string>());
    }
    if (spec.values.empty())
      throw ParseError("variable '" + name + "' has an empty values list");
    variables.push_back(std::move(spec));
  }
  try {
    return Schema(std::move(variables), std::move(topic));
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

std::string Schema::serialize() const {
  ordered_json doc = ordered_json::object();
  if (!topic_.empty()) doc["_topic"] = topic_;
  for (const auto& v : variables_) {
    ordered_json body;
    body["description"] = v.description;
    body["dtype"] = dtype_name(v.dtype);
    ordered_json values = ordered_json::object();
    for (const auto& [code, meaning] : v.values) values[code] = meaning;
    body["values"] = std::move(values);
    doc[v.name] = std::move(body);
  }
  return doc.dump(2);
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Schema::require(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw Error("schema has no variable '" + std::string(name) + "'");
  return *idx;
}

DomainSize Schema::domain_size() const {
  DomainSize out;
  for (const auto& v : variables_) {
    std::uint64_t next = 0;
    if (__builtin_mul_overflow(out.value, static_cast<std::uint64_t>(v.cardinality()), &next)) {
      out.value = UINT64_MAX;
      out.saturated = true;
      return out;
    }
    out.value = next;
  }
  return out;
}

bool Schema::operator==(const Schema& other) const {
  if (topic_ != other.topic_ || variables_.size() != other.variables_.size()) return false;
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& a = variables_[i];
    const auto& b = other.variables_[i];
    if (a.name != b.name || a.description != b.description || a.dtype != b.dtype ||
        a.values != b.values)
      return false;
  }
  return true;
}

SchemaPtr load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return std::make_shared<const Schema>(Schema::parse(buf.str()));
}

std::string_view to_string(DatasetRole role) {
  switch (role) {
    case DatasetRole::Private: return "private";
    case DatasetRole::Public: return "public";
    case DatasetRole::Surrogate: return "surrogate";
  }
  return "?";
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::None: return "none";
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

}  // namespace surropub
