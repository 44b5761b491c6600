#include "surropub/agent.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace surropub {

std::string_view to_string(AgentState state) {
  switch (state) {
    case AgentState::Schema: return "schema";
    case AgentState::ElicitConstraints: return "elicit_constraints";
    case AgentState::RootNodes: return "root_nodes";
    case AgentState::RootToNonRootEdges: return "root_to_nonroot_edges";
    case AgentState::NonRootToNonRootEdges: return "nonroot_to_nonroot_edges";
    case AgentState::Dag: return "dag";
    case AgentState::StructuralEquations: return "structural_equations";
    case AgentState::Parameters: return "parameters";
    case AgentState::AssembleModel: return "assemble_model";
    case AgentState::EnforceRange: return "enforce_range";
    case AgentState::EnforceConstraints: return "enforce_constraints";
    case AgentState::Sample: return "sample";
  }
  return "?";
}

std::string AgentRunLog::to_jsonl() const {
  std::ostringstream out;
  for (const auto& s : states) {
    nlohmann::json line = {{"state", std::string(to_string(s.state))},
                           {"attempts", s.attempts},
                           {"failures", s.failures},
                           {"accepted_output", s.accepted_output}};
    out << line.dump() << '\n';
  }
  nlohmann::json tail = {{"total_retries", total_retries}, {"aborted", aborted}};
  if (aborted) tail["abort_reason"] = abort_reason;
  out << tail.dump() << '\n';
  return out.str();
}

void AgentRunLog::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write agent log: " + path);
  out << to_jsonl();
}

namespace {

constexpr std::string_view kDslGrammar =
    "Model documents use this grammar, one statement per variable:\n"
    "  var NAME ~ dist                       (root variable)\n"
    "  var NAME | P1, P2 ~ clauses           (variable with parents)\n"
    "where clauses are guarded distributions evaluated first-match-first:\n"
    "  when <predicate>: <dist>  ... else <dist>\n"
    "and the final clause must be unconditional. Distributions:\n"
    "  categorical{code: weight, ...}   weights must sum to 1\n"
    "  bernoulli(p)                     2-value variables; p is the mass of the\n"
    "                                   second listed value\n"
    "  uniform{code, code, ...}         equal mass on the listed codes\n"
    "Predicates compare a variable to codes from the schema: ==, !=,\n"
    "in {code, ...}, combined with and/or/not and parentheses.\n"
    "Constraints are written as:  constraint \"description\": <predicate>;\n"
    "Codes must come from the schema's value lists.";

struct Failure {
  std::string message;
};

using ValidationResult = std::optional<Failure>;  // nullopt = accepted

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> names;
  std::string current;
  const auto flush = [&] {
    std::size_t b = 0, e = current.size();
    while (b < e && std::isspace(static_cast<unsigned char>(current[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(current[e - 1]))) --e;
    if (e > b) names.push_back(current.substr(b, e - b));
    current.clear();
  };
  for (char c : text) {
    if (c == ',' || c == '\n') {
      flush();
    } else {
      current += c;
    }
  }
  flush();
  // Tolerate markdown fences and bullet prefixes.
  std::vector<std::string> cleaned;
  for (auto& n : names) {
    if (n.rfind("```", 0) == 0) continue;
    while (!n.empty() && (n.front() == '-' || n.front() == '*' || n.front() == ' ')) n.erase(0, 1);
    if (!n.empty()) cleaned.push_back(std::move(n));
  }
  return cleaned;
}

struct Edge {
  std::string from;
  std::string to;
  bool operator==(const Edge&) const = default;
};

/// Parses "A -> B" lines; returns nullopt plus a message on malformed input.
std::optional<std::vector<Edge>> parse_edge_list(const std::string& text,
                                                 std::string* error) {
  std::vector<Edge> edges;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0, e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    if (b >= e) continue;
    std::string body = line.substr(b, e - b);
    if (body.rfind("```", 0) == 0 || body == "none") continue;
    const std::size_t arrow = body.find("->");
    if (arrow == std::string::npos) {
      *error = "line is not an edge ('FROM -> TO'): '" + body + "'";
      return std::nullopt;
    }
    Edge edge;
    edge.from = body.substr(0, arrow);
    edge.to = body.substr(arrow + 2);
    const auto trim = [](std::string& s) {
      std::size_t x = 0, y = s.size();
      while (x < y && std::isspace(static_cast<unsigned char>(s[x]))) ++x;
      while (y > x && std::isspace(static_cast<unsigned char>(s[y - 1]))) --y;
      s = s.substr(x, y - x);
    };
    trim(edge.from);
    trim(edge.to);
    if (edge.from.empty() || edge.to.empty()) {
      *error = "edge with an empty endpoint: '" + body + "'";
      return std::nullopt;
    }
    edges.push_back(std::move(edge));
  }
  return edges;
}

/// Everything the agent has accepted so far.
struct Session {
  SchemaPtr schema;
  std::vector<Constraint> constraints;
  std::string constraints_text;  // accepted step-2 reply, verbatim
  std::set<std::string> roots;
  std::vector<Edge> root_edges;
  std::vector<Edge> inner_edges;
  std::vector<Edge> final_edges;                    // accepted at the Dag state
  std::vector<std::vector<std::size_t>> dag_parents;  // by variable index
  std::string equations_text;                       // accepted step-7 reply
  std::string resolved_equations_text;              // accepted step-8 reply
  std::string model_text;                           // latest full document
  std::optional<ScmModel> model;

  std::string schema_block() const { return schema->serialize(); }

  std::string variable_list() const {
    std::string out;
    for (std::size_t i = 0; i < schema->variable_count(); ++i) {
      if (i) out += ", ";
      out += schema->variable(i).name;
    }
    return out;
  }

  std::string edges_block(const std::vector<Edge>& edges) const {
    if (edges.empty()) return "(none)";
    std::string out;
    for (const auto& e : edges) out += e.from + " -> " + e.to + "\n";
    return out;
  }

  std::vector<Edge> accumulated_edges() const {
    std::vector<Edge> all = root_edges;
    all.insert(all.end(), inner_edges.begin(), inner_edges.end());
    return all;
  }
};

std::string prompt_for(AgentState state, const Session& s) {
  switch (state) {
    case AgentState::Schema:
      return "Here is a data schema:\n\n" + s.schema_block() +
             "\n\nList every variable name in the schema, as a single comma-separated "
             "line. Output only the list.";
    case AgentState::ElicitConstraints:
      return "Schema:\n\n" + s.schema_block() + "\n\n" + std::string(kDslGrammar) +
             "\n\nPropose realistic consistency constraints among these variables - "
             "logical relationships that real records would satisfy. Output only "
             "constraint statements, one per line, in the grammar above. If no "
             "constraint is warranted, output nothing.";
    case AgentState::RootNodes:
      return "Schema variables: " + s.variable_list() +
             "\n\nIdentify the subset of variables that can serve as root nodes of a "
             "causal graph - variables that are exogenous or unlikely to be influenced "
             "by the others. Output only a comma-separated list of variable names.";
    case AgentState::RootToNonRootEdges: {
      std::string roots;
      for (const auto& r : s.roots) roots += (roots.empty() ? "" : ", ") + r;
      return "Schema variables: " + s.variable_list() + "\nRoot nodes: " + roots +
             "\n\nPropose directed edges from root nodes to non-root variables that "
             "capture plausible causal influence. Output one edge per line as "
             "'FROM -> TO'. Output 'none' if there are no such edges.";
    }
    case AgentState::NonRootToNonRootEdges: {
      std::string roots;
      for (const auto& r : s.roots) roots += (roots.empty() ? "" : ", ") + r;
      return "Schema variables: " + s.variable_list() + "\nRoot nodes: " + roots +
             "\nEdges so far:\n" + s.edges_block(s.root_edges) +
             "\nPropose additional directed edges between non-root variables. Output "
             "one edge per line as 'FROM -> TO'. Output 'none' if there are no such "
             "edges.";
    }
    case AgentState::Dag:
      return "Proposed edges of a causal graph over the variables " + s.variable_list() +
             ":\n" + s.edges_block(s.accumulated_edges()) +
             "\nVerify this forms a directed acyclic graph; remove or redirect edges "
             "if needed. Output the final edge list, one 'FROM -> TO' per line "
             "('none' for no edges).";
    case AgentState::StructuralEquations: {
      std::string parents_block;
      for (std::size_t v = 0; v < s.schema->variable_count(); ++v) {
        parents_block += s.schema->variable(v).name + ": ";
        if (s.dag_parents[v].empty()) {
          parents_block += "(root)";
        } else {
          for (std::size_t i = 0; i < s.dag_parents[v].size(); ++i)
            parents_block += (i ? ", " : "") + s.schema->variable(s.dag_parents[v][i]).name;
        }
        parents_block += "\n";
      }
      return "Schema:\n\n" + s.schema_block() + "\n\nCausal parents per variable:\n" +
             parents_block + "\n" + std::string(kDslGrammar) +
             "\n\nMap each variable to a structural equation in this grammar, "
             "conditioning on exactly the parents listed above. Named parameters "
             "(e.g. p_work) may stand in for weights you are not yet sure about. "
             "Output only 'var' statements, one per variable.";
    }
    case AgentState::Parameters:
      return "Structural equations:\n\n" + s.equations_text + "\n\n" +
             std::string(kDslGrammar) +
             "\n\nAssign a numeric value to every named parameter and make every "
             "categorical weight set sum to 1. Output the complete 'var' statements "
             "with numbers only.";
    case AgentState::AssembleModel:
      return "Assembled model document:\n\n" + s.resolved_equations_text + "\n" +
             s.constraints_text +
             "\n\nCombine the equations and constraints into the final model document. "
             "Output the complete document (all 'var' statements, then all "
             "'constraint' statements).";
    case AgentState::EnforceRange:
      return "Model document:\n\n" + s.model_text +
             "\n\nVerify every distribution assigns probability only to codes allowed "
             "by the schema for its variable, and fix any violation. Output the "
             "complete corrected document (or the same document if already correct).";
    case AgentState::EnforceConstraints:
      return "Model document:\n\n" + s.model_text + "\n\nElicited constraints:\n" +
             (s.constraints_text.empty() ? "(none)" : s.constraints_text) +
             "\n\nEnsure all elicited constraints appear in the document. Output the "
             "complete final document.";
    case AgentState::Sample:
      break;
  }
  throw Error("no prompt for state");
}

ValidationResult check_edges(const Session& s, const std::vector<Edge>& edges,
                             bool from_roots, const std::vector<Edge>& previous) {
  for (const auto& e : edges) {
    if (!s.schema->find(e.from)) return Failure{"unknown variable '" + e.from + "'"};
    if (!s.schema->find(e.to)) return Failure{"unknown variable '" + e.to + "'"};
    if (from_roots) {
      if (!s.roots.contains(e.from))
        return Failure{"edge source '" + e.from + "' is not a root node"};
      if (s.roots.contains(e.to))
        return Failure{"edge target '" + e.to + "' is a root node"};
    } else {
      if (s.roots.contains(e.from) || s.roots.contains(e.to))
        return Failure{"edge " + e.from + " -> " + e.to +
                       " touches a root node; only non-root pairs are allowed here"};
      if (e.from == e.to) return Failure{"self-loop on '" + e.from + "'"};
    }
  }
  std::vector<Edge> all = previous;
  for (const auto& e : edges) {
    if (std::find(all.begin(), all.end(), e) != all.end())
      return Failure{"duplicate edge " + e.from + " -> " + e.to};
    all.push_back(e);
  }
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> parents_from_edges(const Schema& schema,
                                                         const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> parents(schema.variable_count());
  for (const auto& e : edges)
    parents[schema.require(e.to)].push_back(schema.require(e.from));
  for (auto& p : parents) std::sort(p.begin(), p.end());
  return parents;
}

ValidationResult check_equations_against_dag(const Session& s,
                                             const std::vector<Equation>& equations) {
  std::vector<bool> present(s.schema->variable_count(), false);
  for (const auto& eq : equations) {
    if (present[eq.variable])
      return Failure{"variable '" + s.schema->variable(eq.variable).name +
                     "' has more than one equation"};
    present[eq.variable] = true;
    auto declared = eq.parents;
    std::sort(declared.begin(), declared.end());
    if (declared != s.dag_parents[eq.variable]) {
      std::string expect = "(root)";
      if (!s.dag_parents[eq.variable].empty()) {
        expect.clear();
        for (std::size_t i = 0; i < s.dag_parents[eq.variable].size(); ++i)
          expect += (i ? ", " : "") + s.schema->variable(s.dag_parents[eq.variable][i]).name;
      }
      return Failure{"equation of '" + s.schema->variable(eq.variable).name +
                     "' must condition on exactly: " + expect};
    }
  }
  for (std::size_t v = 0; v < present.size(); ++v)
    if (!present[v])
      return Failure{"missing equation for variable '" + s.schema->variable(v).name + "'"};
  return std::nullopt;
}

ValidationResult validate_state(AgentState state, const std::string& reply, Session& s) {
  switch (state) {
    case AgentState::Schema: {
      const auto names = parse_name_list(reply);
      std::set<std::string> got(names.begin(), names.end());
      std::string missing, extra;
      for (const auto& v : s.schema->variables())
        if (!got.contains(v.name)) missing += (missing.empty() ? "" : ", ") + v.name;
      for (const auto& n : got)
        if (!s.schema->find(n)) extra += (extra.empty() ? "" : ", ") + n;
      if (!missing.empty())
        return Failure{"the following variables were missing: " + missing};
      if (!extra.empty())
        return Failure{"the following names are not schema variables: " + extra};
      if (names.size() != got.size()) return Failure{"a variable was listed twice"};
      return std::nullopt;
    }
    case AgentState::ElicitConstraints: {
      DocumentDraft draft;
      try {
        draft = parse_scm_draft(reply, s.schema, /*allow_symbolic_weights=*/false);
      } catch (const ParseError& e) {
        return Failure{std::string("constraint did not parse: ") + e.what()};
      }
      if (!draft.equations.empty())
        return Failure{"only 'constraint' statements are expected at this step"};
      s.constraints = std::move(draft.constraints);
      s.constraints_text = reply;
      return std::nullopt;
    }
    case AgentState::RootNodes: {
      const auto names = parse_name_list(reply);
      if (names.empty()) return Failure{"at least one root node is required"};
      std::set<std::string> roots;
      for (const auto& n : names) {
        if (!s.schema->find(n)) return Failure{"'" + n + "' is not a schema variable"};
        if (!roots.insert(n).second) return Failure{"root '" + n + "' listed twice"};
      }
      s.roots = std::move(roots);
      return std::nullopt;
    }
    case AgentState::RootToNonRootEdges: {
      std::string error;
      auto edges = parse_edge_list(reply, &error);
      if (!edges) return Failure{error};
      if (auto bad = check_edges(s, *edges, /*from_roots=*/true, {})) return bad;
      s.root_edges = std::move(*edges);
      return std::nullopt;
    }
    case AgentState::NonRootToNonRootEdges: {
      std::string error;
      auto edges = parse_edge_list(reply, &error);
      if (!edges) return Failure{error};
      if (auto bad = check_edges(s, *edges, /*from_roots=*/false, s.root_edges)) return bad;
      s.inner_edges = std::move(*edges);
      return std::nullopt;
    }
    case AgentState::Dag: {
      std::string error;
      auto edges = parse_edge_list(reply, &error);
      if (!edges) return Failure{error};
      for (const auto& e : *edges) {
        if (!s.schema->find(e.from)) return Failure{"unknown variable '" + e.from + "'"};
        if (!s.schema->find(e.to)) return Failure{"unknown variable '" + e.to + "'"};
        if (e.from == e.to) return Failure{"self-loop on '" + e.from + "'"};
      }
      for (std::size_t i = 0; i < edges->size(); ++i)
        for (std::size_t j = i + 1; j < edges->size(); ++j)
          if ((*edges)[i] == (*edges)[j])
            return Failure{"duplicate edge " + (*edges)[i].from + " -> " + (*edges)[i].to};
      auto parents = parents_from_edges(*s.schema, *edges);
      const auto check = validate_dag(parents);
      if (!check.ok)
        return Failure{"the graph contains a cycle: " +
                       cycle_to_string(*s.schema, check.cycle)};
      s.final_edges = std::move(*edges);
      s.dag_parents = std::move(parents);
      return std::nullopt;
    }
    case AgentState::StructuralEquations: {
      DocumentDraft draft;
      try {
        draft = parse_scm_draft(reply, s.schema, /*allow_symbolic_weights=*/true);
      } catch (const ParseError& e) {
        return Failure{std::string("equations did not parse: ") + e.what()};
      }
      if (!draft.constraints.empty())
        return Failure{"only 'var' statements are expected at this step"};
      if (auto bad = check_equations_against_dag(s, draft.equations)) return bad;
      s.equations_text = reply;
      return std::nullopt;
    }
    case AgentState::Parameters: {
      DocumentDraft draft;
      try {
        draft = parse_scm_draft(reply, s.schema, /*allow_symbolic_weights=*/false);
      } catch (const ParseError& e) {
        return Failure{std::string("equations did not parse: ") + e.what()};
      }
      if (!draft.constraints.empty())
        return Failure{"only 'var' statements are expected at this step"};
      if (auto bad = check_equations_against_dag(s, draft.equations)) return bad;
      s.resolved_equations_text = reply;
      return std::nullopt;
    }
    case AgentState::AssembleModel:
    case AgentState::EnforceRange: {
      try {
        s.model = parse_scm(reply, s.schema);
      } catch (const ParseError& e) {
        return Failure{std::string("model did not parse: ") + e.what()};
      }
      s.model_text = reply;
      return std::nullopt;
    }
    case AgentState::EnforceConstraints: {
      ScmModel parsed = [&]() -> ScmModel {
        return parse_scm(reply, s.schema);
      }();
      std::set<std::string> present;
      for (const auto& c : parsed.constraints())
        present.insert(c.predicate->to_dsl(*s.schema));
      for (const auto& c : s.constraints) {
        if (!present.contains(c.predicate->to_dsl(*s.schema)))
          return Failure{"elicited constraint is missing from the document: " +
                         c.to_dsl(*s.schema)};
      }
      s.model = std::move(parsed);
      s.model_text = reply;
      return std::nullopt;
    }
    case AgentState::Sample:
      break;
  }
  throw Error("no validator for state");
}

}  // namespace

AgentResult run_agent(llm::ChatClient& client, SchemaPtr schema, int max_retries,
                      std::uint64_t seed) {
  AgentOptions options;
  options.max_retries = max_retries;
  return run_agent(client, std::move(schema), options, seed);
}

AgentResult run_agent(llm::ChatClient& client, SchemaPtr schema, const AgentOptions& options,
                      std::uint64_t seed) {
  if (options.max_retries < 1) throw Error("run_agent: max_retries must be at least 1");

  static constexpr AgentState kOrder[] = {
      AgentState::Schema,          AgentState::ElicitConstraints,
      AgentState::RootNodes,       AgentState::RootToNonRootEdges,
      AgentState::NonRootToNonRootEdges, AgentState::Dag,
      AgentState::StructuralEquations,   AgentState::Parameters,
      AgentState::AssembleModel,   AgentState::EnforceRange,
      AgentState::EnforceConstraints,
  };

  Session session;
  session.schema = schema;
  session.dag_parents.assign(schema->variable_count(), {});

  AgentResult result;
  for (AgentState state : kOrder) {
    StateLog log;
    log.state = state;
    const std::string base_prompt = prompt_for(state, session);
    std::string last_reply;
    bool advanced = false;

    for (int attempt = 1; attempt <= options.max_retries; ++attempt) {
      llm::ChatRequest request;
      request.model = options.model;
      request.temperature = options.temperature;
      request.max_output_tokens = options.max_output_tokens;
      std::string prompt = base_prompt;
      if (attempt > 1) {
        prompt += "\n\nYour previous reply was rejected: " + log.failures.back() +
                  "\nPrevious reply:\n" + last_reply +
                  "\nAnswer again, following the required format exactly.";
      }
      request.user_turns.push_back(std::move(prompt));

      last_reply = client.complete(request).text;
      log.attempts = attempt;

      ValidationResult failure;
      try {
        failure = validate_state(state, last_reply, session);
      } catch (const ParseError& e) {
        failure = Failure{e.what()};
      }
      if (!failure) {
        log.accepted_output = last_reply;
        advanced = true;
        break;
      }
      log.failures.push_back(failure->message);
      result.log.total_retries += 1;
    }

    result.log.states.push_back(std::move(log));
    if (!advanced) {
      result.log.aborted = true;
      result.log.abort_reason =
          "state '" + std::string(to_string(state)) + "' exhausted " +
          std::to_string(options.max_retries) + " attempt(s)";
      return result;
    }
  }

  // Accepting state: smoke-sample the finished model.
  StateLog sample_log;
  sample_log.state = AgentState::Sample;
  sample_log.attempts = 1;
  try {
    const auto smoke =
        sample_scm(*session.model, {options.smoke_sample_m, seed}, options.smoke_sample_attempts);
    sample_log.accepted_output =
        "sampled " + std::to_string(smoke.data.size()) + " records, " +
        std::to_string(smoke.stats.unrepaired_records) + " unrepaired";
    result.model = std::move(session.model);
  } catch (const Error& e) {
    sample_log.failures.push_back(e.what());
    result.log.aborted = true;
    result.log.abort_reason = std::string("smoke sample failed: ") + e.what();
  }
  result.log.states.push_back(std::move(sample_log));
  return result;
}

}  // namespace surropub
