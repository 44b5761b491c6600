#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "surropub/bayes_net.hpp"
#include "surropub/schema.hpp"

namespace surropub {

// Guarded-categorical SCM DSL. A document is a sequence of variable clauses
// and constraints:
//
//   var NAME [ "|" parent ("," parent)* ] "~" clause+ [";"]
//     clause     = "when" predicate ":" dist | ["else"] dist
//                  (the last clause must be unconditional)
//     dist       = categorical{ code: weight, ... }
//                | bernoulli(p)        -- p is the mass of the 2nd listed value
//                | uniform{ code, ... }
//   constraint "description" : predicate [";"]
//     predicate  = comparisons (==, !=, in {...}) joined by and/or/not, parens
//
// Whitespace-insensitive; "#" starts a comment to end of line.

struct Predicate {
  enum class Kind { Eq, Ne, In, And, Or, Not };
  Kind kind;
  std::size_t variable = 0;              // Eq/Ne/In
  std::vector<std::uint16_t> values;     // Eq/Ne: one entry; In: member set
  std::vector<std::shared_ptr<const Predicate>> children;  // And/Or/Not

  bool eval(const Record& record) const;
  std::string to_dsl(const Schema& schema) const;
};
using PredicatePtr = std::shared_ptr<const Predicate>;

struct Distribution {
  enum class Kind { Categorical, Bernoulli, Uniform };
  Kind kind = Kind::Categorical;
  std::vector<double> weights;  // full-length over the variable's values, sums to 1
  double bernoulli_p = 0.0;
  std::string to_dsl(const Schema& schema, std::size_t variable) const;
};

struct Clause {
  PredicatePtr guard;  // null = unconditional default
  Distribution dist;
};

struct Equation {
  std::size_t variable = 0;
  std::vector<std::size_t> parents;
  std::vector<Clause> clauses;  // first matching guard wins; last is default
};

struct Constraint {
  std::string description;
  PredicatePtr predicate;
  std::string to_dsl(const Schema& schema) const;
};

bool eval_constraint(const Constraint& constraint, const Record& record);

struct DagCheck {
  bool ok = false;
  std::vector<std::size_t> topo_order;  // valid when ok
  std::vector<std::size_t> cycle;       // variable indices, first == last
};

/// Kahn topological sort over per-variable parent lists; on failure reports
/// one concrete cycle.
DagCheck validate_dag(const std::vector<std::vector<std::size_t>>& parents);
std::string cycle_to_string(const Schema& schema, const std::vector<std::size_t>& cycle);

class ScmModel {
public:
  ScmModel(SchemaPtr schema, std::vector<Equation> equations,
           std::vector<Constraint> constraints);

  const SchemaPtr& schema_ptr() const { return schema_; }
  const Schema& schema() const { return *schema_; }
  const std::vector<Equation>& equations() const { return equations_; }
  const Equation& equation_of(std::size_t variable) const { return equations_.at(variable); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<std::size_t>& topo_order() const { return topo_order_; }
  std::vector<std::vector<std::size_t>> parents() const;

  std::string to_dsl() const;

private:
  SchemaPtr schema_;
  std::vector<Equation> equations_;  // indexed by schema variable
  std::vector<Constraint> constraints_;
  std::vector<std::size_t> topo_order_;
};

/// Strict whole-model parse: every schema variable gets exactly one equation,
/// guards reference only declared parents, distributions are normalized over
/// allowed codes, the parent graph is acyclic. Throws ParseError.
ScmModel parse_scm(const std::string& text, SchemaPtr schema);

/// Tolerant equation parse used by the agent pipeline. In draft mode a weight
/// (or bernoulli p) may be a bare identifier; such parameters are collected
/// instead of failing, and normalization is not checked for clauses that
/// contain one. Coverage and the DAG are not checked here.
struct DocumentDraft {
  std::vector<Equation> equations;      // in document order, may be partial
  std::vector<Constraint> constraints;
  std::vector<std::string> free_parameters;
};
DocumentDraft parse_scm_draft(const std::string& text, SchemaPtr schema,
                              bool allow_symbolic_weights);

struct ScmSampleStats {
  std::size_t records = 0;
  std::size_t rejected_attempts = 0;
  std::size_t unrepaired_records = 0;
  std::vector<std::size_t> constraint_violations;  // per constraint, over all attempts
};

struct ScmSampleResult {
  Dataset data;
  std::vector<bool> satisfied;  // per record; false = emitted unrepaired
  ScmSampleStats stats;
};

/// Ancestral sampling in topological order with constraint rejection. Each
/// record draws from its own seed substream; a record that still violates a
/// constraint after max_attempts is emitted from the final attempt and
/// flagged unrepaired. Throws if no record ever satisfied the constraints.
ScmSampleResult sample_scm(const ScmModel& model, const GenSpec& spec,
                           std::size_t max_attempts_per_record);

}  // namespace surropub
