#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surropub/schema.hpp"

namespace surropub {

struct GenSpec {
  std::size_t target_m = 0;
  std::uint64_t seed = 0;
};

/// Bayesian network over schema variables. Nodes are listed in sampling
/// order; each node's parents precede it in that order, so the graph is
/// acyclic by construction. CPT rows are indexed by the mixed-radix parent
/// configuration (first listed parent most significant).
class BayesNet {
public:
  explicit BayesNet(SchemaPtr schema);

  const SchemaPtr& schema_ptr() const { return schema_; }
  std::size_t node_count() const { return order_.size(); }

  /// Appends a node. `variable` is the schema index; `parents` are schema
  /// indices of already-added nodes; `cpt` has one row per parent
  /// configuration, each a distribution over the variable's values.
  void add_node(std::size_t variable, std::vector<std::size_t> parents,
                std::vector<std::vector<double>> cpt);

  std::size_t variable_at(std::size_t pos) const { return order_.at(pos); }
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<std::size_t>& parents_at(std::size_t pos) const { return parents_.at(pos); }
  const std::vector<std::vector<double>>& cpt_at(std::size_t pos) const { return cpts_.at(pos); }
  std::vector<std::vector<std::size_t>> parents_by_variable() const;

  std::size_t config_count(std::size_t pos) const;
  std::size_t config_index(std::size_t pos, const Record& partial) const;

  /// Checks CPT shape and row normalization (1 +/- 1e-9).
  void validate() const;

  std::string serialize() const;
  static BayesNet deserialize(SchemaPtr schema, const std::string& text);

private:
  SchemaPtr schema_;
  std::vector<std::size_t> order_;                       // position -> schema variable
  std::vector<std::vector<std::size_t>> parents_;        // position -> schema variables
  std::vector<std::vector<std::vector<double>>> cpts_;   // position -> config -> value
};

/// Each cell i.i.d. uniform over its variable's values.
Dataset gen_uniform(SchemaPtr schema, const GenSpec& spec);

/// Per column: empirical frequency, rounded to 2 decimals (half away from
/// zero), renormalized; columns sampled independently. Codes whose rounded
/// mass is 0 become unsampleable.
Dataset gen_univariate(const Dataset& private_data, const GenSpec& spec);

/// Algorithm: random node permutation; per node a uniformly-sized, uniformly
/// chosen parent subset of earlier nodes (capped at d_max); CPT rows drawn
/// Dirichlet(alpha). Takes only the schema, never a dataset.
BayesNet build_random_bn(SchemaPtr schema, std::size_t d_max, double alpha,
                         std::uint64_t seed);

/// Ancestral sampling in node order.
Dataset sample_bn(const BayesNet& net, const GenSpec& spec);

}  // namespace surropub
