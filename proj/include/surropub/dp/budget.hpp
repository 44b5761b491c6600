#pragma once

#include "surropub/error.hpp"

namespace surropub::dp {

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 0.0;  // 0 = pure DP

  void check() const {
    if (!(epsilon > 0.0)) throw Error("privacy budget epsilon must be positive");
    if (delta < 0.0 || delta >= 1.0) throw Error("privacy budget delta must be in [0, 1)");
  }
};

}  // namespace surropub::dp
