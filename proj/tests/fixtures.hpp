#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "costorch/core.hpp"

namespace fixtures {

using costorch::Id;

class ProblemBuilder {
 public:
  ProblemBuilder& workflow(Id id, double earliest, double deadline, std::vector<Id> preds = {}) {
    p_.workflows.push_back({std::move(id), earliest, deadline, std::move(preds), std::nullopt});
    return *this;
  }
  ProblemBuilder& device(Id id, double base, double overflow, double prepurchased) {
    p_.devices.push_back({std::move(id), base, overflow, prepurchased, std::nullopt});
    return *this;
  }
  ProblemBuilder& config(Id device, Id config, int count) {
    p_.configs.push_back({std::move(device), std::move(config), count, 0.0, 0.0});
    return *this;
  }
  ProblemBuilder& duration(Id w, Id d, Id k, double hours) {
    p_.durations.set(std::move(w), std::move(d), std::move(k), hours);
    return *this;
  }
  costorch::Problem build() const { return p_; }
  costorch::ValidatedProblem validated() const { return costorch::ValidatedProblem::from(p_); }

 private:
  costorch::Problem p_;
};

inline costorch::Assignment assign(std::initializer_list<std::pair<Id, costorch::Choice>> items) {
  costorch::Assignment a;
  for (const auto& [w, c] : items) a.choice[w] = c;
  return a;
}

inline bool close_rel(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace fixtures
