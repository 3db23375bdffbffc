#pragma once

#include <cstddef>
#include <vector>

#include "riskshare/random_variable.hpp"

namespace riskshare {

struct Agent {
  double gamma;  // risk aversion coefficient, > 0
  Rv endowment;
};

/// Agents sharing one probability space, n >= 2.
///
/// Aggregates are computed once at construction:
///   gamma      = (sum_i 1/gamma_i)^-1
///   gamma_{-i} = (sum_{j != i} 1/gamma_j)^-1
///   E          = sum_i E_i,  E_{-i} = E - E_i
/// With n >= 2 every gamma_i^2 - gamma^2 is strictly positive.
class Market {
 public:
  explicit Market(std::vector<Agent> agents);

  std::size_t size() const { return agents_.size(); }
  const std::vector<Agent>& agents() const { return agents_; }
  const Agent& agent(std::size_t i) const { return agents_.at(i); }
  double gamma(std::size_t i) const { return agents_.at(i).gamma; }
  const Rv& endowment(std::size_t i) const { return agents_.at(i).endowment; }
  std::vector<double> gammas() const;
  std::vector<Rv> endowments() const;

  const SpacePtr& space_ptr() const { return agents_.front().endowment.space_ptr(); }
  const ProbSpace& space() const { return *space_ptr(); }

  double aggregate_gamma() const { return aggregate_gamma_; }
  double gamma_minus(std::size_t i) const;
  const Rv& aggregate_endowment() const { return aggregate_endowment_; }
  Rv endowment_minus(std::size_t i) const;

  /// Copy of this market with agent i's endowment replaced.
  Market with_endowment(std::size_t i, Rv endowment) const;
  /// Copy with every endowment replaced, gammas kept.
  Market with_endowments(std::vector<Rv> endowments) const;

  /// True when all gammas agree within a relative tolerance.
  bool homogeneous(double rel_tol = 1e-9) const;

 private:
  std::vector<Agent> agents_;
  double aggregate_gamma_;
  Rv aggregate_endowment_;
};

}  // namespace riskshare
