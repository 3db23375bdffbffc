#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "riskshare/market.hpp"

namespace riskshare {

/// Vector of tradeable securities C = (C_1, ..., C_k) with a non-singular
/// covariance matrix. Conditioning is checked once, here.
class SecurityBasket {
 public:
  /// Smallest singular value of Var[C] must exceed this times the largest.
  static constexpr double kConditionThreshold = 1e-10;

  explicit SecurityBasket(std::vector<Rv> securities);

  /// Basket made of the agents' endowments (the complete-market case).
  static SecurityBasket of_endowments(const Market& market);

  std::size_t size() const { return securities_.size(); }
  const std::vector<Rv>& securities() const { return securities_; }
  const Rv& security(std::size_t j) const { return securities_.at(j); }
  const SpacePtr& space_ptr() const { return securities_.front().space_ptr(); }

  const Eigen::VectorXd& expected() const { return expected_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  /// Cov(C, x) as a k-vector.
  Eigen::VectorXd cov_with(const Rv& x) const;
  /// Var^{-1}[C] v.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
  /// v' Var^{-1}[C] v.
  double inverse_quadratic_form(const Eigen::VectorXd& v) const;
  /// Payoff of the portfolio a . C.
  Rv portfolio(const Eigen::VectorXd& units) const;

 private:
  std::vector<Rv> securities_;
  Eigen::VectorXd expected_;
  Eigen::MatrixXd covariance_;
  Eigen::LDLT<Eigen::MatrixXd> factor_;
};

/// Mean-variance demand schedule identified with a covariance vector c:
///   Z(p) = ((E[C] - p) / (2 gamma) - c) Var^{-1}[C].
/// A truthful schedule has c = Cov(C, E_i).
struct DemandSchedule {
  double gamma;
  Eigen::VectorXd c;

  Eigen::VectorXd evaluate(const SecurityBasket& basket, const Eigen::VectorXd& price) const;
};

/// Price at which the given schedules sum to zero: E[C] - 2 g sum_j c_j,
/// g = (sum_j 1/gamma_j)^-1.
Eigen::VectorXd clearing_price(const SecurityBasket& basket, std::span<const DemandSchedule> schedules);

Eigen::VectorXd cov_vector(const SecurityBasket& basket, const Rv& x);

/// Unique maximizer of a -> U_i(a.C + E_i) - a.p.
Eigen::VectorXd demand(double gamma, const Rv& endowment, const SecurityBasket& basket,
                       const Eigen::VectorXd& price);

/// Schedules Z_1..Z_n of the agents reporting their true endowments.
std::vector<DemandSchedule> truthful_schedules(const Market& market, const SecurityBasket& basket);

}  // namespace riskshare
