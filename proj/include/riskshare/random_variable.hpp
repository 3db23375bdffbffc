#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "riskshare/prob_space.hpp"

namespace riskshare {

/// Payoff vector over a finite probability space.
///
/// Values are immutable once built; arithmetic returns new variables. Every
/// binary operation requires both operands to live on the same space.
class Rv {
 public:
  Rv(SpacePtr space, Eigen::VectorXd payoffs);
  Rv(SpacePtr space, const std::vector<double>& payoffs);

  static Rv constant(SpacePtr space, double value);
  static Rv zero(SpacePtr space) { return constant(std::move(space), 0.0); }

  const ProbSpace& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }
  const Eigen::VectorXd& payoffs() const { return payoffs_; }
  std::size_t size() const { return static_cast<std::size_t>(payoffs_.size()); }
  double operator[](std::size_t state) const { return payoffs_[static_cast<Eigen::Index>(state)]; }

  bool same_space(const Rv& other) const;

  /// Same variable shifted to zero mean.
  Rv centered() const;

  Rv& operator+=(const Rv& other);
  Rv& operator-=(const Rv& other);
  Rv& operator*=(double scale);
  Rv& operator+=(double cash);

  friend Rv operator+(Rv lhs, const Rv& rhs) { return lhs += rhs; }
  friend Rv operator-(Rv lhs, const Rv& rhs) { return lhs -= rhs; }
  friend Rv operator*(double scale, Rv x) { return x *= scale; }
  friend Rv operator*(Rv x, double scale) { return x *= scale; }
  friend Rv operator/(Rv x, double scale) { return x *= 1.0 / scale; }
  friend Rv operator+(Rv x, double cash) { return x += cash; }
  friend Rv operator-(Rv x, double cash) { return x += -cash; }
  friend Rv operator-(Rv x) { return x *= -1.0; }

 private:
  void require_same_space(const Rv& other) const;

  SpacePtr space_;
  Eigen::VectorXd payoffs_;
};

double mean(const Rv& x);
/// Computed on centered payoffs, which is E[xy] - E[x]E[y] without the
/// cancellation.
double cov(const Rv& x, const Rv& y);
double var(const Rv& x);
/// Correlation coefficient; zero when either variable is constant.
double correlation(const Rv& x, const Rv& y);
/// Mean-variance utility E[x] - gamma Var[x].
double mv_utility(double gamma, const Rv& x);

/// Equality of random variables modulo an additive constant: Var[x - y] < tol.
inline constexpr double kUpToConstantsTolerance = 1e-18;
bool equal_up_to_constants(const Rv& x, const Rv& y, double tol = kUpToConstantsTolerance);

/// Sum of a non-empty list of variables.
Rv sum(const std::vector<Rv>& xs);

}  // namespace riskshare
