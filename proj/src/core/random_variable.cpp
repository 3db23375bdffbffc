#include "riskshare/random_variable.hpp"

#include <cmath>

#include "riskshare/errors.hpp"

namespace riskshare {

Rv::Rv(SpacePtr space, Eigen::VectorXd payoffs) : space_(std::move(space)), payoffs_(std::move(payoffs)) {
  if (!space_) throw ValidationError("random variable needs a probability space");
  if (static_cast<std::size_t>(payoffs_.size()) != space_->size()) {
    throw ValidationError("payoff length " + std::to_string(payoffs_.size()) +
                          " does not match state count " + std::to_string(space_->size()));
  }
  if (!payoffs_.allFinite()) throw ValidationError("payoffs must be finite");
}

Rv::Rv(SpacePtr space, const std::vector<double>& payoffs)
    : Rv(std::move(space),
         Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(payoffs.data(), static_cast<Eigen::Index>(payoffs.size())))) {}

Rv Rv::constant(SpacePtr space, double value) {
  const auto m = static_cast<Eigen::Index>(space->size());
  return Rv(std::move(space), Eigen::VectorXd::Constant(m, value));
}

bool Rv::same_space(const Rv& other) const {
  return space_ == other.space_ || *space_ == *other.space_;
}

void Rv::require_same_space(const Rv& other) const {
  if (!same_space(other)) throw ValidationError("random variables live on different probability spaces");
}

Rv Rv::centered() const { return *this - mean(*this); }

Rv& Rv::operator+=(const Rv& other) {
  require_same_space(other);
  payoffs_ += other.payoffs_;
  return *this;
}

Rv& Rv::operator-=(const Rv& other) {
  require_same_space(other);
  payoffs_ -= other.payoffs_;
  return *this;
}

Rv& Rv::operator*=(double scale) {
  payoffs_ *= scale;
  return *this;
}

Rv& Rv::operator+=(double cash) {
  payoffs_.array() += cash;
  return *this;
}

double mean(const Rv& x) { return x.space().probs().dot(x.payoffs()); }

double cov(const Rv& x, const Rv& y) {
  if (!x.same_space(y)) throw ValidationError("cov: random variables live on different probability spaces");
  const auto& p = x.space().probs();
  const Eigen::ArrayXd dx = x.payoffs().array() - mean(x);
  const Eigen::ArrayXd dy = y.payoffs().array() - mean(y);
  return (p.array() * dx * dy).sum();
}

double var(const Rv& x) { return cov(x, x); }

double correlation(const Rv& x, const Rv& y) {
  const double vx = var(x);
  const double vy = var(y);
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return cov(x, y) / std::sqrt(vx * vy);
}

double mv_utility(double gamma, const Rv& x) { return mean(x) - gamma * var(x); }

bool equal_up_to_constants(const Rv& x, const Rv& y, double tol) { return var(x - y) < tol; }

Rv sum(const std::vector<Rv>& xs) {
  if (xs.empty()) throw ValidationError("sum of an empty list of random variables");
  Rv total = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) total += xs[i];
  return total;
}

}  // namespace riskshare
