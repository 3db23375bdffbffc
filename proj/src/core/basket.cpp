#include "riskshare/basket.hpp"

#include <sstream>

#include "riskshare/errors.hpp"

namespace riskshare {

SecurityBasket::SecurityBasket(std::vector<Rv> securities) : securities_(std::move(securities)) {
  if (securities_.empty()) throw ValidationError("a security basket needs at least one security");
  const auto k = static_cast<Eigen::Index>(securities_.size());
  for (const auto& c : securities_) {
    if (!c.same_space(securities_.front())) throw ValidationError("securities live on different probability spaces");
  }
  expected_.resize(k);
  covariance_.resize(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    expected_[a] = mean(securities_[a]);
    for (Eigen::Index b = 0; b <= a; ++b) {
      covariance_(a, b) = covariance_(b, a) = cov(securities_[a], securities_[b]);
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(covariance_);
  const auto& sv = svd.singularValues();
  const double largest = sv.maxCoeff();
  const double smallest = sv.minCoeff();
  if (!(largest > 0.0) || smallest <= kConditionThreshold * largest) {
    std::ostringstream msg;
    msg << "Var[C] is singular: smallest singular value " << smallest << " vs largest " << largest;
    throw SingularCovarianceError(msg.str());
  }
  factor_.compute(covariance_);
}

SecurityBasket SecurityBasket::of_endowments(const Market& market) {
  try {
    return SecurityBasket(market.endowments());
  } catch (const SingularCovarianceError& e) {
    throw SingularCovarianceError(std::string("endowment covariance Var[E_1..E_n] is singular (") + e.what() + ")");
  }
}

Eigen::VectorXd SecurityBasket::cov_with(const Rv& x) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(securities_.size()));
  for (std::size_t j = 0; j < securities_.size(); ++j) out[static_cast<Eigen::Index>(j)] = cov(securities_[j], x);
  return out;
}

Eigen::VectorXd SecurityBasket::solve(const Eigen::VectorXd& v) const { return factor_.solve(v); }

double SecurityBasket::inverse_quadratic_form(const Eigen::VectorXd& v) const { return v.dot(solve(v)); }

Rv SecurityBasket::portfolio(const Eigen::VectorXd& units) const {
  if (units.size() != static_cast<Eigen::Index>(securities_.size())) {
    throw ValidationError("portfolio units length does not match basket size");
  }
  Eigen::VectorXd payoff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space_ptr()->size()));
  for (std::size_t j = 0; j < securities_.size(); ++j) {
    payoff += units[static_cast<Eigen::Index>(j)] * securities_[j].payoffs();
  }
  return Rv(space_ptr(), std::move(payoff));
}

Eigen::VectorXd DemandSchedule::evaluate(const SecurityBasket& basket, const Eigen::VectorXd& price) const {
  return basket.solve((basket.expected() - price) / (2.0 * gamma) - c);
}

Eigen::VectorXd clearing_price(const SecurityBasket& basket, std::span<const DemandSchedule> schedules) {
  if (schedules.empty()) throw ValidationError("clearing price needs at least one schedule");
  double inv = 0.0;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basket.size()));
  for (const auto& z : schedules) {
    inv += 1.0 / z.gamma;
    total += z.c;
  }
  return basket.expected() - (2.0 / inv) * total;
}

Eigen::VectorXd cov_vector(const SecurityBasket& basket, const Rv& x) { return basket.cov_with(x); }

Eigen::VectorXd demand(double gamma, const Rv& endowment, const SecurityBasket& basket,
                       const Eigen::VectorXd& price) {
  if (!(gamma > 0.0)) throw ValidationError("demand: risk aversion must be > 0");
  return DemandSchedule{gamma, basket.cov_with(endowment)}.evaluate(basket, price);
}

std::vector<DemandSchedule> truthful_schedules(const Market& market, const SecurityBasket& basket) {
  std::vector<DemandSchedule> out;
  out.reserve(market.size());
  for (const auto& a : market.agents()) out.push_back({a.gamma, basket.cov_with(a.endowment)});
  return out;
}

}  // namespace riskshare
