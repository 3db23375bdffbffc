#include "riskshare/pareto.hpp"

#include <algorithm>

namespace riskshare::pareto {

Eigen::MatrixXd sharing_weights(const Market& market) {
  const auto n = static_cast<Eigen::Index>(market.size());
  const double g = market.aggregate_gamma();
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double gi = market.gamma(static_cast<std::size_t>(i));
    a.row(i).setConstant(g / gi);
    a(i, i) = (g - gi) / gi;
  }
  return a;
}

ParetoSharing optimal_sharing(const Market& market) {
  ParetoSharing out{{}, sharing_weights(market)};
  const auto n = market.size();
  out.contracts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rv c = Rv::zero(market.space_ptr());
    for (std::size_t j = 0; j < n; ++j) {
      c += out.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * market.endowment(j);
    }
    out.contracts.push_back(std::move(c));
  }
  return out;
}

double representative_utility(const Market& market) {
  return mv_utility(market.aggregate_gamma(), market.aggregate_endowment());
}

double aggregate_gain(const Market& market) {
  double total = 0.0;
  for (const auto& a : market.agents()) total += a.gamma * var(a.endowment);
  return total - market.aggregate_gamma() * var(market.aggregate_endowment());
}

CapmEquilibrium capm_equilibrium(const Market& market, const SecurityBasket& basket) {
  const auto n = static_cast<Eigen::Index>(market.size());
  const auto k = static_cast<Eigen::Index>(basket.size());
  const double g = market.aggregate_gamma();
  const auto sharing = optimal_sharing(market);

  CapmEquilibrium eq;
  eq.prices = basket.expected() - 2.0 * g * basket.cov_with(market.aggregate_endowment());
  eq.allocation.resize(n, k);
  eq.utility_levels.resize(n);
  eq.gains.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Eigen::VectorXd c = basket.cov_with(sharing.contracts[idx]);
    eq.allocation.row(i) = basket.solve(c).transpose();
    eq.gains[i] = market.gamma(idx) * basket.inverse_quadratic_form(c);
    eq.utility_levels[i] = eq.gains[i] + mv_utility(market.gamma(idx), market.endowment(idx));
  }
  return eq;
}

Eigen::VectorXd endowment_prices_unchecked(const Market& market) {
  const auto n = static_cast<Eigen::Index>(market.size());
  const double g = market.aggregate_gamma();
  const Rv& total = market.aggregate_endowment();
  Eigen::VectorXd p(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Rv& ej = market.endowment(static_cast<std::size_t>(j));
    // (1_n Var[E_vec])_j = sum_i Cov(E_i, E_j) = Cov(E, E_j)
    p[j] = mean(ej) - 2.0 * g * cov(total, ej);
  }
  return p;
}

Eigen::VectorXd endowment_prices(const Market& market) {
  // Construction performs the conditioning check and throws when singular.
  const auto basket = SecurityBasket::of_endowments(market);
  (void)basket;
  return endowment_prices_unchecked(market);
}

Eigen::VectorXd optimal_utility_levels(const Market& market) {
  const auto sharing = optimal_sharing(market);
  Eigen::VectorXd v(static_cast<Eigen::Index>(market.size()));
  for (std::size_t i = 0; i < market.size(); ++i) {
    const double gi = market.gamma(i);
    v[static_cast<Eigen::Index>(i)] = gi * var(sharing.contracts[i]) + mv_utility(gi, market.endowment(i));
  }
  return v;
}

ConstrainedLoss constrained_loss(const Market& market, const SecurityBasket& basket) {
  const auto sharing = optimal_sharing(market);
  ConstrainedLoss out{Eigen::VectorXd(static_cast<Eigen::Index>(market.size())), 0.0};
  for (std::size_t i = 0; i < market.size(); ++i) {
    const Rv& ci = sharing.contracts[i];
    const double spanned = basket.inverse_quadratic_form(basket.cov_with(ci));
    // Projection onto span{1, C} can exceed Var[C*_i] only by rounding.
    const double loss = market.gamma(i) * std::max(0.0, var(ci) - spanned);
    out.per_agent[static_cast<Eigen::Index>(i)] = loss;
    out.total += loss;
  }
  return out;
}

Eigen::MatrixXd reservation_prices(const Market& market, const SecurityBasket& basket) {
  const auto n = static_cast<Eigen::Index>(market.size());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(basket.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    out.row(i) = (basket.expected() - 2.0 * market.gamma(idx) * basket.cov_with(market.endowment(idx))).transpose();
  }
  return out;
}

}  // namespace riskshare::pareto
