#pragma once

#include <vector>

#include <Eigen/Dense>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"

namespace riskshare::pareto {

/// Pareto-optimal sharing rule C*_i = a*_i . (E_1, ..., E_n) with
///   a*_ii = (gamma - gamma_i) / gamma_i,  a*_ij = gamma / gamma_i  (j != i).
/// Contracts carry no added constants.
struct ParetoSharing {
  std::vector<Rv> contracts;
  Eigen::MatrixXd weights;  // n x n, row i = a*_i
};

/// Price-allocation equilibrium of a security basket.
struct CapmEquilibrium {
  Eigen::VectorXd prices;          // p* (k)
  Eigen::MatrixXd allocation;      // n x k, row i = a*_i
  Eigen::VectorXd utility_levels;  // v_i(p*)
  Eigen::VectorXd gains;           // v_i(p*) - U_i(E_i)
};

struct ConstrainedLoss {
  Eigen::VectorXd per_agent;
  double total;
};

Eigen::MatrixXd sharing_weights(const Market& market);
ParetoSharing optimal_sharing(const Market& market);

/// E[E] - gamma Var[E]: aggregate utility after optimal sharing.
double representative_utility(const Market& market);

/// sum_i gamma_i Var[E_i] - gamma Var[E].
double aggregate_gain(const Market& market);

/// p* = E[C] - 2 gamma Cov(C, E);  a*_i = Cov(C, C*_i) Var^{-1}[C];
/// v_i(p*) = gamma_i Cov(C,C*_i) Var^{-1}[C] Cov(C,C*_i) + U_i(E_i).
CapmEquilibrium capm_equilibrium(const Market& market, const SecurityBasket& basket);

/// Equilibrium prices of the endowments themselves,
///   p*_E = E[E_vec] - 2 gamma 1_n Var[E_vec].
/// Throws SingularCovarianceError when the endowments are collinear (as
/// centered vectors); pass an explicit reduced basket to capm_equilibrium
/// instead in that case.
Eigen::VectorXd endowment_prices(const Market& market);

/// Same formula without the invertibility check. Used by the sharing
/// mechanism on reported endowments, which may well be collinear.
Eigen::VectorXd endowment_prices_unchecked(const Market& market);

/// v^o_i = gamma_i Var[C*_i] + U_i(E_i).
Eigen::VectorXd optimal_utility_levels(const Market& market);

/// Utility loss of sharing through `basket` instead of optimally:
///   gamma_i (Var[C*_i] - Cov(C,C*_i) Var^{-1}[C] Cov(C,C*_i)) >= 0.
ConstrainedLoss constrained_loss(const Market& market, const SecurityBasket& basket);

/// Price vector at which agent i demands nothing, E[C] - 2 gamma_i Cov(C, E_i).
/// The identification with the agent's reservation price is inferred: the
/// source defines the term without giving a formula.
Eigen::MatrixXd reservation_prices(const Market& market, const SecurityBasket& basket);

}  // namespace riskshare::pareto
