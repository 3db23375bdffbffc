#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "riskshare/basket.hpp"
#include "riskshare/market.hpp"
#include "riskshare/search.hpp"

// Brute-force counterparts of the closed forms. Everything here is built
// from moments and generic searches; no sharing or equilibrium formula is
// reused, so agreement with the engines is evidence rather than tautology.
namespace riskshare::oracle {

struct CoefficientSearchSpec {
  std::vector<Rv> basis;
  search::Box bounds;
  search::CoordinateDescentOptions descent;

  /// Basis E_1..E_n of the market, every coefficient in [-bound, bound].
  static CoefficientSearchSpec for_market(const Market& market, double bound = 10.0);
  /// Checks non-empty basis on one space, finite bounds with lo < hi.
  void validate() const;
};

struct CoefficientSearchResult {
  Eigen::VectorXd coefficients;
  Rv payoff;          // sum_k coefficients_k basis_k
  double objective;   // W_i at the payoff
  bool at_bound;      // some coefficient sits on a face of the box
};

/// Convex criterion whose minimizer over centered B is agent i's best
/// report. The market's endowments are read as: E_i true, the others as
/// reported.
double w_objective(const Market& market, std::size_t i, const Rv& report);

CoefficientSearchResult argmax_reported_utility(const Market& market, std::size_t i,
                                                const CoefficientSearchSpec& spec);

/// Golden-section search of b in [lo, hi] minimizing W_i(b E_i).
double argmax_percentage(const Market& market, std::size_t i, double lo = 0.0, double hi = 100.0);

struct DemandSearchSpec {
  double bound = 50.0;
  search::GridOptions grid{};
};

/// Maximizer of a -> U(a.C + endowment) - a.price by grid refinement.
Eigen::VectorXd argmax_demand(double gamma, const Rv& endowment, const SecurityBasket& basket,
                              const Eigen::VectorXd& price, const DemandSearchSpec& spec = {});

struct DynamicsTrajectory {
  std::vector<std::vector<Rv>> profiles;  // profiles[0] is the initial profile
  bool converged;
  double last_move;  // largest centered-norm change in the final round
};

/// Round-robin best replies: in turn each agent replaces its report by the
/// numeric minimizer of W over span{E_i, other reports}. Stops when a round
/// moves no report by more than tol or after max_rounds.
DynamicsTrajectory best_response_dynamics(const Market& market, std::vector<Rv> init, std::size_t max_rounds = 200,
                                          double tol = 1e-11);

/// Utility of agent i when it picks the clearing price p and receives
/// minus the sum of the others' demands there.
double phi(const Market& market, std::size_t i, const SecurityBasket& basket,
           std::span<const DemandSchedule> others, const Eigen::VectorXd& price);

struct PriceSearchSpec {
  std::size_t starts = 4;
  double spread = 1.0;  // start offsets around E[C], scaled by the securities' deviations
  std::uint64_t seed = 7;
};

/// Multistart Nelder-Mead maximization of phi.
Eigen::VectorXd argmax_phi(const Market& market, std::size_t i, const SecurityBasket& basket,
                           std::span<const DemandSchedule> others, const PriceSearchSpec& spec = {});

}  // namespace riskshare::oracle
