#include "riskshare/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare::oracle {

namespace {

void check_index(const Market& market, std::size_t i) {
  if (i >= market.size()) throw ValidationError("agent index " + std::to_string(i) + " out of range");
}

Rv combine(const std::vector<Rv>& basis, const Eigen::VectorXd& coefficients) {
  Rv out = Rv::zero(basis.front().space_ptr());
  for (std::size_t k = 0; k < basis.size(); ++k) out += coefficients[static_cast<Eigen::Index>(k)] * basis[k];
  return out;
}

// Centered orthonormal basis of span{xs}; near-dependent directions dropped.
std::vector<Rv> orthonormal_span(const std::vector<Rv>& xs) {
  std::vector<Rv> basis;
  for (const auto& x : xs) {
    Rv r = x.centered();
    const double scale = std::sqrt(var(r));
    for (const auto& q : basis) r -= cov(r, q) * q;
    const double norm = std::sqrt(var(r));
    if (norm > 1e-9 * std::max(1.0, scale)) basis.push_back(r / norm);
  }
  return basis;
}

}  // namespace

CoefficientSearchSpec CoefficientSearchSpec::for_market(const Market& market, double bound) {
  const auto n = static_cast<Eigen::Index>(market.size());
  return {market.endowments(), {Eigen::VectorXd::Constant(n, -bound), Eigen::VectorXd::Constant(n, bound)}, {}};
}

void CoefficientSearchSpec::validate() const {
  if (basis.empty()) throw ValidationError("coefficient search needs a non-empty basis");
  const auto k = static_cast<Eigen::Index>(basis.size());
  if (bounds.lo.size() != k || bounds.hi.size() != k) throw ValidationError("one bound interval per basis element");
  for (const auto& b : basis) {
    if (!b.same_space(basis.front())) throw ValidationError("basis elements live on different spaces");
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!std::isfinite(bounds.lo[j]) || !std::isfinite(bounds.hi[j]) || !(bounds.lo[j] < bounds.hi[j])) {
      throw ValidationError("coefficient bounds must be finite with lo < hi");
    }
  }
}

double w_objective(const Market& market, std::size_t i, const Rv& report) {
  check_index(market, i);
  const double g = market.aggregate_gamma();
  const double gi = market.gamma(i);
  const Rv& own = market.endowment(i);
  const Rv& total = market.aggregate_endowment();
  const Rv others = total - own;
  const Rv kept = own - report;
  return (gi - g) / (2.0 * g) * var(kept) + cov(total, kept) + var(report) +
         (1.0 - g / (gi - g)) * cov(report, others);
}

CoefficientSearchResult argmax_reported_utility(const Market& market, std::size_t i,
                                                const CoefficientSearchSpec& spec) {
  check_index(market, i);
  spec.validate();
  auto objective = [&](const Eigen::VectorXd& c) { return w_objective(market, i, combine(spec.basis, c)); };

  const Eigen::VectorXd start = 0.5 * (spec.bounds.lo + spec.bounds.hi);
  Eigen::VectorXd best = search::coordinate_descent(objective, start, spec.bounds, spec.descent);
  const bool at_bound = search::on_boundary(best, spec.bounds);
  if (!at_bound) best = search::newton_polish(objective, best);
  Rv payoff = combine(spec.basis, best);
  const double value = w_objective(market, i, payoff);
  return {std::move(best), std::move(payoff), value, at_bound};
}

double argmax_percentage(const Market& market, std::size_t i, double lo, double hi) {
  check_index(market, i);
  if (!(lo < hi)) throw ValidationError("percentage search needs lo < hi");
  const Rv& own = market.endowment(i);
  auto line = [&](double b) { return w_objective(market, i, b * own); };
  double b = search::golden_section(line, lo, hi, 1e-10);
  if (b - lo > 1e-6 && hi - b > 1e-6) {
    auto as_vector = [&](const Eigen::VectorXd& x) { return line(x[0]); };
    b = search::newton_polish(as_vector, Eigen::VectorXd::Constant(1, b))[0];
  }
  return std::clamp(b, lo, hi);
}

Eigen::VectorXd argmax_demand(double gamma, const Rv& endowment, const SecurityBasket& basket,
                              const Eigen::VectorXd& price, const DemandSearchSpec& spec) {
  if (!(gamma > 0.0)) throw ValidationError("risk aversion must be > 0");
  if (static_cast<std::size_t>(price.size()) != basket.size()) throw ValidationError("price length != basket size");
  auto loss = [&](const Eigen::VectorXd& a) {
    return -(mv_utility(gamma, basket.portfolio(a) + endowment) - a.dot(price));
  };
  const auto k = static_cast<Eigen::Index>(basket.size());
  const search::Box box{Eigen::VectorXd::Constant(k, -spec.bound), Eigen::VectorXd::Constant(k, spec.bound)};
  Eigen::VectorXd best = search::grid_refine(loss, box, spec.grid);
  if (!search::on_boundary(best, box)) best = search::newton_polish(loss, best);
  return best;
}

DynamicsTrajectory best_response_dynamics(const Market& market, std::vector<Rv> init, std::size_t max_rounds,
                                          double tol) {
  const std::size_t n = market.size();
  if (init.size() != n) throw ValidationError("initial profile needs one report per agent");
  for (const auto& r : init) {
    if (!r.same_space(market.endowment(0))) throw ValidationError("initial report on a different space");
  }

  DynamicsTrajectory out{{init}, false, 0.0};
  std::vector<Rv> profile = std::move(init);
  for (std::size_t round = 0; round < max_rounds; ++round) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Rv> view = profile;
      view[i] = market.endowment(i);
      const Market facing = market.with_endowments(view);

      // In orthonormal coordinates W is isotropic, so one or two sweeps of
      // coordinate descent already land next to the minimizer.
      CoefficientSearchSpec spec;
      spec.basis = orthonormal_span(view);
      if (spec.basis.empty()) {
        profile[i] = Rv::zero(market.space_ptr());
        continue;
      }
      double radius = 0.0;
      for (const auto& x : view) radius += std::sqrt(var(x));
      const auto dim = static_cast<Eigen::Index>(spec.basis.size());
      spec.bounds = {Eigen::VectorXd::Constant(dim, -100.0 * radius), Eigen::VectorXd::Constant(dim, 100.0 * radius)};
      Rv reply = argmax_reported_utility(facing, i, spec).payoff.centered();

      moved = std::max(moved, std::sqrt(var(reply - profile[i])));
      profile[i] = std::move(reply);
    }
    out.profiles.push_back(profile);
    out.last_move = moved;
    if (moved < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double phi(const Market& market, std::size_t i, const SecurityBasket& basket,
           std::span<const DemandSchedule> others, const Eigen::VectorXd& price) {
  check_index(market, i);
  Eigen::VectorXd units = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basket.size()));
  for (const auto& z : others) units -= z.evaluate(basket, price);
  return mv_utility(market.gamma(i), market.endowment(i) + basket.portfolio(units)) - units.dot(price);
}

Eigen::VectorXd argmax_phi(const Market& market, std::size_t i, const SecurityBasket& basket,
                           std::span<const DemandSchedule> others, const PriceSearchSpec& spec) {
  check_index(market, i);
  if (others.empty()) throw ValidationError("price search needs at least one other schedule");
  if (spec.starts == 0) throw ValidationError("price search needs at least one start");
  auto loss = [&](const Eigen::VectorXd& p) { return -phi(market, i, basket, others, p); };

  const Eigen::VectorXd scale = basket.covariance().diagonal().cwiseSqrt();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::VectorXd best = basket.expected();
  double fbest = loss(best);
  for (std::size_t s = 0; s < spec.starts; ++s) {
    Eigen::VectorXd start = basket.expected();
    if (s > 0) {
      for (Eigen::Index j = 0; j < start.size(); ++j) start[j] += spec.spread * scale[j] * normal(rng);
    }
    search::NelderMeadOptions options;
    options.initial_step = spec.spread * scale.mean();
    const Eigen::VectorXd candidate = search::nelder_mead(loss, start, options);
    const double fc = loss(candidate);
    if (fc < fbest) {
      fbest = fc;
      best = candidate;
    }
  }
  return search::newton_polish(loss, best);
}

}  // namespace riskshare::oracle
