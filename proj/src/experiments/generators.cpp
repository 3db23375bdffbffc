#include "riskshare/generators.hpp"

#include <cmath>
#include <string>

#include "riskshare/errors.hpp"

namespace riskshare::experiments {

namespace {

std::vector<double> random_probs(Rng& rng, std::size_t states) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> probs(states);
  double total = 0.0;
  for (auto& p : probs) {
    p = unit(rng) + 0.5;
    total += p;
  }
  for (auto& p : probs) p /= total;
  return probs;
}

Rv gaussian(Rng& rng, const SpacePtr& space) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(space->size()));
  for (auto& v : x) v = normal(rng);
  return Rv(space, x);
}

double l2_norm(const Rv& x) { return std::sqrt(var(x) + mean(x) * mean(x)); }

}  // namespace

void AgentSequenceSpec::validate() const {
  if (!(norm_bound > 0.0) || !std::isfinite(norm_bound)) throw ValidationError("norm_bound must be finite and > 0");
  if (!(gamma_lo > 0.0) || !(gamma_lo <= gamma_hi) || !std::isfinite(gamma_hi)) {
    throw ValidationError("risk aversion bounds need 0 < gamma_lo <= gamma_hi");
  }
  if (sizes.empty()) throw ValidationError("market size schedule is empty");
  for (auto n : sizes) {
    if (n < 2) throw ValidationError("every market size must be >= 2");
  }
  if (states < 2) throw ValidationError("states must be >= 2");
  if (securities < 1 || securities >= states) throw ValidationError("securities must lie in [1, states - 1]");
}

MarketSequence::MarketSequence(AgentSequenceSpec spec)
    : spec_(std::move(spec)), basket_([&] {
        spec_.validate();
        Rng rng(spec_.seed);
        const SpacePtr space = ProbSpace::make(random_probs(rng, spec_.states));
        std::size_t largest = 0;
        for (auto n : spec_.sizes) largest = std::max(largest, n);

        std::uniform_real_distribution<double> gamma(spec_.gamma_lo, spec_.gamma_hi);
        agents_.reserve(largest);
        for (std::size_t i = 0; i < largest; ++i) {
          const double g = gamma(rng);
          if (spec_.shape == AgentSequenceSpec::Shape::constant) {
            agents_.push_back({g, Rv::constant(space, spec_.norm_bound)});
            continue;
          }
          const Rv x = gaussian(rng, space).centered();
          agents_.push_back({g, x * (spec_.norm_bound / std::sqrt(var(x)))});
        }
        // Securities come from a separate stream so the agents do not depend
        // on the basket size. They are made uncorrelated with unit variance,
        // so allocations are measured on a common scale.
        Rng basket_rng(spec_.seed ^ 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> price_level(0.5, 2.0);
        std::vector<Rv> securities;
        while (securities.size() < spec_.securities) {
          Rv x = gaussian(basket_rng, space).centered();
          for (const auto& q : securities) x -= cov(x, q - mean(q)) * (q - mean(q));
          const double sd = std::sqrt(var(x));
          if (sd < 1e-6) continue;
          securities.push_back(x / sd + price_level(basket_rng));
        }
        return SecurityBasket(std::move(securities));
      }()) {}

Market MarketSequence::market(std::size_t n) const {
  if (n < 2 || n > agents_.size()) {
    throw ValidationError("market size " + std::to_string(n) + " outside [2, " + std::to_string(agents_.size()) + "]");
  }
  std::vector<Agent> agents(agents_.begin(), agents_.begin() + static_cast<std::ptrdiff_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = agents[i];
    if (a.gamma < spec_.gamma_lo || a.gamma > spec_.gamma_hi) {
      throw PreconditionError("generated agent " + std::to_string(i) + " violates the risk aversion bounds");
    }
    if (l2_norm(a.endowment) > spec_.norm_bound * (1.0 + 1e-12)) {
      throw PreconditionError("generated agent " + std::to_string(i) + " violates the endowment norm bound");
    }
  }
  return Market(std::move(agents));
}

Market random_market(Rng& rng, const RandomMarketOptions& options) {
  if (options.agents < 2) throw ValidationError("random market needs at least two agents");
  if (options.states < 2) throw ValidationError("random market needs at least two states");
  const SpacePtr space = ProbSpace::make(random_probs(rng, options.states));
  std::uniform_real_distribution<double> gamma(options.gamma_lo, options.gamma_hi);
  std::uniform_real_distribution<double> shift(-options.mean_scale, options.mean_scale);
  const double common = gamma(rng);
  std::vector<Agent> agents;
  agents.reserve(options.agents);
  for (std::size_t i = 0; i < options.agents; ++i) {
    const double g = options.homogeneous ? common : gamma(rng);
    agents.push_back({g, options.endowment_scale * gaussian(rng, space) + shift(rng)});
  }
  return Market(std::move(agents));
}

SecurityBasket random_basket(Rng& rng, const SpacePtr& space, std::size_t k) {
  if (k == 0 || k >= space->size()) throw ValidationError("basket size must lie in [1, states - 1]");
  std::uniform_real_distribution<double> shift(0.5, 2.0);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Rv> securities;
    securities.reserve(k);
    for (std::size_t j = 0; j < k; ++j) securities.push_back(gaussian(rng, space) + shift(rng));
    try {
      SecurityBasket basket(std::move(securities));
      const Eigen::VectorXd sv = basket.covariance().jacobiSvd().singularValues();
      if (sv[sv.size() - 1] > 1e-3 * sv[0]) return basket;
    } catch (const SingularCovarianceError&) {
    }
  }
  throw PreconditionError("could not draw a well conditioned basket");
}

std::pair<Rv, Rv> moment_pair_endowments(double var1, double var2, double rho) {
  if (!(var1 >= 0.0) || !(var2 >= 0.0)) throw ValidationError("variances must be >= 0");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("correlation must lie in [-1, 1]");
  const SpacePtr space = ProbSpace::uniform(3);
  // orthonormal centered directions on three equally likely states
  const Rv u1(space, std::vector<double>{std::sqrt(1.5), -std::sqrt(1.5), 0.0});
  const Rv u2(space, std::vector<double>{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), -std::sqrt(2.0)});
  const double orth = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  return {std::sqrt(var1) * u1, std::sqrt(var2) * (rho * u1 + orth * u2)};
}

Market uncorrelated_unit_market(std::size_t n, double gamma) {
  if (n < 2) throw ValidationError("market needs at least two agents");
  const std::size_t m = n + 1;
  const SpacePtr space = ProbSpace::uniform(m);
  std::vector<Agent> agents;
  agents.reserve(n);
  // Helmert rows: h_k = (1, ..., 1, -k, 0, ...) / sqrt(k (k + 1)) times sqrt(m)
  for (std::size_t k = 1; k <= n; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t s = 0; s < k; ++s) x[static_cast<Eigen::Index>(s)] = 1.0;
    x[static_cast<Eigen::Index>(k)] = -static_cast<double>(k);
    const double kk = static_cast<double>(k);
    x *= std::sqrt(static_cast<double>(m) / (kk * (kk + 1.0)));
    agents.push_back({gamma, Rv(space, x)});
  }
  return Market(std::move(agents));
}

}  // namespace riskshare::experiments
