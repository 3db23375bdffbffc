#include <gtest/gtest.h>

#include "riskshare/errors.hpp"
#include "riskshare/nash.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/strategic.hpp"
#include "support.hpp"

namespace riskshare {
namespace {

using testing::centered_distance;
using testing::coin;
using testing::opposed_pair;
using testing::rv;

experiments::RandomMarketOptions homogeneous(std::size_t n, std::size_t m) {
  auto o = testing::small_market(n, m);
  o.homogeneous = true;
  return o;
}

TEST(NashEndowment, OpposedPair) {
  const auto r = nash::nash_endowment(opposed_pair());
  EXPECT_NEAR(r.reported[0][0], 0.5, 1e-15);
  EXPECT_NEAR(r.reported[0][1], -0.5, 1e-15);
  EXPECT_NEAR(r.contracts[0][0], -0.5, 1e-15);
  EXPECT_NEAR(r.contracts[0][1], 0.5, 1e-15);
  EXPECT_NEAR(r.inefficiency, 0.5, 1e-15);
  EXPECT_NEAR(r.per_agent_gain[0], 0.75, 1e-14);
}

TEST(NashEndowment, HomogeneousClosedForms) {
  experiments::Rng rng(1);
  for (std::size_t n : {2u, 3u, 5u, 10u}) {
    const Market m = experiments::random_market(rng, homogeneous(n, 12));
    const auto r = nash::nash_endowment(m);
    const auto pareto_contracts = pareto::optimal_sharing(m).contracts;
    const double nn = static_cast<double>(n);
    EXPECT_LT(centered_distance(r.aggregate, m.aggregate_endowment()), 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      const Rv expected = m.endowment_minus(i) / (nn * nn) + ((nn * (nn - 1) + 1) / (nn * nn)) * m.endowment(i);
      EXPECT_LT(centered_distance(r.reported[i], expected), 1e-12);
      EXPECT_LT(centered_distance(r.contracts[i], ((nn - 1) / nn) * pareto_contracts[i]), 1e-12);
    }
  }
}

TEST(NashEndowment, ZeroInefficiencyWhenScaledRisksCoincide) {
  const auto s = ProbSpace::uniform(3);
  const Rv x = rv(s, {1, 2, -3});
  const Market m({{1.0, x}, {2.0, 0.5 * x + 1.0}, {4.0, 0.25 * x}});
  EXPECT_NEAR(nash::nash_endowment(m).inefficiency, 0.0, 1e-14);
}

TEST(NashEndowment, InvariantsOnRandomMarkets) {
  experiments::Rng rng(2);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 4, 6));
    const auto r = nash::nash_endowment(m);
    EXPECT_GT(nash::equilibrium_denominator(m), 0.0);
    EXPECT_LT(var(sum(r.contracts)), 1e-18);
    EXPECT_GE(r.inefficiency, -1e-9);
    EXPECT_NEAR(r.inefficiency, nash::realized_inefficiency(m, r), 1e-9);
    EXPECT_LT(centered_distance(sum(r.reported), r.aggregate), 1e-12);
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::vector<Rv> view = r.reported;
      view[i] = m.endowment(i);
      const Market facing = m.with_endowments(view);
      EXPECT_LT(var(strategic::best_endowment_response(facing, i) - r.reported[i]), 1e-14);
      if (t < 10) {
        const double at = strategic::reported_utility(facing, i, r.reported[i]);
        for (int d = 0; d < 200; ++d) {
          Eigen::VectorXd x(6);
          for (auto& v : x) v = normal(rng);
          EXPECT_LE(strategic::reported_utility(facing, i, Rv(m.space_ptr(), x)), at + 1e-9);
        }
      }
    }
  }
}

TEST(NashEndowment, AggregateEqualsTotalOnlyForHomogeneousAgents) {
  experiments::Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const bool same = t % 2 == 0;
    const Market m = experiments::random_market(rng, same ? homogeneous(3, 6) : testing::small_market(3, 6));
    const double gap = var(nash::nash_endowment(m).aggregate - m.aggregate_endowment());
    EXPECT_EQ(gap < 1e-18, m.homogeneous(1e-9)) << "t=" << t << " gap=" << gap;
  }
}

TEST(TwoAgentComparison, OpposedPair) {
  const auto t = nash::two_agent_comparison(opposed_pair());
  EXPECT_NEAR(t.gain.pareto_engine, 1.0, 1e-15);
  EXPECT_NEAR(t.gain.nash_engine, 0.75, 1e-14);
  EXPECT_NEAR(t.gain.nash_closed, 0.75, 1e-15);
  EXPECT_NEAR(t.inefficiency.nash_engine, 0.5, 1e-15);
  EXPECT_LT(t.max_discrepancy(), 1e-12);
}

TEST(TwoAgentComparison, RequiresTwoAgents) {
  experiments::Rng rng(4);
  EXPECT_THROW(nash::two_agent_comparison(experiments::random_market(rng, testing::small_market(3, 4))), ValidationError);
}

TEST(TwoAgentComparison, EngineMatchesClosedFormsAndThreshold) {
  experiments::Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2, 5));
    const auto r = nash::two_agent_comparison(m);
    EXPECT_LT(r.max_discrepancy(), 1e-10);
    const bool prefers_nash = r.gain.nash_engine > r.gain.pareto_engine;
    EXPECT_EQ(prefers_nash, m.gamma(0) < 2.0 / 3.0 * m.gamma(1));
  }
  const Market same = experiments::random_market(rng, homogeneous(2, 5));
  const auto r = nash::two_agent_comparison(same);
  EXPECT_NEAR(r.gain.nash_engine, 0.75 * r.gain.pareto_engine, 1e-12);
}

TEST(NashPercentage, UncorrelatedEndowmentsDecouple) {
  const auto s = ProbSpace::uniform(4);
  const Market m({{0.4, rv(s, {1, -1, 0, 0})}, {1.5, rv(s, {0, 0, 3, -3})}});
  const auto r = nash::nash_percentage(m);
  ASSERT_TRUE(r.converged);
  const double g = m.aggregate_gamma();
  EXPECT_NEAR(r.b_star[0], 0.4 / (0.4 + g), 1e-10);
  EXPECT_NEAR(r.b_star[1], 1.5 / (1.5 + g), 1e-10);
}

TEST(NashPercentage, PerfectlyCorrelatedEqualRisksShareEverything) {
  const auto s = ProbSpace::uniform(3);
  const Rv x = rv(s, {1, -2, 1});
  const Market m({{1.0, x}, {1.0, x}});
  const auto r = nash::nash_percentage(m);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.b_star[0], 1.0, 1e-10);
  EXPECT_NEAR(r.b_star[1], 1.0, 1e-10);
}

TEST(NashPercentage, ResidualAndBounds) {
  experiments::Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 3, 6));
    const auto r = nash::nash_percentage(m);
    ASSERT_TRUE(r.converged) << t;
    EXPECT_EQ(r.kappa, 10.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double bi = r.b_star[static_cast<Eigen::Index>(i)];
      EXPECT_GE(bi, 0.0);
      EXPECT_LE(bi, r.kappa);
      EXPECT_LT(std::abs(bi - nash::percentage_best_reply(m, i, r.b_star, r.kappa)), 1e-10);
    }
  }
}

TEST(NashPercentage, ValidatesInputs) {
  const Market m = opposed_pair();
  EXPECT_THROW(nash::nash_percentage(m, {0.0, 0.5, 1e-12, 100}), ValidationError);
  EXPECT_THROW(nash::nash_percentage(m, {10.0, 0.0, 1e-12, 100}), ValidationError);
  EXPECT_THROW(nash::nash_percentage(m, {10.0, 0.5, 0.0, 100}), ValidationError);
  const Market still({{1.0, rv(coin(), {1, -1})}, {1.0, Rv::constant(coin(), 1.0)}});
  EXPECT_THROW(nash::nash_percentage(still), PreconditionError);
}

TEST(NashPercentage, ReportsNonConvergence) {
  experiments::Rng rng(7);
  const Market m = experiments::random_market(rng, testing::small_market(3, 5));
  const auto r = nash::nash_percentage(m, {10.0, 0.5, 1e-12, 2});
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 2u);
  EXPECT_GT(r.residual, 1e-12);
}

TEST(NashPercentage, RiskAversionLimits) {
  // agent 2 almost risk neutral: agent 1 reports truthfully and agent 2's
  // percentage follows the sign of the correlation
  const auto s = ProbSpace::uniform(3);
  const Rv u1 = rv(s, {1, -1, 0}) * std::sqrt(1.5);
  const Rv u2 = rv(s, {1, 1, -2}) / std::sqrt(2.0);
  for (double rho : {-0.5, 0.0, 0.5}) {
    const Market m({{1.0, u1}, {1e-6, rho * u1 + std::sqrt(1 - rho * rho) * u2}});
    const auto r = nash::nash_percentage(m);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.b_star[0], 1.0, 1e-3);
    const double expected = rho < 0 ? 0.0 : rho == 0 ? 0.5 : r.kappa;
    EXPECT_NEAR(r.b_star[1], expected, 1e-3);
  }
}

TEST(NashPrice, HomogeneousAgentsPriceLikePareto) {
  experiments::Rng rng(8);
  for (std::size_t n : {2u, 3u, 5u, 10u}) {
    const Market m = experiments::random_market(rng, homogeneous(n, 12));
    const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 3);
    const auto r = nash::nash_price(m, basket);
    const auto eq = pareto::capm_equilibrium(m, basket);
    EXPECT_LT((r.price - eq.prices).norm(), 1e-12);
    const double nn = static_cast<double>(n);
    EXPECT_LT((r.allocation - ((nn - 1) / nn) * eq.allocation).cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < r.allocation.rows(); ++i) {
      EXPECT_NEAR((eq.allocation.row(i) - r.allocation.row(i)).norm(), eq.allocation.row(i).norm() / nn, 1e-12);
    }
  }
}

TEST(NashPrice, ClearingPressureAndFixedPoint) {
  experiments::Rng rng(9);
  for (int t = 0; t < 60; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 3, 6));
    const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 1 + t % 3);
    const auto r = nash::nash_price(m, basket);
    EXPECT_LT(r.allocation.colwise().sum().norm(), 1e-9);
    const Eigen::VectorXd pareto_price = pareto::capm_equilibrium(m, basket).prices;
    const Eigen::VectorXd gap = r.price - pareto_price;
    EXPECT_LT((gap - 2.0 * m.aggregate_gamma() * r.pressure).norm(), 1e-12);
    for (Eigen::Index j = 0; j < gap.size(); ++j) {
      if (std::abs(r.pressure[j]) > 1e-9) {
        EXPECT_EQ(gap[j] > 0, r.pressure[j] > 0);
      }
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto others = strategic::others_of(r.schedules, i);
      EXPECT_LT((nash::best_price_given_schedules(m, i, basket, others) - r.price).norm(), 1e-9);
    }
  }
}

TEST(NashPrice, TwoAgentPressure) {
  experiments::Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2, 5));
    const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 2);
    const double g1 = m.gamma(0), g2 = m.gamma(1);
    const Eigen::VectorXd expected =
        (g2 - g1) / (2 * g1 * g2) * basket.cov_with(g1 * m.endowment(0) - g2 * m.endowment(1));
    EXPECT_LT((nash::nash_price(m, basket).pressure - expected).norm(), 1e-12);
  }
}

TEST(NashPrice, BestPriceAgainstTruthfulMatchesStrategicResponse) {
  experiments::Rng rng(11);
  const Market m = experiments::random_market(rng, testing::small_market(4, 6));
  const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 2);
  const auto others = strategic::others_of(truthful_schedules(m, basket), 1);
  EXPECT_LT((nash::best_price_given_schedules(m, 1, basket, others) -
             strategic::best_price_response(m, 1, basket, others))
                .norm(),
            1e-12);
}

TEST(UtilityComparison, AggregateDecreaseFormula) {
  experiments::Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 4, 7));
    const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 1 + t % 3);
    const auto c = nash::nash_vs_pareto_utilities(m, basket);
    EXPECT_NEAR(c.aggregate_decrease_direct, c.aggregate_decrease_formula, 1e-9);
  }
}

TEST(UtilityComparison, HomogeneousGainFactor) {
  experiments::Rng rng(13);
  for (std::size_t n : {2u, 3u, 6u}) {
    const Market m = experiments::random_market(rng, homogeneous(n, 10));
    const SecurityBasket basket = experiments::random_basket(rng, m.space_ptr(), 2);
    const auto c = nash::nash_vs_pareto_utilities(m, basket);
    const double nn = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double base = mv_utility(m.gamma(i), m.endowment(i));
      EXPECT_NEAR(c.nash_utilities[r] - base, (nn * nn - 1) / (nn * nn) * (c.pareto_utilities[r] - base), 1e-10);
    }
  }
}

TEST(UtilityComparison, TwoAgentClosedFormMatchesDirectEvaluation) {
  experiments::Rng rng(14);
  for (int t = 0; t < 50; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2, 5));
    SecurityBasket raw = experiments::random_basket(rng, m.space_ptr(), 1);
    const SecurityBasket basket({raw.security(0) / std::sqrt(raw.covariance()(0, 0))});
    const auto c = nash::nash_vs_pareto_utilities(m, basket);
    ASSERT_TRUE(c.closed_form_nash_utility.has_value());
    EXPECT_NEAR(*c.closed_form_nash_utility, c.nash_utilities[0], 1e-10);
  }
  experiments::Rng other(15);
  const Market three = experiments::random_market(other, testing::small_market(3, 5));
  const SecurityBasket basket = experiments::random_basket(other, three.space_ptr(), 1);
  EXPECT_THROW(nash::two_agent_nash_utility_closed_form(three, basket), PreconditionError);
  EXPECT_FALSE(nash::nash_vs_pareto_utilities(three, basket).closed_form_nash_utility.has_value());
}

TEST(UtilityComparison, RiskAverseCounterpartyMakesNashBeneficial) {
  // agent 2 much more risk averse than agent 1, C aligned with C*_1
  const auto s = ProbSpace::uniform(3);
  const Rv e1 = rv(s, {1, -1, 0});
  const Rv e2 = rv(s, {-2, 1, 1});
  const Market m({{0.5, e1}, {20.0, e2}});
  const Rv c = pareto::optimal_sharing(m).contracts[0];
  const SecurityBasket basket({c / std::sqrt(var(c))});
  const auto r = nash::nash_vs_pareto_utilities(m, basket);
  EXPECT_GT(r.nash_utilities[0], r.pareto_utilities[0]);
}

TEST(ExcessReturn, IdentityHoldsInSpan) {
  const auto s = ProbSpace::make({0.2, 0.5, 0.3});
  const SecurityBasket basket({rv(s, {1, 3, 2}), rv(s, {2, 0, 5})});
  const Market m({{1.0, 0.5 * basket.security(0) - 0.2 * basket.security(1) + 1.0},
                  {2.0, 0.1 * basket.security(0) + 0.7 * basket.security(1)}});
  const Rv aggregate = nash::nash_endowment(m).aggregate;
  EXPECT_LT(nash::excess_return_check(m, basket, aggregate), 1e-14);
  EXPECT_LT(nash::excess_return_check(m, basket, 3.0 * basket.security(0) - basket.security(1) + 2.0), 1e-12);
  EXPECT_LT(nash::excess_return_check(m, basket, Rv::constant(s, 4.0)), 1e-14);
}

TEST(ExcessReturn, PreconditionsAreEnforced) {
  const auto s = ProbSpace::uniform(4);
  const SecurityBasket basket({rv(s, {1, 2, 3, 4})});
  const Market inside({{1.0, basket.security(0)}, {2.0, 2.0 * basket.security(0) + 1.0}});
  EXPECT_THROW(nash::excess_return_check(inside, basket, rv(s, {1, 0, 0, 0})), PreconditionError);
  const Market outside({{1.0, basket.security(0)}, {2.0, rv(s, {0, 1, 0, 0})}});
  EXPECT_THROW(nash::excess_return_check(outside, basket, basket.security(0)), PreconditionError);
  EXPECT_THROW(nash::excess_return_check(inside, basket, Rv::constant(s, 0.0)), PreconditionError);
}

}  // namespace
}  // namespace riskshare
