#include <gtest/gtest.h>

#include "riskshare/errors.hpp"
#include "riskshare/nash.hpp"
#include "riskshare/oracle.hpp"
#include "riskshare/strategic.hpp"
#include "support.hpp"

namespace riskshare {
namespace {

using testing::centered_distance;
using testing::coin;
using testing::opposed_pair;
using testing::rv;

Market symmetric_pair() {
  const auto s = ProbSpace::uniform(4);
  return Market({{1.0, rv(s, {1, -1, 0, 0})}, {1.0, rv(s, {0, 1, 2, -3})}});
}

TEST(Search, GoldenSectionAndNelderMeadOnQuadratics) {
  EXPECT_NEAR(search::golden_section([](double x) { return (x - 0.3) * (x - 0.3); }, -2, 2), 0.3, 1e-8);
  EXPECT_NEAR(search::golden_section([](double x) { return x; }, -2, 2), -2.0, 0.0);
  const search::Objective bowl = [](const Eigen::VectorXd& x) {
    return (x[0] - 1) * (x[0] - 1) + 3 * (x[1] + 2) * (x[1] + 2) + x[0] * x[1];
  };
  Eigen::VectorXd found = search::newton_polish(bowl, search::nelder_mead(bowl, Eigen::VectorXd::Zero(2)));
  Eigen::Matrix2d h;
  h << 2, 1, 1, 6;
  const Eigen::Vector2d expected = h.ldlt().solve(Eigen::Vector2d(2, -12));
  EXPECT_LT((found - expected).norm(), 1e-10);
  const search::Box box{Eigen::Vector2d(-5, -5), Eigen::Vector2d(5, 5)};
  EXPECT_LT((search::grid_refine(bowl, box) - expected).norm(), 1e-8);
  EXPECT_LT((search::coordinate_descent(bowl, Eigen::VectorXd::Zero(2), box) - expected).norm(), 1e-6);
  EXPECT_FALSE(search::on_boundary(expected, box));
  EXPECT_TRUE(search::on_boundary(Eigen::Vector2d(5, 0), box));
}

TEST(ArgmaxReportedUtility, SymmetricPairCoefficients) {
  const Market m = symmetric_pair();
  const auto r = oracle::argmax_reported_utility(m, 0, oracle::CoefficientSearchSpec::for_market(m));
  EXPECT_FALSE(r.at_bound);
  EXPECT_NEAR(r.coefficients[0], 2.0 / 3.0, 1e-6);
  EXPECT_NEAR(r.coefficients[1], 1.0 / 3.0, 1e-6);
}

TEST(ArgmaxReportedUtility, NearlyInfiniteRiskAversionIsTruthful) {
  const Market base = symmetric_pair();
  const Market m({{1e9, base.endowment(0)}, {1.0, base.endowment(1)}});
  const auto r = oracle::argmax_reported_utility(m, 0, oracle::CoefficientSearchSpec::for_market(m));
  EXPECT_NEAR(r.coefficients[0], 1.0, 1e-6);
  EXPECT_NEAR(r.coefficients[1], 0.0, 1e-6);
}

TEST(ArgmaxReportedUtility, OrthogonalDirectionIsNotUsed) {
  const Market m = symmetric_pair();
  auto spec = oracle::CoefficientSearchSpec::for_market(m);
  // orthogonal to both endowments and to constants
  const Rv outside = rv(m.space_ptr(), {5, 5, -7, -3});
  ASSERT_NEAR(cov(outside, m.endowment(0)), 0.0, 1e-15);
  ASSERT_NEAR(cov(outside, m.endowment(1)), 0.0, 1e-15);
  spec.basis.push_back(outside);
  spec.bounds.lo.conservativeResize(3);
  spec.bounds.hi.conservativeResize(3);
  spec.bounds.lo[2] = -10.0;
  spec.bounds.hi[2] = 10.0;
  const auto r = oracle::argmax_reported_utility(m, 0, spec);
  EXPECT_NEAR(r.coefficients[2], 0.0, 1e-6);
  EXPECT_LT(centered_distance(r.payoff, strategic::best_endowment_response(m, 0)), 1e-6);
}

TEST(ArgmaxReportedUtility, FlagsOptimaOnTheBox) {
  const Market m = symmetric_pair();
  const auto r = oracle::argmax_reported_utility(m, 0, oracle::CoefficientSearchSpec::for_market(m, 0.2));
  EXPECT_TRUE(r.at_bound);
}

TEST(ArgmaxReportedUtility, RejectsBadSpecs) {
  const Market m = symmetric_pair();
  auto spec = oracle::CoefficientSearchSpec::for_market(m);
  spec.bounds.hi[0] = spec.bounds.lo[0];
  EXPECT_THROW(oracle::argmax_reported_utility(m, 0, spec), ValidationError);
  spec = oracle::CoefficientSearchSpec::for_market(m);
  spec.basis.clear();
  EXPECT_THROW(oracle::argmax_reported_utility(m, 0, spec), ValidationError);
}

TEST(WObjective, IsAnAffineImageOfReportedUtility) {
  experiments::Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 3, 5));
    const Rv b1 = 0.4 * m.endowment(0) + m.endowment(1);
    const Rv b2 = -m.endowment(0) + 2.0 * m.endowment(1);
    const double w = oracle::w_objective(m, 0, b1) - oracle::w_objective(m, 0, b2);
    const double g = strategic::reported_utility(m, 0, b1) - strategic::reported_utility(m, 0, b2);
    const double gamma = m.aggregate_gamma();
    const double scale = -2.0 * gamma * (m.gamma(0) - gamma) / m.gamma(0);
    EXPECT_NEAR(g, scale * w, 1e-10);
  }
}

TEST(ArgmaxPercentage, MatchesClosedForm) {
  experiments::Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(2 + t % 3, 6));
    const double b = strategic::best_percentage_response(m, 0);
    if (b < 100.0) {
      EXPECT_NEAR(oracle::argmax_percentage(m, 0), b, 1e-8);
    }
  }
}

TEST(ArgmaxDemand, MirrorsDemandExamples) {
  const auto s = coin();
  const SecurityBasket basket({rv(s, {1, -1})});
  const Eigen::VectorXd minus_one = Eigen::VectorXd::Constant(1, -1.0);
  EXPECT_NEAR(oracle::argmax_demand(1.0, rv(s, {1, -1}), basket, minus_one)[0], -0.5, 1e-6);
  const auto s4 = ProbSpace::uniform(4);
  const SecurityBasket uncorrelated({rv(s4, {1, -1, 0, 0})});
  EXPECT_NEAR(oracle::argmax_demand(1.0, rv(s4, {0, 0, 1, -1}), uncorrelated, uncorrelated.expected())[0], 0.0, 1e-6);
  EXPECT_NEAR(oracle::argmax_demand(1.0, Rv::constant(s, 3.0), basket, Eigen::VectorXd::Zero(1))[0], 0.0, 1e-6);
}

TEST(ArgmaxDemand, MatchesClosedFormOnRandomInstances) {
  experiments::Rng rng(23);
  std::uniform_real_distribution<double> target(-3.0, 3.0);
  for (int t = 0; t < 30; ++t) {
    const auto inst = testing::small_instance(rng);
    const Market& m = inst.market;
    Eigen::VectorXd units(static_cast<Eigen::Index>(inst.basket.size()));
    for (auto& u : units) u = target(rng);
    const Eigen::VectorXd price = testing::price_for_units(m.gamma(0), m.endowment(0), inst.basket, units);
    const Eigen::VectorXd found = oracle::argmax_demand(m.gamma(0), m.endowment(0), inst.basket, price);
    EXPECT_LT((found - demand(m.gamma(0), m.endowment(0), inst.basket, price)).norm(), 1e-6);
    EXPECT_LT((found - units).norm(), 1e-6);
  }
}

TEST(BestResponseDynamics, SymmetricPairConvergesToNash) {
  const Market m = opposed_pair();
  const auto tr = oracle::best_response_dynamics(m, m.endowments());
  ASSERT_TRUE(tr.converged);
  EXPECT_LE(tr.profiles.size(), 201u);
  EXPECT_LT(centered_distance(tr.profiles.back()[0], rv(m.space_ptr(), {0.5, -0.5})), 1e-10);
  EXPECT_LT(centered_distance(tr.profiles.back()[1], rv(m.space_ptr(), {-0.5, 0.5})), 1e-10);
}

TEST(BestResponseDynamics, NashProfileIsAFixedPoint) {
  experiments::Rng rng(24);
  const Market m = experiments::random_market(rng, testing::small_market(3, 6));
  const auto tr = oracle::best_response_dynamics(m, nash::nash_endowment(m).reported, 5);
  ASSERT_TRUE(tr.converged);
  EXPECT_LT(tr.last_move, 1e-9);
  EXPECT_EQ(tr.profiles.size(), 2u);
}

TEST(BestResponseDynamics, HeterogeneousTriplesMatchClosedForm) {
  experiments::Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    const Market m = experiments::random_market(rng, testing::small_market(3, 6));
    const auto tr = oracle::best_response_dynamics(m, m.endowments());
    if (!tr.converged) {
      ADD_FAILURE() << "dynamics did not converge on instance " << t << ", last move " << tr.last_move;
      continue;
    }
    const auto nash = nash::nash_endowment(m);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_LT(centered_distance(tr.profiles.back()[i], nash.reported[i]), 1e-8);
    }
  }
}

TEST(ArgmaxPhi, MirrorsBestPriceExamples) {
  const Market m = opposed_pair();
  const SecurityBasket basket({m.endowment(0)});
  const auto others = strategic::others_of(truthful_schedules(m, basket), 0);
  EXPECT_NEAR(oracle::argmax_phi(m, 0, basket, others)[0], 2.0 / 3.0, 1e-6);

  const auto s = ProbSpace::uniform(4);
  const Market apart({{1.0, rv(s, {1, -1, 0, 0})}, {2.0, rv(s, {0, 0, 1, -1})}});
  const SecurityBasket own({apart.endowment(0)});
  const auto rest = strategic::others_of(truthful_schedules(apart, own), 0);
  EXPECT_LT((oracle::argmax_phi(apart, 0, own, rest) - strategic::best_price_response(apart, 0, own, rest)).norm(),
            1e-6);
}

TEST(Phi, EqualsUtilityOfClearingAllocation) {
  const Market m = opposed_pair();
  const SecurityBasket basket({m.endowment(0)});
  const auto others = strategic::others_of(truthful_schedules(m, basket), 0);
  const Eigen::VectorXd price = Eigen::VectorXd::Constant(1, 0.25);
  const double units = -others[0].evaluate(basket, price)[0];
  EXPECT_NEAR(oracle::phi(m, 0, basket, others, price),
              mv_utility(1.0, m.endowment(0) + units * basket.security(0)) - units * 0.25, 1e-15);
}

TEST(OracleAgreement, HundredRandomInstances) {
  experiments::Rng rng(26);
  std::uniform_real_distribution<double> target(-3.0, 3.0);
  double worst_endowment = 0, worst_demand = 0, worst_price = 0, worst_nash = 0;
  for (int t = 0; t < 100; ++t) {
    const auto inst = testing::small_instance(rng);
    const Market& m = inst.market;
    const std::size_t i = static_cast<std::size_t>(t) % m.size();

    const auto found = oracle::argmax_reported_utility(m, i, oracle::CoefficientSearchSpec::for_market(m));
    worst_endowment = std::max(worst_endowment, centered_distance(found.payoff, strategic::best_endowment_response(m, i)));

    Eigen::VectorXd units(static_cast<Eigen::Index>(inst.basket.size()));
    for (auto& u : units) u = target(rng);
    const Eigen::VectorXd price = testing::price_for_units(m.gamma(i), m.endowment(i), inst.basket, units);
    worst_demand = std::max(worst_demand, (oracle::argmax_demand(m.gamma(i), m.endowment(i), inst.basket, price) -
                                           demand(m.gamma(i), m.endowment(i), inst.basket, price))
                                              .norm());

    const auto others = strategic::others_of(truthful_schedules(m, inst.basket), i);
    worst_price = std::max(worst_price, (oracle::argmax_phi(m, i, inst.basket, others) -
                                         strategic::best_price_response(m, i, inst.basket, others))
                                            .norm());

    const auto tr = oracle::best_response_dynamics(m, m.endowments());
    ASSERT_TRUE(tr.converged) << "instance " << t;
    const auto nash = nash::nash_endowment(m);
    for (std::size_t j = 0; j < m.size(); ++j) {
      worst_nash = std::max(worst_nash, centered_distance(tr.profiles.back()[j], nash.reported[j]));
    }
  }
  EXPECT_LT(worst_endowment, 1e-6);
  EXPECT_LT(worst_demand, 1e-6);
  EXPECT_LT(worst_price, 1e-6);
  EXPECT_LT(worst_nash, 1e-6);
}

}  // namespace
}  // namespace riskshare
