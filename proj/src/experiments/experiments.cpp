#include "riskshare/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "riskshare/errors.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/strategic.hpp"

namespace riskshare::experiments {

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ValidationError("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> Table::values(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(c));
  return out;
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
  out.precision(old_precision);
}

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo;
    while (hi + 1 < order.size() && x[order[hi + 1]] == x[order[lo]]) ++hi;
    const double avg = 0.5 * static_cast<double>(lo + hi) + 1.0;  // ties share the mean rank
    for (std::size_t k = lo; k <= hi; ++k) r[order[k]] = avg;
    lo = hi + 1;
  }
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<double> as_doubles(const std::vector<std::size_t>& xs) { return {xs.begin(), xs.end()}; }

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("spearman needs two equal series of length >= 2");
  return pearson(ranks(x), ranks(y));
}

TrendVerdict trend_verdict(const std::vector<double>& sizes, const std::vector<double>& values, double threshold) {
  TrendVerdict v;
  v.spearman = spearman(sizes, values);
  v.first = values.front();
  v.last = values.back();
  v.threshold = threshold;
  return v;
}

double homogeneous_inefficiency_closed_form(const Market& market) {
  if (!market.homogeneous()) throw PreconditionError("closed-form inefficiency needs homogeneous agents");
  const double n = static_cast<double>(market.size());
  double total = 0.0;
  for (const auto& a : market.agents()) total += var(a.endowment);
  return market.gamma(0) / (n * n) * (total - var(market.aggregate_endowment()) / n);
}

DecayResult inefficiency_decay(const AgentSequenceSpec& spec, double threshold) {
  const MarketSequence sequence(spec);
  DecayResult out;
  out.table.columns = {"n", "inefficiency"};
  std::vector<double> values;
  for (auto n : spec.sizes) {
    const double loss = nash::nash_endowment(sequence.market(n)).inefficiency;
    out.table.rows.push_back({static_cast<double>(n), loss});
    values.push_back(loss);
  }
  out.verdict = trend_verdict(as_doubles(spec.sizes), values, threshold);
  return out;
}

Table homogeneous_decay(const std::vector<std::size_t>& sizes, double gamma) {
  Table t;
  t.columns = {"n", "inefficiency", "closed_form"};
  for (auto n : sizes) {
    const Market market = uncorrelated_unit_market(n, gamma);
    t.rows.push_back({static_cast<double>(n), nash::nash_endowment(market).inefficiency,
                      homogeneous_inefficiency_closed_form(market)});
  }
  return t;
}

ConvergenceResult price_allocation_convergence(const AgentSequenceSpec& spec, const BasketFamily& family,
                                               double threshold) {
  const MarketSequence sequence(spec);
  ConvergenceResult out;
  out.table.columns = {"n", "price_gap", "allocation_gap"};
  std::vector<double> prices, allocations;
  for (auto n : spec.sizes) {
    const Market market = sequence.market(n);
    const SecurityBasket basket = family ? family(market) : sequence.basket();
    const auto pareto_eq = pareto::capm_equilibrium(market, basket);
    const auto nash_eq = nash::nash_price(market, basket);
    const double price_gap = (pareto_eq.prices - nash_eq.price).norm();
    double allocation_gap = 0.0;
    for (Eigen::Index i = 0; i < nash_eq.allocation.rows(); ++i) {
      allocation_gap = std::max(allocation_gap, (pareto_eq.allocation.row(i) - nash_eq.allocation.row(i)).norm());
    }
    out.table.rows.push_back({static_cast<double>(n), price_gap, allocation_gap});
    prices.push_back(price_gap);
    allocations.push_back(allocation_gap);
  }
  out.price_verdict = trend_verdict(as_doubles(spec.sizes), prices, threshold);
  out.allocation_verdict = trend_verdict(as_doubles(spec.sizes), allocations, threshold);
  return out;
}

std::vector<double> FigureGrid::linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw ValidationError("linspace needs at least two points");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<double> FigureGrid::geomspace(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi > 0.0)) throw ValidationError("geomspace needs positive end points");
  auto out = linspace(std::log(lo), std::log(hi), count);
  for (auto& v : out) v = std::exp(v);
  out.front() = lo;
  out.back() = hi;
  return out;
}

FigureGrid FigureGrid::standard() { return {linspace(-1.0, 1.0, 41), geomspace(0.01, 10.0, 31)}; }

double figure_variance_ratio(int figure) {
  switch (figure) {
    case 1:
    case 3:
      return 10.0;
    case 2:
    case 4:
      return 0.1;
    default:
      throw ValidationError("figure id must be 1, 2, 3 or 4");
  }
}

namespace {

Market two_agent_market(double gamma1, double gamma2, double var2, double rho) {
  auto [e1, e2] = moment_pair_endowments(1.0, var2, rho);
  return Market({{gamma1, std::move(e1)}, {gamma2, std::move(e2)}});
}

Eigen::VectorXd equilibrium_percentages(const Market& market, const nash::PercentageParams& params) {
  const auto out = nash::nash_percentage(market, params);
  if (!out.converged) {
    throw PreconditionError("percentage iteration did not converge (residual " + std::to_string(out.residual) + ")");
  }
  return out.b_star;
}

}  // namespace

Table figure_data(int figure, const FigureGrid& grid, const nash::PercentageParams& params) {
  const double ratio = figure_variance_ratio(figure);
  Table t;
  if (figure <= 2) {
    t.columns = {"rho", "b1", "b2", "br1", "br2"};
    for (double rho : grid.rho) {
      const Market market = two_agent_market(1.0, 1.0, ratio, rho);
      const Eigen::VectorXd b = equilibrium_percentages(market, params);
      t.rows.push_back({rho, b[0], b[1], strategic::best_percentage_response(market, 0),
                        strategic::best_percentage_response(market, 1)});
    }
    return t;
  }
  t.columns = {"rho", "gamma1", "b1", "b2", "nash_gain", "pareto_gain", "diff"};
  for (double gamma1 : grid.gamma1) {
    for (double rho : grid.rho) {
      const Market market = two_agent_market(gamma1, 1.0, ratio, rho);
      const Eigen::VectorXd b = equilibrium_percentages(market, params);
      const double nash_gain = nash::percentage_gains(market, b)[0];
      const double pareto_gain = pareto::optimal_utility_levels(market)[0] - mv_utility(gamma1, market.endowment(0));
      t.rows.push_back({rho, gamma1, b[0], b[1], nash_gain, pareto_gain, nash_gain - pareto_gain});
    }
  }
  return t;
}

namespace {

constexpr double kOrderingSlack = 1e-12;

// Smallest increment of column `value` along increasing rho.
OrderingCheck nondecreasing(const std::string& name, const Table& t, const std::string& value) {
  const auto rho = t.values("rho");
  const auto v = t.values(value);
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (rho[k] > rho[k - 1]) worst = std::min(worst, v[k] - v[k - 1] + kOrderingSlack);
  }
  return {name, worst >= 0.0, v.size(), worst};
}

}  // namespace

std::vector<OrderingCheck> figure_orderings(const Table& fig1, const Table& fig2, const Table& fig3,
                                            const Table& fig4) {
  std::vector<OrderingCheck> checks;
  checks.push_back(nondecreasing("fig1 best response of agent 1 nondecreasing in rho", fig1, "br1"));
  checks.push_back(nondecreasing("fig1 best response of agent 2 nondecreasing in rho", fig1, "br2"));
  checks.push_back(nondecreasing("fig2 best response of agent 1 nondecreasing in rho", fig2, "br1"));
  checks.push_back(nondecreasing("fig2 best response of agent 2 nondecreasing in rho", fig2, "br2"));
  checks.push_back(nondecreasing("fig1 equilibrium percentage of the lower-risk agent nondecreasing in rho", fig1, "b1"));
  checks.push_back(nondecreasing("fig2 equilibrium percentage of the lower-risk agent nondecreasing in rho", fig2, "b2"));

  {
    // E_2 is riskier in figure 1 than in figure 2
    const auto rho = fig1.values("rho");
    const auto risky = fig1.values("b2");
    const auto safe = fig2.values("b2");
    if (fig2.values("rho") != rho) throw ValidationError("figures 1 and 2 need the same rho grid");
    OrderingCheck c{"riskier E_2 reports less for rho > 0 and more for rho < 0", true, 0,
                    std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < rho.size(); ++k) {
      if (rho[k] == 0.0) continue;
      const double margin = rho[k] > 0.0 ? safe[k] - risky[k] : risky[k] - safe[k];
      c.worst_margin = std::min(c.worst_margin, margin);
      ++c.points;
    }
    c.passed = c.worst_margin > 0.0;
    checks.push_back(c);
  }

  for (const auto* fig : {&fig3, &fig4}) {
    const std::string label = fig == &fig3 ? "fig3" : "fig4";
    OrderingCheck c{label + " rho = 0 gives the uncoupled percentages gamma_i/(gamma_i + gamma)", true, 0,
                    std::numeric_limits<double>::infinity()};
    const std::size_t rc = fig->column("rho"), gc = fig->column("gamma1"), b1 = fig->column("b1"),
                      b2 = fig->column("b2");
    for (const auto& row : fig->rows) {
      if (row[rc] != 0.0) continue;
      const double g1 = row[gc];
      const double g = g1 / (g1 + 1.0);
      const double err = std::max(std::abs(row[b1] - g1 / (g1 + g)), std::abs(row[b2] - 1.0 / (1.0 + g)));
      c.worst_margin = std::min(c.worst_margin, 1e-9 - err);
      ++c.points;
    }
    c.passed = c.points > 0 && c.worst_margin >= 0.0;
    checks.push_back(c);
  }

  auto region = [](const std::string& name, const std::vector<const Table*>& figs, auto inside) {
    OrderingCheck c{name, true, 0, std::numeric_limits<double>::infinity()};
    for (const auto* fig : figs) {
      const std::size_t rc = fig->column("rho"), gc = fig->column("gamma1"), dc = fig->column("diff");
      for (const auto& row : fig->rows) {
        if (!inside(row[rc], row[gc])) continue;
        c.worst_margin = std::min(c.worst_margin, row[dc]);
        ++c.points;
      }
    }
    c.passed = c.points > 0 && c.worst_margin > 0.0;
    return c;
  };
  checks.push_back(region("fig4 agent 1 gains more under Nash for rho <= -0.05, gamma_1 <= 0.5", {&fig4},
                          [](double rho, double g1) { return rho <= -0.05 && g1 <= 0.5; }));
  checks.push_back(region("figs 3-4 agent 1 gains more under Nash for rho >= 0.75, gamma_1 <= 0.1", {&fig3, &fig4},
                          [](double rho, double g1) { return rho >= 0.75 && g1 <= 0.1; }));
  return checks;
}

}  // namespace riskshare::experiments
