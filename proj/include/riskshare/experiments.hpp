#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "riskshare/generators.hpp"
#include "riskshare/nash.hpp"

namespace riskshare::experiments {

/// Plain numeric table, one double per cell.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Writes a header line and one line per row, full round-trip precision.
void write_csv(std::ostream& out, const Table& table);

/// Decreasing-trend verdict over a market-size schedule. The trend holds
/// when the Spearman correlation of (n, value) is at most max_spearman and
/// the last value is below the first; the threshold applies to the last.
struct TrendVerdict {
  double spearman = 0.0;
  double first = 0.0;
  double last = 0.0;
  double threshold = 0.0;
  double max_spearman = -0.8;

  bool decreasing() const { return spearman <= max_spearman && last < first; }
  bool below_threshold() const { return last < threshold; }
  bool pass() const { return decreasing() && below_threshold(); }
};

double spearman(const std::vector<double>& x, const std::vector<double>& y);
TrendVerdict trend_verdict(const std::vector<double>& sizes, const std::vector<double>& values, double threshold);

/// gamma_0 / n^2 (sum_i Var[E_i] - Var[E] / n) for a homogeneous market.
/// Throws PreconditionError otherwise.
double homogeneous_inefficiency_closed_form(const Market& market);

inline constexpr double kDecayThreshold = 1e-2;

struct DecayResult {
  Table table;  // n, inefficiency
  TrendVerdict verdict;
};

DecayResult inefficiency_decay(const AgentSequenceSpec& spec, double threshold = kDecayThreshold);

/// Inefficiency of uncorrelated_unit_market(n, gamma) next to the closed form.
Table homogeneous_decay(const std::vector<std::size_t>& sizes, double gamma = 1.0);

struct ConvergenceResult {
  Table table;  // n, price_gap, allocation_gap
  TrendVerdict price_verdict;
  TrendVerdict allocation_verdict;
};

using BasketFamily = std::function<SecurityBasket(const Market&)>;

/// ||p*(n) - p_hat(n)|| and max_i ||a*_i(n) - a_hat_i(n)|| along the
/// sequence. Without a family, the sequence's own basket is used.
ConvergenceResult price_allocation_convergence(const AgentSequenceSpec& spec, const BasketFamily& family = {},
                                               double threshold = kDecayThreshold);

struct FigureGrid {
  std::vector<double> rho;
  std::vector<double> gamma1;  // ignored by figures 1 and 2

  static std::vector<double> linspace(double lo, double hi, std::size_t count);
  static std::vector<double> geomspace(double lo, double hi, std::size_t count);
  /// rho in [-1, 1] (41 points), gamma_1 in [0.01, 10] (31 points, log).
  static FigureGrid standard();
};

/// Variance of E_2 relative to E_1 = 1 in each figure.
double figure_variance_ratio(int figure);

/// Figures 1-2 (homogeneous gamma = 1): rho, b1, b2, br1, br2 where br_i is
/// the best percentage response to a truthful partner.
/// Figures 3-4 (gamma_2 = 1): rho, gamma1, b1, b2, nash_gain, pareto_gain,
/// diff = nash_gain - pareto_gain for agent 1.
/// Throws ValidationError for an unknown id, PreconditionError when the
/// percentage iteration does not converge.
Table figure_data(int figure, const FigureGrid& grid, const nash::PercentageParams& params = {});

struct OrderingCheck {
  std::string name;
  bool passed;
  std::size_t points;    // grid points examined
  double worst_margin;  // smallest slack over those points, negative on failure
};

/// Qualitative orderings of the four figure tables (from figure_data with
/// the same grid).
std::vector<OrderingCheck> figure_orderings(const Table& fig1, const Table& fig2, const Table& fig3,
                                            const Table& fig4);

}  // namespace riskshare::experiments
