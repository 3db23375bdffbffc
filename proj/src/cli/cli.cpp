#include "riskshare/cli.hpp"

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskshare/errors.hpp"
#include "riskshare/experiments.hpp"
#include "riskshare/market_file.hpp"
#include "riskshare/nash.hpp"
#include "riskshare/pareto.hpp"
#include "riskshare/strategic.hpp"

namespace riskshare::cli {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kReportSchema = "riskshare.report/1";

struct Options {
  std::string command;
  std::string market_path;
  std::optional<std::size_t> agent;  // 1-based on the command line
  std::string mode = "endowment";
  std::string game = "endowment";
  std::string experiment = "decay";
  std::optional<double> kappa, damping, tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

class NotConverged : public std::runtime_error {
 public:
  NotConverged(std::string what, std::string text) : std::runtime_error(std::move(what)), text_(std::move(text)) {}
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

Json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
Json payoffs(const Rv& x) { return vec(x.payoffs()); }

Json rows(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec(m.row(r).transpose()));
  return out;
}

Json payoff_list(const std::vector<Rv>& xs) {
  Json out = Json::array();
  for (const auto& x : xs) out.push_back(payoffs(x));
  return out;
}

Json schedules_json(const std::vector<DemandSchedule>& schedules) {
  Json out = Json::array();
  for (const auto& z : schedules) out.push_back({{"gamma", z.gamma}, {"c", vec(z.c)}});
  return out;
}

Json tolerances(const SolverParameters& p) {
  return {{"probability_sum", ProbSpace::kSumTolerance},
          {"basket_condition", SecurityBasket::kConditionThreshold},
          {"up_to_constants", kUpToConstantsTolerance},
          {"homogeneity", 1e-9},
          {"percentage_tol", p.tol},
          {"percentage_max_iter", p.max_iter}};
}

std::size_t agent_index(const Options& o, const Market& market) {
  if (!o.agent) throw ValidationError("option --agent is required by this command");
  if (*o.agent < 1 || *o.agent > market.size()) {
    throw ValidationError("option --agent must lie in [1, " + std::to_string(market.size()) + "]");
  }
  return *o.agent - 1;
}

nash::PercentageParams percentage_params(const SolverParameters& p) {
  return {p.kappa, p.damping, p.tol, p.max_iter};
}

Json two_agent_json(const nash::TwoAgentComparison& t) {
  auto rv_row = [](const nash::TwoAgentComparison::RvRow& r) {
    return Json{{"pareto_engine", payoffs(r.pareto_engine)},
                {"pareto_closed_form", payoffs(r.pareto_closed)},
                {"nash_engine", payoffs(r.nash_engine)},
                {"nash_closed_form", payoffs(r.nash_closed)}};
  };
  auto scalar_row = [](const nash::TwoAgentComparison::ScalarRow& r) {
    return Json{{"pareto_engine", r.pareto_engine},
                {"pareto_closed_form", r.pareto_closed},
                {"nash_engine", r.nash_engine},
                {"nash_closed_form", r.nash_closed}};
  };
  return {{"agent", 1},
          {"aggregate_shared_endowment", rv_row(t.aggregate_shared)},
          {"reported_endowment", rv_row(t.reported)},
          {"purchased_contract", rv_row(t.contract)},
          {"gain_of_utility", scalar_row(t.gain)},
          {"inefficiency", scalar_row(t.inefficiency)},
          {"max_discrepancy", t.max_discrepancy()}};
}

bool riskless(const Market& market) {
  for (const auto& a : market.agents()) {
    if (var(a.endowment) != 0.0) return false;
  }
  return true;
}

Json cmd_pareto(const MarketFile& file) {
  const Market market = file.market();
  const auto sharing = pareto::optimal_sharing(market);
  const auto levels = pareto::optimal_utility_levels(market);
  Eigen::VectorXd gains = levels;
  for (std::size_t i = 0; i < market.size(); ++i) {
    gains[static_cast<Eigen::Index>(i)] -= mv_utility(market.gamma(i), market.endowment(i));
  }

  Json prices;
  std::string basis;
  if (riskless(market)) {
    prices = vec(pareto::endowment_prices_unchecked(market));
    basis = "riskless_endowments";
  } else {
    try {
      prices = vec(pareto::endowment_prices(market));
      basis = "endowments";
    } catch (const SingularCovarianceError&) {
      if (!file.has_securities()) throw;
      prices = vec(pareto::capm_equilibrium(market, file.basket()).prices);
      basis = "securities";
    }
  }

  return {{"aggregate_gamma", market.aggregate_gamma()},
          {"weights", rows(sharing.weights)},
          {"contracts", payoff_list(sharing.contracts)},
          {"price_basis", basis},
          {"prices", prices},
          {"utility_levels", vec(levels)},
          {"gains", vec(gains)},
          {"aggregate_gain", pareto::aggregate_gain(market)},
          {"representative_utility", pareto::representative_utility(market)}};
}

Json cmd_capm(const MarketFile& file) {
  const Market market = file.market();
  const SecurityBasket basket = file.basket();
  const auto eq = pareto::capm_equilibrium(market, basket);
  const auto loss = pareto::constrained_loss(market, basket);
  return {{"prices", vec(eq.prices)},
          {"allocation", rows(eq.allocation)},
          {"utility_levels", vec(eq.utility_levels)},
          {"gains", vec(eq.gains)},
          {"reservation_prices", rows(pareto::reservation_prices(market, basket))},
          {"constrained_loss", {{"per_agent", vec(loss.per_agent)}, {"total", loss.total}}}};
}

Json cmd_best_response(const MarketFile& file, const Options& o) {
  const Market market = file.market();
  const std::size_t i = agent_index(o, market);
  Json result{{"agent", i + 1}, {"mode", o.mode}};
  if (o.mode == "endowment") {
    const auto r = strategic::endowment_response_report(market, i);
    result["response"] = payoffs(r.response);
    result["utility_before"] = r.utility_before;
    result["utility_after"] = r.utility_after;
    result["gain_over_truthful"] = r.utility_after - r.utility_before;
  } else if (o.mode == "percentage") {
    const auto r = strategic::percentage_response_report(market, i);
    result["response"] = r.response;
    result["utility_before"] = r.utility_before;
    result["utility_after"] = r.utility_after;
    result["gain_over_truthful"] = r.utility_after - r.utility_before;
  } else {
    const SecurityBasket basket = file.basket();
    const auto truthful = truthful_schedules(market, basket);
    const auto others = strategic::others_of(truthful, i);
    const auto schedule = strategic::best_demand_response(market, i, basket);
    const Eigen::VectorXd price = strategic::best_price_response(market, i, basket, others);
    const auto change = strategic::effective_endowment_change(market, i);
    result["schedule"] = {{"gamma", schedule.gamma}, {"c", vec(schedule.c)}};
    result["best_price"] = vec(price);
    result["truthful_price"] = vec(clearing_price(basket, truthful));
    result["demand_at_best_price"] = vec(schedule.evaluate(basket, price));
    result["effective_endowment_change"] = {{"own", change.own}, {"others", change.others}};
  }
  return result;
}

Json cmd_nash(const MarketFile& file, const Options& o) {
  const Market market = file.market();
  Json result{{"game", o.game}};
  if (o.game == "endowment") {
    const auto r = nash::nash_endowment(market);
    result["reported"] = payoff_list(r.reported);
    result["aggregate"] = payoffs(r.aggregate);
    result["contracts"] = payoff_list(r.contracts);
    result["inefficiency"] = r.inefficiency;
    result["per_agent_gain"] = vec(r.per_agent_gain);
  } else if (o.game == "percentage") {
    const auto r = nash::nash_percentage(market, percentage_params(file.parameters));
    result["b_star"] = vec(r.b_star);
    result["kappa"] = r.kappa;
    result["iterations"] = r.iterations;
    result["converged"] = r.converged;
    result["residual"] = r.residual;
    result["per_agent_gain"] = vec(nash::percentage_gains(market, r.b_star));
    if (!r.converged) {
      throw NotConverged("percentage iteration did not converge within " + std::to_string(r.iterations) +
                             " iterations (residual " + std::to_string(r.residual) + ")",
                         result.dump());
    }
  } else {
    const SecurityBasket basket = file.basket();
    const auto r = nash::nash_price(market, basket);
    const auto pareto_eq = pareto::capm_equilibrium(market, basket);
    result["price"] = vec(r.price);
    result["pareto_price"] = vec(pareto_eq.prices);
    result["pressure"] = vec(r.pressure);
    result["schedules"] = schedules_json(r.schedules);
    result["allocation"] = rows(r.allocation);
    result["pareto_allocation"] = rows(pareto_eq.allocation);
  }
  if (market.size() == 2) result["two_agent_comparison"] = two_agent_json(nash::two_agent_comparison(market));
  return result;
}

std::string cmd_experiment(const std::optional<MarketFile>& file, const Options& o, const SolverParameters& params) {
  using namespace experiments;
  std::ostringstream csv;
  auto verdict_line = [&](const std::string& what, const TrendVerdict& v) {
    csv << "# " << what << ": spearman=" << v.spearman << " max_spearman=" << v.max_spearman << " first=" << v.first
        << " last=" << v.last << " threshold=" << v.threshold << " verdict=" << (v.pass() ? "pass" : "fail") << '\n';
  };
  csv.precision(17);
  csv << "# experiment=" << o.experiment << " seed=" << params.seed << '\n';

  AgentSequenceSpec spec;
  spec.seed = params.seed;
  if (o.experiment == "decay") {
    const auto r = inefficiency_decay(spec);
    verdict_line("inefficiency", r.verdict);
    write_csv(csv, r.table);
  } else if (o.experiment == "homogeneous-decay") {
    write_csv(csv, homogeneous_decay(spec.sizes));
  } else if (o.experiment == "convergence") {
    BasketFamily family;
    if (file && file->has_securities()) {
      throw ValidationError("experiment convergence uses generated markets; drop securities from the market file");
    }
    const auto r = price_allocation_convergence(spec, family);
    verdict_line("price_gap", r.price_verdict);
    verdict_line("allocation_gap", r.allocation_verdict);
    write_csv(csv, r.table);
  } else {
    const int figure = o.experiment.back() - '0';
    csv << "# variance_ratio=" << figure_variance_ratio(figure) << '\n';
    write_csv(csv, figure_data(figure, FigureGrid::standard(), percentage_params(params)));
  }
  return csv.str();
}

SolverParameters effective_parameters(SolverParameters p, const Options& o) {
  if (o.kappa) p.kappa = *o.kappa;
  if (o.damping) p.damping = *o.damping;
  if (o.tol) p.tol = *o.tol;
  if (o.max_iter) p.max_iter = *o.max_iter;
  if (o.seed) p.seed = *o.seed;
  if (!(p.kappa > 0.0)) throw ValidationError("option --kappa must be > 0");
  if (!(p.damping > 0.0 && p.damping <= 1.0)) throw ValidationError("option --damping must lie in (0, 1]");
  if (!(p.tol > 0.0)) throw ValidationError("option --tol must be > 0");
  if (p.max_iter == 0) throw ValidationError("option --max-iter must be >= 1");
  return p;
}

void emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out_path, std::ios::binary);
  if (!file) throw ValidationError("cannot write output file " + o.out_path);
  file << text;
}

std::string report_text(const std::string& command, const MarketFile& file, Json result) {
  Json report;
  report["schema"] = kReportSchema;
  report["command"] = command;
  report["tolerances"] = tolerances(file.parameters);
  report["market"] = file.echo();
  report["result"] = std::move(result);
  return report.dump(2) + "\n";
}

int dispatch(const Options& o, std::ostream& out) {
  std::optional<MarketFile> file;
  if (!o.market_path.empty()) file = load_market(o.market_path);
  if (o.command == "experiment") {
    const SolverParameters params = effective_parameters(file ? file->parameters : SolverParameters{}, o);
    emit(o, cmd_experiment(file, o, params), out);
    return kOk;
  }
  if (!file) throw ValidationError("option --market is required by command " + o.command);
  file->parameters = effective_parameters(file->parameters, o);

  Json result;
  if (o.command == "pareto") {
    result = cmd_pareto(*file);
  } else if (o.command == "capm") {
    result = cmd_capm(*file);
  } else if (o.command == "best-response") {
    result = cmd_best_response(*file, o);
  } else {
    try {
      result = cmd_nash(*file, o);
    } catch (const NotConverged& e) {
      emit(o, report_text(o.command, *file, Json::parse(e.text())), out);
      throw;
    }
  }
  emit(o, report_text(o.command, *file, std::move(result)), out);
  return kOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pareto and Nash risk sharing among mean-variance agents", "riskshare"};
  Options o;
  app.add_option("command", o.command, "pareto | capm | best-response | nash | experiment")
      ->required()
      ->check(CLI::IsMember({"pareto", "capm", "best-response", "nash", "experiment"}));
  app.add_option("--market", o.market_path, "market file (JSON, schema riskshare.market/1)");
  app.add_option("--agent", o.agent, "agent number, 1-based (best-response)");
  app.add_option("--mode", o.mode, "best-response mode")->check(CLI::IsMember({"endowment", "percentage", "demand"}));
  app.add_option("--game", o.game, "nash game")->check(CLI::IsMember({"endowment", "percentage", "price"}));
  app.add_option("--id", o.experiment, "experiment id")
      ->check(CLI::IsMember({"decay", "homogeneous-decay", "convergence", "fig1", "fig2", "fig3", "fig4"}));
  app.add_option("--kappa", o.kappa, "percentage upper bound");
  app.add_option("--damping", o.damping, "percentage iteration damping in (0, 1]");
  app.add_option("--tol", o.tol, "percentage iteration tolerance");
  app.add_option("--max-iter", o.max_iter, "percentage iteration limit");
  app.add_option("--seed", o.seed, "generator seed (experiments)");
  app.add_option("--out", o.out_path, "write the report here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "riskshare: " << e.what() << '\n';
    return kValidationError;
  }

  try {
    return dispatch(o, out);
  } catch (const NotConverged& e) {
    err << "riskshare: " << e.what() << '\n';
    return kNotConverged;
  } catch (const ValidationError& e) {
    err << "riskshare: validation error: " << e.what() << '\n';
    return kValidationError;
  } catch (const PreconditionError& e) {
    err << "riskshare: numerical precondition violated: " << e.what() << '\n';
    return kPreconditionError;
  } catch (const std::exception& e) {
    err << "riskshare: internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace riskshare::cli
