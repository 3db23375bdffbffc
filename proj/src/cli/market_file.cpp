#include "riskshare/market_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "riskshare/errors.hpp"

namespace riskshare::cli {

using nlohmann::json;

namespace {

class FieldReader {
 public:
  explicit FieldReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ValidationError(source_ + ": field '" + field + "': " + what);
  }

  const json& member(const json& obj, const std::string& key, const std::string& field) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(field, "is required");
    return *it;
  }

  void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) fail(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "must be finite");
    return x;
  }

  std::vector<double> numbers(const json& v, const std::string& field) const {
    if (!v.is_array()) fail(field, "must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], field + "[" + std::to_string(k) + "]"));
    return out;
  }

  std::uint64_t count(const json& v, const std::string& field) const {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      fail(field, "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

 private:
  std::string source_;
};

}  // namespace

Market MarketFile::market() const {
  const SpacePtr space = ProbSpace::make(probs);
  std::vector<Agent> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back({a.gamma, Rv(space, a.payoffs)});
  return Market(std::move(out));
}

SecurityBasket MarketFile::basket() const {
  if (!securities) throw ValidationError("field 'securities': required by this command");
  const SpacePtr space = ProbSpace::make(probs);
  std::vector<Rv> payoffs;
  payoffs.reserve(securities->size());
  for (const auto& s : *securities) payoffs.emplace_back(space, s);
  return SecurityBasket(std::move(payoffs));
}

nlohmann::ordered_json MarketFile::echo() const {
  nlohmann::ordered_json out;
  out["schema"] = kMarketSchema;
  out["probs"] = probs;
  out["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : agents) out["agents"].push_back({{"gamma", a.gamma}, {"payoffs", a.payoffs}});
  if (securities) out["securities"] = *securities;
  out["parameters"] = {{"kappa", parameters.kappa},
                       {"damping", parameters.damping},
                       {"tol", parameters.tol},
                       {"max_iter", parameters.max_iter},
                       {"seed", parameters.seed}};
  return out;
}

MarketFile parse_market(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // the parser message already carries the line and column
    throw ValidationError(source + ": JSON syntax error: " + e.what());
  }
  const FieldReader r(source);
  if (!doc.is_object()) r.fail("(root)", "must be a JSON object");
  r.only_keys(doc, {"schema", "probs", "agents", "securities", "parameters"}, "");

  const json& schema = r.member(doc, "schema", "schema");
  if (!schema.is_string() || schema.get<std::string>() != kMarketSchema) {
    r.fail("schema", std::string("must be \"") + kMarketSchema + "\"");
  }

  MarketFile file;
  file.probs = r.numbers(r.member(doc, "probs", "probs"), "probs");
  if (file.probs.empty()) r.fail("probs", "must not be empty");
  double total = 0.0;
  for (std::size_t s = 0; s < file.probs.size(); ++s) {
    if (!(file.probs[s] > 0.0)) r.fail("probs[" + std::to_string(s) + "]", "must be > 0");
    total += file.probs[s];
  }
  if (std::abs(total - 1.0) > ProbSpace::kSumTolerance) r.fail("probs", "must sum to 1 within 1e-12");
  const std::size_t m = file.probs.size();

  auto payoff_vector = [&](const json& v, const std::string& field) {
    auto x = r.numbers(v, field);
    if (x.size() != m) r.fail(field, "needs " + std::to_string(m) + " payoffs, one per state");
    return x;
  };

  const json& agents = r.member(doc, "agents", "agents");
  if (!agents.is_array()) r.fail("agents", "must be an array");
  if (agents.size() < 2) r.fail("agents", "needs at least two agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string at = "agents[" + std::to_string(i) + "]";
    const json& a = agents[i];
    if (!a.is_object()) r.fail(at, "must be an object");
    r.only_keys(a, {"gamma", "payoffs"}, at);
    const double gamma = r.number(r.member(a, "gamma", at + ".gamma"), at + ".gamma");
    if (!(gamma > 0.0)) r.fail(at + ".gamma", "must be > 0");
    file.agents.push_back({gamma, payoff_vector(r.member(a, "payoffs", at + ".payoffs"), at + ".payoffs")});
  }

  if (const auto it = doc.find("securities"); it != doc.end()) {
    if (!it->is_array() || it->empty()) r.fail("securities", "must be a non-empty array of payoff arrays");
    std::vector<std::vector<double>> securities;
    for (std::size_t j = 0; j < it->size(); ++j) {
      securities.push_back(payoff_vector((*it)[j], "securities[" + std::to_string(j) + "]"));
    }
    file.securities = std::move(securities);
  }

  if (const auto it = doc.find("parameters"); it != doc.end()) {
    const json& p = *it;
    if (!p.is_object()) r.fail("parameters", "must be an object");
    r.only_keys(p, {"kappa", "damping", "tol", "max_iter", "seed"}, "parameters");
    auto& out = file.parameters;
    if (p.contains("kappa")) out.kappa = r.number(p["kappa"], "parameters.kappa");
    if (p.contains("damping")) out.damping = r.number(p["damping"], "parameters.damping");
    if (p.contains("tol")) out.tol = r.number(p["tol"], "parameters.tol");
    if (p.contains("max_iter")) out.max_iter = r.count(p["max_iter"], "parameters.max_iter");
    if (p.contains("seed")) out.seed = r.count(p["seed"], "parameters.seed");
    if (!(out.kappa > 0.0)) r.fail("parameters.kappa", "must be > 0");
    if (!(out.damping > 0.0 && out.damping <= 1.0)) r.fail("parameters.damping", "must lie in (0, 1]");
    if (!(out.tol > 0.0)) r.fail("parameters.tol", "must be > 0");
    if (out.max_iter == 0) r.fail("parameters.max_iter", "must be >= 1");
  }
  return file;
}

MarketFile load_market(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path + ": cannot open market file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_market(buffer.str(), path);
}

}  // namespace riskshare::cli
