#include "poa/json_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace poa::io {

namespace {

std::vector<double> checked_values(const json& j, const char* kind) {
  if (!j.is_object()) throw std::invalid_argument(std::string(kind) + " must be a JSON object");
  if (j.contains("kind") && j.at("kind") != kind)
    throw std::invalid_argument(fmt::format("expected kind '{}', found {}", kind, j.at("kind").dump()));
  auto values = j.at("values").get<std::vector<double>>();
  if (j.contains("n") && j.at("n").get<int>() != static_cast<int>(values.size()))
    throw std::invalid_argument(fmt::format("{} declares n = {} but lists {} values", kind, j.at("n").get<int>(),
                                            values.size()));
  return values;
}

}  // namespace

json to_json(const CostFunction& c) {
  return {{"kind", "cost"}, {"n", c.n()}, {"values", std::vector<double>(c.values().begin(), c.values().end())}};
}

json to_json(const DistributionRule& f) {
  return {{"kind", "rule"}, {"n", f.n()}, {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

CostFunction cost_from_json(const json& j) {
  return CostFunction::from_values(checked_values(j, "cost"), j.value("normalize", false));
}

DistributionRule rule_from_json(const json& j) { return DistributionRule::from_values(checked_values(j, "rule")); }

json to_json(const GameInstance& game) {
  json resources = json::array();
  for (const auto& r : game.resources()) resources.push_back({{"id", r.id}, {"value", r.value}});
  json action_sets = json::array();
  for (const auto& actions : game.action_sets()) {
    json set = json::array();
    for (const auto& action : actions) {
      json ids = json::array();
      for (std::size_t r : action) ids.push_back(game.resources()[r].id);
      set.push_back(std::move(ids));
    }
    action_sets.push_back(std::move(set));
  }
  return {{"n", game.players()},
          {"resources", std::move(resources)},
          {"action_sets", std::move(action_sets)},
          {"cost", to_json(game.cost())},
          {"rule", to_json(game.rule())}};
}

GameInstance game_from_json(const json& j) {
  std::vector<Resource> resources;
  std::map<std::string, std::size_t> index;
  for (const auto& r : j.at("resources")) {
    index.emplace(r.at("id").get<std::string>(), resources.size());
    resources.push_back({r.at("id").get<std::string>(), r.at("value").get<double>()});
  }
  std::vector<std::vector<Action>> action_sets;
  for (const auto& set : j.at("action_sets")) {
    std::vector<Action> actions;
    for (const auto& ids : set) {
      Action action;
      for (const auto& id : ids) {
        const auto it = index.find(id.get<std::string>());
        if (it == index.end()) throw std::invalid_argument("action references unknown resource '" + id.get<std::string>() + "'");
        action.push_back(it->second);
      }
      actions.push_back(std::move(action));
    }
    action_sets.push_back(std::move(actions));
  }
  if (j.contains("n") && j.at("n").get<std::size_t>() != action_sets.size())
    throw std::invalid_argument("game declares n different from the number of action sets");
  return GameInstance(std::move(resources), std::move(action_sets), cost_from_json(j.at("cost")),
                      rule_from_json(j.at("rule")));
}

json to_json(const ThetaParam& theta) {
  json out = json::array();
  for (const auto& [t, value] : theta) out.push_back({{"a", t.a}, {"x", t.x}, {"b", t.b}, {"value", value}});
  return out;
}

ThetaParam theta_from_json(const json& j) {
  ThetaParam theta;
  for (const auto& e : j) {
    const IndexTriple t{e.at("a").get<int>(), e.at("x").get<int>(), e.at("b").get<int>()};
    const double v = e.at("value").get<double>();
    if (v < 0.0) throw std::invalid_argument("theta" + to_string(t) + " is negative");
    theta[t] = v;
  }
  return theta;
}

json to_json(const WorstCaseCertificate& cert) {
  json out = to_json(cert.game);
  out["certificate"] = {{"theta", to_json(cert.theta)},
                        {"claimed_poa", cert.claimed_poa},
                        {"ne_alloc", cert.ne_alloc.choice},
                        {"opt_alloc", cert.opt_alloc.choice},
                        {"pruned_mass", cert.pruned_mass}};
  return out;
}

WorstCaseCertificate certificate_from_json(const json& j) {
  const auto& side = j.at("certificate");
  return WorstCaseCertificate{game_from_json(j),
                              Allocation{side.at("ne_alloc").get<std::vector<std::size_t>>()},
                              Allocation{side.at("opt_alloc").get<std::vector<std::size_t>>()},
                              side.at("claimed_poa").get<double>(),
                              theta_from_json(side.at("theta")),
                              side.value("pruned_mass", 0.0)};
}

json to_json(const PoaResult& r) {
  json out = {{"method", to_string(r.method)}, {"poa", r.poa},           {"c_star", r.c_star},
              {"residual", r.residual},        {"iterations", r.iterations}};
  if (r.lambda_star) out["lambda_star"] = *r.lambda_star;
  if (r.mu_star) out["mu_star"] = *r.mu_star;
  if (r.theta) out["theta"] = to_json(*r.theta);
  return out;
}

json to_json(const ValidationReport& r) {
  json methods = json::array();
  for (const auto& m : r.methods) {
    json e = {{"method", to_string(m.method)}, {"status", m.status}};
    e["value"] = m.c_star ? json(*m.c_star) : json(nullptr);
    if (m.c_star && *m.c_star > 0.0) e["poa"] = 1.0 / *m.c_star;
    if (m.delta) e["delta"] = *m.delta;
    if (!m.note.empty()) e["note"] = m.note;
    json cert = json::object();
    for (const auto& [k, v] : m.certificate) cert[k] = v;
    e["certificate"] = std::move(cert);
    methods.push_back(std::move(e));
  }
  json out = {{"n", r.n},
              {"verdict", r.verdict},
              {"lp_methods_agree", r.lp_methods_agree},
              {"flags", r.flags},
              {"methods", std::move(methods)}};
  out["reference_c_star"] = r.reference_c_star ? json(*r.reference_c_star) : json(nullptr);
  if (r.reference_c_star) out["poa"] = 1.0 / *r.reference_c_star;
  return out;
}

json to_json(const DesignResult& r) {
  return {{"n", r.rule.n()},       {"mu_star", r.mu_star},   {"poa", r.poa},          {"rule", to_json(r.rule)},
          {"rule_raw", r.rule_raw}, {"residual", r.residual}, {"iterations", r.iterations}};
}

json to_json(const DominanceReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"rule", e.name}, {"poa", e.poa}, {"ratio", e.ratio}, {"dominated", e.dominated}});
  return {{"designed_poa", r.designed_poa}, {"holds", r.holds}, {"rules", std::move(entries)}};
}

json to_json(const CertificateReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  json out = {{"passed", r.passed()},
              {"checks", std::move(checks)},
              {"ratio", r.ratio},
              {"potential_formula", r.potential_formula},
              {"max_potential_gap", r.max_potential_gap},
              {"pruning_bound", r.pruning_bound}};
  out["deviating_player"] = r.deviating_player ? json(*r.deviating_player) : json(nullptr);
  return out;
}

json rounded(const json& j, int digits) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return j;
    return std::stod(fmt::format("{:.{}g}", v, digits));
  }
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto& element : out) element = rounded(element, digits);
    return out;
  }
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace poa::io
