#include "poa/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "poa/json_io.hpp"
#include "poa/poa_lp.hpp"
#include "poa/rule_design.hpp"
#include "poa/worst_case.hpp"

namespace poa::cli {

namespace {

std::string strip_file_prefix(const std::string& spec) {
  return spec.rfind("file:", 0) == 0 ? spec.substr(5) : spec;
}

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " '" + text + "'");
  }
  if (used != text.size()) throw UsageError("cannot parse " + what + " '" + text + "'");
  return v;
}

std::string csv_safe(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n') ch = ';';
  }
  return s;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

}  // namespace

std::string format_number(double v) { return fmt::format("{:.9g}", v); }

CostFunction parse_cost_spec(const std::string& spec, int n) {
  if (n < 1) throw UsageError("--n must be >= 1");
  if (spec.rfind("poly:", 0) == 0) {
    const double d = parse_double(spec.substr(5), "exponent");
    if (!(d >= 0.0)) throw UsageError("exponent must be >= 0");
    return make_polynomial_cost(d, n);
  }
  if (spec.rfind("file:", 0) == 0) {
    try {
      auto c = io::cost_from_json(io::read_json_file(spec.substr(5)));
      if (c.n() < n) throw UsageError(fmt::format("cost file covers {} players, need {}", c.n(), n));
      return c.truncated(n);
    } catch (const io::json::exception& e) {
      throw UsageError(std::string("bad cost file: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("bad cost file: ") + e.what());
    }
  }
  throw UsageError("cost spec must be poly:<d> or file:<path>, got '" + spec + "'");
}

void check_rule_spec(const std::string& spec) {
  if (spec == "sv" || spec == "mc" || spec == "optimal" || spec.rfind("file:", 0) == 0) return;
  throw UsageError("rule spec must be sv, mc, optimal or file:<path>, got '" + spec + "'");
}

DistributionRule resolve_rule(const std::string& spec, const CostFunction& c, int n) {
  check_rule_spec(spec);
  if (spec == "sv") return shapley_rule(n);
  if (spec == "mc") {
    try {
      return marginal_contribution_rule(c.truncated(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("marginal contribution undefined: ") + e.what());
    }
  }
  if (spec == "optimal") return design_optimal_rule(c, n).rule;
  try {
    auto f = io::rule_from_json(io::read_json_file(spec.substr(5)));
    if (f.n() < n) throw UsageError(fmt::format("rule file covers {} players, need {}", f.n(), n));
    return f.truncated(n);
  } catch (const io::json::exception& e) {
    throw UsageError(std::string("bad rule file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("bad rule file: ") + e.what());
  }
}

std::vector<double> parse_d_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw UsageError("range grid must be lo:step:hi");
    const double lo = parse_double(parts[0], "grid start");
    const double step = parse_double(parts[1], "grid step");
    const double hi = parse_double(parts[2], "grid end");
    if (!(step > 0.0) || hi < lo) throw UsageError("grid needs step > 0 and hi >= lo");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
      // Snap to 12 decimals so 1 + 19 * 0.05 prints as 1.95.
      grid.push_back(std::round((lo + k * step) * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) grid.push_back(parse_double(part, "grid value"));
  }
  if (grid.empty()) throw UsageError("empty d grid");
  return grid;
}

namespace {

const std::vector<std::string> kSweepMethods{"primal", "dual", "reduced", "closed-form"};

PoaResult evaluate(const std::string& method, const CostFunction& c, const DistributionRule& f, int n) {
  if (method == "primal") return compute_poa_primal(c, f, n);
  if (method == "dual") return compute_poa_dual(c, f, n);
  if (method == "reduced") return compute_poa_reduced(c, f, n);
  if (method == "closed-form") return closed_form_convex(c, f, n);
  throw UsageError("unknown method '" + method + "'");
}

void check_method(const std::string& method, bool allow_all) {
  if (allow_all && method == "all") return;
  for (const auto& m : kSweepMethods) {
    if (m == method) return;
  }
  throw UsageError("method must be primal, dual, reduced, closed-form" + std::string(allow_all ? " or all" : "") +
                   ", got '" + method + "'");
}

std::vector<SweepRow> sweep_point(const SweepSpec& spec, double d, const std::string& rule_spec) {
  const auto methods = spec.method == "all" ? kSweepMethods : std::vector<std::string>{spec.method};
  std::vector<SweepRow> rows;
  std::optional<DistributionRule> rule;
  std::string failure;
  CostFunction c = make_polynomial_cost(d, spec.n);
  try {
    rule = resolve_rule(rule_spec, c, spec.n);
  } catch (const std::exception& e) {
    failure = csv_safe(std::string("error: ") + e.what());
  }
  for (const auto& method : methods) {
    SweepRow row;
    row.d = d;
    row.rule = rule_spec;
    row.method = method;
    if (!rule) {
      row.status = failure;
      rows.push_back(std::move(row));
      continue;
    }
    try {
      const auto r = evaluate(method, c, *rule, spec.n);
      row.poa = r.poa;
      row.mu_star = r.mu_star ? *r.mu_star : r.c_star;
      row.lambda_star = r.lambda_star;
    } catch (const std::exception& e) {
      row.status = csv_safe(std::string("error: ") + e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  if (spec.n < 1) throw UsageError("--n must be >= 1");
  if (spec.d_grid.empty()) throw UsageError("empty d grid");
  if (spec.rules.empty()) throw UsageError("no rules to sweep");
  for (const auto& r : spec.rules) check_rule_spec(r);
  check_method(spec.method, true);

  struct Task {
    double d;
    std::string rule;
  };
  std::vector<Task> tasks;
  for (double d : spec.d_grid)
    for (const auto& r : spec.rules) tasks.push_back({d, r});

  std::vector<std::vector<SweepRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) results[k] = sweep_point(spec, tasks[k].d, tasks[k].rule);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  std::vector<SweepRow> rows;
  for (auto& part : results)
    for (auto& row : part) rows.push_back(std::move(row));
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "d,rule,poa,mu_star,lambda_star,method,status\n";
  for (const auto& r : rows) {
    out << format_number(r.d) << ',' << r.rule << ',' << optional_number(r.poa) << ',' << optional_number(r.mu_star)
        << ',' << optional_number(r.lambda_star) << ',' << r.method << ',' << r.status << '\n';
  }
}

void write_ratio_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  std::map<std::pair<double, std::string>, double> optimal;
  for (const auto& r : rows) {
    if (r.rule == "optimal" && r.poa) optimal[{r.d, r.method}] = *r.poa;
  }
  out << "d,rule,ratio\n";
  for (const auto& r : rows) {
    if (r.rule == "optimal") continue;
    const auto it = optimal.find({r.d, r.method});
    out << format_number(r.d) << ',' << r.rule << ',';
    if (r.poa && it != optimal.end()) out << format_number(*r.poa / it->second);
    out << '\n';
  }
}

namespace {

unsigned default_jobs() {
  if (const char* env = std::getenv("POA_LAB_JOBS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

int cmd_poa(const std::string& cost_spec, const std::string& rule_spec, int n, const std::string& method,
            const std::string& output, const std::string& dump_lp, std::ostream& out) {
  check_rule_spec(rule_spec);
  check_method(method, true);
  const auto c = parse_cost_spec(cost_spec, n);
  const auto f = resolve_rule(rule_spec, c, n);

  if (!dump_lp.empty()) {
    std::ostringstream s;
    lp::write_lp_format(method == "primal" ? build_primal(c, f, n) : build_dual(c, f, n), s);
    write_text_file(dump_lp, s.str());
  }

  if (method == "all") {
    const auto report = cross_validate(c, f, n);
    const auto j = io::rounded(io::to_json(report));
    if (!output.empty()) io::write_json_file(output, j);
    if (!report.reference_c_star) {
      out << "dual program failed\n";
      return kExitFailure;
    }
    out << fmt::format("{:.6f}\n", 1.0 / *report.reference_c_star);
    for (const auto& m : report.methods) {
      out << fmt::format("  {:<24} {:<8} {}\n", to_string(m.method), m.status,
                         m.c_star ? fmt::format("C*={:.9g}", *m.c_star) : m.note);
    }
    out << "verdict: " << report.verdict << '\n';
    return report.lp_methods_agree ? kExitOk : kExitFailure;
  }

  const auto r = evaluate(method, c, f, n);
  if (!output.empty()) io::write_json_file(output, io::rounded(io::to_json(r)));
  out << fmt::format("{:.6f}\n", r.poa);
  return kExitOk;
}

int cmd_design(const std::string& cost_spec, int n, const std::string& output, const std::string& rule_output,
               std::ostream& out) {
  const auto c = parse_cost_spec(cost_spec, n);
  const auto r = design_optimal_rule(c, n);
  if (!output.empty()) io::write_json_file(output, io::rounded(io::to_json(r)));
  if (!rule_output.empty()) io::write_json_file(rule_output, io::to_json(r.rule));
  out << fmt::format("{:.6f}\n", r.poa);
  for (int j = 1; j <= r.rule.n(); ++j) out << fmt::format("  f*({}) = {:.6f}\n", j, r.rule(j));
  return kExitOk;
}

int report_certificate(const WorstCaseCertificate& cert, double tol, const std::string& report_path,
                       std::ostream& out) {
  const auto report = verify_certificate(cert, tol);
  if (!report_path.empty()) io::write_json_file(report_path, io::rounded(io::to_json(report)));
  for (const auto& check : report.checks)
    out << fmt::format("  {:<10} {}{}\n", check.name, check.passed ? "pass" : "FAIL",
                       check.detail.empty() ? "" : " (" + check.detail + ")");
  out << fmt::format("ratio {:.9g}, claimed {:.9g}\n", report.ratio, cert.claimed_poa);
  out << (report.passed() ? "certificate verified\n" : "certificate FAILED\n");
  return report.passed() ? kExitOk : kExitFailure;
}

int cmd_worstcase(const std::string& cost_spec, const std::string& rule_spec, int n, int max_n,
                  const std::string& output, const std::string& report_path, const std::string& verify_only, double tol,
                  std::ostream& out) {
  if (!verify_only.empty()) {
    WorstCaseCertificate cert = [&] {
      try {
        return io::certificate_from_json(io::read_json_file(strip_file_prefix(verify_only)));
      } catch (const io::json::exception& e) {
        throw UsageError(std::string("bad certificate file: ") + e.what());
      } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("bad certificate file: ") + e.what());
      }
    }();
    return report_certificate(cert, tol, report_path, out);
  }
  if (n > max_n) throw UsageError(fmt::format("n = {} exceeds --max-n {}", n, max_n));
  check_rule_spec(rule_spec);
  const auto c = parse_cost_spec(cost_spec, n);
  const auto f = resolve_rule(rule_spec, c, n);
  const auto primal = compute_poa_primal(c, f, n);
  const auto dual = compute_poa_dual(c, f, n);
  const auto cert = construct_worst_case_game(*primal.theta, c, f, n);
  if (!output.empty()) io::write_json_file(output, io::to_json(cert));
  out << fmt::format("worst-case game: {} players, {} resources\n", cert.game.players(), cert.game.resources().size());
  out << fmt::format("dual PoA {:.9g}, certificate ratio {:.9g}\n", dual.poa, cert.claimed_poa);
  int status = report_certificate(cert, tol, report_path, out);
  if (std::abs(cert.claimed_poa - dual.poa) > 1e-6) {
    out << "certificate ratio differs from the dual PoA by more than 1e-6\n";
    status = kExitFailure;
  }
  return status;
}

int cmd_sweep(SweepSpec spec, const std::string& grid, const std::string& rules, const std::string& csv,
              const std::string& ratio_csv, std::ostream& out) {
  spec.d_grid = parse_d_grid(grid);
  spec.rules.clear();
  std::stringstream ss(rules);
  for (std::string r; std::getline(ss, r, ',');) spec.rules.push_back(r);
  if (!ratio_csv.empty() && std::find(spec.rules.begin(), spec.rules.end(), "optimal") == spec.rules.end())
    throw UsageError("--ratio-csv needs 'optimal' among --rules");

  const auto rows = run_sweep(spec);
  std::ostringstream body;
  write_sweep_csv(body, rows);
  if (csv.empty()) out << body.str();
  else write_text_file(csv, body.str());
  if (!ratio_csv.empty()) {
    std::ostringstream ratios;
    write_ratio_csv(ratios, rows);
    write_text_file(ratio_csv, ratios.str());
  }
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const SweepRow& r) { return r.status != "ok"; });
  if (!csv.empty()) out << fmt::format("{} rows written to {}\n", rows.size(), csv);
  if (failed > 0) {
    out << fmt::format("{} rows failed\n", failed);
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Price of anarchy of cost-sharing distribution rules"};
  app.require_subcommand(1);

  std::string cost_spec, rule_spec = "sv", method = "dual", output, dump_lp, rule_output, report_path, verify_only;
  std::string grid = "1.0:0.05:2.0", rules = "sv,mc,optimal", csv, ratio_csv;
  int n = 20, max_n = 12;
  double tol = 1e-8;
  SweepSpec sweep;
  sweep.jobs = default_jobs();

  auto* poa = app.add_subcommand("poa", "price of anarchy of one rule");
  poa->add_option("--cost", cost_spec, "poly:<d> or file:<path>")->required();
  poa->add_option("--rule", rule_spec, "sv | mc | optimal | file:<path>");
  poa->add_option("--n", n, "number of players");
  poa->add_option("--method", method, "primal | dual | reduced | closed-form | all");
  poa->add_option("--output", output, "JSON result path");
  poa->add_option("--dump-lp", dump_lp, "write the program in CPLEX LP format");

  auto* design = app.add_subcommand("design", "PoA-optimal distribution rule");
  design->add_option("--cost", cost_spec, "poly:<d> or file:<path>")->required();
  design->add_option("--n", n, "number of players");
  design->add_option("--output", output, "JSON result path");
  design->add_option("--rule-output", rule_output, "designed rule in rule-file format");

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep c(j) = j^d over a grid of exponents");
  sweep_cmd->add_option("--n", sweep.n, "number of players");
  sweep_cmd->add_option("--d-grid", grid, "lo:step:hi or comma list");
  sweep_cmd->add_option("--rules", rules, "comma list of rule specs");
  sweep_cmd->add_option("--method", sweep.method, "primal | dual | reduced | closed-form | all");
  sweep_cmd->add_option("--csv", csv, "output CSV (stdout when omitted)");
  sweep_cmd->add_option("--ratio-csv", ratio_csv, "PoA(rule)/PoA(optimal) CSV");
  sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads (default $POA_LAB_JOBS or 1)");

  auto* worst = app.add_subcommand("worstcase", "build and verify a worst-case game");
  worst->add_option("--cost", cost_spec, "poly:<d> or file:<path>");
  worst->add_option("--rule", rule_spec, "sv | mc | optimal | file:<path>");
  worst->add_option("--n", n, "number of players");
  worst->add_option("--max-n", max_n, "refuse larger n");
  worst->add_option("--output", output, "certificate JSON path");
  worst->add_option("--report", report_path, "verification report JSON path");
  worst->add_option("--verify-only", verify_only, "re-verify a stored certificate (file:<path>)");
  worst->add_option("--tol", tol, "verification tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*poa) return cmd_poa(cost_spec, rule_spec, n, method, output, dump_lp, out);
    if (*design) return cmd_design(cost_spec, n, output, rule_output, out);
    if (*sweep_cmd) return cmd_sweep(sweep, grid, rules, csv, ratio_csv, out);
    if (*worst) {
      if (verify_only.empty() && cost_spec.empty()) throw UsageError("--cost is required unless --verify-only is given");
      return cmd_worstcase(cost_spec, rule_spec, n, max_n, output, report_path, verify_only, tol, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace poa::cli
