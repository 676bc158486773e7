#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "poa/cost_model.hpp"

namespace poa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Thrown for malformed specs and arguments; maps to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `poly:<d>` or `file:<path>`.
CostFunction parse_cost_spec(const std::string& spec, int n);

/// `sv | mc | optimal | file:<path>`; the designed rule is computed for (c, n).
DistributionRule resolve_rule(const std::string& spec, const CostFunction& c, int n);
void check_rule_spec(const std::string& spec);

/// `lo:step:hi` (inclusive) or a comma-separated list.
std::vector<double> parse_d_grid(const std::string& text);

struct SweepSpec {
  int n = 20;
  std::vector<double> d_grid;
  std::vector<std::string> rules{"sv", "mc", "optimal"};
  /// primal | dual | reduced | closed-form | all
  std::string method = "dual";
  unsigned jobs = 1;
};

struct SweepRow {
  double d = 0.0;
  std::string rule;
  std::string method;
  std::optional<double> poa;
  std::optional<double> mu_star;
  std::optional<double> lambda_star;
  std::string status = "ok";
};

/// Rows in d-then-rule order (then method order for "all"), independent of jobs.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);
/// Header `d,rule,poa,mu_star,lambda_star,method,status`.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Header `d,rule,ratio`: PoA(rule)/PoA(optimal) for each non-optimal rule.
void write_ratio_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Number formatting shared by every CLI output: 9 significant digits.
std::string format_number(double v);

/// Entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace poa::cli
