#include "poa/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

namespace poa::lp {

std::size_t LinearProgram::add_variable(std::string name, double objective, double lower, double upper) {
  variables_.push_back({std::move(name), objective, lower, upper});
  return variables_.size() - 1;
}

std::size_t LinearProgram::add_constraint(std::string name, std::vector<double> coefficients, Relation relation,
                                          double rhs) {
  if (coefficients.size() != variables_.size())
    throw std::invalid_argument(fmt::format("constraint '{}' has {} coefficients for {} variables", name,
                                            coefficients.size(), variables_.size()));
  constraints_.push_back({std::move(name), std::move(coefficients), relation, rhs});
  return constraints_.size() - 1;
}

void LinearProgram::validate() const {
  for (const auto& v : variables_) {
    if (std::isnan(v.objective) || std::isnan(v.lower) || std::isnan(v.upper) || std::isinf(v.objective))
      throw std::invalid_argument("variable '" + v.name + "' has a NaN or infinite entry");
    if (v.lower > v.upper) throw std::invalid_argument("variable '" + v.name + "' has lower > upper");
    if (v.lower == kInfinity || v.upper == -kInfinity)
      throw std::invalid_argument("variable '" + v.name + "' has an empty domain");
  }
  for (const auto& c : constraints_) {
    if (c.coefficients.size() != variables_.size())
      throw std::invalid_argument("constraint '" + c.name + "' does not match the variable dimension");
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint '" + c.name + "' has a non-finite rhs");
    for (double a : c.coefficients) {
      if (!std::isfinite(a)) throw std::invalid_argument("constraint '" + c.name + "' has a non-finite coefficient");
    }
  }
}

double LinearProgram::evaluate(const std::vector<double>& x) const {
  double total = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) total += variables_[j].objective * x.at(j);
  return total;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max({worst, variables_[j].lower - x.at(j), x.at(j) - variables_[j].upper});
  }
  for (const auto& c : constraints_) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) lhs += c.coefficients[j] * x[j];
    switch (c.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

// How an original variable maps onto nonnegative internal columns.
enum class ColumnMap { Shifted, Mirrored, Split };

struct VariableMap {
  ColumnMap kind;
  std::size_t column;  // first internal column
  double anchor;       // lower bound (Shifted) or upper bound (Mirrored)
};

// min c^T x, rows A x (rel) b with b >= 0, x >= 0.
struct StandardForm {
  std::vector<VariableMap> maps;
  std::size_t structural = 0;
  std::vector<std::vector<double>> rows;
  std::vector<Relation> relations;
  std::vector<double> rhs;
  std::vector<double> row_sign;         // +1 or -1 applied to normalize rhs >= 0
  std::vector<std::size_t> origin;      // original constraint index, or npos for bound rows
  std::vector<double> cost;
  double cost_offset = 0.0;
  double sense_sign = 1.0;              // -1 when maximizing
};

constexpr std::size_t kNoOrigin = static_cast<std::size_t>(-1);

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  sf.sense_sign = lp.sense() == Sense::Maximize ? -1.0 : 1.0;
  const auto& vars = lp.variables();

  std::size_t col = 0;
  for (const auto& v : vars) {
    if (std::isfinite(v.lower)) {
      sf.maps.push_back({ColumnMap::Shifted, col++, v.lower});
    } else if (std::isfinite(v.upper)) {
      sf.maps.push_back({ColumnMap::Mirrored, col++, v.upper});
    } else {
      sf.maps.push_back({ColumnMap::Split, col, 0.0});
      col += 2;
    }
  }
  sf.structural = col;

  sf.cost.assign(col, 0.0);
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double c = sf.sense_sign * vars[j].objective;
    const auto& m = sf.maps[j];
    switch (m.kind) {
      case ColumnMap::Shifted: sf.cost[m.column] = c; sf.cost_offset += c * m.anchor; break;
      case ColumnMap::Mirrored: sf.cost[m.column] = -c; sf.cost_offset += c * m.anchor; break;
      case ColumnMap::Split: sf.cost[m.column] = c; sf.cost[m.column + 1] = -c; break;
    }
  }

  auto push_row = [&](std::vector<double> row, Relation rel, double b, std::size_t origin) {
    double sign = 1.0;
    if (b < 0.0) {
      sign = -1.0;
      b = -b;
      for (double& a : row) a = -a;
      if (rel == Relation::LessEqual) rel = Relation::GreaterEqual;
      else if (rel == Relation::GreaterEqual) rel = Relation::LessEqual;
    }
    sf.rows.push_back(std::move(row));
    sf.relations.push_back(rel);
    sf.rhs.push_back(b);
    sf.row_sign.push_back(sign);
    sf.origin.push_back(origin);
  };

  for (std::size_t i = 0; i < lp.constraints().size(); ++i) {
    const auto& con = lp.constraints()[i];
    std::vector<double> row(col, 0.0);
    double b = con.rhs;
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const double a = con.coefficients[j];
      if (a == 0.0) continue;
      const auto& m = sf.maps[j];
      switch (m.kind) {
        case ColumnMap::Shifted: row[m.column] = a; b -= a * m.anchor; break;
        case ColumnMap::Mirrored: row[m.column] = -a; b -= a * m.anchor; break;
        case ColumnMap::Split: row[m.column] = a; row[m.column + 1] = -a; break;
      }
    }
    push_row(std::move(row), con.relation, b, i);
  }

  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& m = sf.maps[j];
    if (m.kind == ColumnMap::Shifted && std::isfinite(vars[j].upper)) {
      std::vector<double> row(col, 0.0);
      row[m.column] = 1.0;
      push_row(std::move(row), Relation::LessEqual, vars[j].upper - vars[j].lower, kNoOrigin);
    }
  }
  return sf;
}

enum class ColumnKind { Structural, Slack, Artificial };

class Tableau {
 public:
  Tableau(const StandardForm& sf, const SolverOptions& opt) : sf_(sf), opt_(opt) {
    m_ = sf.rows.size();
    kinds_.assign(sf.structural, ColumnKind::Structural);
    initial_.assign(m_, 0);
    // Column layout: structural, then one slack/surplus per inequality row,
    // then one artificial per >= or = row.
    std::vector<std::size_t> slack_of(m_, kNoOrigin), art_of(m_, kNoOrigin);
    for (std::size_t i = 0; i < m_; ++i) {
      if (sf.relations[i] != Relation::Equal) {
        slack_of[i] = kinds_.size();
        kinds_.push_back(ColumnKind::Slack);
      }
    }
    for (std::size_t i = 0; i < m_; ++i) {
      if (sf.relations[i] != Relation::LessEqual) {
        art_of[i] = kinds_.size();
        kinds_.push_back(ColumnKind::Artificial);
      }
    }
    cols_ = kinds_.size();
    width_ = cols_ + 1;
    data_.assign(m_ * width_, 0.0);
    basis_.assign(m_, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      std::copy(sf.rows[i].begin(), sf.rows[i].end(), data_.begin() + i * width_);
      if (slack_of[i] != kNoOrigin) at(i, slack_of[i]) = sf.relations[i] == Relation::LessEqual ? 1.0 : -1.0;
      if (art_of[i] != kNoOrigin) at(i, art_of[i]) = 1.0;
      rhs(i) = sf.rhs[i];
      basis_[i] = sf.relations[i] == Relation::LessEqual ? slack_of[i] : art_of[i];
      initial_[i] = basis_[i];
    }
    reduced_.assign(cols_, 0.0);
  }

  bool has_artificials() const {
    return std::find(kinds_.begin(), kinds_.end(), ColumnKind::Artificial) != kinds_.end();
  }

  // Loads phase costs and prices out the current basis.
  void set_costs(bool phase_one) {
    phase_one_ = phase_one;
    costs_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < cols_; ++j) {
      if (phase_one) costs_[j] = kinds_[j] == ColumnKind::Artificial ? 1.0 : 0.0;
      else if (kinds_[j] == ColumnKind::Structural) costs_[j] = sf_.cost[j];
    }
    reduced_ = costs_;
    objective_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = costs_[basis_[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * at(i, j);
      objective_ += cb * rhs(i);
    }
  }

  enum class Outcome { Optimal, Unbounded, IterationLimit };

  Outcome run(std::size_t& iterations, std::size_t limit) {
    bool bland = false;
    std::size_t degenerate_run = 0;
    while (true) {
      if (iterations >= limit) return Outcome::IterationLimit;
      const std::size_t q = choose_entering(bland);
      if (q == kNoOrigin) return Outcome::Optimal;
      const std::size_t p = choose_leaving(q, bland);
      if (p == kNoOrigin) return Outcome::Unbounded;
      if (rhs(p) <= opt_.feasibility_tolerance) {
        if (++degenerate_run >= opt_.degenerate_switch) bland = true;
      } else {
        degenerate_run = 0;
      }
      pivot(p, q);
      ++iterations;
    }
  }

  // After phase one, replace zero-level artificials in the basis by any
  // non-artificial column with a usable pivot. Rows with none are redundant.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (kinds_[basis_[i]] != ColumnKind::Artificial) continue;
      std::size_t best = kNoOrigin;
      double best_mag = opt_.pivot_tolerance;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (kinds_[j] == ColumnKind::Artificial) continue;
        if (std::abs(at(i, j)) > best_mag) {
          best_mag = std::abs(at(i, j));
          best = j;
        }
      }
      if (best != kNoOrigin) pivot(i, best);
    }
  }

  double objective() const { return objective_; }

  std::vector<double> column_values() const {
    std::vector<double> x(cols_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) x[basis_[i]] = std::max(0.0, rhs(i));
    return x;
  }

  // y_i = -reduced cost of the column that started basic in row i (its
  // phase-two cost is zero and its original column is e_i).
  std::vector<double> multipliers() const {
    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) y[i] = -reduced_[initial_[i]];
    return y;
  }

  double max_basic_artificial() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (kinds_[basis_[i]] == ColumnKind::Artificial) worst = std::max(worst, rhs(i));
    }
    return worst;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * width_ + j]; }
  double& rhs(std::size_t i) { return data_[i * width_ + cols_]; }
  double rhs(std::size_t i) const { return data_[i * width_ + cols_]; }

  bool may_enter(std::size_t j) const { return phase_one_ || kinds_[j] != ColumnKind::Artificial; }

  std::size_t choose_entering(bool bland) const {
    std::size_t best = kNoOrigin;
    double most_negative = -opt_.optimality_tolerance;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!may_enter(j) || reduced_[j] >= -opt_.optimality_tolerance) continue;
      if (bland) return j;
      if (reduced_[j] < most_negative) {
        most_negative = reduced_[j];
        best = j;
      }
    }
    return best;
  }

  std::size_t choose_leaving(std::size_t q, bool bland) const {
    std::size_t best = kNoOrigin;
    double best_ratio = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, q);
      if (a <= opt_.pivot_tolerance) continue;
      const double ratio = std::max(0.0, rhs(i)) / a;
      if (best == kNoOrigin) {
        best = i;
        best_ratio = ratio;
        continue;
      }
      const double tie = 1e-12 * (1.0 + std::abs(best_ratio));
      if (ratio < best_ratio - tie) {
        best = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + tie) {
        const bool better = bland ? basis_[i] < basis_[best] : a > at(best, q);
        if (better) {
          best = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    return best;
  }

  void pivot(std::size_t p, std::size_t q) {
    const double piv = at(p, q);
    double* prow = &data_[p * width_];
    for (std::size_t j = 0; j < width_; ++j) prow[j] /= piv;
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == p) continue;
      double* row = &data_[i * width_];
      const double factor = row[q];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= factor * prow[j];
      row[q] = 0.0;
    }
    const double factor = reduced_[q];
    if (factor != 0.0) {
      for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= factor * prow[j];
      reduced_[q] = 0.0;
      objective_ += factor * prow[cols_];
    }
    basis_[p] = q;
  }

  const StandardForm& sf_;
  const SolverOptions& opt_;
  std::size_t m_ = 0, cols_ = 0, width_ = 0;
  std::vector<ColumnKind> kinds_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_, initial_;
  std::vector<double> costs_, reduced_;
  double objective_ = 0.0;
  bool phase_one_ = false;
};

std::vector<double> recover_values(const LinearProgram& lp, const StandardForm& sf, const std::vector<double>& cols) {
  std::vector<double> x(lp.num_variables());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& m = sf.maps[j];
    switch (m.kind) {
      case ColumnMap::Shifted: x[j] = m.anchor + cols[m.column]; break;
      case ColumnMap::Mirrored: x[j] = m.anchor - cols[m.column]; break;
      case ColumnMap::Split: x[j] = cols[m.column] - cols[m.column + 1]; break;
    }
  }
  return x;
}

}  // namespace

Solution solve(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  const StandardForm sf = to_standard_form(lp);
  Tableau tab(sf, options);
  Solution sol;
  const std::size_t limit =
      options.max_iterations ? options.max_iterations : 50'000 + 20 * (sf.rows.size() + sf.structural);

  double rhs_scale = 1.0;
  for (double b : sf.rhs) rhs_scale = std::max(rhs_scale, b);

  if (tab.has_artificials()) {
    tab.set_costs(true);
    const auto outcome = tab.run(sol.iterations, limit);
    if (outcome == Tableau::Outcome::IterationLimit) {
      sol.diagnostics = fmt::format("phase one hit the iteration limit ({})", limit);
      return sol;
    }
    if (tab.objective() > options.feasibility_tolerance * rhs_scale) {
      sol.status = Status::Infeasible;
      sol.diagnostics = fmt::format("phase one stopped with infeasibility {:.3e}", tab.objective());
      return sol;
    }
    tab.drive_out_artificials();
  }

  tab.set_costs(false);
  const auto outcome = tab.run(sol.iterations, limit);
  if (outcome == Tableau::Outcome::IterationLimit) {
    sol.diagnostics = fmt::format("phase two hit the iteration limit ({})", limit);
    return sol;
  }
  if (outcome == Tableau::Outcome::Unbounded) {
    sol.status = Status::Unbounded;
    sol.diagnostics = "ratio test found no blocking row";
    return sol;
  }

  const auto cols = tab.column_values();
  sol.values = recover_values(lp, sf, cols);
  sol.objective = lp.evaluate(sol.values);

  // Multipliers of the internal min-form rows, mapped back to the original
  // rows and sense. Bound rows contribute to the dual objective only.
  const auto y = tab.multipliers();
  double internal_dual = sf.cost_offset;
  for (std::size_t i = 0; i < y.size(); ++i) internal_dual += y[i] * sf.rhs[i];
  sol.dual_objective = sf.sense_sign * internal_dual;
  sol.duals.assign(lp.num_constraints(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (sf.origin[i] != kNoOrigin) sol.duals[sf.origin[i]] = sf.sense_sign * sf.row_sign[i] * y[i];
  }

  // Independent checks on the original data.
  sol.max_violation = lp.max_violation(sol.values);
  double dual_inf = 0.0;
  for (std::size_t j = 0; j < sf.structural; ++j) {
    double d = sf.cost[j];
    for (std::size_t i = 0; i < y.size(); ++i) d -= y[i] * sf.rows[i][j];
    dual_inf = std::max(dual_inf, -d);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    // Min form sign conditions: y <= 0 on <= rows, y >= 0 on >= rows.
    if (sf.relations[i] == Relation::LessEqual) dual_inf = std::max(dual_inf, y[i]);
    if (sf.relations[i] == Relation::GreaterEqual) dual_inf = std::max(dual_inf, -y[i]);
  }
  sol.max_dual_infeasibility = dual_inf;

  if (tab.max_basic_artificial() > options.feasibility_tolerance * rhs_scale ||
      sol.max_violation > options.feasibility_tolerance) {
    sol.status = Status::NumericalFailure;
    sol.diagnostics = fmt::format("assignment violates the original program by {:.3e}", sol.max_violation);
    return sol;
  }
  sol.status = Status::Optimal;
  sol.diagnostics = fmt::format("{} pivots, primal residual {:.3e}, dual residual {:.3e}", sol.iterations,
                                sol.max_violation, sol.max_dual_infeasibility);
  return sol;
}

DualPair solve_dual_pair(const LinearProgram& lp, const SolverOptions& options) {
  auto sol = solve(lp, options);
  if (!sol.optimal()) throw SolveError(sol.status, "primal not solved to optimality: " + sol.diagnostics);
  const double gap = std::abs(sol.objective - sol.dual_objective);
  if (gap > 1e-6 * std::max(1.0, std::abs(sol.objective)))
    throw SolveError(Status::NumericalFailure, fmt::format("duality gap {:.3e} exceeds 1e-6", gap));
  return {sol, sol.dual_objective};
}

void write_lp_format(const LinearProgram& lp, std::ostream& out) {
  const auto& vars = lp.variables();
  auto term_list = [&](const std::vector<double>& coef) {
    std::ostringstream s;
    bool first = true;
    for (std::size_t j = 0; j < coef.size(); ++j) {
      if (coef[j] == 0.0) continue;
      const double a = coef[j];
      if (first) s << (a < 0 ? "- " : "");
      else s << (a < 0 ? " - " : " + ");
      s << fmt::format("{:.17g} {}", std::abs(a), vars[j].name);
      first = false;
    }
    if (first) s << fmt::format("0 {}", vars.empty() ? "x" : vars.front().name);
    return s.str();
  };

  out << (lp.sense() == Sense::Maximize ? "Maximize\n" : "Minimize\n");
  std::vector<double> obj;
  for (const auto& v : vars) obj.push_back(v.objective);
  out << " obj: " << term_list(obj) << "\nSubject To\n";
  for (const auto& c : lp.constraints()) {
    const char* rel = c.relation == Relation::LessEqual ? "<=" : c.relation == Relation::Equal ? "=" : ">=";
    out << ' ' << c.name << ": " << term_list(c.coefficients) << ' ' << rel << ' ' << fmt::format("{:.17g}", c.rhs)
        << '\n';
  }
  out << "Bounds\n";
  for (const auto& v : vars) {
    const bool lo_inf = v.lower == -kInfinity, up_inf = v.upper == kInfinity;
    if (lo_inf && up_inf) out << ' ' << v.name << " free\n";
    else if (lo_inf) out << " -inf <= " << v.name << " <= " << fmt::format("{:.17g}", v.upper) << '\n';
    else if (up_inf) out << ' ' << v.name << " >= " << fmt::format("{:.17g}", v.lower) << '\n';
    else
      out << ' ' << fmt::format("{:.17g}", v.lower) << " <= " << v.name << " <= " << fmt::format("{:.17g}", v.upper)
          << '\n';
  }
  out << "End\n";
}

}  // namespace poa::lp
