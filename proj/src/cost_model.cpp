#include "poa/cost_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace poa {
namespace {
// Relative slack for structural predicates; 1/j * j is not exactly 1 in floating point.
constexpr double kStructuralTol = 1e-12;
}  // namespace

double ExtendedCost::value() const {
  if (!value_) throw std::domain_error("c(n+1) is infinite and has no numeric value");
  return *value_;
}

CostFunction CostFunction::from_values(std::vector<double> values, bool normalize) {
  if (values.empty()) throw std::invalid_argument("cost function needs at least one entry");
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] > 0.0) || !std::isfinite(values[j]))
      throw std::invalid_argument("cost c(" + std::to_string(j + 1) + ") must be finite and > 0");
  }
  if (normalize) {
    const double first = values.front();
    for (double& v : values) v /= first;
  }
  return CostFunction(std::move(values));
}

CostFunction CostFunction::polynomial(double exponent, int n) {
  if (n < 1) throw std::invalid_argument("player count must be >= 1");
  if (!(exponent >= 0.0)) throw std::invalid_argument("exponent must be >= 0");
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) values[j - 1] = std::pow(static_cast<double>(j), exponent);
  return CostFunction(std::move(values));
}

double CostFunction::operator()(int j) const {
  if (j == 0) return 0.0;
  if (j < 0 || j > n()) throw std::out_of_range("c(" + std::to_string(j) + ") outside [0, n]");
  return values_[j - 1];
}

ExtendedCost CostFunction::extended(int j) const {
  if (j == n() + 1) return ExtendedCost::infinity();
  return ExtendedCost::finite((*this)(j));
}

bool CostFunction::is_normalized(double tol) const { return std::abs(values_.front() - 1.0) <= tol; }

CostFunction CostFunction::truncated(int m) const {
  if (m < 1 || m > n()) throw std::invalid_argument("cannot truncate cost function to " + std::to_string(m));
  return CostFunction(std::vector<double>(values_.begin(), values_.begin() + m));
}

DistributionRule DistributionRule::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("distribution rule needs at least one entry");
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!(values[j] >= 0.0) || !std::isfinite(values[j]))
      throw std::invalid_argument("rule f(" + std::to_string(j + 1) + ") must be finite and >= 0");
  }
  return DistributionRule(std::move(values));
}

double DistributionRule::operator()(int j) const {
  if (j == 0) return 0.0;
  if (j == n() + 1) return values_.back();
  if (j < 0 || j > n()) throw std::out_of_range("f(" + std::to_string(j) + ") outside [0, n+1]");
  return values_[j - 1];
}

DistributionRule DistributionRule::truncated(int m) const {
  if (m < 1 || m > n()) throw std::invalid_argument("cannot truncate rule to " + std::to_string(m));
  return DistributionRule(std::vector<double>(values_.begin(), values_.begin() + m));
}

CostFunction make_polynomial_cost(double exponent, int n) { return CostFunction::polynomial(exponent, n); }

CostFunction make_cost_from_values(std::vector<double> values, bool normalize) {
  return CostFunction::from_values(std::move(values), normalize);
}

DistributionRule shapley_rule(int n) {
  if (n < 1) throw std::invalid_argument("player count must be >= 1");
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) f[j - 1] = 1.0 / j;
  return DistributionRule::from_values(std::move(f));
}

DistributionRule marginal_contribution_rule(const CostFunction& c) {
  std::vector<double> f(static_cast<std::size_t>(c.n()));
  for (int j = 1; j <= c.n(); ++j) f[j - 1] = 1.0 - c(j - 1) / c(j);
  // Decreasing costs give negative marginal contributions; they are not rules.
  return DistributionRule::from_values(std::move(f));
}

double weighted_share(int count, const DistributionRule& f, const CostFunction& c, int load) {
  if (count == 0) return 0.0;
  return count * f(load) * c.extended(load).value();
}

bool is_fc_nondecreasing(const DistributionRule& f, const CostFunction& c) {
  if (f.n() != c.n()) throw std::invalid_argument("rule and cost have different player counts");
  for (int j = 1; j < c.n(); ++j) {
    const double next = f(j + 1) * c(j + 1);
    if (next < f(j) * c(j) - kStructuralTol * next) return false;
  }
  return true;
}

bool is_convex_nondecreasing(const CostFunction& c) {
  for (int j = 1; j < c.n(); ++j) {
    const double slack = kStructuralTol * c(j + 1);
    if (c(j + 1) < c(j) - slack) return false;
    if (c(j + 1) - c(j) < c(j) - c(j - 1) - slack) return false;
  }
  return true;
}

}  // namespace poa
