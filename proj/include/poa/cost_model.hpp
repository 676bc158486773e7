#pragma once

#include <optional>
#include <span>
#include <vector>

namespace poa {

/// Value of c(j) on the extended domain {0, ..., n+1}. c(n+1) is a
/// distinguished infinity, never a large float; reading it as a number throws.
class ExtendedCost {
 public:
  static ExtendedCost finite(double v) { return ExtendedCost(v); }
  static ExtendedCost infinity() { return ExtendedCost(std::nullopt); }

  bool is_infinite() const { return !value_.has_value(); }
  double value() const;

 private:
  explicit ExtendedCost(std::optional<double> v) : value_(v) {}
  std::optional<double> value_;
};

/// Base cost c(1..n) shared by all resources up to the scaling v_r.
class CostFunction {
 public:
  /// Entries must be strictly positive. With normalize set every entry is
  /// divided by the first so that c(1) = 1.
  static CostFunction from_values(std::vector<double> values, bool normalize);
  /// c(j) = j^d.
  static CostFunction polynomial(double exponent, int n);

  int n() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }

  /// c(j) for 0 <= j <= n, with c(0) = 0. Throws std::out_of_range otherwise.
  double operator()(int j) const;
  /// c(j) for 0 <= j <= n+1; j = n+1 yields the infinity sentinel.
  ExtendedCost extended(int j) const;

  bool is_normalized(double tol = 1e-12) const;
  /// Restriction to the first m players (m <= n).
  CostFunction truncated(int m) const;

 private:
  explicit CostFunction(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

/// Fraction f(j) of a resource's cost charged to each of its j users.
class DistributionRule {
 public:
  /// Entries must be nonnegative; no upper bound or budget balance is imposed.
  static DistributionRule from_values(std::vector<double> values);

  int n() const { return static_cast<int>(values_.size()); }
  std::span<const double> values() const { return values_; }

  /// f(j) for 0 <= j <= n+1 with f(0) = 0 and f(n+1) = f(n).
  double operator()(int j) const;

  DistributionRule truncated(int m) const;

 private:
  explicit DistributionRule(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

CostFunction make_polynomial_cost(double exponent, int n);
CostFunction make_cost_from_values(std::vector<double> values, bool normalize);

DistributionRule shapley_rule(int n);
DistributionRule marginal_contribution_rule(const CostFunction& c);

/// count * f(load) * c(load). A zero count short-circuits to 0 before
/// c(load) is read, so the c(n+1) sentinel only surfaces for nonzero counts,
/// where it throws std::domain_error.
double weighted_share(int count, const DistributionRule& f, const CostFunction& c, int load);

/// f(j+1)c(j+1) >= f(j)c(j) for 1 <= j <= n-1. Throws on mismatched n.
bool is_fc_nondecreasing(const DistributionRule& f, const CostFunction& c);
/// c(j+1) >= c(j) and c(j+1)-c(j) >= c(j)-c(j-1) for j in [n-1], with c(0) = 0.
bool is_convex_nondecreasing(const CostFunction& c);

}  // namespace poa
