#include <cmath>
#include <random>

#include "doctest.h"
#include "poa/cost_model.hpp"
#include "poa/json_io.hpp"

using namespace poa;

TEST_CASE("polynomial cost") {
  const auto linear = make_polynomial_cost(1.0, 3);
  CHECK(linear(1) == 1.0);
  CHECK(linear(2) == 2.0);
  CHECK(linear(3) == 3.0);

  const auto square = make_polynomial_cost(2.0, 3);
  CHECK(square(2) == 4.0);
  CHECK(square(3) == 9.0);

  const auto c = make_polynomial_cost(1.2, 20);
  CHECK(c(1) == 1.0);
  CHECK(c(2) == doctest::Approx(2.29740).epsilon(1e-5));

  CHECK_THROWS_AS(make_polynomial_cost(1.0, 0), std::invalid_argument);
}

TEST_CASE("cost from values") {
  const auto normalized = make_cost_from_values({2, 4, 6}, true);
  CHECK(normalized(1) == 1.0);
  CHECK(normalized(2) == 2.0);
  CHECK(normalized(3) == 3.0);

  const auto verbatim = make_cost_from_values({1, 4, 9}, false);
  CHECK(verbatim(3) == 9.0);

  // Decreasing but positive costs are legal.
  CHECK_NOTHROW(make_cost_from_values({1, 0.5}, false));
  CHECK_THROWS_AS(make_cost_from_values({1, -1}, false), std::invalid_argument);
  CHECK_THROWS_AS(make_cost_from_values({1, 0}, true), std::invalid_argument);
  CHECK_THROWS_AS(make_cost_from_values({}, true), std::invalid_argument);
}

TEST_CASE("extended accessors") {
  const auto c = make_polynomial_cost(2.0, 4);
  const auto f = shapley_rule(4);
  CHECK(c(0) == 0.0);
  CHECK(f(0) == 0.0);
  CHECK(f(5) == f(4));
  CHECK(c.extended(5).is_infinite());
  CHECK_THROWS_AS(c.extended(5).value(), std::domain_error);
  CHECK_THROWS_AS(c(5), std::out_of_range);
  CHECK_FALSE(c.extended(4).is_infinite());

  // A zero count never touches the sentinel.
  CHECK(weighted_share(0, f, c, 5) == 0.0);
  CHECK_THROWS_AS(weighted_share(1, f, c, 5), std::domain_error);
  CHECK(weighted_share(3, f, c, 2) == doctest::Approx(3 * 0.5 * 4));
}

TEST_CASE("shapley rule values") {
  const auto f = shapley_rule(7);
  CHECK(f(2) == 0.5);
  CHECK(std::abs(f(3) - 0.333) <= 5e-4);
  CHECK(std::abs(f(7) - 0.143) <= 5e-4);
  CHECK(shapley_rule(1)(1) == 1.0);
  CHECK(shapley_rule(5)(5) == doctest::Approx(0.2));
}

TEST_CASE("marginal contribution rule") {
  const auto c = make_polynomial_cost(1.2, 20);
  const auto f = marginal_contribution_rule(c);
  CHECK(f(1) == 1.0);
  // The reference column is truncated, not rounded, to three decimals.
  const double table[] = {1.0, 0.564, 0.385, 0.291, 0.234, 0.196, 0.168};
  for (int j = 1; j <= 7; ++j) {
    CHECK(std::floor(f(j) * 1000.0 + 1e-9) / 1000.0 == doctest::Approx(table[j - 1]).epsilon(1e-12));
    CHECK(std::abs(f(j) - table[j - 1]) < 1e-3);
  }

  const auto linear = marginal_contribution_rule(make_polynomial_cost(1.0, 10));
  const auto sv = shapley_rule(10);
  for (int j = 1; j <= 10; ++j) CHECK(linear(j) == doctest::Approx(sv(j)));

  CHECK(marginal_contribution_rule(make_polynomial_cost(2.0, 3))(2) == 0.75);
  CHECK_THROWS_AS(marginal_contribution_rule(make_cost_from_values({1, 0.5}, false)), std::invalid_argument);
}

TEST_CASE("structural predicates") {
  const auto square = make_polynomial_cost(2.0, 6);
  const auto linear = make_polynomial_cost(1.0, 6);
  CHECK(is_fc_nondecreasing(shapley_rule(6), square));
  CHECK(is_fc_nondecreasing(shapley_rule(6), linear));
  CHECK(is_fc_nondecreasing(marginal_contribution_rule(square), square));
  CHECK_FALSE(is_fc_nondecreasing(DistributionRule::from_values({1, 0.1, 0.1, 0.1, 0.1, 0.1}), linear));
  CHECK_THROWS_AS(is_fc_nondecreasing(shapley_rule(5), square), std::invalid_argument);

  CHECK(is_convex_nondecreasing(make_polynomial_cost(1.5, 8)));
  CHECK_FALSE(is_convex_nondecreasing(make_polynomial_cost(0.5, 8)));
  CHECK(is_convex_nondecreasing(make_cost_from_values({1, 2, 3}, false)));
  CHECK_FALSE(is_convex_nondecreasing(make_cost_from_values({1, 0.5, 2}, false)));
  // Large n: 1/j * j must still count as constant.
  CHECK(is_fc_nondecreasing(shapley_rule(60), make_polynomial_cost(1.0, 60)));
}

TEST_CASE("property: marginal contribution dominates shapley for convex costs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> increment(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 12;
    // Random convex nondecreasing cost: nondecreasing increments.
    std::vector<double> steps(n);
    for (double& s : steps) s = increment(rng);
    std::sort(steps.begin(), steps.end());
    std::vector<double> values;
    double level = 0.0;
    for (double s : steps) values.push_back(level += s + 1e-3);
    const auto c = make_cost_from_values(values, true);
    REQUIRE(is_convex_nondecreasing(c));
    const auto mc = marginal_contribution_rule(c);
    const auto sv = shapley_rule(n);
    for (int j = 1; j <= n; ++j) CHECK(mc(j) >= sv(j) - 1e-12);
    CHECK(mc(1) * c(1) == doctest::Approx(1.0));
    CHECK(sv(1) * c(1) == doctest::Approx(1.0));
  }
}

TEST_CASE("json round trip") {
  const auto c = make_polynomial_cost(1.37, 9);
  const auto f = marginal_contribution_rule(c);
  const auto c2 = io::cost_from_json(io::to_json(c));
  const auto f2 = io::rule_from_json(io::to_json(f));
  for (int j = 1; j <= 9; ++j) {
    CHECK(c2(j) == c(j));
    CHECK(f2(j) == f(j));
  }
  CHECK(io::to_json(c).at("kind") == "cost");
  CHECK(io::to_json(f).at("kind") == "rule");
  CHECK_THROWS(io::cost_from_json(io::to_json(f)));
  CHECK_THROWS(io::rule_from_json(io::json{{"kind", "rule"}, {"n", 3}, {"values", {1.0, 0.5}}}));
}
