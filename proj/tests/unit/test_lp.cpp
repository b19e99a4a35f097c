#include <gtest/gtest.h>

#include "../support.hpp"

using namespace nctomo;
using namespace nctomo::testing;

TEST(Simplex, SmallKnownOptimum) {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3  ->  x = 3, y = 1
  DenseLp lp;
  lp.cost = {-3, -2};
  lp.lower = {0, 0};
  lp.upper = {3, std::numeric_limits<double>::infinity()};
  lp.a = {{1, 1}, {1, 3}};
  lp.sense = {RowSense::le, RowSense::le};
  lp.rhs = {4, 6};
  const auto r = simplex_solve(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, -11, 1e-12);
  EXPECT_NEAR(r.x[0], 3, 1e-12);
  EXPECT_NEAR(r.x[1], 1, 1e-12);
}

TEST(Simplex, EqualityGreaterAndShiftedBounds) {
  // min x + y s.t. x + y >= 2, x - y = 1, x >= 1
  DenseLp lp;
  lp.cost = {1, 1};
  lp.lower = {1, 0};
  lp.upper = {10, 10};
  lp.a = {{1, 1}, {1, -1}};
  lp.sense = {RowSense::ge, RowSense::eq};
  lp.rhs = {2, 1};
  const auto r = simplex_solve(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.x[0], 1.5, 1e-12);
  EXPECT_NEAR(r.x[1], 0.5, 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  DenseLp lp;
  lp.cost = {1};
  lp.lower = {0};
  lp.upper = {1};
  lp.a = {{1}};
  lp.sense = {RowSense::ge};
  lp.rhs = {2};
  const auto r = simplex_solve(lp);
  EXPECT_EQ(r.status, LpStatus::infeasible);
  EXPECT_GT(r.infeasibility, 0);
  EXPECT_EQ(r.violated, (std::vector<std::size_t>{0}));
  lp.cost = {-1};
  lp.upper = {std::numeric_limits<double>::infinity()};
  EXPECT_EQ(simplex_solve(lp).status, LpStatus::unbounded);
}

TEST(Simplex, RedundantRowsAreHarmless) {
  DenseLp lp;
  lp.cost = {1, 2};
  lp.lower = {0, 0};
  lp.upper = {5, 5};
  lp.a = {{1, 1}, {2, 2}, {1, 1}};
  lp.sense = {RowSense::eq, RowSense::eq, RowSense::ge};
  lp.rhs = {3, 6, 3};
  const auto r = simplex_solve(lp);
  ASSERT_EQ(r.status, LpStatus::optimal);
  EXPECT_NEAR(r.objective, 3, 1e-12);
}

TEST(RoutingLp, FiveLinkTree) {
  const auto cfg = builtin_tree5().configuration();
  const auto r = build_min_cost_lp(cfg, {"CD"}, 1.0);
  const auto s = solve_lp(r.model);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 5, 1e-6);
  EXPECT_TRUE(routing_solution_consistent(r, s.values, 5));
  EXPECT_NEAR(solve_lp(build_min_cost_lp(cfg, {}, 1.0).model).objective, 0, 1e-9);
  // the support of the optimal flow keeps the target identifiable
  const auto sub = flow_support(cfg, r, s);
  EXPECT_TRUE(check_link_identifiable(sub, "CD").identifiable);
}

TEST(RoutingLp, AllEdgesUseEveryEdgeOnce) {
  for (const auto& cfg : {builtin_tree5().configuration(), builtin_tree9().configuration()}) {
    std::vector<std::string> all;
    std::vector<double> costs;
    for (const auto& e : cfg.topology.edges()) {
      all.push_back(e.id);
      costs.push_back(1.0 + static_cast<double>(costs.size() % 3));
    }
    const double rho = 0.5;
    const auto r = build_min_cost_lp(cfg, all, rho, costs);
    const auto s = solve_lp(r.model);
    ASSERT_TRUE(s.optimal());
    double expect = 0;
    for (double c : costs) expect += rho * c;
    EXPECT_NEAR(s.objective, expect, 1e-6);
    for (std::size_t e = 0; e < cfg.topology.edge_count(); ++e) EXPECT_NEAR(s.values[r.total[e]], rho, 1e-9);
    EXPECT_TRUE(routing_solution_consistent(r, s.values, cfg.topology.edge_count()));
  }
}

TEST(RoutingLp, ScalesWithRateAndCosts) {
  const auto cfg = builtin_tree9().configuration();
  const std::vector<std::string> targets{"7", "9"};
  const double base = solve_lp(build_min_cost_lp(cfg, targets, 1.0).model).objective;
  EXPECT_NEAR(solve_lp(build_min_cost_lp(cfg, targets, 2.5).model).objective, 2.5 * base, 1e-6);
  EXPECT_NEAR(solve_lp(build_min_cost_lp(cfg, targets, 1.0, std::vector<double>(9, 3.0)).model).objective, 3 * base, 1e-6);
}

TEST(RoutingLp, RowOrderDoesNotChangeTheOptimum) {
  const auto cfg = builtin_tree9().configuration();
  auto model = build_min_cost_lp(cfg, {"7", "1"}, 1.0).model;
  const double base = solve_lp(model).objective;
  Rng rng(3);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(model.rows.begin(), model.rows.end(), rng);
    EXPECT_NEAR(solve_lp(model).objective, base, 1e-9);
  }
}

TEST(RoutingLp, TextRoundTripIsExact) {
  const auto cfg = builtin_tree5().configuration();
  const auto model = build_min_cost_lp(cfg, {"CD", "AC"}, 0.1, {1.5, 2, 1e-3, 7, 1.0 / 3}).model;
  const auto text = serialize_lp(model);
  const auto back = parse_lp(text);
  EXPECT_EQ(serialize_lp(back), text);
  EXPECT_EQ(back.targets, model.targets);
  EXPECT_EQ(back.rho, 0.1);
  EXPECT_EQ(solve_lp(back).objective, solve_lp(model).objective);
}

TEST(RoutingLp, ParseErrors) {
  EXPECT_THROW(parse_lp("Minimize\n obj: + 1 x\n"), ParseError);                 // no End
  EXPECT_THROW(parse_lp("Minimize\n obj: + one x\nEnd\n"), ParseError);          // bad number
  EXPECT_THROW(parse_lp("Minimize\n obj: + 1 x\nSubject To\n r: + 1 y <= 1\nEnd\n"), ParseError);
  EXPECT_THROW(parse_lp("Maximize\n obj: + 1 x\nEnd\n"), ParseError);
  try {
    parse_lp("Minimize\n obj: + 1 x\nBounds\n x ~ 3\nEnd\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(RoutingLp, Guards) {
  const auto cfg = builtin_tree5().configuration();
  EXPECT_THROW(build_min_cost_lp(cfg, {"XY"}, 1.0), DomainError);
  EXPECT_THROW(build_min_cost_lp(cfg, {"CD", "CD"}, 1.0), DomainError);
  EXPECT_THROW(build_min_cost_lp(cfg, {"CD"}, 0.0), DomainError);
  EXPECT_THROW(build_min_cost_lp(cfg, {"CD"}, 1.0, {1, 2}), DomainError);
  const auto big = builtin_tree45().configuration();
  std::vector<std::string> all;
  for (const auto& e : big.topology.edges()) all.push_back(e.id);
  EXPECT_THROW(build_min_cost_lp(big, all, 1.0), CapacityError);
}

TEST(RoutingLp, InfeasibleTargetReportsCertificate) {
  // target edge whose tail cannot be fed three units of conceptual flow
  const auto cfg = make_configuration(parse_topology("1 s a\n2 a r\n"), {"s"}, {"r"});
  const auto s = solve_lp(build_min_cost_lp(cfg, {"2"}, 1.0).model);
  EXPECT_EQ(s.status, LpStatus::infeasible);
  EXPECT_FALSE(s.certificate.empty());
}
