#include <gtest/gtest.h>

#include "../support.hpp"

using namespace nctomo;
using namespace nctomo::testing;

TEST(Mle, ExactRecoveryOverTheRateGrid) {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const auto cfg = random_tree_model(rng, 12);
    const auto m = random_model(rng, cfg.topology.edge_count());
    const auto est = mle_tree(cfg, exact_distribution(cfg, CodeAssignment::xor_mode(cfg.topology.edge_count()), m));
    for (std::size_t e = 0; e < m.alpha.size(); ++e) ASSERT_NEAR(est.raw[e], m.alpha[e], 1e-9);
    EXPECT_EQ(est.flagged(), 0u);
  }
}

TEST(Mle, EstimatesCommuteWithDuality) {
  Rng rng(10);
  for (int i = 0; i < 10; ++i) {
    const auto cfg = random_tree_model(rng, 10);
    const auto code = CodeAssignment::xor_mode(cfg.topology.edge_count());
    const auto h = run_experiments(cfg, code, random_model(rng, cfg.topology.edge_count()), 3000, 1);
    const auto f = dual_outcome_map(cfg, code, code);
    const auto a = by_edge_id(mle_tree(cfg, h)), b = by_edge_id(mle_tree(dual(cfg), map_histogram(h, f)));
    for (const auto& [id, v] : a) EXPECT_NEAR(v, b.at(id), 1e-12) << id;
  }
}

TEST(Mle, SharedLinkGammaIdentity) {
  // gamma at C (reverse side) = gamma at D (multicast side) = 1 - p(nothing seen)
  Rng rng(12);
  for (int i = 0; i < 10; ++i) {
    const auto cfg = random_tree_model(rng, 12);
    const auto h = run_experiments(cfg, CodeAssignment::xor_mode(cfg.topology.edge_count()),
                                   random_model(rng, cfg.topology.edge_count()), 500, 2);
    const ObservationLayout layout(cfg);
    const double p0 = h.probability(Outcome(layout.width(), 0));
    const auto g = estimate_gammas(cfg, h);
    const auto tm = analyze_tree_model(cfg);
    EXPECT_DOUBLE_EQ(g.reverse[tm.c], g.multicast[tm.d]);
    EXPECT_NEAR(g.gamma_cd, 1 - p0, 1e-15);
  }
}

TEST(Mle, TwoChildClosedFormMatchesBisection) {
  for (double g1 : {0.2, 0.5, 0.8})
    for (double g2 : {0.3, 0.6, 0.9}) {
      const double A = 0.95;  // gamma_k = A (1 - (1 - g1/A)(1 - g2/A))
      const double gk = A * (1 - (1 - g1 / A) * (1 - g2 / A));
      const double closed = g1 * g2 / (g1 + g2 - gk);
      const auto r = solve_minc_equation(gk, {g1, g2});
      EXPECT_FALSE(r.degenerate);
      EXPECT_NEAR(r.A, closed, 1e-12);
    }
}

TEST(Mle, DegenerateEquationIsFlagged) {
  EXPECT_TRUE(solve_minc_equation(0.0, {0.1, 0.2}).degenerate);
  EXPECT_TRUE(solve_minc_equation(0.5, {0.2, 0.3}).degenerate);  // disjoint children
  EXPECT_TRUE(solve_minc_equation(0.5, {0.5}).degenerate);
}

TEST(Mle, SmallSamplesAreClampedNotBroken) {
  const auto cfg = builtin_tree5().configuration();
  const auto h = run_experiments(cfg, CodeAssignment::xor_mode(5), LossModel::uniform(5, 0.95), 5, 1);
  const auto est = mle_tree(cfg, h);
  for (double a : est.alpha) {
    EXPECT_GT(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(Mle, ErrorShrinksWithMoreProbes) {
  const auto cfg = builtin_tree5().configuration();
  const auto code = CodeAssignment::xor_mode(5);
  const auto m = LossModel::uniform(5, 0.7);
  auto median_error = [&](std::uint64_t n) {
    std::vector<double> err;
    for (std::uint64_t t = 0; t < 50; ++t) {
      const auto est = mle_tree(cfg, run_experiments(cfg, code, m, n, counter_hash(31, t, n)));
      err.push_back(std::abs(est.alpha[2] - 0.7));
    }
    std::nth_element(err.begin(), err.begin() + 25, err.end());
    return err[25];
  };
  EXPECT_LT(median_error(20000), median_error(2000));
}

TEST(Mle, RejectsNonTreeModels) {
  EXPECT_THROW(mle_tree(builtin_tree9().configuration(), OutcomeHistogram{}), DomainError);
  const auto cfg = builtin_tree5().configuration();
  EXPECT_THROW(mle_tree(cfg, OutcomeHistogram{}), DomainError);
}

TEST(Fisher, NumericMatchesClosedForm) {
  const auto cfg = builtin_tree5().configuration();
  const LossModel m{{0.9, 0.6, 0.8, 0.7, 0.95}};
  const auto code = CodeAssignment::xor_mode(5);
  const auto closed = fisher_matrix(cfg, code, m, FisherMethod::closed_form_5link);
  const auto numeric = fisher_matrix(cfg, code, m);
  EXPECT_LT((closed.information - numeric.information).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LT((closed.inverse - numeric.inverse).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_FALSE(numeric.singular);
  EXPECT_THROW(fisher_matrix(builtin_tree9().configuration(), CodeAssignment::xor_mode(9), LossModel::uniform(9, 0.5),
                             FisherMethod::closed_form_5link),
               DomainError);
}

TEST(Fisher, ConfidenceIntervals) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-9);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-12);
  EXPECT_NEAR(normal_quantile(0.001), -3.090232306167813, 1e-9);
  Eigen::MatrixXd inv(2, 2);
  inv << 4, 0, 0, -1;
  const auto ci = confidence_interval(inv, 100, 0.05);
  EXPECT_NEAR(ci.halfwidth[0], 1.959963984540054 * 0.2, 1e-9);
  EXPECT_TRUE(ci.flagged[1]);
  EXPECT_THROW(confidence_interval(inv, 0, 0.05), DomainError);
}

TEST(Metrics, EntIsTheSumOfLogMse) {
  EstimateReport a, b;
  a.alpha = {0.5, 0.9};
  b.alpha = {0.7, 0.9};
  const auto m = metrics({0.6, 0.8}, {a, b});
  EXPECT_NEAR(m.mse[0], 0.01, 1e-15);
  EXPECT_NEAR(m.ent, std::log(0.01) + std::log(0.01), 1e-12);
  EXPECT_NEAR(m.ent_av, m.ent / 2, 1e-15);
  const auto z = metrics({0.5, 0.9}, {a});
  EXPECT_TRUE(z.ent_is_minus_infinity);
}
