#include <gtest/gtest.h>

#include <sstream>

#include "../support.hpp"

using namespace nctomo;
using namespace nctomo::testing;

TEST(Simulate, ExactDistributionSumsToOne) {
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const auto cfg = random_tree_model(rng, 12);
    const auto m = random_model(rng, cfg.topology.edge_count());
    double s = 0;
    for (const auto& [x, p] : exact_distribution(cfg, CodeAssignment::xor_mode(cfg.topology.edge_count()), m).counts) s += p;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Simulate, DualHasTheSameProbabilityMultiset) {
  Rng rng(6);
  for (int i = 0; i < 10; ++i) {
    const auto cfg = random_tree_model(rng, 10);
    const auto code = CodeAssignment::xor_mode(cfg.topology.edge_count());
    const auto m = random_model(rng, cfg.topology.edge_count());
    std::vector<double> a, b;
    for (const auto& [x, p] : exact_distribution(cfg, code, m).counts) a.push_back(p);
    for (const auto& [x, p] : exact_distribution(dual(cfg), code, m).counts) b.push_back(p);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-12);
  }
}

TEST(Simulate, EmpiricalHistogramApproachesExact) {
  const auto cfg = builtin_tree5().configuration();
  const auto code = CodeAssignment::xor_mode(5);
  const auto m = LossModel::uniform(5, 0.75);
  const auto exact = exact_distribution(cfg, code, m);
  auto tv = [&](std::uint64_t n) {
    const auto h = run_experiments(cfg, code, m, n, 99);
    double d = 0;
    for (const auto& [x, p] : exact.counts) d += std::abs(h.probability(x) - p);
    return d / 2;
  };
  const double small = tv(1000), large = tv(100000);
  EXPECT_LT(large, small);
  EXPECT_LT(large, 0.01);
}

TEST(Simulate, ResultsDoNotDependOnWorkerCount) {
  const auto cfg = builtin_tree9().configuration();
  const auto code = CodeAssignment::xor_mode(9);
  const auto m = LossModel::uniform(9, 0.8);
  const auto a = run_experiments(cfg, code, m, 5000, 3, 1), b = run_experiments(cfg, code, m, 5000, 3, 4);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.total, 5000);
}

TEST(Simulate, LinkStateFrequencies) {
  const LossModel m{{0.1, 0.5, 0.9}};
  std::vector<double> up(3, 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_link_states(m, 12, static_cast<std::uint64_t>(i));
    for (int e = 0; e < 3; ++e) up[e] += s[e];
  }
  for (int e = 0; e < 3; ++e) EXPECT_NEAR(up[e] / n, m.alpha[e], 0.015);
  EXPECT_EQ(sample_link_states(m, 12, 5), sample_link_states(m, 12, 5));
}

TEST(Simulate, LossModelFiles) {
  const auto t = builtin_tree5().topology;
  std::istringstream ok("AC 0.8\nBC 0.8\nCD 0.9 # shared\nDE 0.8\nDF 1\n");
  EXPECT_DOUBLE_EQ(parse_loss_model(ok, t).alpha[2], 0.9);
  std::istringstream missing("AC 0.8\n");
  EXPECT_THROW(parse_loss_model(missing, t), DomainError);
  std::istringstream twice("AC 0.8\nAC 0.7\n");
  EXPECT_THROW(parse_loss_model(twice, t), ParseError);
  std::istringstream junk("AC high\n");
  EXPECT_THROW(parse_loss_model(junk, t), ParseError);
  std::istringstream zero("AC 0\nBC 0.8\nCD 0.9\nDE 0.8\nDF 1\n");
  EXPECT_THROW(parse_loss_model(zero, t), DomainError);
}

TEST(Simulate, Guards) {
  const auto cfg = builtin_tree5().configuration();
  const auto code = CodeAssignment::xor_mode(5);
  EXPECT_THROW(run_experiments(cfg, code, LossModel::uniform(5, 0.5), 0, 1), DomainError);
  EXPECT_THROW(run_experiments(cfg, code, LossModel::uniform(4, 0.5), 10, 1), DomainError);
  const auto big = builtin_tree45().configuration();
  EXPECT_THROW(exact_distribution(big, CodeAssignment::xor_mode(45), LossModel::uniform(45, 0.5)), CapacityError);
}

TEST(Simulate, CodedPropagationMatchesPathSums) {
  const auto t = read_topology_file(std::string(NCTOMO_DATA_DIR) + "/topologies/abilene_like.txt");
  const auto cfg = make_configuration(t, {"1"});
  const auto ps = enumerate_paths(cfg);
  const auto code = assign_coefficients(cfg, ps, GaloisField(8), 1, 5).code;
  const ObservationLayout layout(cfg);
  const auto m = LossModel::uniform(t.edge_count(), 0.7);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto up = sample_link_states(m, 2, i);
    const auto x = propagate(cfg, code, up);
    for (std::size_t s = 0; s < layout.slots.size(); ++s) {
      std::uint32_t expect = 0;
      for (const auto& p : ps.paths) {
        if (p.receiver != layout.slots[s].first || p.last_edge() != layout.slots[s].second) continue;
        bool works = true;
        for (auto e : p.edges) works = works && up[e];
        if (works) expect ^= path_monomial(code, p);
      }
      EXPECT_EQ(x[s], expect);
    }
  }
}
