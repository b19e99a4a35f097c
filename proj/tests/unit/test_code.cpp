#include <gtest/gtest.h>

#include "../support.hpp"

using namespace nctomo;
using namespace nctomo::testing;

namespace {

Configuration abilene() {
  const auto t = read_topology_file(std::string(NCTOMO_DATA_DIR) + "/topologies/abilene_like.txt");
  return make_configuration(t, default_sources(t));
}

}  // namespace

TEST(Code, XorCodeOnTreesIsPathIdentifiable) {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const auto cfg = random_tree_model(rng, 12);
    const auto table = check_code(CodeAssignment::xor_mode(cfg.topology.edge_count()), enumerate_paths(cfg));
    EXPECT_TRUE(table.complete());
  }
}

TEST(Code, AllOnesCollideOnMultiPathTriplets) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  const auto table = check_code(CodeAssignment::xor_mode(cfg.topology.edge_count()), ps);
  EXPECT_LT(table.min_ratio(), 1.0);
  for (std::size_t i = 0; i < ps.triplets.size(); ++i)
    if (ps.triplets[i].paths.size() == 3) {
      EXPECT_DOUBLE_EQ(table.triplets[i].ratio, 2.0 / 8.0);
    }
}

TEST(Code, MonomialIsProductOfCoefficients) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  const GaloisField f(6);
  const auto res = assign_coefficients(cfg, ps, f, 3, 5);
  for (const auto& p : ps.paths) {
    std::uint32_t m = 1;
    for (auto e : p.edges) m = f.mul(m, res.code.coefficients[e]);
    EXPECT_EQ(path_monomial(res.code, p), m);
  }
  for (auto c : res.code.coefficients) {
    EXPECT_GT(c, 0u);
    EXPECT_LT(c, 64u);
  }
}

TEST(Code, DecodeRoundTripsEverySubset) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  const auto res = assign_coefficients(cfg, ps, GaloisField(8), 17, 5);
  ASSERT_TRUE(res.complete);
  for (const auto& tab : res.table.triplets) {
    const auto n = tab.monomials.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::uint32_t sum = 0;
      for (std::size_t k = 0; k < n; ++k)
        if (mask >> k & 1) sum ^= tab.monomials[k];
      EXPECT_EQ(decode_symbol(tab, sum), mask);
    }
  }
}

TEST(Code, SimulatedObservationsDecodeToTruePathStates) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  const auto res = assign_coefficients(cfg, ps, GaloisField(8), 17, 5);
  ASSERT_TRUE(res.complete);
  const ObservationLayout layout(cfg);
  const Propagator prop(cfg, res.code);
  const auto model = LossModel::uniform(cfg.topology.edge_count(), 0.6);
  for (std::uint64_t i = 0; i < 300; ++i) {
    const auto up = sample_link_states(model, 8, i);
    const Outcome x = prop(up);
    std::vector<std::uint32_t> received;
    for (const auto& tr : ps.triplets) {
      std::size_t slot = 0;
      while (layout.slots[slot] != std::make_pair(tr.receiver, tr.in_edge)) ++slot;
      received.push_back(x[slot * layout.sources + static_cast<std::size_t>(cfg.source_position(tr.source))]);
    }
    const auto masks = decode_observation(res.table, received);
    for (std::size_t t = 0; t < ps.triplets.size(); ++t)
      for (std::size_t k = 0; k < ps.triplets[t].paths.size(); ++k) {
        bool works = true;
        for (auto e : ps.paths[ps.triplets[t].paths[k]].edges) works = works && up[e];
        EXPECT_EQ(bool(masks[t] >> k & 1), works);
      }
  }
}

TEST(Code, RatioGrowsWithFieldSize) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  std::vector<double> mean;
  for (unsigned k : {2u, 4u, 8u}) {
    double s = 0;
    for (std::uint64_t seed = 0; seed < 60; ++seed) s += assign_coefficients(cfg, ps, GaloisField(k), seed, 1).table.mean_ratio();
    mean.push_back(s / 60);
  }
  EXPECT_LE(mean[0], mean[1]);
  EXPECT_LE(mean[1], mean[2]);
}

TEST(Code, UnachievableSymbolAndCapacity) {
  const auto cfg = abilene();
  const auto ps = enumerate_paths(cfg);
  const auto res = assign_coefficients(cfg, ps, GaloisField(8), 17, 5);
  std::vector<std::uint32_t> bad(ps.triplets.size(), 0);
  const auto& tab = res.table.triplets[0];
  std::uint32_t missing = 1;
  while (std::any_of(tab.sums.begin(), tab.sums.end(), [&](auto& s) { return s.first == missing; })) ++missing;
  bad[0] = missing;
  EXPECT_THROW(decode_observation(res.table, bad), DomainError);
  EXPECT_THROW(decode_observation(res.table, {}), DomainError);
  EXPECT_THROW(check_code(res.code, ps, 2), CapacityError);
}

TEST(Code, JsonRoundTrip) {
  const auto cfg = abilene();
  const auto res = assign_coefficients(cfg, enumerate_paths(cfg), GaloisField(6), 2, 5);
  const auto back = code_from_json(code_to_json(res.code, cfg.topology), cfg.topology);
  EXPECT_EQ(back.field.k(), 6u);
  EXPECT_EQ(back.coefficients, res.code.coefficients);
}

TEST(Code, TreeModeBitsFollowTheRoute) {
  // with the XOR code, receiver r sees source j's bit iff every link of the route is up
  Rng rng(21);
  for (int i = 0; i < 8; ++i) {
    const auto cfg = random_tree_model(rng, 10);
    const auto ps = enumerate_paths(cfg);
    const auto code = CodeAssignment::xor_mode(cfg.topology.edge_count());
    const Propagator prop(cfg, code);
    const ObservationLayout layout(cfg);
    const std::size_t m = cfg.topology.edge_count();
    LinkStates up(m);
    for (std::uint64_t mask = 0; mask < (1u << m); ++mask) {
      for (std::size_t e = 0; e < m; ++e) up[e] = mask >> e & 1;
      const Outcome x = prop(up);
      for (const auto& p : ps.paths) {
        bool works = true;
        for (auto e : p.edges) works = works && up[e];
        std::size_t slot = 0;
        while (layout.slots[slot].first != p.receiver) ++slot;
        ASSERT_EQ(x[slot * layout.sources + static_cast<std::size_t>(cfg.source_position(p.source))] != 0, works);
      }
    }
  }
}
