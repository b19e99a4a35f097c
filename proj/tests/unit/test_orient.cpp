#include <gtest/gtest.h>

#include "../support.hpp"

using namespace nctomo;
using namespace nctomo::testing;

TEST(Orient, StarFromALeaf) {
  const auto t = read_topology_file(std::string(NCTOMO_DATA_DIR) + "/topologies/star.txt");
  const auto r = orient(t, {"L0"}, 0);
  EXPECT_TRUE(is_acyclic(r.config.topology));
  EXPECT_EQ(r.config.receiver_names(), (std::vector<std::string>{"L1", "L2", "L3"}));
  EXPECT_EQ(r.stats.receivers, 3u);
  EXPECT_EQ(r.stats.coding_points, 0u);
  EXPECT_DOUBLE_EQ(r.stats.path_count, 3);
  EXPECT_DOUBLE_EQ(r.stats.links_per_path, 2);
}

TEST(Orient, Tree45DefaultPlacement) {
  const auto b = builtin_tree45();
  const auto cfg = b.configuration();
  EXPECT_EQ(cfg.topology.edge_count(), 45u);
  EXPECT_EQ(cfg.receivers.size(), 22u);
  ASSERT_EQ(cfg.coding_points().size(), 1u);
  EXPECT_EQ(cfg.topology.node_name(cfg.coding_points()[0]), "C");
}

TEST(Orient, DeterministicGivenSeed) {
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const auto t = random_logical_graph(rng, 30);
    const auto src = random_sources(rng, t, 3);
    EXPECT_TRUE(orient(t, src, 42).config == orient(t, src, 42).config);
  }
}

TEST(Orient, AcyclicAndIdentifiableOnRandomGraphs) {
  Rng rng(1234);
  for (int i = 0; i < 30; ++i) {
    const auto t = random_logical_graph(rng, 40);
    const auto r = orient(t, random_sources(rng, t, 3), rng());
    ASSERT_TRUE(is_acyclic(r.config.topology));
    for (std::size_t e = 0; e < t.edge_count(); ++e) ASSERT_TRUE(check_link_identifiable(r.config, e).identifiable);
  }
}

TEST(Orient, RejectsBadRequests) {
  const auto t = builtin_tree5().topology;
  EXPECT_THROW(orient(t, {}, 0), DomainError);
  EXPECT_THROW(orient(t, {"Q"}, 0), DomainError);
  EXPECT_THROW(orient(t, {"A", "A"}, 0), DomainError);
  auto split = t;
  split.add_edge("XY", "X", "Y");
  EXPECT_THROW(orient(split, {"A"}, 0), DomainError);
}
