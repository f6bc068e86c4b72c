#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "ggr/graphs.hpp"

using namespace ggr;

namespace {

long long binomial(int n, int k) {
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

} // namespace

TEST_CASE("permutation signs follow cycle parity", "[graphs]") {
  CHECK(detail::permutation_sign({0, 1, 2}) == 1);
  CHECK(detail::permutation_sign({1, 0, 2}) == -1);
  CHECK(detail::permutation_sign({1, 2, 0}) == 1);
  CHECK(detail::permutation_sign({1, 0, 3, 2}) == 1);
  CHECK(detail::permutation_sign({3, 2, 1, 0}) == 1);
  CHECK(detail::permutation_sign({0, 2, 1, 3}) == -1);
}

TEST_CASE("cluster statistics decompose pair components", "[graphs]") {
  // two externals, one internal pair component
  auto s = cluster_stats(2, 2, {{2, 3}});
  CHECK(s.k == 1);
  CHECK(s.kappa == 2); // each isolated external is its own component
  CHECK(s.n_g == 0);
  CHECK(s.n_g_star == 0);
  CHECK(s.n_g + s.n_g_star + 2 * s.k == 2);

  // one external tied to both internals
  s = cluster_stats(1, 2, {{0, 1}, {0, 2}});
  CHECK(s.k == 0);
  CHECK(s.kappa == 1);
  CHECK(s.n_g == 0);
  CHECK(s.n_g_star == 2);

  // mixed: external + one internal, and a separate internal triple
  s = cluster_stats(1, 4, {{0, 1}, {2, 3}, {3, 4}});
  CHECK(s.k == 1);
  CHECK(s.kappa == 1);
  CHECK(s.n_g == 1); // three internals in the vacuum component minus 2k
  CHECK(s.n_g_star == 1);
  CHECK(s.n_g + s.n_g_star + 2 * s.k == 4);
}

TEST_CASE("graph enumeration matches closed counts", "[graphs]") {
  // one internal, two externals: edges 0-2 and 1-2 available, internal needs degree >= 1
  CHECK(enumerate_graphs(2, 1).size() == 3);
  // no internals: only the empty graph (ext-ext edges are excluded)
  CHECK(enumerate_graphs(3, 0).size() == 1);
  // two internals alone: only the single pair edge
  CHECK(enumerate_graphs(0, 2).size() == 1);
}

TEST_CASE("diagram totals factor into graphs times permutations", "[graphs]") {
  // Every (q, p) with q + p = 4 enumerates |graphs| * 4! diagrams.
  CHECK(enumerate_diagrams(0, 4).size() == 984);
  CHECK(enumerate_diagrams(1, 3).size() == 1080);
  CHECK(enumerate_diagrams(2, 2).size() == 600);
  CHECK(enumerate_diagrams(3, 1).size() == 168);
  CHECK(enumerate_diagrams(4, 0).size() == 24);
  CHECK(984 + 1080 + 600 + 168 + 24 == 2856);
}

TEST_CASE("linked one-external one-internal set has its two members", "[graphs]") {
  const auto linked = linked_diagrams(1, 1);
  REQUIRE(linked.size() == 2);
  for (const auto& dia : linked) {
    REQUIRE(dia.edges == std::vector<std::pair<int, int>>{{0, 1}});
    CHECK(dia.stats.kappa == 1);
    CHECK(dia.stats.n_g_star == 1);
  }
  std::set<std::vector<int>> perms;
  for (const auto& dia : linked) perms.insert(dia.perm);
  CHECK(perms == std::set<std::vector<int>>{{0, 1}, {1, 0}});
}

TEST_CASE("linked pair-component diagrams with one external", "[graphs]") {
  std::vector<Diagram> found;
  for (const auto& dia : linked_diagrams(1, 2))
    if (dia.stats.k == 1) found.push_back(dia);
  REQUIRE(found.size() == 4);
  std::set<std::vector<int>> perms;
  for (const auto& dia : found) {
    // the only vacuum pair uses both internals, so G = {1-2}
    REQUIRE(dia.edges == std::vector<std::pair<int, int>>{{1, 2}});
    perms.insert(dia.perm);
  }
  // permutation must join the external to the pair to make the diagram linked
  CHECK(perms == std::set<std::vector<int>>{{1, 0, 2}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}});
}

TEST_CASE("tilde-linked requires externals in every component", "[graphs]") {
  for (const auto& dia : enumerate_diagrams(0, 2)) CHECK_FALSE(dia.tilde_linked);
  int linked_count = 0;
  for (const auto& dia : enumerate_diagrams(2, 1)) {
    if (dia.linked) {
      ++linked_count;
      CHECK(dia.tilde_linked); // one component containing the externals
    }
  }
  CHECK(linked_count > 0);
  // tilde-linked but not linked: two separate external-rooted components
  int wider = 0;
  for (const auto& dia : enumerate_diagrams(2, 2))
    if (dia.tilde_linked && !dia.linked) ++wider;
  CHECK(wider > 0);
}

TEST_CASE("connected graph counts recover the tree formula", "[graphs]") {
  // labeled trees on n vertices: n^(n-2)
  for (int n = 2; n <= 6; ++n) {
    std::vector<std::pair<int, int>> universe;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) universe.emplace_back(u, v);
    const int ne = static_cast<int>(universe.size());
    long long trees = 0, subsets = 0;
    for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
      if (__builtin_popcount(mask) != n - 1) continue;
      ++subsets;
      std::vector<std::pair<int, int>> edges;
      for (int e = 0; e < ne; ++e)
        if (mask & (1u << e)) edges.push_back(universe[static_cast<std::size_t>(e)]);
      if (is_connected(n, edges)) ++trees;
    }
    CHECK(subsets == binomial(ne, n - 1));
    long long expect = 1;
    for (int i = 0; i < n - 2; ++i) expect *= n;
    CHECK(trees == expect);
  }
}

TEST_CASE("enumeration guards reject bad orders", "[graphs]") {
  CHECK_THROWS_AS(enumerate_diagrams(0, 0), input_error);
  CHECK_THROWS_AS(enumerate_diagrams(-1, 2), input_error);
  CHECK_THROWS_AS(enumerate_diagrams(4, 4), resource_error);
  CHECK_THROWS_AS(enumerate_graphs(5, 3), resource_error);
}
