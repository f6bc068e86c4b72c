#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "ggr/errors.hpp"

namespace ggr {

// Cluster diagrams of the interacting expansion at q external and p internal
// vertices.  Vertices are 0-based: externals 0..q-1, internals q..q+p-1.
// A diagram is a pair (pi, G):
//   - pi permutes all q+p vertices (exchange structure; sign = signature),
//   - G is a simple graph with no external-external edges in which every
//     internal vertex has degree >= 1 (each internal vertex carries at least
//     one correlation bond).
// "Linked" means the union of G with the functional graph of pi (edges
// j ~ pi(j)) is connected; "tilde-linked" means every component of that
// union contains an external vertex.

struct ClusterStats {
  int k = 0;        // G-components containing internal vertices only
  int kappa = 0;    // G-components containing an external (isolated externals count)
  int n_g = 0;      // internals in internal-only components beyond the minimal 2k
  int n_g_star = 0; // internals in components attached to externals
};

struct Diagram {
  int q = 0, p = 0;
  std::vector<int> perm;                  // size q+p
  std::vector<std::pair<int, int>> edges; // G, each pair (u < v)
  int sign = 1;
  bool linked = false;
  bool tilde_linked = false;
  ClusterStats stats;
};

namespace detail {

class UnionFind {
public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int a) {
    while (parent_[static_cast<std::size_t>(a)] != a) {
      parent_[static_cast<std::size_t>(a)] =
          parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(a)])];
      a = parent_[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent_[static_cast<std::size_t>(find(a))] = find(b); }

private:
  std::vector<int> parent_;
};

inline int permutation_sign(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  int transpositions = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    int len = 0;
    for (int j = i; !seen[static_cast<std::size_t>(j)]; j = perm[static_cast<std::size_t>(j)]) {
      seen[static_cast<std::size_t>(j)] = true;
      ++len;
    }
    transpositions += len - 1;
  }
  return transpositions % 2 == 0 ? 1 : -1;
}

} // namespace detail

inline bool is_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 1) return true;
  detail::UnionFind uf(n);
  for (const auto& [u, v] : edges) uf.unite(u, v);
  const int root = uf.find(0);
  for (int i = 1; i < n; ++i)
    if (uf.find(i) != root) return false;
  return true;
}

// Statistics of the correlation graph G alone (pi plays no role here).
inline ClusterStats cluster_stats(int q, int p,
                                  const std::vector<std::pair<int, int>>& edges) {
  const int n = q + p;
  detail::UnionFind uf(n);
  for (const auto& [u, v] : edges) uf.unite(u, v);
  std::vector<int> internal_count(static_cast<std::size_t>(n), 0);
  std::vector<bool> has_external(static_cast<std::size_t>(n), false);
  for (int v = 0; v < n; ++v) {
    const int r = uf.find(v);
    if (v < q) has_external[static_cast<std::size_t>(r)] = true;
    else ++internal_count[static_cast<std::size_t>(r)];
  }
  ClusterStats st;
  for (int v = 0; v < n; ++v) {
    if (uf.find(v) != v) continue; // roots only
    if (has_external[static_cast<std::size_t>(v)]) {
      ++st.kappa;
      st.n_g_star += internal_count[static_cast<std::size_t>(v)];
    } else {
      ++st.k;
      st.n_g += internal_count[static_cast<std::size_t>(v)];
    }
  }
  st.n_g -= 2 * st.k; // each internal-only component has at least two internals
  return st;
}

// All correlation graphs G for (q, p): subsets of the admissible edge set in
// which every internal vertex is covered.
inline std::vector<std::vector<std::pair<int, int>>> enumerate_graphs(int q, int p) {
  if (q < 0 || p < 0) throw input_error("graph enumeration needs q, p >= 0");
  if (q + p > 7) throw resource_error("graph enumeration bounded to q + p <= 7");
  std::vector<std::pair<int, int>> universe;
  for (int u = 0; u < q + p; ++u)
    for (int v = u + 1; v < q + p; ++v)
      if (v >= q) universe.emplace_back(u, v); // at least one endpoint internal
  const int ne = static_cast<int>(universe.size());
  std::vector<std::vector<std::pair<int, int>>> out;
  for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
    int degree_ok = 1;
    std::vector<int> deg(static_cast<std::size_t>(q + p), 0);
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < ne; ++e) {
      if (!(mask >> e & 1u)) continue;
      edges.push_back(universe[static_cast<std::size_t>(e)]);
      ++deg[static_cast<std::size_t>(universe[static_cast<std::size_t>(e)].first)];
      ++deg[static_cast<std::size_t>(universe[static_cast<std::size_t>(e)].second)];
    }
    for (int v = q; v < q + p; ++v)
      if (deg[static_cast<std::size_t>(v)] == 0) degree_ok = 0;
    if (degree_ok) out.push_back(std::move(edges));
  }
  return out;
}

// Every diagram (pi, G) for (q, p), with connectivity flags and statistics.
inline std::vector<Diagram> enumerate_diagrams(int q, int p) {
  if (q < 0 || p < 0 || q + p < 1) throw input_error("diagram order must be positive");
  if (q + p > 7) throw resource_error("diagram enumeration bounded to q + p <= 7");
  const int n = q + p;
  const auto graphs = enumerate_graphs(q, p);
  std::vector<Diagram> out;
  for (const auto& edges : graphs) {
    const ClusterStats st = cluster_stats(q, p, edges);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      Diagram dia;
      dia.q = q;
      dia.p = p;
      dia.perm = perm;
      dia.edges = edges;
      dia.sign = detail::permutation_sign(perm);
      dia.stats = st;
      // connectivity of the union of G and the functional graph of pi
      detail::UnionFind uf(n);
      for (const auto& [u, v] : edges) uf.unite(u, v);
      for (int j = 0; j < n; ++j) uf.unite(j, perm[static_cast<std::size_t>(j)]);
      int comps = 0;
      bool all_have_external = true;
      std::vector<bool> root_external(static_cast<std::size_t>(n), false);
      for (int v = 0; v < q; ++v) root_external[static_cast<std::size_t>(uf.find(v))] = true;
      for (int v = 0; v < n; ++v) {
        if (uf.find(v) != v) continue;
        ++comps;
        if (!root_external[static_cast<std::size_t>(v)]) all_have_external = false;
      }
      dia.linked = comps == 1;
      dia.tilde_linked = all_have_external;
      out.push_back(std::move(dia));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

inline std::vector<Diagram> linked_diagrams(int q, int p) {
  auto all = enumerate_diagrams(q, p);
  std::vector<Diagram> out;
  for (auto& dia : all)
    if (dia.linked) out.push_back(std::move(dia));
  return out;
}

inline std::vector<Diagram> tilde_linked_diagrams(int q, int p) {
  auto all = enumerate_diagrams(q, p);
  std::vector<Diagram> out;
  for (auto& dia : all)
    if (dia.tilde_linked) out.push_back(std::move(dia));
  return out;
}

} // namespace ggr
