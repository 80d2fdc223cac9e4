#pragma once

// Trees: the counting inequality 2·n1 + n2 >= n + 3, exhaustive labeled
// enumeration via Prüfer sequences, and the tree of a pinched droplet.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/errors.hpp"
#include "qdyn/singularity.hpp"

namespace qdyn {

struct Tree {
  int vertex_count = 1;
  std::vector<std::pair<int, int>> edges;

  std::vector<int> valences() const {
    std::vector<int> v(static_cast<std::size_t>(vertex_count), 0);
    for (const auto& [a, b] : edges) {
      ++v[static_cast<std::size_t>(a)];
      ++v[static_cast<std::size_t>(b)];
    }
    return v;
  }

  /// Connected, acyclic, |E| = |V| - 1.
  bool is_tree() const {
    if (vertex_count < 1 || static_cast<int>(edges.size()) != vertex_count - 1) return false;
    std::vector<int> parent(static_cast<std::size_t>(vertex_count));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      return x;
    };
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= vertex_count || b >= vertex_count) return false;
      const int ra = find(a), rb = find(b);
      if (ra == rb) return false;
      parent[static_cast<std::size_t>(ra)] = rb;
    }
    return true;
  }
};

struct TreeInequality {
  int n = 0;    // edges
  int n1 = 0;   // valence-1 vertices
  int n2 = 0;   // valence-2 vertices
  int lhs = 0;  // 2·n1 + n2
  int rhs = 0;  // n + 3
  bool ok = false;
  bool equality = false;
};

inline TreeInequality tree_inequality(const Tree& t) {
  if (t.edges.empty()) throw Error(ErrorKind::InvalidArgument, "tree_inequality: tree needs at least one edge");
  if (!t.is_tree()) throw Error(ErrorKind::NotATree, "tree_inequality: input is not a tree");
  TreeInequality r;
  r.n = static_cast<int>(t.edges.size());
  for (const int v : t.valences()) {
    if (v == 1) ++r.n1;
    if (v == 2) ++r.n2;
  }
  r.lhs = 2 * r.n1 + r.n2;
  r.rhs = r.n + 3;
  r.ok = r.lhs >= r.rhs;
  r.equality = r.lhs == r.rhs;
  return r;
}

inline constexpr int kMaxTreeVertices = 9;

/// Labeled tree of a Prüfer sequence over {0, ..., n-1}; linear-time decode.
inline Tree tree_from_pruefer(const std::vector<int>& seq, int n) {
  Tree t;
  t.vertex_count = n;
  if (n == 1) return t;
  if (n == 2) {
    t.edges.emplace_back(0, 1);
    return t;
  }
  std::vector<int> degree(static_cast<std::size_t>(n), 1);
  for (const int x : seq) ++degree[static_cast<std::size_t>(x)];
  int ptr = 0;
  while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
  int leaf = ptr;
  for (const int v : seq) {
    t.edges.emplace_back(std::min(leaf, v), std::max(leaf, v));
    if (--degree[static_cast<std::size_t>(v)] == 1 && v < ptr) {
      leaf = v;
    } else {
      ++ptr;
      while (degree[static_cast<std::size_t>(ptr)] != 1) ++ptr;
      leaf = ptr;
    }
  }
  int last = n - 1;
  t.edges.emplace_back(std::min(leaf, last), std::max(leaf, last));
  return t;
}

/// Streams every labeled tree on n vertices (n^(n-2) of them) in
/// lexicographic Prüfer order.
inline void for_each_tree(int n, const std::function<void(const Tree&)>& fn) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "enumerate_trees: need at least 2 vertices");
  if (n > kMaxTreeVertices) throw Error(ErrorKind::SizeCapExceeded, "enumerate_trees: at most 9 vertices");
  std::vector<int> seq(static_cast<std::size_t>(n - 2), 0);
  while (true) {
    fn(tree_from_pruefer(seq, n));
    int k = n - 3;
    while (k >= 0 && seq[static_cast<std::size_t>(k)] == n - 1) {
      seq[static_cast<std::size_t>(k)] = 0;
      --k;
    }
    if (k < 0) break;
    ++seq[static_cast<std::size_t>(k)];
  }
}

inline std::vector<Tree> enumerate_trees(int n) {
  std::vector<Tree> out;
  for_each_tree(n, [&](const Tree& t) { out.push_back(t); });
  return out;
}

struct TreeSweep {
  long long checked = 0;
  long long violations = 0;
  long long equality_cases = 0;
  long long chains = 0;
  long long chains_at_equality = 0;
  long long non_chain_equality = 0;
  int max_valence_at_equality = 0;  // observed, not asserted
  std::map<int, long long> per_size;
};

inline TreeSweep tree_sweep(int max_vertices) {
  if (max_vertices > kMaxTreeVertices) throw Error(ErrorKind::SizeCapExceeded, "trees: at most 9 vertices");
  TreeSweep s;
  for (int n = 2; n <= max_vertices; ++n) {
    for_each_tree(n, [&](const Tree& t) {
      const TreeInequality r = tree_inequality(t);
      ++s.checked;
      ++s.per_size[n];
      if (!r.ok) ++s.violations;
      const auto val = t.valences();
      const int maxv = *std::max_element(val.begin(), val.end());
      const bool chain = maxv <= 2;
      if (chain) {
        ++s.chains;
        if (r.equality) ++s.chains_at_equality;
      }
      if (r.equality) {
        ++s.equality_cases;
        if (!chain) ++s.non_chain_equality;
        s.max_valence_at_equality = std::max(s.max_valence_at_equality, maxv);
      }
    });
  }
  return s;
}

// ---------------------------------------------------------------------------
// Droplet tree

struct DropletTree {
  Tree tree;
  std::vector<int> vertex_pixels;  // cell count of each interior component
  std::vector<cplx> edge_points;   // double point of each edge
};

/// Largest neighbourhood searched when pairing a double point with the two
/// interior components it joins. The interior near a tangential double point
/// is a pair of thin horns, so pixel centres only enter it some distance away.
inline constexpr int kAssociationMaxPx = 128;

inline DropletTree extract_droplet_tree(const EscapeRaster& r, const std::vector<Singularity>& doubles, int radius_px = 3) {
  std::vector<char> mask(r.cells.size());
  for (std::size_t k = 0; k < r.cells.size(); ++k) mask[k] = r.cells[k] == Cell::DropletInterior;
  std::vector<int> labels;
  const int nv = label_components(mask, r.nx, r.ny, labels);
  DropletTree out;
  out.tree.vertex_count = nv;
  out.vertex_pixels.assign(static_cast<std::size_t>(nv), 0);
  for (const int l : labels)
    if (l >= 0) ++out.vertex_pixels[static_cast<std::size_t>(l)];
  if (nv == 0) throw Error(ErrorKind::NotATree, "extract_droplet_tree: no droplet interior in the raster");

  const double px_w = r.bounds.width / r.nx;
  const double px_h = r.bounds.height / r.ny;
  for (const Singularity& s : doubles) {
    if (s.kind != SingularityKind::DoublePoint) continue;
    const double fi = (s.location.real() - (r.bounds.center.real() - 0.5 * r.bounds.width)) / px_w - 0.5;
    const double fj = ((r.bounds.center.imag() + 0.5 * r.bounds.height) - s.location.imag()) / px_h - 0.5;
    const int ci = static_cast<int>(std::lround(fi));
    const int cj = static_cast<int>(std::lround(fj));
    // Nearest pixel distance per component within the current radius.
    std::vector<std::pair<int, int>> found;  // (distance, label)
    for (int rad = radius_px; rad <= kAssociationMaxPx && found.size() < 2; rad *= 2) {
      std::map<int, int> best;
      for (int dj = -rad; dj <= rad; ++dj) {
        for (int di = -rad; di <= rad; ++di) {
          const int i = ci + di, j = cj + dj;
          if (i < 0 || j < 0 || i >= r.nx || j >= r.ny) continue;
          const int l = labels[static_cast<std::size_t>(j) * static_cast<std::size_t>(r.nx) + static_cast<std::size_t>(i)];
          if (l < 0) continue;
          const int d = std::max(std::abs(di), std::abs(dj));
          auto it = best.find(l);
          if (it == best.end() || d < it->second) best[l] = d;
        }
      }
      found.clear();
      for (const auto& [l, d] : best) found.emplace_back(d, l);
      std::sort(found.begin(), found.end());
    }
    if (found.size() < 2) throw Error(ErrorKind::NotATree, "extract_droplet_tree: double point does not separate two components");
    const int a = found[0].second, b = found[1].second;
    out.tree.edges.emplace_back(std::min(a, b), std::max(a, b));
    out.edge_points.push_back(s.location);
  }
  if (!out.tree.is_tree()) throw Error(ErrorKind::NotATree, "extract_droplet_tree: components and double points do not form a tree");
  return out;
}

}  // namespace qdyn
