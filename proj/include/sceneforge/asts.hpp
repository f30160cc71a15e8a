#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sceneforge/corpus.hpp"
#include "sceneforge/scene_template.hpp"

// Aligned scene template similarity.
//
// For a one-to-one alignment A between template nodes (T of them) and scene
// objects (O of them), J(A) counts the unaligned items on both sides, so
// J(A) + |A| = T + O - |A|. Because every pair similarity is non-negative,
// extending an alignment never lowers its summed similarity and strictly
// shrinks the denominator, so some maximizer aligns min(T, O) pairs and
//   ASTS = M* / max(T, O),
// where M* is the maximum-weight bipartite matching. asts() solves that
// matching exactly; asts_bruteforce() evaluates the definition directly.
namespace sceneforge {

// What the metric sees of a node or an object.
struct AlignItem {
  std::string category;
  std::optional<std::string> model_id;

  friend bool operator==(const AlignItem&, const AlignItem&) = default;
};

// 1 for a model match, 0.5 for a category-only match, 0 otherwise.
inline double pair_similarity(const AlignItem& node, const AlignItem& object) {
  if (node.model_id && object.model_id && *node.model_id == *object.model_id) return 1.0;
  if (node.category == object.category) return 0.5;
  return 0.0;
}

inline double pair_similarity(const TemplateNode& node, const SceneObject& object) {
  return pair_similarity(AlignItem{node.category, node.model_id}, AlignItem{object.category, object.model_id});
}

// Template nodes with count k contribute k items.
inline std::vector<AlignItem> align_items(const SceneTemplate& t) {
  std::vector<AlignItem> out;
  for (const auto& n : t.nodes)
    for (int k = 0; k < n.count; ++k) out.push_back({n.category, n.model_id});
  return out;
}

inline std::vector<AlignItem> align_items(const Scene& s) {
  std::vector<AlignItem> out;
  for (const auto& o : s.objects) out.push_back({o.category, o.model_id});
  return out;
}

// Minimum-cost assignment of every row to a distinct column (rows <= cols),
// Hungarian method with potentials. Returns the column of each row.
inline std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  if (n == 0) return {};
  const std::size_t m = cost[0].size();
  if (m < n) throw std::invalid_argument("min_cost_assignment: more rows than columns");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; column 0 is a virtual start.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

// Maximum summed similarity over one-to-one alignments.
inline double max_alignment_weight(std::span<const AlignItem> nodes, std::span<const AlignItem> objects) {
  if (nodes.empty() || objects.empty()) return 0.0;
  const bool nodes_are_rows = nodes.size() <= objects.size();
  const auto rows = nodes_are_rows ? nodes : objects;
  const auto cols = nodes_are_rows ? objects : nodes;
  std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      cost[i][j] = -(nodes_are_rows ? pair_similarity(rows[i], cols[j]) : pair_similarity(cols[j], rows[i]));
  const auto assignment = min_cost_assignment(cost);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) total -= cost[i][assignment[i]];
  return total;
}

inline double asts(std::span<const AlignItem> nodes, std::span<const AlignItem> objects) {
  if (nodes.empty() && objects.empty()) return 1.0;
  return max_alignment_weight(nodes, objects) / static_cast<double>(std::max(nodes.size(), objects.size()));
}

inline double asts(const SceneTemplate& t, const Scene& s) {
  const auto nodes = align_items(t);
  const auto objects = align_items(s);
  return asts(nodes, objects);
}

// Direct evaluation of max_A sum S / (J(A) + |A|) over every partial
// one-to-one alignment, including the empty one.
inline double asts_bruteforce(std::span<const AlignItem> nodes, std::span<const AlignItem> objects) {
  if (std::min(nodes.size(), objects.size()) > 7)
    throw ValidationError("asts_bruteforce supports at most 7 items on the smaller side");
  if (nodes.empty() && objects.empty()) return 1.0;
  const std::size_t t = nodes.size(), o = objects.size();
  std::vector<bool> used(o, false);
  double best = 0.0;
  // Recurse over nodes; each is either left unaligned or takes a free object.
  auto rec = [&](auto&& self, std::size_t i, double sum, std::size_t aligned) -> void {
    if (i == t) {
      const double unaligned = static_cast<double>((t - aligned) + (o - aligned));
      best = std::max(best, sum / (unaligned + static_cast<double>(aligned)));
      return;
    }
    self(self, i + 1, sum, aligned);
    for (std::size_t j = 0; j < o; ++j) {
      if (used[j]) continue;
      used[j] = true;
      self(self, i + 1, sum + pair_similarity(nodes[i], objects[j]), aligned + 1);
      used[j] = false;
    }
  };
  rec(rec, 0, 0.0, 0);
  return best;
}

inline double asts_bruteforce(const SceneTemplate& t, const Scene& s) {
  const auto nodes = align_items(t);
  const auto objects = align_items(s);
  return asts_bruteforce(nodes, objects);
}

// ---------------------------------------------------------------------------
// Correlation

struct Correlation {
  std::optional<double> pearson;  // empty when either side has zero variance
  std::optional<double> kendall;  // tau-b; empty when either side is all ties
};

inline Correlation correlate(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("correlate: inputs differ in length");
  if (xs.size() < 2) throw ValidationError("correlate: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  Correlation out;
  if (sxx > 0 && syy > 0) out.pearson = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, pairs = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      ++pairs;
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0) ++ties_x;
      if (dy == 0) ++ties_y;
      if (dx == 0 || dy == 0) continue;
      if ((dx > 0) == (dy > 0))
        ++concordant;
      else
        ++discordant;
    }
  }
  const double denom = std::sqrt(static_cast<double>(pairs - ties_x) * static_cast<double>(pairs - ties_y));
  if (denom > 0) out.kendall = static_cast<double>(concordant - discordant) / denom;
  return out;
}

}  // namespace sceneforge
