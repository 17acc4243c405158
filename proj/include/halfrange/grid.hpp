#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "halfrange/detail/hash.hpp"
#include "halfrange/errors.hpp"

namespace halfrange {

// Cell partition of [-M, M]: nodes at cell midpoints, masses = cell widths
// (midpoint quadrature). Sign changes of w sit on cell edges, never on nodes.
struct Grid {
  Eigen::VectorXd nodes;   // n midpoints, strictly increasing
  Eigen::VectorXd masses;  // n positive cell widths
  Eigen::VectorXd edges;   // n + 1 cell edges, edges[0] = -M, edges[n] = M
  double half_width = 0.0;
  std::vector<double> anchors;  // turning points used as mandatory edges
  bool symmetric = false;
  bool adjusted = false;  // true when the cell count was bumped

  Eigen::Index size() const { return nodes.size(); }

  std::uint64_t hash() const {
    detail::Fnv1a h;
    h.vec(nodes);
    h.vec(masses);
    return h.state;
  }
};

namespace detail {

// Edges of m cells on [a, b], optionally clustered toward either end with
// exponent g (g = 1 is uniform).
inline void segment_edges(double a, double b, int m, bool cluster_left,
                          bool cluster_right, double g,
                          std::vector<double>& out) {
  for (int k = 1; k < m; ++k) {
    const double t = static_cast<double>(k) / m;
    double phi;
    if (cluster_left && cluster_right) {
      const double tl = std::pow(t, g), tr = std::pow(1.0 - t, g);
      phi = tl / (tl + tr);
    } else if (cluster_left) {
      phi = std::pow(t, g);
    } else if (cluster_right) {
      phi = 1.0 - std::pow(1.0 - t, g);
    } else {
      phi = t;
    }
    out.push_back(a + (b - a) * phi);
  }
  out.push_back(b);
}

// Largest-remainder allocation of n cells over segment lengths, >= 1 each.
inline std::vector<int> allocate_cells(const std::vector<double>& lengths, int n) {
  const int s = static_cast<int>(lengths.size());
  if (n < s) throw BadGrading("cell budget smaller than the number of segments");
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  std::vector<int> alloc(static_cast<std::size_t>(s), 1);
  std::vector<double> want(static_cast<std::size_t>(s));
  int assigned = s;
  for (int i = 0; i < s; ++i) want[static_cast<std::size_t>(i)] = lengths[static_cast<std::size_t>(i)] / total * n;
  for (int i = 0; i < s; ++i) {
    const int extra = std::max(0, static_cast<int>(std::floor(want[static_cast<std::size_t>(i)])) - 1);
    alloc[static_cast<std::size_t>(i)] += extra;
    assigned += extra;
  }
  while (assigned < n) {
    int best = 0;
    double best_rem = -1.0;
    for (int i = 0; i < s; ++i) {
      const double rem = want[static_cast<std::size_t>(i)] - alloc[static_cast<std::size_t>(i)];
      if (rem > best_rem) {
        best_rem = rem;
        best = i;
      }
    }
    ++alloc[static_cast<std::size_t>(best)];
    ++assigned;
  }
  while (assigned > n) {
    int best = -1;
    double best_rem = 1e300;
    for (int i = 0; i < s; ++i) {
      if (alloc[static_cast<std::size_t>(i)] <= 1) continue;
      const double rem = want[static_cast<std::size_t>(i)] - alloc[static_cast<std::size_t>(i)];
      if (rem < best_rem) {
        best_rem = rem;
        best = i;
      }
    }
    if (best < 0) throw BadGrading("cell allocation failed");
    --alloc[static_cast<std::size_t>(best)];
    --assigned;
  }
  return alloc;
}

inline std::vector<double> edges_for(double lo, double hi,
                                     const std::vector<double>& anchors, int n,
                                     double g) {
  std::vector<double> pts{lo};
  pts.insert(pts.end(), anchors.begin(), anchors.end());
  pts.push_back(hi);
  std::vector<double> lengths;
  for (std::size_t i = 1; i < pts.size(); ++i) lengths.push_back(pts[i] - pts[i - 1]);
  const auto alloc = allocate_cells(lengths, n);
  std::vector<double> edges{lo};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    // Interior pts are exactly the anchors; cluster toward them only.
    const bool cl = i >= 2;
    const bool cr = i + 1 < pts.size();
    segment_edges(pts[i - 1], pts[i], alloc[i - 1], cl, cr, g, edges);
  }
  return edges;
}

}  // namespace detail

// Builds the cell partition. Turning points become mandatory cell edges and
// attract clustering with exponent `grading` (1 = uniform). A symmetric
// layout with an odd cell budget would put a node at 0; the budget is bumped
// to the next even count and `adjusted` is set.
inline Grid build_grid(double M, int n, double grading,
                       const std::vector<double>& turning_points = {},
                       bool symmetric = false) {
  if (!(M > 0.0)) throw BadGrading("half-width must be positive");
  if (n < 2) throw BadGrading("need at least two cells");
  if (!(grading > 0.0)) throw BadGrading("grading exponent must be positive");

  Grid grid;
  grid.half_width = M;
  grid.symmetric = symmetric;

  std::vector<double> anchors;
  for (double t : turning_points)
    if (std::fabs(t) < M * (1.0 - 1e-12)) anchors.push_back(t);
  std::sort(anchors.begin(), anchors.end());
  anchors.erase(std::unique(anchors.begin(), anchors.end(),
                            [M](double a, double b) { return std::fabs(a - b) < 1e-12 * M; }),
                anchors.end());
  grid.anchors = anchors;

  if (symmetric && n % 2 != 0) {
    ++n;
    grid.adjusted = true;
  }

  std::vector<double> edges;
  const bool anchors_symmetric = [&] {
    for (double a : anchors) {
      const bool mirrored = std::any_of(anchors.begin(), anchors.end(), [&](double b) {
        return std::fabs(a + b) < 1e-12 * M;
      });
      if (!mirrored) return false;
    }
    return true;
  }();

  if (symmetric && anchors_symmetric) {
    // Build the right half on [0, M] and mirror, so the layout is exactly
    // symmetric and 0 is an edge iff it is an anchor or n is even.
    std::vector<double> right_anchors;
    for (double a : anchors)
      if (a > 1e-12 * M) right_anchors.push_back(a);
    const bool zero_anchor = std::any_of(anchors.begin(), anchors.end(), [&](double a) {
      return std::fabs(a) < 1e-12 * M;
    });
    std::vector<double> half{0.0};
    {
      std::vector<double> pts{0.0};
      pts.insert(pts.end(), right_anchors.begin(), right_anchors.end());
      pts.push_back(M);
      std::vector<double> lengths;
      for (std::size_t i = 1; i < pts.size(); ++i) lengths.push_back(pts[i] - pts[i - 1]);
      const auto alloc = detail::allocate_cells(lengths, n / 2);
      for (std::size_t i = 1; i < pts.size(); ++i) {
        const bool cl = (i == 1) ? zero_anchor : true;  // interior pts are anchors
        const bool cr = i + 1 < pts.size();
        detail::segment_edges(pts[i - 1], pts[i], alloc[i - 1], cl, cr, grading, half);
      }
    }
    for (auto it = half.rbegin(); it != half.rend(); ++it) edges.push_back(-*it);
    edges.insert(edges.end(), half.begin() + 1, half.end());
  } else {
    edges = detail::edges_for(-M, M, anchors, n, grading);
  }

  const int cells = static_cast<int>(edges.size()) - 1;
  grid.edges = Eigen::Map<Eigen::VectorXd>(edges.data(), cells + 1);
  grid.nodes.resize(cells);
  grid.masses.resize(cells);
  for (int i = 0; i < cells; ++i) {
    const double w = edges[static_cast<std::size_t>(i) + 1] - edges[static_cast<std::size_t>(i)];
    if (!(w > 0.0)) throw BadGrading("grading collapsed a cell to zero width");
    grid.nodes[i] = 0.5 * (edges[static_cast<std::size_t>(i)] + edges[static_cast<std::size_t>(i) + 1]);
    grid.masses[i] = w;
  }
  return grid;
}

}  // namespace halfrange
