#include "lttrack/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lttrack::assoc {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

namespace {

// Shortest augmenting path with potentials; requires rows <= cols.
// Columns are scanned in ascending order and only strict improvements are
// taken, so ties resolve toward lower indices.
std::vector<IndexPair> solve_wide(const Eigen::MatrixXd& a) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto m = static_cast<std::size_t>(a.cols());
  constexpr double kInf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0);  // column -> row (1-based, 0 = free)
  std::vector<std::size_t> way(m + 1, 0);
  std::vector<double> minv(m + 1);
  std::vector<char> used(m + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
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
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<IndexPair> pairs;
  pairs.reserve(n);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] != 0) pairs.emplace_back(owner[j] - 1, j - 1);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace

std::vector<IndexPair> hungarian(const Eigen::MatrixXd& cost) {
  if (cost.rows() == 0 || cost.cols() == 0) return {};
  if (!cost.allFinite()) throw std::invalid_argument("hungarian: costs must be finite");
  if (cost.rows() <= cost.cols()) return solve_wide(cost);

  auto flipped = solve_wide(cost.transpose());
  for (auto& [r, c] : flipped) std::swap(r, c);
  std::sort(flipped.begin(), flipped.end());
  return flipped;
}

double assignment_cost(const Eigen::MatrixXd& cost, std::span<const IndexPair> pairs) {
  double total = 0.0;
  for (const auto& [r, c] : pairs) {
    total += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }
  return total;
}

Assignment associate(std::span<const BBox> predicted, std::span<const BBox> detected,
                     double lambda_iou) {
  Assignment out;
  const auto k = predicted.size();
  const auto n = detected.size();
  Eigen::MatrixXd overlap(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      overlap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          iou(predicted[i], detected[j]);
    }
  }

  std::vector<char> row_used(k, 0);
  std::vector<char> col_used(n, 0);
  if (k > 0 && n > 0) {
    const Eigen::MatrixXd cost = Eigen::MatrixXd::Ones(overlap.rows(), overlap.cols()) - overlap;
    for (const auto& [r, c] : hungarian(cost)) {
      const double o = overlap(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      // Disjoint boxes never correspond, whatever the threshold.
      if (o < lambda_iou || o <= 0.0) continue;
      out.pairs.emplace_back(r, c);
      row_used[r] = 1;
      col_used[c] = 1;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!row_used[i]) out.unmatched_tracklets.push_back(i);
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!col_used[j]) out.unmatched_detections.push_back(j);
  }
  return out;
}

}  // namespace lttrack::assoc
