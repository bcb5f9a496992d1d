#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lttrack/types.hpp"

namespace lttrack::assoc {

using IndexPair = std::pair<std::size_t, std::size_t>;

struct Assignment {
  std::vector<IndexPair> pairs;  // (tracklet index, detection index), ascending rows
  std::vector<std::size_t> unmatched_tracklets;
  std::vector<std::size_t> unmatched_detections;
};

/// Intersection over union; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

/// Minimum-cost one-to-one assignment (Kuhn-Munkres with row potentials).
/// Rectangular matrices are supported; min(rows, cols) pairs are returned,
/// sorted by row. Costs must be finite.
std::vector<IndexPair> hungarian(const Eigen::MatrixXd& cost);

/// Sum of cost(r, c) over `pairs`, accumulated in row order.
double assignment_cost(const Eigen::MatrixXd& cost, std::span<const IndexPair> pairs);

/// Matches predicted tracklet boxes to detected boxes by maximizing total
/// IOU, then demotes any pair whose IOU is below `lambda_iou`.
Assignment associate(std::span<const BBox> predicted, std::span<const BBox> detected,
                     double lambda_iou);

}  // namespace lttrack::assoc
