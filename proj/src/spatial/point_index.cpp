#include "meshboost/spatial/point_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meshboost {

namespace {
constexpr int kLeafSize = 8;
}

PointIndex::PointIndex(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points) : points_(points) {
    if (points_.rows() < 1) throw ValidationError("PointIndex: empty point set");
    for (Eigen::Index i = 0; i < points_.rows(); ++i)
        for (int k = 0; k < 3; ++k)
            if (!std::isfinite(points_(i, k))) throw ValidationError("PointIndex: non-finite coordinate");
    order_.resize(points_.rows());
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(2 * points_.rows() / kLeafSize + 2);
    root_ = build(0, static_cast<int>(order_.size()));
}

int PointIndex::build(int begin, int end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        // Sorted leaves make ties resolve to the smallest id during the scan.
        std::sort(order_.begin() + begin, order_.begin() + end);
        nodes_[node_id].begin = begin;
        nodes_[node_id].end = end;
        return node_id;
    }
    // Split on the widest axis at the median.
    Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d hi = -lo;
    for (int i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_.row(order_[i]).transpose());
        hi = hi.cwiseMax(points_.row(order_[i]).transpose());
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const int mid = (begin + end) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](int a, int b) {
                         const double pa = points_(a, axis), pb = points_(b, axis);
                         return pa < pb || (pa == pb && a < b);
                     });
    const double split = points_(order_[mid], axis);

    const int left = build(begin, mid);
    const int right = build(mid, end);
    Node& node = nodes_[node_id];
    node.axis = axis;
    node.split = split;
    node.left = left;
    node.right = right;
    return node_id;
}

void PointIndex::search(int node_id, const Eigen::Vector3d& query, NearestHit& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int id = order_[i];
            const double d2 = (points_.row(id).transpose() - query).squaredNorm();
            if (d2 < best.squared_dist || (d2 == best.squared_dist && id < best.id)) {
                best.squared_dist = d2;
                best.id = id;
            }
        }
        return;
    }
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, best);
    // Visit the far side unless it is strictly outside the best radius, so
    // equidistant candidates still get a chance to win the id tie-break.
    if (delta * delta <= best.squared_dist) search(far, query, best);
}

NearestHit PointIndex::nearest(const Eigen::Vector3d& query) const {
    NearestHit best{-1, std::numeric_limits<double>::infinity()};
    search(root_, query, best);
    return best;
}

NearestHit brute_force_nearest(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points,
                               const Eigen::Vector3d& query) {
    NearestHit best{-1, std::numeric_limits<double>::infinity()};
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double d2 = (points.row(i).transpose() - query).squaredNorm();
        if (d2 < best.squared_dist) {
            best.squared_dist = d2;
            best.id = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace meshboost
