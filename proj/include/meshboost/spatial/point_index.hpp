#pragma once

#include <Eigen/Core>

#include <vector>

#include "meshboost/core/errors.hpp"

namespace meshboost {

struct NearestHit {
    int id;              // index into the original point array
    double squared_dist;
};

// k-d tree over 3D points, median splits, leaf size 8. Immutable after
// build; concurrent queries are safe. Tie-break: among equidistant points
// the smallest id wins, matching the brute-force convention.
class PointIndex {
public:
    explicit PointIndex(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points);

    NearestHit nearest(const Eigen::Vector3d& query) const;

    int size() const { return static_cast<int>(points_.rows()); }
    const Eigen::Matrix<double, Eigen::Dynamic, 3>& points() const { return points_; }

private:
    struct Node {
        int axis = -1;        // -1 = leaf
        double split = 0.0;
        int left = -1, right = -1;
        int begin = 0, end = 0; // leaf range into order_
    };

    int build(int begin, int end);
    void search(int node, const Eigen::Vector3d& query, NearestHit& best) const;

    Eigen::Matrix<double, Eigen::Dynamic, 3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// O(n) reference used by tests and by callers that want the oracle path.
NearestHit brute_force_nearest(const Eigen::Matrix<double, Eigen::Dynamic, 3>& points,
                               const Eigen::Vector3d& query);

} // namespace meshboost
