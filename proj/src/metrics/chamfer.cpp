#include "meshboost/metrics/chamfer.hpp"

#include "meshboost/core/parallel.hpp"

namespace meshboost {

double directed_chamfer(const PointSet& from, const PointIndex& to) {
    if (from.size() < 1) throw ValidationError("directed_chamfer: empty source set");
    std::vector<double> dists(from.size());
    parallel_for(0, from.size(), [&](std::int64_t i) {
        dists[static_cast<std::size_t>(i)] = to.nearest(from.points.row(i).transpose()).squared_dist;
    });
    double sum = 0.0;
    for (double d : dists) sum += d;
    return sum / from.size();
}

double directed_chamfer(const PointSet& from, const PointSet& to) {
    if (to.size() < 1) throw ValidationError("directed_chamfer: empty target set");
    return directed_chamfer(from, PointIndex(to.points));
}

double symmetric_chamfer(const PointSet& a, const PointSet& b) {
    return directed_chamfer(a, b) + directed_chamfer(b, a);
}

double brute_force_directed_chamfer(const PointSet& from, const PointSet& to) {
    if (from.size() < 1 || to.size() < 1) throw ValidationError("chamfer: empty point set");
    double sum = 0.0;
    for (int i = 0; i < from.size(); ++i)
        sum += brute_force_nearest(to.points, from.points.row(i).transpose()).squared_dist;
    return sum / from.size();
}

double brute_force_symmetric_chamfer(const PointSet& a, const PointSet& b) {
    return brute_force_directed_chamfer(a, b) + brute_force_directed_chamfer(b, a);
}

} // namespace meshboost
