#pragma once

#include "meshboost/metrics/sampling.hpp"
#include "meshboost/spatial/point_index.hpp"

namespace meshboost {

// Mean over `from` of the squared distance to the nearest point of `to`.
// Not symmetric. Tree-accelerated; per-point distances accumulate in index
// order so the value is independent of thread count.
double directed_chamfer(const PointSet& from, const PointSet& to);

// Variant reusing a prebuilt index over `to`.
double directed_chamfer(const PointSet& from, const PointIndex& to);

// directed_chamfer(a, b) + directed_chamfer(b, a).
double symmetric_chamfer(const PointSet& a, const PointSet& b);

// O(n*m) references with the same accumulation order (test oracles).
double brute_force_directed_chamfer(const PointSet& from, const PointSet& to);
double brute_force_symmetric_chamfer(const PointSet& a, const PointSet& b);

} // namespace meshboost
