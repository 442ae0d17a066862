#pragma once

#include <vector>

#include "qcavity/model_config.hpp"

namespace qcavity {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Partition of a uniform grid into the three constraint classes. The top row
// (y = y1), corners included, drives the lid; the rest of the boundary is
// no-slip wall; everything else is interior. Lists keep grid order (row-major
// from the bottom), which fixes the reduction order for accumulated sums.
struct CollocationSet {
    std::vector<Point> interior;
    std::vector<Point> wall;
    std::vector<Point> lid;
    Point reference_point{0.0, 0.0};
};

CollocationSet make_collocation(int nx, int ny, const Domain& domain = {});

} // namespace qcavity
