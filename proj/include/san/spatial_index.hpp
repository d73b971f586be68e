#pragma once

#include <limits>
#include <vector>

namespace san::sim {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Boundary { torus, plain };

/// Distance metric on a square window [0, side)^2, optionally wrapped.
struct Geometry {
    double side = 1.0;
    Boundary boundary = Boundary::torus;

    /// Shortest displacement from a to b (minimal image on the torus).
    Point delta(Point a, Point b) const;
    double distance_squared(Point a, Point b) const;
    double distance(Point a, Point b) const;
    Point wrap(Point p) const;
};

/// Uniform bucket grid for nearest-neighbour queries.
class SpatialIndex {
public:
    struct Hit {
        int index = -1;
        double distance = std::numeric_limits<double>::infinity();
    };

    SpatialIndex(const std::vector<Point>& points, Geometry geometry, double points_per_cell = 2.0);

    Hit nearest(Point q) const;
    const Geometry& geometry() const { return geometry_; }
    std::size_t size() const { return points_.size(); }

private:
    int cell_of(double coordinate) const;

    std::vector<Point> points_;
    Geometry geometry_;
    int cells_ = 1;
    double cell_size_ = 1.0;
    std::vector<int> offsets_;  // CSR row starts, cells_^2 + 1 entries
    std::vector<int> members_;
};

} // namespace san::sim
