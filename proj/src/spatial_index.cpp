#include "san/spatial_index.hpp"

#include <algorithm>
#include <cmath>

namespace san::sim {

Point Geometry::delta(Point a, Point b) const
{
    double dx = b.x - a.x;
    double dy = b.y - a.y;
    if (boundary == Boundary::torus) {
        const double half = 0.5 * side;
        if (dx > half)
            dx -= side;
        else if (dx < -half)
            dx += side;
        if (dy > half)
            dy -= side;
        else if (dy < -half)
            dy += side;
    }
    return {dx, dy};
}

double Geometry::distance_squared(Point a, Point b) const
{
    const Point d = delta(a, b);
    return d.x * d.x + d.y * d.y;
}

double Geometry::distance(Point a, Point b) const { return std::sqrt(distance_squared(a, b)); }

Point Geometry::wrap(Point p) const
{
    if (boundary == Boundary::plain)
        return p;
    auto w = [this](double v) {
        v = std::fmod(v, side);
        if (v < 0.0)
            v += side;
        return v >= side ? 0.0 : v;
    };
    return {w(p.x), w(p.y)};
}

SpatialIndex::SpatialIndex(const std::vector<Point>& points, Geometry geometry, double points_per_cell)
    : points_(points), geometry_(geometry)
{
    const double n = static_cast<double>(points_.size());
    cells_ = std::clamp(static_cast<int>(std::sqrt(n / std::max(points_per_cell, 1e-9))), 1, 4096);
    cell_size_ = geometry_.side / cells_;

    const std::size_t total = static_cast<std::size_t>(cells_) * static_cast<std::size_t>(cells_);
    std::vector<int> cell_ids(points_.size());
    offsets_.assign(total + 1, 0);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const int id = cell_of(points_[i].y) * cells_ + cell_of(points_[i].x);
        cell_ids[i] = id;
        ++offsets_[static_cast<std::size_t>(id) + 1];
    }
    for (std::size_t c = 0; c < total; ++c)
        offsets_[c + 1] += offsets_[c];
    members_.resize(points_.size());
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i)
        members_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_ids[i])]++)] = static_cast<int>(i);
}

int SpatialIndex::cell_of(double coordinate) const
{
    return std::clamp(static_cast<int>(coordinate / cell_size_), 0, cells_ - 1);
}

SpatialIndex::Hit SpatialIndex::nearest(Point q) const
{
    Hit best;
    if (points_.empty())
        return best;
    double best_d2 = best.distance;
    const int cx = cell_of(q.x);
    const int cy = cell_of(q.y);
    const bool torus = geometry_.boundary == Boundary::torus;
    const int max_ring = torus ? cells_ / 2 + 1 : cells_;

    auto scan = [&](int gx, int gy) {
        if (torus) {
            gx = gx < 0 ? gx + cells_ * (1 + (-gx - 1) / cells_) : gx % cells_;
            gy = gy < 0 ? gy + cells_ * (1 + (-gy - 1) / cells_) : gy % cells_;
        } else if (gx < 0 || gy < 0 || gx >= cells_ || gy >= cells_) {
            return;
        }
        const std::size_t id = static_cast<std::size_t>(gy) * static_cast<std::size_t>(cells_) + static_cast<std::size_t>(gx);
        for (int k = offsets_[id]; k < offsets_[id + 1]; ++k) {
            const int idx = members_[static_cast<std::size_t>(k)];
            const double d2 = geometry_.distance_squared(q, points_[static_cast<std::size_t>(idx)]);
            if (d2 < best_d2 || (d2 == best_d2 && idx < best.index)) {
                best_d2 = d2;
                best.index = idx;
            }
        }
    };

    // Distance from q to the nearest wall of its own cell.
    const double wall = std::min({q.x - cx * cell_size_, (cx + 1) * cell_size_ - q.x, q.y - cy * cell_size_,
                                  (cy + 1) * cell_size_ - q.y});
    for (int r = 0; r <= max_ring; ++r) {
        if (r == 0) {
            scan(cx, cy);
        } else {
            for (int dx = -r; dx <= r; ++dx) {
                scan(cx + dx, cy - r);
                scan(cx + dx, cy + r);
            }
            for (int dy = -r + 1; dy <= r - 1; ++dy) {
                scan(cx - r, cy + dy);
                scan(cx + r, cy + dy);
            }
        }
        const double reach = r * cell_size_ + std::max(wall, 0.0);
        if (best.index >= 0 && best_d2 <= reach * reach)
            break;
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

} // namespace san::sim
