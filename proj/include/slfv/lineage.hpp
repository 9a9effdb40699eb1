#pragma once

#include <vector>

#include "slfv/geometry.hpp"

namespace slfv {

struct MergeRecord {
    double time = 0.0;
    std::vector<int> merged;
    int survivor = -1;
    Point position{0.0, 0.0, 0.0};
};

/// Positions of the ancestral lineages with stable ids and merge history.
struct LineageSet {
    Domain domain;
    std::vector<Point> positions;
    std::vector<int> ids;
    std::vector<MergeRecord> merge_log;

    LineageSet() = default;
    LineageSet(const Domain& dom, const std::vector<Point>& start);

    std::size_t size() const { return positions.size(); }
    /// Indices of lineages within distance `radius` of `center`.
    std::vector<std::size_t> covered(const Point& center, double radius) const;
    std::size_t index_of(int id) const;
};

} // namespace slfv
