#pragma once

#include "gmor/core_geometry.hpp"

#include <vector>

namespace gmor {

/// A paired source/target point hypothesis with its match weight and the
/// cached difference vector s = q - p.
struct WeightedCorrespondence {
    Vec3 p;
    Vec3 q;
    double weight = 1.0;
    Vec3 s;
};

inline WeightedCorrespondence make_correspondence(const Vec3& p, const Vec3& q, double weight = 1.0) {
    return {p, q, weight, q - p};
}

}  // namespace gmor
