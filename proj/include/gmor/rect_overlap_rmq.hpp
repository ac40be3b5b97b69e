// 2D range-maximum query over weighted axis-aligned rectangles: sweep line
// over x with a lazy-propagation segment tree over discretized y indices.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmor {

struct WeightedRect {
    double x_lo = 0.0, y_lo = 0.0;
    double x_hi = 0.0, y_hi = 0.0;
    double weight = 0.0;
};

/// Segment tree over leaf indices [1, size] supporting range addition and
/// maximum query, with lazy propagation (flat 4*size node array).
class SegmentTreeMax {
public:
    SegmentTreeMax() = default;
    explicit SegmentTreeMax(int size) { reset(size); }

    void reset(int size) {
        if (size < 1) throw std::invalid_argument("SegmentTreeMax: size must be >= 1");
        size_ = size;
        val_.assign(static_cast<std::size_t>(slots(size)), 0.0);
        lazy_.assign(static_cast<std::size_t>(slots(size)), 0.0);
    }

    int size() const { return size_; }

    /// Adds w to every leaf in [y_l, y_r] (1-based, inclusive).
    void update(int y_l, int y_r, double w) {
        if (y_l < 1 || y_r > size_ || y_l > y_r)
            throw std::invalid_argument("SegmentTreeMax::update: index range out of bounds");
        update_node(1, 1, size_, y_l, y_r, w);
    }

    double root_max() const { return val_[1]; }

    /// Root maximum and the smallest leaf index attaining it. Descends the
    /// tree pushing pending lazy additions.
    std::pair<double, int> argmax() {
        int node = 1, lo = 1, hi = size_;
        while (lo != hi) {
            push_down(node);
            const int mid = lo + (hi - lo) / 2;
            const int left = node * 2;
            if (val_[static_cast<std::size_t>(left)] >= val_[static_cast<std::size_t>(left + 1)]) {
                node = left;
                hi = mid;
            } else {
                node = left + 1;
                lo = mid + 1;
            }
        }
        return {val_[static_cast<std::size_t>(node)], lo};
    }

    void clear() {
        std::fill(val_.begin(), val_.end(), 0.0);
        std::fill(lazy_.begin(), lazy_.end(), 0.0);
    }

private:
    static int slots(int size) { return 4 * size; }

    void push_down(int node) {
        auto n = static_cast<std::size_t>(node);
        const double pending = lazy_[n];
        if (pending != 0.0) {
            for (std::size_t child : {n * 2, n * 2 + 1}) {
                val_[child] += pending;
                lazy_[child] += pending;
            }
            lazy_[n] = 0.0;
        }
    }

    void update_node(int node, int lo, int hi, int y_l, int y_r, double w) {
        auto n = static_cast<std::size_t>(node);
        if (lo >= y_l && hi <= y_r) {
            val_[n] += w;
            lazy_[n] += w;
            return;
        }
        push_down(node);
        const int mid = lo + (hi - lo) / 2;
        if (y_l <= mid) update_node(node * 2, lo, mid, y_l, y_r, w);
        if (y_r > mid) update_node(node * 2 + 1, mid + 1, hi, y_l, y_r, w);
        val_[n] = std::max(val_[static_cast<std::size_t>(node * 2)],
                           val_[static_cast<std::size_t>(node * 2 + 1)]);
    }

    int size_ = 0;
    std::vector<double> val_;
    std::vector<double> lazy_;
};

namespace detail {

// Rectangle edge crossing the sweep line. Left edges (+w) precede right
// edges (-w) at equal x so touching closed rectangles overlap.
struct SweepSegment {
    double x;
    std::int32_t y_l, y_r;  // inclusive leaf indices
    double w;
    std::uint8_t closing;
    std::int32_t index;

    bool operator<(const SweepSegment& o) const {
        if (x != o.x) return x < o.x;
        if (closing != o.closing) return closing < o.closing;
        return index < o.index;
    }
};

// y endpoint awaiting discretization. Lo endpoints sort before hi endpoints
// at equal coordinates so closed ranges that touch share index coverage.
struct YEndpoint {
    double y;
    std::uint8_t kind;  // 0 = lo, 1 = hi
    std::int32_t rect;

    bool operator<(const YEndpoint& o) const {
        if (y != o.y) return y < o.y;
        if (kind != o.kind) return kind < o.kind;
        return rect < o.rect;
    }
};

}  // namespace detail

/// Reusable workspace for max_rect_overlap so repeated sweeps over equally
/// sized rectangle sets do not reallocate.
struct SweepWorkspace {
    std::vector<detail::YEndpoint> ys;
    std::vector<detail::SweepSegment> segs;
    std::vector<std::int32_t> y_lo_idx, y_hi_idx;
    std::vector<double> y_coord_of_index;
    SegmentTreeMax tree;
};

struct RectOverlapResult {
    double weight = 0.0;
    double x = 0.0;
    double y = 0.0;
};

/// Maximum accumulated weight over all points covered by the closed
/// rectangles, plus a point attaining it.
inline RectOverlapResult max_rect_overlap(const std::vector<WeightedRect>& rects,
                                          SweepWorkspace& ws) {
    if (rects.empty()) throw std::invalid_argument("max_rect_overlap: empty input");
    const auto n = static_cast<std::int32_t>(rects.size());

    ws.ys.clear();
    ws.ys.reserve(static_cast<std::size_t>(2 * n));
    for (std::int32_t i = 0; i < n; ++i) {
        ws.ys.push_back({rects[static_cast<std::size_t>(i)].y_lo, 0, i});
        ws.ys.push_back({rects[static_cast<std::size_t>(i)].y_hi, 1, i});
    }
    std::sort(ws.ys.begin(), ws.ys.end());

    ws.y_lo_idx.assign(static_cast<std::size_t>(n), 0);
    ws.y_hi_idx.assign(static_cast<std::size_t>(n), 0);
    ws.y_coord_of_index.resize(static_cast<std::size_t>(2 * n) + 1);
    for (std::int32_t k = 0; k < 2 * n; ++k) {
        const auto& e = ws.ys[static_cast<std::size_t>(k)];
        ws.y_coord_of_index[static_cast<std::size_t>(k) + 1] = e.y;
        (e.kind == 0 ? ws.y_lo_idx : ws.y_hi_idx)[static_cast<std::size_t>(e.rect)] = k + 1;
    }

    ws.segs.clear();
    ws.segs.reserve(static_cast<std::size_t>(2 * n));
    for (std::int32_t i = 0; i < n; ++i) {
        const auto& r = rects[static_cast<std::size_t>(i)];
        const auto yl = ws.y_lo_idx[static_cast<std::size_t>(i)];
        const auto yr = ws.y_hi_idx[static_cast<std::size_t>(i)];
        ws.segs.push_back({r.x_lo, yl, yr, r.weight, 0, i});
        ws.segs.push_back({r.x_hi, yl, yr, -r.weight, 1, i});
    }
    std::sort(ws.segs.begin(), ws.segs.end());

    if (ws.tree.size() == 2 * n) {
        ws.tree.clear();
    } else {
        ws.tree.reset(2 * n);
    }

    RectOverlapResult best;
    bool first = true;
    for (const auto& s : ws.segs) {
        ws.tree.update(s.y_l, s.y_r, s.w);
        if (first || ws.tree.root_max() > best.weight) {
            const auto [v, leaf] = ws.tree.argmax();
            best.weight = v;
            best.x = s.x;
            best.y = ws.y_coord_of_index[static_cast<std::size_t>(leaf)];
            first = false;
        }
    }

    // The sweep lands on a corner of the optimal region. Recenter onto the
    // midpoint of the covering subset's intersection box: same weight, but
    // an interior point, which downstream exact reselections depend on.
    double x_lo = -1e300, x_hi = 1e300, y_lo = -1e300, y_hi = 1e300;
    for (const auto& r : rects) {
        if (best.x >= r.x_lo && best.x <= r.x_hi && best.y >= r.y_lo && best.y <= r.y_hi) {
            x_lo = std::max(x_lo, r.x_lo);
            x_hi = std::min(x_hi, r.x_hi);
            y_lo = std::max(y_lo, r.y_lo);
            y_hi = std::min(y_hi, r.y_hi);
        }
    }
    best.x = 0.5 * (x_lo + x_hi);
    best.y = 0.5 * (y_lo + y_hi);
    return best;
}

inline RectOverlapResult max_rect_overlap(const std::vector<WeightedRect>& rects) {
    SweepWorkspace ws;
    return max_rect_overlap(rects, ws);
}

}  // namespace gmor
