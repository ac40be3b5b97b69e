// Weighted cross-matching in feature space: softmax-weighted bidirectional
// kNN with a dustbin term over exact neighbors from a k-d tree.
#pragma once

#include "gmor/core_geometry.hpp"
#include "gmor/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gmor {

struct FeaturePoint {
    Vec3 position;
    std::vector<double> feature;
};

struct MatchConfig {
    double d_f = 0.05;          // feature-space distance factor
    int k_f = 30;               // neighbors entering the softmax denominator
    double delta = std::sqrt(2.0);  // dustbin threshold
};

namespace detail {

// Exact kNN over D-dimensional points. Median-split k-d tree; high
// dimensions degrade toward linear scans but stay exact.
class FeatureKdTree {
public:
    FeatureKdTree(const std::vector<FeaturePoint>& pts, std::size_t dim)
        : pts_(&pts), dim_(dim), order_(pts.size()) {
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(pts.size());
        root_ = build(0, static_cast<std::int32_t>(pts.size()));
    }

    // k smallest squared distances, ties broken by point index.
    void knn(const std::vector<double>& query, int k,
             std::vector<std::pair<double, std::int32_t>>& out) const {
        out.clear();
        search(root_, query, static_cast<std::size_t>(k), out);
        std::sort_heap(out.begin(), out.end());
    }

private:
    struct Node {
        std::int32_t begin, end;       // leaf payload range in order_
        std::int32_t left = -1, right = -1;
        std::int32_t split_dim = -1;
        double split_val = 0.0;
    };

    static constexpr std::int32_t kLeafSize = 16;

    double coord(std::int32_t pt, std::size_t d) const {
        return (*pts_)[static_cast<std::size_t>(pt)].feature[d];
    }

    std::int32_t build(std::int32_t begin, std::int32_t end) {
        Node node;
        node.begin = begin;
        node.end = end;
        const auto id = static_cast<std::int32_t>(nodes_.size());
        nodes_.push_back(node);
        if (end - begin <= kLeafSize) return id;

        // split along the dimension with the widest spread
        std::size_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double lo = coord(order_[static_cast<std::size_t>(begin)], d), hi = lo;
            for (std::int32_t i = begin + 1; i < end; ++i) {
                const double v = coord(order_[static_cast<std::size_t>(i)], d);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = d;
            }
        }
        if (best_spread <= 0.0) return id;  // all identical: keep as leaf

        const std::int32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::int32_t a, std::int32_t b) {
                             const double ca = coord(a, best_dim), cb = coord(b, best_dim);
                             if (ca != cb) return ca < cb;
                             return a < b;
                         });
        nodes_[static_cast<std::size_t>(id)].split_dim = static_cast<std::int32_t>(best_dim);
        nodes_[static_cast<std::size_t>(id)].split_val = coord(order_[static_cast<std::size_t>(mid)],
                                                               best_dim);
        const std::int32_t left = build(begin, mid);
        const std::int32_t right = build(mid, end);
        nodes_[static_cast<std::size_t>(id)].left = left;
        nodes_[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    void consider(std::int32_t pt, const std::vector<double>& query, std::size_t k,
                  std::vector<std::pair<double, std::int32_t>>& heap) const {
        double d2 = 0.0;
        const auto& f = (*pts_)[static_cast<std::size_t>(pt)].feature;
        for (std::size_t d = 0; d < dim_; ++d) {
            const double diff = f[d] - query[d];
            d2 += diff * diff;
        }
        const std::pair<double, std::int32_t> entry{d2, pt};
        if (heap.size() < k) {
            heap.push_back(entry);
            std::push_heap(heap.begin(), heap.end());
        } else if (entry < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = entry;
            std::push_heap(heap.begin(), heap.end());
        }
    }

    void search(std::int32_t id, const std::vector<double>& query, std::size_t k,
                std::vector<std::pair<double, std::int32_t>>& heap) const {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.left < 0) {
            for (std::int32_t i = node.begin; i < node.end; ++i)
                consider(order_[static_cast<std::size_t>(i)], query, k, heap);
            return;
        }
        const double diff = query[static_cast<std::size_t>(node.split_dim)] - node.split_val;
        const std::int32_t near = diff < 0.0 ? node.left : node.right;
        const std::int32_t far = diff < 0.0 ? node.right : node.left;
        search(near, query, k, heap);
        if (heap.size() < k || diff * diff <= heap.front().first) search(far, query, k, heap);
    }

    const std::vector<FeaturePoint>* pts_;
    std::size_t dim_;
    std::vector<std::int32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = 0;
};

// Softmax weight of the nearest neighbor among the k candidates, with the
// dustbin term in the denominator.
inline double softmax_weight(const std::vector<std::pair<double, std::int32_t>>& knn,
                             double query_norm2, const MatchConfig& cfg) {
    const double denom_scale = 2.0 * cfg.d_f * cfg.d_f * query_norm2;
    double denom = std::exp(-(cfg.delta * cfg.delta) / (2.0 * cfg.d_f * cfg.d_f));
    for (const auto& [d2, idx] : knn) denom += std::exp(-d2 / denom_scale);
    return std::exp(-knn.front().first / denom_scale) / denom;
}

}  // namespace detail

/// Bidirectional softmax-weighted kNN cross-matching. Each point matches
/// its nearest neighbor in the other set; duplicates across the two
/// directions keep the larger weight. Output sorted by (source, target).
inline std::vector<WeightedCorrespondence> match_weighted(const std::vector<FeaturePoint>& src,
                                                          const std::vector<FeaturePoint>& dst,
                                                          const MatchConfig& cfg) {
    if (src.empty() || dst.empty())
        throw std::invalid_argument("match_weighted: empty input set");
    if (!(cfg.d_f > 0.0)) throw std::invalid_argument("match_weighted: d_f must be > 0");
    if (cfg.k_f < 1) throw std::invalid_argument("match_weighted: k_f must be >= 1");

    const std::size_t dim = src.front().feature.size();
    if (dim == 0) throw std::invalid_argument("match_weighted: zero feature dimension");
    auto validate = [dim](const std::vector<FeaturePoint>& pts, const char* which) {
        for (const auto& fp : pts) {
            if (fp.feature.size() != dim)
                throw std::invalid_argument(std::string("match_weighted: feature dimension mismatch in ") + which);
            double n2 = 0.0;
            for (double v : fp.feature) n2 += v * v;
            if (!(n2 > 0.0))
                throw std::invalid_argument(std::string("match_weighted: zero-norm feature in ") + which);
        }
    };
    validate(src, "source set");
    validate(dst, "target set");

    std::map<std::pair<std::int32_t, std::int32_t>, double> pairs;
    std::vector<std::pair<double, std::int32_t>> knn;

    auto run_direction = [&](const std::vector<FeaturePoint>& queries,
                             const std::vector<FeaturePoint>& targets, bool src_to_dst) {
        detail::FeatureKdTree tree(targets, dim);
        const int k = std::min<int>(cfg.k_f, static_cast<int>(targets.size()));
        for (std::int32_t qi = 0; qi < static_cast<std::int32_t>(queries.size()); ++qi) {
            const auto& fp = queries[static_cast<std::size_t>(qi)];
            tree.knn(fp.feature, k, knn);
            double n2 = 0.0;
            for (double v : fp.feature) n2 += v * v;
            const double w = detail::softmax_weight(knn, n2, cfg);
            const std::int32_t ti = knn.front().second;
            const auto key = src_to_dst ? std::make_pair(qi, ti) : std::make_pair(ti, qi);
            auto [it, inserted] = pairs.emplace(key, w);
            if (!inserted) it->second = std::max(it->second, w);
        }
    };
    run_direction(src, dst, true);
    run_direction(dst, src, false);

    std::vector<WeightedCorrespondence> out;
    out.reserve(pairs.size());
    for (const auto& [key, w] : pairs) {
        const auto& p = src[static_cast<std::size_t>(key.first)].position;
        const auto& q = dst[static_cast<std::size_t>(key.second)].position;
        out.push_back(make_correspondence(p, q, w));
    }
    return out;
}

}  // namespace gmor
