#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace dme {

// Exact nearest-neighbor kd-tree over a fixed set of points.
//
// Points are referenced, not owned: the flat row-major array passed to
// build() must outlive the tree. Queries return the index of the closest
// point by Euclidean distance; exact ties resolve to the lowest index, so
// results always agree with an exhaustive scan using the same tie rule.
class KdTree {
public:
    KdTree() = default;

    void build(const double* points, std::size_t count, std::size_t dim) {
        if (count == 0 || dim == 0)
            throw std::invalid_argument("KdTree: empty point set");
        points_ = points;
        count_ = count;
        dim_ = dim;
        order_.resize(count);
        std::iota(order_.begin(), order_.end(), std::uint32_t{0});
        nodes_.clear();
        nodes_.reserve(2 * count / kLeafSize + 2);
        build_node(0, count);
    }

    std::size_t size() const { return count_; }

    // Index of the nearest point; ties broken toward the lowest index.
    std::size_t nearest(std::span<const double> query) const {
        if (query.size() != dim_)
            throw std::invalid_argument("KdTree: query dimension mismatch");
        Best best;
        search(0, query.data(), best);
        return best.index;
    }

private:
    static constexpr std::size_t kLeafSize = 8;
    static constexpr std::uint32_t kNoChild = 0xffffffffu;

    struct Node {
        double split = 0.0;
        std::uint32_t axis = 0;
        std::uint32_t left = kNoChild;   // also leaf range begin
        std::uint32_t right = kNoChild;  // also leaf range end
        bool leaf = false;
    };

    struct Best {
        double dist2 = std::numeric_limits<double>::infinity();
        std::size_t index = 0;
    };

    const double* points_ = nullptr;
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;

    const double* point(std::uint32_t idx) const { return points_ + idx * dim_; }

    std::uint32_t build_node(std::size_t begin, std::size_t end) {
        const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        if (end - begin <= kLeafSize) {
            nodes_[id].leaf = true;
            nodes_[id].left = static_cast<std::uint32_t>(begin);
            nodes_[id].right = static_cast<std::uint32_t>(end);
            return id;
        }
        // Split on the axis with the widest extent over this range.
        std::uint32_t axis = 0;
        double widest = -1.0;
        for (std::uint32_t a = 0; a < dim_; ++a) {
            double lo = point(order_[begin])[a], hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                const double v = point(order_[i])[a];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > widest) {
                widest = hi - lo;
                axis = a;
            }
        }
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::uint32_t a, std::uint32_t b) {
                             return point(a)[axis] < point(b)[axis];
                         });
        nodes_[id].axis = axis;
        nodes_[id].split = point(order_[mid])[axis];
        const std::uint32_t left = build_node(begin, mid);
        const std::uint32_t right = build_node(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        nodes_[id].leaf = false;
        return id;
    }

    void search(std::uint32_t node_id, const double* q, Best& best) const {
        const Node& node = nodes_[node_id];
        if (node.leaf) {
            for (std::uint32_t i = node.left; i < node.right; ++i) {
                const std::uint32_t idx = order_[i];
                const double* p = point(idx);
                double d2 = 0.0;
                for (std::size_t a = 0; a < dim_; ++a) {
                    const double diff = q[a] - p[a];
                    d2 += diff * diff;
                }
                if (d2 < best.dist2 || (d2 == best.dist2 && idx < best.index)) {
                    best.dist2 = d2;
                    best.index = idx;
                }
            }
            return;
        }
        const double diff = q[node.axis] - node.split;
        const std::uint32_t near = diff < 0.0 ? node.left : node.right;
        const std::uint32_t far = diff < 0.0 ? node.right : node.left;
        search(near, q, best);
        // Equality must also descend: an equidistant point with a lower
        // index can live on the far side.
        if (diff * diff <= best.dist2)
            search(far, q, best);
    }
};

}  // namespace dme
