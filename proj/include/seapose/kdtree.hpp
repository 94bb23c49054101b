#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "seapose/geometry.hpp"

namespace seapose {

/// Exact nearest-neighbor search over a fixed set of 3D points. Median-split
/// tree, cycling axes; queries prune on the splitting plane distance, so the
/// returned neighbor is always the true nearest.
class KdTree3 {
public:
    explicit KdTree3(std::vector<Vec3> points) : pts_(std::move(points)) {
        if (pts_.empty()) return;
        std::vector<int> order(pts_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        nodes_.reserve(pts_.size());
        root_ = build(order, 0, static_cast<int>(order.size()), 0);
    }

    std::size_t size() const { return pts_.size(); }
    const Vec3& point(int i) const { return pts_[i]; }

    /// Returns (index, squared distance) of the nearest point; size() must be
    /// nonzero.
    std::pair<int, double> nearest(const Vec3& query) const {
        int best = -1;
        double best_sq = std::numeric_limits<double>::max();
        search(root_, query, best, best_sq);
        return {best, best_sq};
    }

private:
    struct Node {
        int point = -1;
        int left = -1;
        int right = -1;
        int axis = 0;
    };

    int build(std::vector<int>& order, int lo, int hi, int depth) {
        if (lo >= hi) return -1;
        int axis = depth % 3;
        int mid = (lo + hi) / 2;
        std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                         [&](int a, int b) { return pts_[a][axis] < pts_[b][axis]; });
        Node node;
        node.point = order[mid];
        node.axis = axis;
        int self = static_cast<int>(nodes_.size());
        nodes_.push_back(node);
        nodes_[self].left = build(order, lo, mid, depth + 1);
        nodes_[self].right = build(order, mid + 1, hi, depth + 1);
        return self;
    }

    void search(int ni, const Vec3& query, int& best, double& best_sq) const {
        if (ni < 0) return;
        const Node& node = nodes_[ni];
        double d_sq = (pts_[node.point] - query).squaredNorm();
        if (d_sq < best_sq) {
            best_sq = d_sq;
            best = node.point;
        }
        double delta = query[node.axis] - pts_[node.point][node.axis];
        int near = delta < 0.0 ? node.left : node.right;
        int far = delta < 0.0 ? node.right : node.left;
        search(near, query, best, best_sq);
        if (delta * delta < best_sq) search(far, query, best, best_sq);
    }

    std::vector<Vec3> pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace seapose
