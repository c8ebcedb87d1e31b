#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace dismantler {

/// Disjoint sets with union by size and path halving. Tracks the size of the
/// largest set so percolation sweeps can read the GCC in O(1).
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1), max_comp_(n > 0 ? 1 : 0) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns true if a merge happened.
    bool unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        if (size_[a] > max_comp_) max_comp_ = size_[a];
        return true;
    }

    std::size_t component_size(std::uint32_t x) { return size_[find(x)]; }
    std::size_t max_component() const { return max_comp_; }
    std::size_t size() const { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
    std::vector<std::size_t> size_;
    std::size_t max_comp_;
};

} // namespace dismantler
