#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace cellmorph::detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n = 0) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
    }

    std::uint32_t add() {
        parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return parent_.back();
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        // Keep the smaller root so the first-seen provisional label survives.
        if (a < b) parent_[b] = a;
        else parent_[a] = b;
    }

    std::size_t size() const noexcept { return parent_.size(); }

private:
    std::vector<std::uint32_t> parent_;
};

/// Two-pass 8-connected region labeling. Pixels with value 0 are background.
/// Two foreground pixels connect when `same(a, b)` holds for their values.
/// Returns component ids 1..K numbered in raster order of first pixel.
template <typename Value, typename Same>
std::vector<std::uint32_t> label_regions8(int width, int height, std::span<const Value> grid,
                                          Same same, std::uint32_t* component_count = nullptr) {
    const auto w = static_cast<std::size_t>(width);
    const auto h = static_cast<std::size_t>(height);
    std::vector<std::uint32_t> out(w * h, 0);
    UnionFind uf(1);  // slot 0 is background

    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const std::size_t i = y * w + x;
            const Value v = grid[i];
            if (v == 0) continue;
            std::uint32_t assigned = 0;
            auto link = [&](std::size_t j) {
                if (grid[j] == 0 || !same(v, grid[j])) return;
                if (assigned == 0) assigned = out[j];
                else uf.unite(assigned, out[j]);
            };
            if (x > 0) link(i - 1);
            if (y > 0) {
                if (x > 0) link(i - w - 1);
                link(i - w);
                if (x + 1 < w) link(i - w + 1);
            }
            out[i] = assigned != 0 ? assigned : uf.add();
        }
    }

    std::vector<std::uint32_t> remap(uf.size(), 0);
    std::uint32_t next = 0;
    for (auto& c : out) {
        if (c == 0) continue;
        const std::uint32_t root = uf.find(c);
        if (remap[root] == 0) remap[root] = ++next;
        c = remap[root];
    }
    if (component_count) *component_count = next;
    return out;
}

}  // namespace cellmorph::detail
