#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cellmorph::detail {

/// Integer lattice point. Coordinates must lie in [0, 2^30] so that the
/// orientation and in-circle determinants are exact in 128-bit arithmetic.
struct LatticePoint {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

__extension__ using int128 = __int128;

inline constexpr std::int64_t kLatticeMax = std::int64_t{1} << 30;

/// > 0 if c lies left of a->b (counterclockwise turn).
std::int64_t orient(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c);

/// > 0 if d lies strictly inside the circumcircle of counterclockwise a,b,c.
int128 incircle(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c,
                  const LatticePoint& d);

struct Triangulation {
    /// Counterclockwise finite triangles.
    std::vector<std::array<std::size_t, 3>> triangles;
    /// Per finite edge (i < j): the opposite vertices on each side; kNone for
    /// the exterior side of a hull edge.
    struct Edge {
        std::size_t a = 0;
        std::size_t b = 0;
        std::size_t left = 0;   // opposite vertex of the triangle left of a->b
        std::size_t right = 0;  // opposite vertex of the triangle right of a->b
    };
    std::vector<Edge> edges;
    std::vector<bool> on_hull;
    bool collinear = false;

    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
};

/// Exact incremental Bowyer-Watson with a symbolic vertex at infinity.
/// Points must be pairwise distinct. Insertion follows input order, so
/// cocircular ties resolve by index. All-collinear inputs (or fewer than
/// three points) return `collinear = true` and consecutive edges along the
/// line.
Triangulation delaunay(std::span<const LatticePoint> points);

}  // namespace cellmorph::detail
