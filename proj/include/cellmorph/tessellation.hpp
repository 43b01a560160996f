#pragma once

#include "cellmorph/morphometry.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace cellmorph {

using Point = Point2;
using Polygon = std::vector<Point>;

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const noexcept { return x1 - x0; }
    double height() const noexcept { return y1 - y0; }
    double area() const noexcept { return width() * height(); }
    double diagonal() const noexcept;
    bool contains(const Point& p) const noexcept {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

/// Signed shoelace area; positive for counterclockwise order in a y-up frame.
double signed_area(std::span<const Point> polygon);
double polygon_area(std::span<const Point> polygon);
Point polygon_centroid(std::span<const Point> polygon);
/// Strict containment (points on an edge are outside).
bool point_in_polygon(const Point& p, std::span<const Point> polygon);

/// Bounded Voronoi diagram of a seed set.
struct Tessellation {
    std::vector<Point> seeds;
    Rect bounds;
    /// One convex polygon per seed, clipped to `bounds`, counterclockwise in
    /// the y-up sense (positive signed_area), near-coincident vertices merged.
    std::vector<Polygon> polygons;
    /// Voronoi neighbours sharing an edge of positive length, unclipped.
    std::vector<std::vector<std::size_t>> neighbors;
    std::vector<std::size_t> neighbor_counts;
    /// True iff the unclipped cell is bounded and lies strictly inside `bounds`.
    std::vector<bool> interior;
    /// Delaunay triangles over seed indices, counterclockwise. Empty when all
    /// seeds are collinear or fewer than three.
    std::vector<std::array<std::size_t, 3>> triangles;

    std::size_t interior_count() const noexcept;
};

/// Delaunay triangulation by incremental Bowyer-Watson on coordinates
/// normalized to the unit square, dualized to Voronoi cells and clipped to
/// `bounds` by half-plane intersection. Output depends only on seed order.
/// Throws GeometryError for no seeds, a seed outside `bounds`, or two seeds
/// closer than 1e-9 of the bounds diagonal.
Tessellation build_voronoi(std::span<const Point> seeds, const Rect& bounds);

struct ClassHistogram {
    std::map<std::size_t, std::size_t> counts;  // edge count -> interior polygons
    std::map<std::size_t, double> proportions;
    std::size_t total = 0;
};

/// Minimum number of interior polygons for order metrics to be trusted.
inline constexpr std::size_t kMinInteriorPolygons = 10;

struct EntropyResult {
    ClassHistogram histogram;
    std::optional<double> entropy;  // nats; absent without interior polygons
    bool low_confidence = true;
};

/// Shannon entropy (natural log) of the edge-count classes of interior
/// polygons.
EntropyResult voronoi_entropy(const Tessellation& tess);

struct PolygonSymmetry {
    Polygon vertices;            // M_i
    Polygon reference_vertices;  // M^_i, matched in cyclic order
    std::size_t n = 0;
    double reference_area = 0.0;  // S
    double rotation = 0.0;        // reference orientation, radians
    double csm = 0.0;
};

/// Continuous symmetry measure against the regular n-gon with the same
/// vertex centroid and area, rotated to minimise the summed squared vertex
/// distances: csm = sum |M_i - M^_i|^2 / (n * S).
/// Throws GeometryError for fewer than 3 vertices, repeated vertices,
/// zero area or self-intersection.
PolygonSymmetry polygon_csm(std::span<const Point> vertices);

/// Recomputes csm from stored fields.
double csm_from_fields(const PolygonSymmetry& sym);

struct OrderMetric {
    std::optional<double> value;
    std::size_t polygons = 0;
    bool low_confidence = true;
};

/// Mean polygon_csm over interior polygons.
OrderMetric image_csm(const Tessellation& tess);

}  // namespace cellmorph
