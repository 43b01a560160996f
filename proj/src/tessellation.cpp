#include "cellmorph/tessellation.hpp"

#include "cellmorph/errors.hpp"
#include "detail/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cellmorph {

double Rect::diagonal() const noexcept { return std::hypot(width(), height()); }

double signed_area(std::span<const Point> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return 0.0;
    // Shoelace relative to the first vertex to limit cancellation.
    const Point o = polygon[0];
    double twice = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double ax = polygon[i].x - o.x, ay = polygon[i].y - o.y;
        const double bx = polygon[i + 1].x - o.x, by = polygon[i + 1].y - o.y;
        twice += ax * by - ay * bx;
    }
    return 0.5 * twice;
}

double polygon_area(std::span<const Point> polygon) { return std::abs(signed_area(polygon)); }

Point polygon_centroid(std::span<const Point> polygon) {
    const std::size_t n = polygon.size();
    const Point o = polygon[0];
    double cx = 0.0, cy = 0.0, twice = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double ax = polygon[i].x - o.x, ay = polygon[i].y - o.y;
        const double bx = polygon[i + 1].x - o.x, by = polygon[i + 1].y - o.y;
        const double cross = ax * by - ay * bx;
        twice += cross;
        cx += (ax + bx) * cross;
        cy += (ay + by) * cross;
    }
    if (twice == 0.0) return o;
    return {o.x + cx / (3.0 * twice), o.y + cy / (3.0 * twice)};
}

bool point_in_polygon(const Point& p, std::span<const Point> polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = polygon[i];
        const Point& b = polygon[j];
        // On-edge points count as outside.
        const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if (cross == 0.0 && p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
            p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y)) {
            return false;
        }
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_at = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

std::size_t Tessellation::interior_count() const noexcept {
    return static_cast<std::size_t>(std::count(interior.begin(), interior.end(), true));
}

namespace {

Polygon rect_polygon(const Rect& r) {
    return {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
}

// Keeps the part of a convex polygon where (q - mid) . normal <= 0.
Polygon clip_half_plane(const Polygon& poly, const Point& mid, const Point& normal) {
    Polygon out;
    out.reserve(poly.size() + 1);
    const std::size_t n = poly.size();
    auto side = [&](const Point& q) { return (q.x - mid.x) * normal.x + (q.y - mid.y) * normal.y; };
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = poly[i];
        const Point& b = poly[(i + 1) % n];
        const double sa = side(a);
        const double sb = side(b);
        if (sa <= 0.0) out.push_back(a);
        if ((sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0)) {
            const double t = sa / (sa - sb);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    return out;
}

Polygon merge_close_vertices(Polygon poly, double tol) {
    Polygon out;
    out.reserve(poly.size());
    for (const auto& p : poly) {
        if (out.empty() || std::hypot(p.x - out.back().x, p.y - out.back().y) > tol) {
            out.push_back(p);
        }
    }
    while (out.size() > 1 &&
           std::hypot(out.front().x - out.back().x, out.front().y - out.back().y) <= tol) {
        out.pop_back();
    }
    return out;
}

Point circumcenter(const Point& a, const Point& b, const Point& c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

}  // namespace

Tessellation build_voronoi(std::span<const Point> seeds, const Rect& bounds) {
    if (seeds.empty()) throw GeometryError("Voronoi tessellation needs at least one seed");
    if (!(bounds.width() > 0.0) || !(bounds.height() > 0.0)) {
        throw GeometryError("Voronoi bounds must have positive width and height");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!std::isfinite(seeds[i].x) || !std::isfinite(seeds[i].y) || !bounds.contains(seeds[i])) {
            throw GeometryError("seed " + std::to_string(i) + " lies outside the bounds");
        }
    }

    const double diag = bounds.diagonal();
    const double min_separation = 1e-9 * diag;
    const double vertex_tol = 1e-9 * diag;
    const double extent = std::max(bounds.width(), bounds.height());

    // Normalize to the unit square and snap to the 2^30 lattice, where the
    // Delaunay predicates are exact.
    std::vector<detail::LatticePoint> lattice(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const double u = (seeds[i].x - bounds.x0) / extent;
        const double v = (seeds[i].y - bounds.y0) / extent;
        lattice[i] = {std::llround(u * static_cast<double>(detail::kLatticeMax)),
                      std::llround(v * static_cast<double>(detail::kLatticeMax))};
    }
    {
        std::vector<std::size_t> order(seeds.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return lattice[a].x != lattice[b].x ? lattice[a].x < lattice[b].x
                                                : lattice[a].y < lattice[b].y;
        });
        for (std::size_t k = 0; k + 1 < order.size(); ++k) {
            if (lattice[order[k]] == lattice[order[k + 1]]) {
                throw GeometryError("duplicate seeds " + std::to_string(order[k]) + " and " +
                                    std::to_string(order[k + 1]));
            }
        }
    }

    const detail::Triangulation tri = detail::delaunay(lattice);
    const std::size_t n = seeds.size();

    Tessellation tess;
    tess.seeds.assign(seeds.begin(), seeds.end());
    tess.bounds = bounds;
    tess.triangles = tri.triangles;
    tess.neighbors.assign(n, {});
    tess.interior.assign(n, false);

    std::vector<std::vector<std::size_t>> delaunay_nbrs(n);
    std::vector<bool> vertex_outside(n, false);  // some Voronoi vertex not strictly inside

    auto strictly_inside = [&](const Point& p) {
        return p.x > bounds.x0 && p.x < bounds.x1 && p.y > bounds.y0 && p.y < bounds.y1;
    };

    for (const auto& e : tri.edges) {
        const Point& pa = seeds[e.a];
        const Point& pb = seeds[e.b];
        // Every point's nearest neighbour is a Delaunay neighbour, so checking
        // edges finds all too-close pairs.
        if (std::hypot(pa.x - pb.x, pa.y - pb.y) < min_separation) {
            throw GeometryError("duplicate seeds " + std::to_string(e.a) + " and " +
                                std::to_string(e.b));
        }
        delaunay_nbrs[e.a].push_back(e.b);
        delaunay_nbrs[e.b].push_back(e.a);

        // The dual Voronoi edge vanishes when the two triangles sharing this
        // edge are cocircular. Lattice snapping can break exact ties of the
        // input (regular grids), so nearly coincident circumcenters count too.
        bool degenerate = false;
        if (e.left != detail::Triangulation::kNone && e.right != detail::Triangulation::kNone) {
            const Point cl = circumcenter(pa, pb, seeds[e.left]);
            const Point cr = circumcenter(pa, pb, seeds[e.right]);
            degenerate = detail::incircle(lattice[e.a], lattice[e.b], lattice[e.left],
                                          lattice[e.right]) == 0 ||
                         std::hypot(cl.x - cr.x, cl.y - cr.y) <= vertex_tol;
        }
        if (!degenerate) {
            tess.neighbors[e.a].push_back(e.b);
            tess.neighbors[e.b].push_back(e.a);
        }
    }

    for (const auto& t : tri.triangles) {
        const Point cc = circumcenter(seeds[t[0]], seeds[t[1]], seeds[t[2]]);
        if (!strictly_inside(cc)) {
            for (std::size_t v : t) vertex_outside[v] = true;
        }
    }

    tess.polygons.resize(n);
    tess.neighbor_counts.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(tess.neighbors[i].begin(), tess.neighbors[i].end());
        tess.neighbor_counts[i] = tess.neighbors[i].size();

        Polygon poly = rect_polygon(bounds);
        for (std::size_t j : delaunay_nbrs[i]) {
            const Point mid{0.5 * (seeds[i].x + seeds[j].x), 0.5 * (seeds[i].y + seeds[j].y)};
            const Point normal{seeds[j].x - seeds[i].x, seeds[j].y - seeds[i].y};
            poly = clip_half_plane(poly, mid, normal);
        }
        tess.polygons[i] = merge_close_vertices(std::move(poly), vertex_tol);
        tess.interior[i] = !tri.collinear && !tri.on_hull[i] && !vertex_outside[i];
    }
    return tess;
}

EntropyResult voronoi_entropy(const Tessellation& tess) {
    EntropyResult r;
    for (std::size_t i = 0; i < tess.seeds.size(); ++i) {
        if (!tess.interior[i]) continue;
        ++r.histogram.counts[tess.neighbor_counts[i]];
        ++r.histogram.total;
    }
    r.low_confidence = r.histogram.total < kMinInteriorPolygons;
    if (r.histogram.total == 0) return r;

    double s = 0.0;
    const double total = static_cast<double>(r.histogram.total);
    for (const auto& [k, count] : r.histogram.counts) {
        const double p = static_cast<double>(count) / total;
        r.histogram.proportions[k] = p;
        s -= p * std::log(p);
    }
    // A single class is exactly zero; avoid returning -0.0.
    r.entropy = r.histogram.counts.size() == 1 ? 0.0 : s;
    return r;
}

OrderMetric image_csm(const Tessellation& tess) {
    OrderMetric m;
    double sum = 0.0;
    for (std::size_t i = 0; i < tess.seeds.size(); ++i) {
        if (!tess.interior[i]) continue;
        sum += polygon_csm(tess.polygons[i]).csm;
        ++m.polygons;
    }
    m.low_confidence = m.polygons < kMinInteriorPolygons;
    if (m.polygons > 0) m.value = sum / static_cast<double>(m.polygons);
    return m;
}

}  // namespace cellmorph
