#include "cellmorph/errors.hpp"
#include "cellmorph/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace cellmorph {

namespace {

using cplx = std::complex<double>;

bool segments_cross(const Point& a, const Point& b, const Point& c, const Point& d) {
    auto orient = [](const Point& p, const Point& q, const Point& r) {
        const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return (v > 0.0) - (v < 0.0);
    };
    auto on_segment = [](const Point& p, const Point& q, const Point& r) {
        return r.x >= std::min(p.x, q.x) && r.x <= std::max(p.x, q.x) &&
               r.y >= std::min(p.y, q.y) && r.y <= std::max(p.y, q.y);
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    return (o1 == 0 && on_segment(a, b, c)) || (o2 == 0 && on_segment(a, b, d)) ||
           (o3 == 0 && on_segment(c, d, a)) || (o4 == 0 && on_segment(c, d, b));
}

void validate_polygon(std::span<const Point> v) {
    const std::size_t n = v.size();
    if (n < 3) throw GeometryError("symmetry measure needs at least 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (v[i] == v[j]) throw GeometryError("polygon has repeated vertices");
        }
    }
    double scale = 0.0;
    for (const auto& p : v) scale = std::max({scale, std::abs(p.x - v[0].x), std::abs(p.y - v[0].y)});
    if (!(polygon_area(v) > 1e-14 * scale * scale)) throw GeometryError("polygon has zero area");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
            if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                throw GeometryError("polygon is not simple");
            }
        }
    }
}

}  // namespace

PolygonSymmetry polygon_csm(std::span<const Point> vertices) {
    validate_polygon(vertices);
    const std::size_t n = vertices.size();
    const double nd = static_cast<double>(n);

    cplx center{0.0, 0.0};
    for (const auto& p : vertices) center += cplx{p.x, p.y};
    center /= nd;

    const double area = signed_area(vertices);
    const double orientation = area > 0.0 ? 1.0 : -1.0;
    const double s = std::abs(area);
    const double step = 2.0 * std::numbers::pi / nd;
    const double radius = std::sqrt(2.0 * s / (nd * std::sin(step)));

    std::vector<cplx> centered(n), unit(n);
    for (std::size_t k = 0; k < n; ++k) {
        centered[k] = cplx{vertices[k].x, vertices[k].y} - center;
        unit[k] = std::polar(1.0, orientation * step * static_cast<double>(k));
    }

    auto cost = [&](double theta) {
        const cplx rot = std::polar(radius, theta);
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += std::norm(centered[k] - rot * unit[k]);
        return sum;
    };

    // Closed form: the best rotation aligns with the cross-correlation of the
    // centred vertices and the unit reference.
    cplx corr{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) corr += centered[k] * std::conj(unit[k]);
    double best = std::arg(corr);

    // Golden-section refinement; cost is unimodal within +-pi/2 of the optimum.
    {
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = best - std::numbers::pi / 2.0, hi = best + std::numbers::pi / 2.0;
        double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
        double fc = cost(c), fd = cost(d);
        while (hi - lo > 1e-10) {
            if (fc < fd) {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = cost(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = cost(d);
            }
        }
        const double refined = 0.5 * (lo + hi);
        if (cost(refined) < cost(best)) best = refined;
    }

    PolygonSymmetry sym;
    sym.vertices.assign(vertices.begin(), vertices.end());
    sym.n = n;
    sym.reference_area = s;
    sym.rotation = best;
    const cplx rot = std::polar(radius, best);
    sym.reference_vertices.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx q = center + rot * unit[k];
        sym.reference_vertices.push_back({q.real(), q.imag()});
    }
    sym.csm = csm_from_fields(sym);
    return sym;
}

double csm_from_fields(const PolygonSymmetry& sym) {
    double sum = 0.0;
    for (std::size_t k = 0; k < sym.n; ++k) {
        const double dx = sym.vertices[k].x - sym.reference_vertices[k].x;
        const double dy = sym.vertices[k].y - sym.reference_vertices[k].y;
        sum += dx * dx + dy * dy;
    }
    return sum / (static_cast<double>(sym.n) * sym.reference_area);
}

}  // namespace cellmorph
