#include "detail/delaunay.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cellmorph::detail {

std::int64_t orient(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int128 incircle(const LatticePoint& a, const LatticePoint& b, const LatticePoint& c,
                  const LatticePoint& d) {
    const int128 adx = a.x - d.x, ady = a.y - d.y;
    const int128 bdx = b.x - d.x, bdy = b.y - d.y;
    const int128 cdx = c.x - d.x, cdy = c.y - d.y;
    const int128 alift = adx * adx + ady * ady;
    const int128 blift = bdx * bdx + bdy * bdy;
    const int128 clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
           clift * (adx * bdy - ady * bdx);
}

namespace {

constexpr int kGhost = -1;

struct Tri {
    std::array<int, 3> v{};   // counterclockwise; at most one kGhost
    std::array<int, 3> nb{};  // nb[i] lies across the edge opposite v[i]
    bool alive = true;

    int ghost_slot() const noexcept {
        for (int i = 0; i < 3; ++i) {
            if (v[i] == kGhost) return i;
        }
        return -1;
    }
};

class BowyerWatson {
public:
    explicit BowyerWatson(std::span<const LatticePoint> pts)
        : pts_(pts), start_of_(pts.size() + 1, -1) {}

    // Returns false if every point is collinear.
    bool run() {
        const int n = static_cast<int>(pts_.size());
        if (n < 3) return false;
        int third = -1;
        for (int k = 2; k < n; ++k) {
            if (orient(pts_[0], pts_[1], pts_[k]) != 0) {
                third = k;
                break;
            }
        }
        if (third < 0) return false;
        seed_triangle(0, 1, third);
        for (int k = 2; k < n; ++k) {
            if (k != third) insert(k);
        }
        return true;
    }

    Triangulation result() const {
        Triangulation out;
        out.on_hull.assign(pts_.size(), false);
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            const int g = t.ghost_slot();
            if (g >= 0) {
                out.on_hull[t.v[(g + 1) % 3]] = true;
                out.on_hull[t.v[(g + 2) % 3]] = true;
                continue;
            }
            out.triangles.push_back({static_cast<std::size_t>(t.v[0]),
                                     static_cast<std::size_t>(t.v[1]),
                                     static_cast<std::size_t>(t.v[2])});
        }
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            for (int i = 0; i < 3; ++i) {
                const int a = t.v[(i + 1) % 3];
                const int b = t.v[(i + 2) % 3];
                if (a == kGhost || b == kGhost || a > b) continue;
                // Emit each finite edge once, from the side where a < b.
                const Tri& other = tris_[t.nb[i]];
                int opposite = kGhost;
                for (int j = 0; j < 3; ++j) {
                    if (other.v[j] != a && other.v[j] != b) opposite = other.v[j];
                }
                Triangulation::Edge e;
                e.a = static_cast<std::size_t>(a);
                e.b = static_cast<std::size_t>(b);
                // t holds a->b counterclockwise, so t's apex is on the left.
                e.left = t.v[i] == kGhost ? Triangulation::kNone : static_cast<std::size_t>(t.v[i]);
                e.right = opposite == kGhost ? Triangulation::kNone
                                             : static_cast<std::size_t>(opposite);
                out.edges.push_back(e);
            }
        }
        std::sort(out.edges.begin(), out.edges.end(), [](const auto& x, const auto& y) {
            return x.a != y.a ? x.a < y.a : x.b < y.b;
        });
        return out;
    }

private:
    const LatticePoint& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    void seed_triangle(int a, int b, int c) {
        if (orient(P(a), P(b), P(c)) < 0) std::swap(b, c);
        tris_.push_back(Tri{{a, b, c}, {1, 2, 3}, true});
        // Ghost across the edge opposite each vertex, keeping orientation.
        tris_.push_back(Tri{{c, b, kGhost}, {3, 2, 0}, true});  // edge b->c
        tris_.push_back(Tri{{a, c, kGhost}, {1, 3, 0}, true});  // edge c->a
        tris_.push_back(Tri{{b, a, kGhost}, {2, 1, 0}, true});  // edge a->b
        hint_ = 0;
    }

    bool in_circle(const Tri& t, const LatticePoint& p) const {
        const int g = t.ghost_slot();
        if (g < 0) return incircle(P(t.v[0]), P(t.v[1]), P(t.v[2]), p) > 0;
        const LatticePoint& a = P(t.v[(g + 1) % 3]);
        const LatticePoint& b = P(t.v[(g + 2) % 3]);
        const std::int64_t o = orient(a, b, p);
        if (o != 0) return o > 0;
        // On the hull line: inside only if strictly between a and b.
        const std::int64_t dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
        const std::int64_t len = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
        return dot > 0 && dot < len;
    }

    int locate(const LatticePoint& p) {
        int t = hint_;
        if (!tris_[t].alive) t = first_alive();
        if (const int g = tris_[t].ghost_slot(); g >= 0) t = tris_[t].nb[g];

        const std::size_t limit = 4 * tris_.size() + 16;
        for (std::size_t step = 0; step < limit; ++step) {
            const Tri& tri = tris_[t];
            if (tri.ghost_slot() >= 0) return t;
            int next = -1;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((step + k) % 3);  // rotate to avoid cycling
                if (orient(P(tri.v[(i + 1) % 3]), P(tri.v[(i + 2) % 3]), p) < 0) {
                    next = tri.nb[i];
                    break;
                }
            }
            if (next < 0) return t;
            t = next;
        }
        // Walk failed to converge; fall back to an exhaustive search.
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            if (tris_[i].alive && in_circle(tris_[i], p)) return i;
        }
        throw std::logic_error("Delaunay point location failed");
    }

    int first_alive() const {
        for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
            if (tris_[i].alive) return i;
        }
        throw std::logic_error("empty triangulation");
    }

    int new_tri() {
        if (!free_.empty()) {
            const int t = free_.back();
            free_.pop_back();
            return t;
        }
        tris_.emplace_back();
        return static_cast<int>(tris_.size() - 1);
    }

    std::size_t key(int v) const {
        return v == kGhost ? pts_.size() : static_cast<std::size_t>(v);
    }

    void insert(int pi) {
        const LatticePoint& p = P(pi);
        int start = locate(p);
        if (!in_circle(tris_[start], p)) {
            start = -1;
            for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
                if (tris_[i].alive && in_circle(tris_[i], p)) {
                    start = i;
                    break;
                }
            }
            if (start < 0) throw std::logic_error("no triangle conflicts with inserted point");
        }

        cavity_.clear();
        boundary_.clear();
        mark_.resize(tris_.size(), 0);
        cavity_.push_back(start);
        mark_[start] = 1;
        for (std::size_t q = 0; q < cavity_.size(); ++q) {
            const int t = cavity_[q];
            for (int i = 0; i < 3; ++i) {
                const int nb = tris_[t].nb[i];
                if (mark_[nb]) continue;
                if (in_circle(tris_[nb], p)) {
                    mark_[nb] = 1;
                    cavity_.push_back(nb);
                } else {
                    const Tri& tri = tris_[t];
                    boundary_.push_back({tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb, -1});
                }
            }
        }
        for (int t : cavity_) {
            tris_[t].alive = false;
            mark_[t] = 0;
            free_.push_back(t);
        }

        for (auto& e : boundary_) {
            e.made = new_tri();
            Tri& tri = tris_[e.made];
            tri.v = {e.a, e.b, pi};
            tri.nb = {-1, -1, e.outside};
            tri.alive = true;
            // Re-point the outside triangle's slot facing edge a-b.
            Tri& out = tris_[e.outside];
            for (int j = 0; j < 3; ++j) {
                if (out.v[j] != e.a && out.v[j] != e.b) out.nb[j] = e.made;
            }
            start_of_[key(e.a)] = e.made;
        }
        // New triangles fan around p; the one starting at b lies across b-p.
        for (const auto& e : boundary_) {
            const int across = start_of_[key(e.b)];
            tris_[e.made].nb[0] = across;
            tris_[across].nb[1] = e.made;
        }
        for (const auto& e : boundary_) {
            start_of_[key(e.a)] = -1;
            if (tris_[e.made].ghost_slot() < 0) hint_ = e.made;
        }
        mark_.resize(tris_.size(), 0);
    }

    std::span<const LatticePoint> pts_;
    std::vector<Tri> tris_;
    std::vector<int> free_;
    std::vector<int> start_of_;
    std::vector<int> cavity_;
    struct BoundaryEdge {
        int a, b, outside, made;
    };
    std::vector<BoundaryEdge> boundary_;
    std::vector<char> mark_;
    int hint_ = 0;
};

}  // namespace

Triangulation delaunay(std::span<const LatticePoint> points) {
    BowyerWatson bw(points);
    if (bw.run()) return bw.result();

    // Collinear: neighbours are consecutive along the line.
    Triangulation out;
    out.collinear = true;
    out.on_hull.assign(points.size(), true);
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return points[i].x != points[j].x ? points[i].x < points[j].x : points[i].y < points[j].y;
    });
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        Triangulation::Edge e;
        e.a = std::min(order[k], order[k + 1]);
        e.b = std::max(order[k], order[k + 1]);
        e.left = e.right = Triangulation::kNone;
        out.edges.push_back(e);
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const auto& x, const auto& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    return out;
}

}  // namespace cellmorph::detail
