// Acceptance gate: one PASS/FAIL/SKIP line per criterion.

#include "cellmorph/errors.hpp"
#include "cellmorph/mask_io.hpp"
#include "cellmorph/morphometry.hpp"
#include "cellmorph/pairing.hpp"
#include "cellmorph/pipeline.hpp"
#include "cellmorph/stats.hpp"
#include "cellmorph/tessellation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace cellmorph;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    enum Kind { pass, fail, skip } kind = pass;
    std::string detail;
};

Outcome ok(std::string d) { return {Outcome::pass, std::move(d)}; }
Outcome bad(std::string d) { return {Outcome::fail, std::move(d)}; }

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome scale_reproduction() {
    const auto s = derive_scale(1.08, 1920, 1440);
    if (s.pitch != 0.625) return bad("pitch " + fmt(s.pitch));
    if (s.area_per_px != 0.390625) return bad("area_per_px " + fmt(s.area_per_px));
    return ok("pitch 0.625 um/px, 0.390625 um^2/px");
}

Outcome pixel_oracles() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> dim(1, 64);
    std::uniform_real_distribution<double> density(0.05, 0.85);
    const int masks = 1000;
    std::size_t subjects = 0;
    for (int trial = 0; trial < masks; ++trial) {
        const int w = dim(rng), h = dim(rng);
        const auto grid = oracle::random_binary(rng, w, h, density(rng));
        const auto expected = oracle::flood_fill_components(w, h, grid);
        const auto labels = label_components(w, h, grid);
        if (labels != expected) return bad("labeling differs on mask " + std::to_string(trial));

        const LabelMask m(w, h, labels, Channel::nuclei, PixelScale::from_pitch(1.0));
        const auto features = compute_all_features(m);
        const auto contours = trace_all_contours(m);
        for (std::size_t k = 0; k < features.size(); ++k) {
            const auto& f = features[k];
            // First pixel of the component in raster order.
            const auto first = std::find(labels.begin(), labels.end(), f.label) - labels.begin();
            const oracle::Pixel seed{static_cast<int>(first % w), static_cast<int>(first / w)};
            const auto comp = oracle::component_pixels(w, h, labels, seed);
            double sx = 0, sy = 0;
            for (const auto& [x, y] : comp) {
                sx += x;
                sy += y;
            }
            if (f.area_px != comp.size()) return bad("area differs on mask " + std::to_string(trial));
            if (f.centroid_px.x != sx / comp.size() + 0.5 || f.centroid_px.y != sy / comp.size() + 0.5) {
                return bad("centroid differs on mask " + std::to_string(trial));
            }
            if (contours[k].contours.size() != 1) return bad("component split");
            const auto& chain = contours[k].contours[0];
            if (chain.start.x != seed.first || chain.start.y != seed.second) {
                return bad("contour start differs on mask " + std::to_string(trial));
            }
            std::set<oracle::Pixel> visited{{chain.start.x, chain.start.y}};
            PixelCoord p = chain.start;
            for (auto mv : chain.moves) {
                p.x += kChainDx[mv];
                p.y += kChainDy[mv];
                if (!comp.count({p.x, p.y})) return bad("contour leaves its component");
                visited.insert({p.x, p.y});
            }
            if (!(p == chain.start)) return bad("contour not closed on mask " + std::to_string(trial));
            if (visited != oracle::outer_border(w, h, comp)) {
                return bad("contour pixels differ from boundary walk on mask " + std::to_string(trial));
            }
            if (2 * oracle::enclosed_pixels(w, h, comp) !=
                static_cast<std::size_t>(oracle::twice_path_area(chain)) + chain.moves.size() + 2) {
                return bad("contour area/length mismatch on mask " + std::to_string(trial));
            }
            ++subjects;
        }

        // Pairing against a second random mask of the same size.
        const auto cells_grid = oracle::random_labels(rng, w, h, 5);
        const LabelMask cells(w, h, cells_grid, Channel::cytoplasm);
        const auto pairing = pair_subjects(cells, m);
        const auto ov = oracle::overlaps(cells_grid, labels);
        std::size_t paired = 0;
        for (const auto& [nid, row] : ov) {
            Label best = 0;
            std::size_t best_px = 0;
            for (const auto& [cid, px] : row) {
                if (px > best_px) {
                    best = cid;
                    best_px = px;
                }
            }
            const auto it = std::find_if(pairing.pairs.begin(), pairing.pairs.end(),
                                         [&](const auto& q) { return q.nucleus_label == nid; });
            if (best == 0) {
                if (it != pairing.pairs.end()) return bad("nucleus paired without overlap");
                continue;
            }
            if (it == pairing.pairs.end() || it->cell_label != best || it->overlap_px != best_px) {
                return bad("pairing overlap differs on mask " + std::to_string(trial));
            }
            ++paired;
        }
        if (paired != pairing.pairs.size()) return bad("extra pairs on mask " + std::to_string(trial));
    }
    const double secs = seconds_since(t0);
    if (secs >= 10.0) return bad("took " + fmt(secs) + " s");
    return ok(std::to_string(masks) + " masks, " + std::to_string(subjects) + " subjects, " +
              fmt(secs) + " s");
}

Outcome roundness_criterion() {
    for (double r : {0.5, 1.0, 7.0, 50.0, 1e3}) {
        const double v = roundness(std::numbers::pi * r * r, 2.0 * std::numbers::pi * r);
        if (v != 1.0) return bad("analytic circle r=" + fmt(r) + " gives " + fmt(v));
    }
    std::string detail;
    double prev = 2.0;
    double disk50 = 0.0;
    for (int r : {50, 100, 200}) {
        const int size = 2 * r + 8;
        const auto grid = oracle::disk(size, size, size / 2.0, size / 2.0, r);
        const auto f = compute_features(LabelMask(size, size, grid, Channel::cytoplasm), 1);
        detail += "R(" + std::to_string(r) + ")=" + fmt(f.roundness) + " ";
        if (std::abs(f.roundness - 1.0) > 0.10) return bad(detail + "outside 0.10");
        if (f.roundness > prev) return bad(detail + "increasing in r");
        prev = f.roundness;
        if (r == 50) disk50 = f.roundness;
    }
    std::vector<Label> sq(120 * 120, 0), bar(120 * 120, 0);
    for (int y = 10; y < 110; ++y) {
        for (int x = 10; x < 110; ++x) sq[y * 120 + x] = 1;
    }
    for (int y = 55; y < 65; ++y) {
        for (int x = 10; x < 110; ++x) bar[y * 120 + x] = 1;
    }
    const double rs = compute_features(LabelMask(120, 120, sq, Channel::cytoplasm), 1).roundness;
    const double rb = compute_features(LabelMask(120, 120, bar, Channel::cytoplasm), 1).roundness;
    detail += "square=" + fmt(rs) + " bar=" + fmt(rb);
    if (!(disk50 > rs && rs > rb)) return bad(detail + " ordering broken");
    return ok(detail);
}

Outcome voronoi_partition() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> count(3, 500);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Rect r{0.0, 0.0, 1200.0, 900.0};
        std::uniform_real_distribution<double> ux(r.x0, r.x1), uy(r.y0, r.y1);
        std::vector<Point> seeds(count(rng));
        for (auto& p : seeds) p = {ux(rng), uy(rng)};
        const auto t = build_voronoi(seeds, r);
        double total = 0.0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            total += polygon_area(t.polygons[i]);
            if (!point_in_polygon(seeds[i], t.polygons[i])) {
                return bad("seed outside its polygon in set " + std::to_string(trial));
            }
        }
        worst = std::max(worst, std::abs(total - r.area()) / r.area());
        if (worst > 1e-6) return bad("area error " + fmt(worst) + " in set " + std::to_string(trial));
    }
    const double secs = seconds_since(t0);
    if (secs >= 30.0) return bad("took " + fmt(secs) + " s");
    return ok("100 sets, worst relative area error " + fmt(worst) + ", " + fmt(secs) + " s");
}

Outcome voronoi_entropy_criterion() {
    // Hexagonal lattice; the frame cuts the pentagons at the ragged sides.
    std::vector<Point> hex;
    const double dy = std::sqrt(3.0) / 2.0;
    for (int j = 0; j < 30; ++j) {
        for (int i = 0; i < 30; ++i) hex.push_back({i + 1.0 + 0.5 * (j % 2), dy * (j + 1.0)});
    }
    const auto he = voronoi_entropy(build_voronoi(hex, Rect{0.75, 0, 30.75, dy * 31.0}));
    if (!he.entropy || *he.entropy != 0.0) return bad("hex lattice entropy not exactly 0");

    Tessellation two;
    for (int i = 0; i < 40; ++i) {
        two.seeds.push_back({0, 0});
        two.neighbor_counts.push_back(i % 2 ? 5 : 6);
        two.interior.push_back(true);
    }
    const double ln2 = *voronoi_entropy(two).entropy;
    if (std::abs(ln2 - std::log(2.0)) > 1e-12) return bad("two classes gave " + fmt(ln2));

    std::mt19937_64 rng(10000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> seeds(10000);
    for (auto& p : seeds) p = {u(rng), u(rng)};
    const auto e = voronoi_entropy(build_voronoi(seeds, Rect{0, 0, 1, 1}));
    if (!e.entropy || *e.entropy < 1.5 || *e.entropy > 1.9) {
        return bad("uniform seeds gave " + (e.entropy ? fmt(*e.entropy) : std::string("none")));
    }
    return ok("hex 0, two classes ln2 (err " + fmt(std::abs(ln2 - std::log(2.0))) +
              "), 10k uniform " + fmt(*e.entropy));
}

Outcome csm_criterion() {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-100.0, 100.0), s(0.001, 1000.0), a(0.0, 6.3);
    double worst = 0.0;
    for (std::size_t n = 3; n <= 12; ++n) {
        for (int trial = 0; trial < 20; ++trial) {
            const double rad = s(rng), rot = a(rng), cx = u(rng), cy = u(rng);
            Polygon p;
            for (std::size_t k = 0; k < n; ++k) {
                const double t = rot + 2.0 * std::numbers::pi * k / n;
                p.push_back({cx + rad * std::cos(t), cy + rad * std::sin(t)});
            }
            worst = std::max(worst, polygon_csm(p).csm);
        }
    }
    if (worst >= 1e-9) return bad("regular polygon csm " + fmt(worst));

    Polygon hex;
    std::vector<std::pair<double, double>> raw;
    for (int k = 0; k < 6; ++k) {
        const double t = 0.2 + std::numbers::pi * k / 3.0;
        hex.push_back({2.0 * std::cos(t), std::sin(t)});
        raw.emplace_back(hex.back().x, hex.back().y);
    }
    const double got = polygon_csm(hex).csm;
    const double brute = oracle::csm_brute_force(raw, 1e-4);
    if (std::abs(got - brute) > 1e-6) return bad("stretched hexagon " + fmt(got) + " vs " + fmt(brute));
    return ok("regular worst " + fmt(worst) + ", stretched hexagon " + fmt(got) + " vs brute force " +
              fmt(brute));
}

Outcome anova_criterion() {
    std::mt19937_64 rng(100);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<int> size(2, 40);
    double worst_t = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(size(rng)), b(size(rng));
        for (auto& x : a) x = 3.0 + z(rng);
        for (auto& x : b) x = 3.4 + 2.0 * z(rng);
        const double t = oracle::student_t(a, b);
        const double f = one_way_anova({a, b}).f_stat;
        worst_t = std::max(worst_t, std::abs(f - t * t) / (t * t));
    }
    if (worst_t > 1e-9) return bad("F vs t^2 relative error " + fmt(worst_t));

    double worst_cdf = 0.0;
    for (int d1 : {1, 3, 12, 30}) {
        for (int d2 : {1, 3, 12, 30}) {
            for (double x : {0.01, 0.2, 0.8, 1.0, 1.7, 4.0, 15.0}) {
                worst_cdf = std::max(worst_cdf,
                                     std::abs(f_cdf(x, d1, d2) - oracle::f_cdf_quadrature(x, d1, d2)));
            }
        }
    }
    if (worst_cdf > 1e-8) return bad("f_cdf vs quadrature " + fmt(worst_cdf));

    const auto same = one_way_anova({{1.5, 2.5, 4.0}, {1.5, 2.5, 4.0}});
    if (same.f_stat != 0.0 || same.p_value != 1.0) {
        return bad("identical groups F=" + fmt(same.f_stat) + " p=" + fmt(same.p_value));
    }
    return ok("F=t^2 worst rel " + fmt(worst_t) + ", f_cdf worst abs " + fmt(worst_cdf) +
              ", identical groups F=0 p=1");
}

Outcome reference_dataset() {
    const char* root = std::getenv("CELLMORPH_REFERENCE_ROOT");
    if (!root || !*root) {
        return {Outcome::skip, "set CELLMORPH_REFERENCE_ROOT to the downloaded mask dataset"};
    }
    fixture::TempDir out("cellmorph-reference");
    RunConfig c;
    if (const char* cfg = std::getenv("CELLMORPH_REFERENCE_CONFIG"); cfg && *cfg) c = load_config(cfg);
    c.root = root;
    c.out = out.path();
    c.jobs = std::max(1u, std::thread::hardware_concurrency());
    const auto s = run_batch(c);
    if (s.exit_code != kExitOk) return bad("pipeline failed: " + s.error);
    const auto rows = parse_group_csv(read_text_file(out / "groups.csv"));
    struct Band {
        const char* feature;
        double lo, hi;
    };
    const Band bands[] = {{"voronoi_entropy", 1.1, 1.6},
                          {"mean_csm", 0.14, 0.22},
                          {"nucleus_roundness", 0.90, 0.98},
                          {"ratio", 4.5, 6.5}};
    std::string detail;
    bool all = true;
    for (const auto& b : bands) {
        for (const auto& r : rows) {
            if (r.feature != b.feature) continue;
            const bool in = r.mean >= b.lo && r.mean <= b.hi;
            all = all && in;
            detail += r.group + ":" + b.feature + "=" + fmt(r.mean) + (in ? " " : "(out) ");
        }
    }
    if (rows.empty()) return bad("no groups produced");
    return all ? ok(detail) : bad(detail);
}

Outcome performance() {
    fixture::TempDir dir("cellmorph-perf");
    const int w = 1920, h = 1440;
    const auto img = fixture::synthetic_image(99, w, h, 48, 20.0, 8.0, 0.12);
    const auto group = dir / "data" / "g";
    std::filesystem::create_directories(group);
    fixture::write_png(group / "big_cyto.png", w, h, img.cells);
    fixture::write_png(group / "big_nuclei.png", w, h, img.nuclei, Channel::nuclei);

    const auto plan = discover_dataset(dir / "data");
    ProcessOptions opt;
    opt.svg_dir = dir / "svg";
    const auto t0 = Clock::now();
    const auto r = process_image("g", plan.groups[0].images[0], opt);
    write_subject_csv(r.records, dir / "subjects.csv");
    const double secs = seconds_since(t0);
    const std::size_t subjects = r.cells.size() + r.nuclei.size();
    std::string detail = std::to_string(r.cells.size()) + " cells + " +
                         std::to_string(r.nuclei.size()) + " nuclei in " + fmt(secs) + " s";
    if (secs >= 2.0) return bad(detail);
    if (subjects < 1000) return bad(detail + " (too few subjects)");

    // Determinism across parallelism degree on a multi-image batch.
    fixture::write_dataset(dir / "batch", {"a", "b"}, 3);
    RunConfig c;
    c.root = dir / "batch";
    for (unsigned jobs : {1u, 3u, 8u}) {
        c.out = dir / ("out" + std::to_string(jobs));
        c.jobs = jobs;
        if (run_batch(c).exit_code != kExitOk) return bad("batch failed at jobs=" + std::to_string(jobs));
    }
    for (const auto* f : {"subjects.csv", "images.csv", "groups.csv", "anova.csv"}) {
        const auto ref = read_text_file(dir / "out1" / f);
        if (read_text_file(dir / "out3" / f) != ref || read_text_file(dir / "out8" / f) != ref) {
            return bad(std::string(f) + " differs across jobs");
        }
    }
    return ok(detail + "; CSVs identical for jobs 1/3/8");
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {"scale-reproduction", scale_reproduction},
        {"pixel-oracle-equivalence", pixel_oracles},
        {"roundness", roundness_criterion},
        {"voronoi-partition", voronoi_partition},
        {"voronoi-entropy", voronoi_entropy_criterion},
        {"csm", csm_criterion},
        {"anova", anova_criterion},
        {"reference-dataset-bands", reference_dataset},
        {"performance-determinism", performance},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = bad(std::string("exception: ") + e.what());
        }
        const char* tag = o.kind == Outcome::pass ? "PASS" : o.kind == Outcome::fail ? "FAIL" : "SKIP";
        std::printf("%s %s: %s\n", tag, c.name, o.detail.c_str());
        std::fflush(stdout);
        failures += o.kind == Outcome::fail;
    }
    return failures == 0 ? 0 : 1;
}
