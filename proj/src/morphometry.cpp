#include "cellmorph/morphometry.hpp"

#include "cellmorph/errors.hpp"
#include "detail/union_find.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

namespace cellmorph {

std::vector<PixelCoord> ChainCode::pixels() const {
    std::vector<PixelCoord> out;
    out.reserve(moves.size() + 1);
    PixelCoord p = start;
    out.push_back(p);
    for (std::size_t i = 0; i + 1 < moves.size(); ++i) {
        p.x += kChainDx[moves[i]];
        p.y += kChainDy[moves[i]];
        out.push_back(p);
    }
    return out;
}

std::size_t ChainCode::axial_moves() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(moves.begin(), moves.end(), [](std::uint8_t m) { return m % 2 == 0; }));
}

std::size_t ChainCode::diagonal_moves() const noexcept {
    return moves.size() - axial_moves();
}

double freeman_perimeter(const ChainCode& chain, double pitch) {
    if (chain.moves.empty()) return 4.0 * pitch;
    return pitch * (static_cast<double>(chain.axial_moves()) +
                    std::numbers::sqrt2 * static_cast<double>(chain.diagonal_moves()));
}

double roundness(double area, double perimeter) {
    const double r = 4.0 * std::numbers::pi * area / (perimeter * perimeter);
    // a = pi r^2, p = 2 pi r lands a few ulps off 1; treat that as exact.
    if (std::abs(r - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon()) return 1.0;
    return r;
}

namespace {

struct LabelStats {
    Label label = 0;
    std::size_t count = 0;
    double sum_x = 0.0;
    double sum_y = 0.0;
    int min_x = 0, min_y = 0, max_x = -1, max_y = -1;

    void add(int x, int y) {
        if (count == 0) {
            min_x = max_x = x;
            min_y = max_y = y;
        } else {
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
        }
        ++count;
        sum_x += x;
        sum_y += y;
    }
};

/// The label's bounding box, with each pixel tagged by its 8-connected
/// component id (0 = not this label).
class LocalComponents {
public:
    LocalComponents(const LabelMask& mask, const LabelStats& s)
        : x0_(s.min_x), y0_(s.min_y), w_(s.max_x - s.min_x + 1), h_(s.max_y - s.min_y + 1) {
        std::vector<std::uint8_t> fg(static_cast<std::size_t>(w_) * h_, 0);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                fg[static_cast<std::size_t>(y) * w_ + x] = mask.at(x0_ + x, y0_ + y) == s.label;
            }
        }
        comp_ = detail::label_regions8<std::uint8_t>(
            w_, h_, fg, [](std::uint8_t, std::uint8_t) { return true; }, &count_);
    }

    std::uint32_t count() const noexcept { return count_; }

    std::uint32_t at(int x, int y) const noexcept {
        if (x < 0 || y < 0 || x >= w_ || y >= h_) return 0;
        return comp_[static_cast<std::size_t>(y) * w_ + x];
    }

    /// First pixel in raster order of every component, in component order.
    std::vector<PixelCoord> starts() const {
        std::vector<PixelCoord> out(count_);
        std::vector<bool> seen(count_ + 1, false);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                const auto c = at(x, y);
                if (c != 0 && !seen[c]) {
                    seen[c] = true;
                    out[c - 1] = {x, y};
                }
            }
        }
        return out;
    }

    ChainCode trace(std::uint32_t component, PixelCoord local_start) const {
        auto inside = [&](PixelCoord p, int dir) {
            return at(p.x + kChainDx[dir], p.y + kChainDy[dir]) == component;
        };
        // Scan neighbours clockwise on screen (decreasing code) from `from`.
        auto next_dir = [&](PixelCoord p, int from) -> int {
            for (int k = 0; k < 8; ++k) {
                const int d = (from - k + 8) % 8;
                if (inside(p, d)) return d;
            }
            return -1;
        };

        ChainCode chain;
        chain.start = {x0_ + local_start.x, y0_ + local_start.y};
        // The start pixel has nothing of its component to the west or above.
        const int first = next_dir(local_start, 4);
        if (first < 0) return chain;

        PixelCoord p = local_start;
        int d = first;
        for (;;) {
            chain.moves.push_back(static_cast<std::uint8_t>(d));
            p.x += kChainDx[d];
            p.y += kChainDy[d];
            const int nd = next_dir(p, (d % 2 == 0) ? (d + 1) % 8 : (d + 2) % 8);
            if (p == local_start && nd == first) break;
            d = nd;
        }
        return chain;
    }

private:
    int x0_, y0_, w_, h_;
    std::uint32_t count_ = 0;
    std::vector<std::uint32_t> comp_;
};

LabelStats scan_label(const LabelMask& mask, Label label) {
    LabelStats s;
    s.label = label;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y) == label) s.add(x, y);
        }
    }
    if (label == 0 || s.count == 0) {
        throw NotFoundError("label " + std::to_string(label) + " not present in " +
                            std::string(to_string(mask.channel())) + " mask");
    }
    return s;
}

SubjectFeatures measure(const LabelMask& mask, const LabelStats& s,
                        const FeatureOptions& options) {
    const double pitch = mask.scale().pitch;
    const LocalComponents local(mask, s);

    double perimeter = 0.0;
    const auto starts = local.starts();
    for (std::uint32_t c = 1; c <= local.count(); ++c) {
        perimeter += options.perimeter(local.trace(c, starts[c - 1]), pitch);
    }

    SubjectFeatures f;
    f.label = s.label;
    f.area_px = s.count;
    f.area_um2 = static_cast<double>(s.count) * mask.scale().area_per_px;
    f.perimeter_um = perimeter;
    const double r = roundness(f.area_um2, perimeter);
    f.roundness_clamped = r > 1.0;
    f.roundness = std::clamp(r, 0.0, 1.0);
    const double n = static_cast<double>(s.count);
    f.centroid_px = {s.sum_x / n + 0.5, s.sum_y / n + 0.5};
    f.centroid_um = {f.centroid_px.x * pitch, f.centroid_px.y * pitch};
    f.boundary_touching = s.min_x == 0 || s.min_y == 0 || s.max_x == mask.width() - 1 ||
                          s.max_y == mask.height() - 1;
    f.small = s.count < options.min_subject_px;
    f.components = local.count();
    return f;
}

}  // namespace

std::vector<ChainCode> trace_contours(const LabelMask& mask, Label label) {
    const LabelStats s = scan_label(mask, label);
    const LocalComponents local(mask, s);
    const auto starts = local.starts();
    std::vector<ChainCode> out;
    out.reserve(local.count());
    for (std::uint32_t c = 1; c <= local.count(); ++c) out.push_back(local.trace(c, starts[c - 1]));
    return out;
}

ChainCode trace_contour(const LabelMask& mask, Label label) {
    const LabelStats s = scan_label(mask, label);
    const LocalComponents local(mask, s);
    // Component 1 owns the first pixel in raster order: top-most, then left-most.
    return local.trace(1, local.starts().front());
}

SubjectFeatures compute_features(const LabelMask& mask, Label label,
                                 const FeatureOptions& options) {
    return measure(mask, scan_label(mask, label), options);
}

namespace {

// Per-label statistics in one raster pass, ascending by label.
std::vector<LabelStats> collect_stats(const LabelMask& mask) {
    std::vector<LabelStats> stats;
    std::unordered_map<Label, std::size_t> index;
    Label last = 0;
    std::size_t last_idx = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            const Label v = mask.at(x, y);
            if (v == 0) continue;
            if (v != last) {
                auto [it, inserted] = index.try_emplace(v, stats.size());
                if (inserted) {
                    stats.emplace_back();
                    stats.back().label = v;
                }
                last = v;
                last_idx = it->second;
            }
            stats[last_idx].add(x, y);
        }
    }
    std::sort(stats.begin(), stats.end(),
              [](const LabelStats& a, const LabelStats& b) { return a.label < b.label; });
    return stats;
}

}  // namespace

std::vector<SubjectFeatures> compute_all_features(const LabelMask& mask,
                                                  const FeatureOptions& options) {
    const auto stats = collect_stats(mask);
    std::vector<SubjectFeatures> out;
    out.reserve(stats.size());
    for (const auto& s : stats) out.push_back(measure(mask, s, options));
    return out;
}

std::vector<LabelContours> trace_all_contours(const LabelMask& mask) {
    const auto stats = collect_stats(mask);
    std::vector<LabelContours> out;
    out.reserve(stats.size());
    for (const auto& s : stats) {
        const LocalComponents local(mask, s);
        const auto starts = local.starts();
        LabelContours lc;
        lc.label = s.label;
        for (std::uint32_t c = 1; c <= local.count(); ++c) {
            lc.contours.push_back(local.trace(c, starts[c - 1]));
        }
        out.push_back(std::move(lc));
    }
    return out;
}

ImageSummary summarize_image(const std::vector<SubjectFeatures>& cells,
                             const std::vector<SubjectFeatures>& nuclei, const PixelScale& scale,
                             int width, int height) {
    if (width <= 0 || height <= 0) throw DimensionMismatchError("image dimensions must be positive");
    ImageSummary s;
    s.width = width;
    s.height = height;
    const double total_px = static_cast<double>(width) * static_cast<double>(height);
    s.total_area_um2 = total_px * scale.area_per_px;

    struct Tally {
        std::size_t n = 0;
        std::size_t px = 0;
        double area = 0.0;
        double round = 0.0;
    };
    auto accumulate = [&](const std::vector<SubjectFeatures>& subjects) {
        Tally c;
        for (const auto& f : subjects) {
            if (!(f.centroid_px.x >= 0.0 && f.centroid_px.x < width && f.centroid_px.y >= 0.0 &&
                  f.centroid_px.y < height)) {
                throw DimensionMismatchError("subject " + std::to_string(f.label) +
                                             " lies outside the " + std::to_string(width) + "x" +
                                             std::to_string(height) + " frame");
            }
            if (f.roundness_clamped) ++s.clamped_roundness;
            if (f.small) continue;
            ++c.n;
            c.px += f.area_px;
            c.area += f.area_um2;
            c.round += f.roundness;
        }
        return c;
    };
    const Tally cc = accumulate(cells);
    const Tally nc = accumulate(nuclei);

    s.n_cells = cc.n;
    s.n_nuclei = nc.n;
    s.coverage_cells = static_cast<double>(cc.px) / total_px;
    s.coverage_nuclei = static_cast<double>(nc.px) / total_px;
    s.density_per_mm2 = static_cast<double>(nc.n) / (s.total_area_um2 * 1e-6);
    if (cc.n > 0) {
        s.mean_cell_area_um2 = cc.area / static_cast<double>(cc.n);
        s.mean_cell_roundness = cc.round / static_cast<double>(cc.n);
    }
    if (nc.n > 0) {
        s.mean_nucleus_area_um2 = nc.area / static_cast<double>(nc.n);
        s.mean_nucleus_roundness = nc.round / static_cast<double>(nc.n);
    }
    return s;
}

ImageSummary summarize_image(const LabelMask& cells_mask, const LabelMask& nuclei_mask,
                             const std::vector<SubjectFeatures>& cells,
                             const std::vector<SubjectFeatures>& nuclei) {
    if (cells_mask.width() != nuclei_mask.width() || cells_mask.height() != nuclei_mask.height()) {
        throw DimensionMismatchError("cytoplasm and nuclei masks differ in size");
    }
    return summarize_image(cells, nuclei, cells_mask.scale(), cells_mask.width(),
                           cells_mask.height());
}

}  // namespace cellmorph
