#include "cellmorph/errors.hpp"
#include "cellmorph/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <set>

namespace cellmorph {

namespace {

constexpr std::array<std::string_view, 7> kPalette = {
    "#e41a1c",  // 3
    "#377eb8",  // 4
    "#4daf4a",  // 5
    "#984ea3",  // 6
    "#ff7f00",  // 7
    "#ffd92f",  // 8
    "#a65628",  // 9
};
constexpr std::string_view kOtherColor = "#999999";

// Coordinates: fixed 4 decimals, trailing zeros trimmed.
std::string coord(double v) {
    if (std::abs(v) < 5e-5) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    std::string s(buf, res.ptr);
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr std::string_view kHeader = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

// Outline through pixel centres; runs of equal moves become one segment.
void append_chain_path(std::string& d, const ChainCode& chain) {
    const double x0 = chain.start.x + 0.5;
    const double y0 = chain.start.y + 0.5;
    if (chain.moves.empty()) {
        // Lone pixel: its square.
        d += "M" + coord(x0 - 0.5) + " " + coord(y0 - 0.5) + "h1v1h-1Z";
        return;
    }
    d += "M" + coord(x0) + " " + coord(y0);
    int x = chain.start.x, y = chain.start.y;
    const std::size_t n = chain.moves.size();
    for (std::size_t i = 0; i < n; ++i) {
        x += kChainDx[chain.moves[i]];
        y += kChainDy[chain.moves[i]];
        const bool last = i + 1 == n;
        if (last) break;  // the final move returns to the start; Z closes it
        if (chain.moves[i + 1] == chain.moves[i]) continue;
        d += "L" + coord(x + 0.5) + " " + coord(y + 0.5);
    }
    d += "Z";
}

void check_layer(const OverlayLayer& layer, int width, int height, std::string_view what) {
    if (layer.mask && (layer.mask->width() != width || layer.mask->height() != height)) {
        throw DimensionMismatchError(std::string(what) + " mask is " +
                                     std::to_string(layer.mask->width()) + "x" +
                                     std::to_string(layer.mask->height()) + ", expected " +
                                     std::to_string(width) + "x" + std::to_string(height));
    }
}

std::string area_text(double um2) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, um2, std::chars_format::fixed, 1);
    return std::string(buf, res.ptr) + " µm²";
}

}  // namespace

std::string_view class_color(std::size_t edges) {
    if (edges >= 3 && edges <= 9) return kPalette[edges - 3];
    return kOtherColor;
}

std::string voronoi_svg(const Tessellation& tess) {
    const Rect& b = tess.bounds;
    const double diag = b.diagonal();
    const double stroke = 0.002 * diag;
    const double dot = 0.004 * diag;
    const double hatch = 0.012 * diag;

    std::set<std::size_t> hatched;
    for (std::size_t i = 0; i < tess.polygons.size(); ++i) {
        if (!tess.interior[i]) hatched.insert(tess.neighbor_counts[i]);
    }

    std::string s(kHeader);
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" + coord(b.x0) + " " +
         coord(b.y0) + " " + coord(b.width()) + " " + coord(b.height()) + "\">\n";
    if (!hatched.empty()) {
        s += "<defs>\n";
        for (std::size_t k : hatched) {
            s += "<pattern id=\"hatch-" + std::to_string(k) +
                 "\" patternUnits=\"userSpaceOnUse\" width=\"" + coord(hatch) + "\" height=\"" +
                 coord(hatch) + "\" patternTransform=\"rotate(45)\">";
            s += "<rect width=\"" + coord(hatch) + "\" height=\"" + coord(hatch) + "\" fill=\"" +
                 std::string(class_color(k)) + "\"/>";
            s += "<line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"" + coord(hatch) +
                 "\" stroke=\"#000000\" stroke-opacity=\"0.45\" stroke-width=\"" +
                 coord(hatch / 3.0) + "\"/></pattern>\n";
        }
        s += "</defs>\n";
    }
    s += "<g stroke=\"#222222\" stroke-width=\"" + coord(stroke) + "\" stroke-linejoin=\"round\">\n";
    for (std::size_t i = 0; i < tess.polygons.size(); ++i) {
        const std::size_t k = tess.neighbor_counts[i];
        s += "<polygon data-edges=\"" + std::to_string(k) + "\" points=\"";
        bool first = true;
        for (const auto& p : tess.polygons[i]) {
            if (!first) s += ' ';
            s += coord(p.x) + "," + coord(p.y);
            first = false;
        }
        s += "\" fill=\"";
        s += tess.interior[i] ? std::string(class_color(k)) : "url(#hatch-" + std::to_string(k) + ")";
        s += "\"/>\n";
    }
    s += "</g>\n<g fill=\"#000000\">\n";
    for (const auto& p : tess.seeds) {
        s += "<circle cx=\"" + coord(p.x) + "\" cy=\"" + coord(p.y) + "\" r=\"" + coord(dot) +
             "\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

void render_voronoi_svg(const Tessellation& tess, const std::filesystem::path& path) {
    write_text_file(path, voronoi_svg(tess));
}

std::string overlay_svg(const OverlayInput& input) {
    if (!input.cells.mask) throw GeometryError("overlay needs a cytoplasm mask");
    const int w = input.cells.mask->width();
    const int h = input.cells.mask->height();
    check_layer(input.nuclei, w, h, "nuclei");
    if (input.background && (input.background->width != w || input.background->height != h)) {
        throw DimensionMismatchError("overlay background size differs from the masks");
    }

    std::string s(kHeader);
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + std::to_string(w) + " " +
         std::to_string(h) + "\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\">\n";
    if (input.background) {
        s += "<image x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" +
             std::to_string(h) + "\" href=\"data:image/png;base64," +
             base64_encode(encode_png(*input.background)) + "\"/>\n";
    } else {
        s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(w) + "\" height=\"" +
             std::to_string(h) + "\" fill=\"#ffffff\"/>\n";
    }

    const double font = std::max(6.0, 0.012 * std::max(w, h));
    auto outlines = [&](const OverlayLayer& layer, std::string_view cls, std::string_view color) {
        if (!layer.mask) return;
        s += "<g class=\"" + std::string(cls) + "\" fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1\">\n";
        for (const auto& lc : trace_all_contours(*layer.mask)) {
            std::string d;
            for (const auto& chain : lc.contours) append_chain_path(d, chain);
            s += "<path data-label=\"" + std::to_string(lc.label) + "\" d=\"" + d + "\"/>\n";
        }
        s += "</g>\n";
    };
    auto labels = [&](const OverlayLayer& layer, std::string_view cls, std::string_view color) {
        if (!layer.mask) return;
        s += "<g class=\"" + std::string(cls) + "-labels\" fill=\"" + std::string(color) +
             "\" font-family=\"sans-serif\" font-size=\"" + coord(font) +
             "\" text-anchor=\"middle\">\n";
        for (const auto& f : layer.features) {
            s += "<text x=\"" + coord(f.centroid_px.x) + "\" y=\"" + coord(f.centroid_px.y) +
                 "\">" + xml_escape(area_text(f.area_um2)) + "</text>\n";
        }
        s += "</g>\n";
    };
    outlines(input.cells, "cytoplasm", "#00b050");
    outlines(input.nuclei, "nuclei", "#ff00ff");
    labels(input.cells, "cytoplasm", "#004d1a");
    labels(input.nuclei, "nuclei", "#66004d");
    s += "</svg>\n";
    return s;
}

void render_overlay_svg(const OverlayInput& input, const std::filesystem::path& path) {
    write_text_file(path, overlay_svg(input));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    static constexpr char kAlphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    if (const std::size_t rest = bytes.size() - i; rest > 0) {
        std::uint32_t v = bytes[i] << 16;
        if (rest == 2) v |= bytes[i + 1] << 8;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

}  // namespace cellmorph
