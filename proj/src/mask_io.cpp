#include "cellmorph/mask_io.hpp"

#include "cellmorph/errors.hpp"
#include "detail/union_find.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace cellmorph {

PixelScale PixelScale::from_pitch(double pitch_um) {
    if (!std::isfinite(pitch_um) || pitch_um <= 0.0) {
        throw InvalidScaleError("pixel pitch must be positive, got " + std::to_string(pitch_um));
    }
    return PixelScale{pitch_um, pitch_um * pitch_um};
}

PixelScale derive_scale(double scanned_area_mm2, long long width, long long height) {
    if (!std::isfinite(scanned_area_mm2) || scanned_area_mm2 <= 0.0 || width <= 0 || height <= 0) {
        throw InvalidScaleError("scanned area and image dimensions must be positive");
    }
    const double area_per_px =
        scanned_area_mm2 * 1e6 / (static_cast<double>(width) * static_cast<double>(height));
    return PixelScale{std::sqrt(area_per_px), area_per_px};
}

std::string_view to_string(Channel channel) noexcept {
    return channel == Channel::cytoplasm ? "cytoplasm" : "nuclei";
}

LabelMask::LabelMask(int width, int height, std::vector<Label> labels, Channel channel,
                     PixelScale scale)
    : width_(width), height_(height), labels_(std::move(labels)), channel_(channel), scale_(scale) {
    if (width <= 0 || height <= 0) {
        throw DimensionMismatchError("mask dimensions must be positive");
    }
    if (labels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatchError("label grid size does not match width x height");
    }
    if (!(scale_.pitch > 0.0)) {
        throw InvalidScaleError("pixel pitch must be positive");
    }
}

std::vector<Label> LabelMask::labels() const {
    std::vector<Label> out;
    Label last = 0;
    for (Label v : labels_) {
        if (v != 0 && v != last) {
            out.push_back(v);
            last = v;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool LabelMask::contains(Label label) const {
    return label != 0 && std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

LabelMask LabelMask::with_scale(PixelScale scale) const {
    return LabelMask(width_, height_, labels_, channel_, scale);
}

std::vector<Label> label_components(int width, int height, std::span<const Label> grid) {
    if (grid.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatchError("grid size does not match width x height");
    }
    return detail::label_regions8<Label>(width, height, grid,
                                         [](Label, Label) { return true; });
}

std::vector<std::size_t> components_per_label(const LabelMask& mask) {
    std::uint32_t count = 0;
    const auto regions = detail::label_regions8<Label>(
        mask.width(), mask.height(), mask.data(), [](Label a, Label b) { return a == b; }, &count);

    const auto ids = mask.labels();
    std::unordered_map<Label, std::size_t> index;
    index.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

    // Each region is owned by exactly one label; count regions by first pixel.
    std::vector<bool> seen(count + 1, false);
    std::vector<std::size_t> out(ids.size(), 0);
    const auto data = mask.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = regions[i];
        if (r == 0 || seen[r]) continue;
        seen[r] = true;
        ++out[index.at(data[i])];
    }
    return out;
}

namespace {

bool has_extension(const std::filesystem::path& path, std::string_view ext) {
    auto e = path.extension().string();
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e == ext;
}

}  // namespace

LabelMask load_label_mask(const std::filesystem::path& path, Channel channel, PixelScale scale,
                          const LoadOptions& options) {
    RawGrid raw;
    if (has_extension(path, ".npy")) {
        raw = read_npy_grid(path);
    } else if (has_extension(path, ".png")) {
        raw = read_png_grid(path);
    } else {
        throw MaskFormatError("unsupported mask format: " + path.string());
    }

    const bool binary =
        std::all_of(raw.values.begin(), raw.values.end(), [](Label v) { return v <= 1; });
    if (binary) {
        raw.values = label_components(raw.width, raw.height, raw.values);
    }
    LabelMask mask(raw.width, raw.height, std::move(raw.values), channel, scale);

    if (options.strict_labels && !binary) {
        const auto ids = mask.labels();
        const auto counts = components_per_label(mask);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (counts[i] > 1) {
                throw MaskFormatError("label " + std::to_string(ids[i]) + " in " + path.string() +
                                      " has " + std::to_string(counts[i]) +
                                      " disconnected components (strict mode)");
            }
        }
    }
    return mask;
}

RgbImage composite_channels(const std::optional<RgbImage>& dapi,
                            const std::optional<RgbImage>& fitc) {
    if (!dapi && !fitc) throw MaskFormatError("no raw channel to composite");
    const RgbImage& ref = dapi ? *dapi : *fitc;
    if (dapi && fitc && (dapi->width != fitc->width || dapi->height != fitc->height)) {
        throw DimensionMismatchError("raw channel images differ in size");
    }
    RgbImage out{ref.width, ref.height,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(ref.width) * ref.height * 3, 0)};
    auto intensity = [](const RgbImage& im, std::size_t px) {
        const auto* p = &im.rgb[px * 3];
        return std::max({p[0], p[1], p[2]});
    };
    const std::size_t n = static_cast<std::size_t>(ref.width) * ref.height;
    for (std::size_t px = 0; px < n; ++px) {
        if (fitc) out.rgb[px * 3 + 1] = intensity(*fitc, px);
        if (dapi) out.rgb[px * 3 + 2] = intensity(*dapi, px);
    }
    return out;
}

}  // namespace cellmorph
