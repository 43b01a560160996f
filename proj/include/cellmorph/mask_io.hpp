#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cellmorph {

using Label = std::uint32_t;

/// Physical size of one pixel. `pitch` is the edge length in micrometers,
/// `area_per_px` its square.
struct PixelScale {
    double pitch = 0.625;
    double area_per_px = 0.390625;

    /// Throws InvalidScaleError unless pitch is finite and positive.
    static PixelScale from_pitch(double pitch_um);
};

/// Pixel scale implied by a scanned field of `scanned_area_mm2` imaged onto
/// `width` x `height` pixels.
PixelScale derive_scale(double scanned_area_mm2, long long width, long long height);

enum class Channel { cytoplasm, nuclei };

std::string_view to_string(Channel channel) noexcept;

/// Integer label image for one channel. Label 0 is background; every positive
/// value identifies one subject. Immutable after construction.
class LabelMask {
public:
    LabelMask(int width, int height, std::vector<Label> labels, Channel channel,
              PixelScale scale = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Channel channel() const noexcept { return channel_; }
    const PixelScale& scale() const noexcept { return scale_; }

    Label at(int x, int y) const noexcept {
        return labels_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }
    std::span<const Label> data() const noexcept { return labels_; }
    std::size_t pixel_count() const noexcept { return labels_.size(); }

    /// Distinct positive labels in ascending order.
    std::vector<Label> labels() const;
    bool contains(Label label) const;

    LabelMask with_scale(PixelScale scale) const;

private:
    int width_;
    int height_;
    std::vector<Label> labels_;
    Channel channel_;
    PixelScale scale_;
};

struct LoadOptions {
    /// Reject labels that occur as more than one 8-connected component.
    bool strict_labels = false;
};

/// 8-connected component labeling of the foreground (`grid[i] != 0`).
/// Components are numbered 1..K in raster order of their first pixel.
std::vector<Label> label_components(int width, int height, std::span<const Label> grid);

/// Number of 8-connected components formed by each label's pixels, indexed
/// like `LabelMask::labels()`.
std::vector<std::size_t> components_per_label(const LabelMask& mask);

/// Loads a PNG (8/16-bit grayscale, also 1/2/4-bit) or NPY v1.0 label mask.
/// Masks containing only {0,1} are treated as binary and relabeled by
/// 8-connected components.
LabelMask load_label_mask(const std::filesystem::path& path, Channel channel,
                          PixelScale scale = {}, const LoadOptions& options = {});

/// Raw values as stored, without binary relabeling.
struct RawGrid {
    int width = 0;
    int height = 0;
    std::vector<Label> values;
};

RawGrid read_png_grid(const std::filesystem::path& path);
RawGrid read_npy_grid(const std::filesystem::path& path);
RawGrid parse_npy(std::span<const std::uint8_t> bytes);

/// Writes a 16-bit grayscale PNG; labels above 65535 are rejected.
void save_label_png(const LabelMask& mask, const std::filesystem::path& path);
/// Writes an NPY v1.0 `<u4` C-order array.
void save_label_npy(const LabelMask& mask, const std::filesystem::path& path);

/// 8-bit RGB raster used only as overlay background.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // width * height * 3, row-major
};

/// Loads an 8-bit grayscale or RGB(A) PNG as RGB.
RgbImage load_raw_image(const std::filesystem::path& path);

/// Composites stained channels: DAPI into blue, FITC into green. Either may
/// be absent; RGB inputs are reduced to their per-pixel maximum.
RgbImage composite_channels(const std::optional<RgbImage>& dapi,
                            const std::optional<RgbImage>& fitc);

std::vector<std::uint8_t> encode_png(const RgbImage& image);

// ---------------------------------------------------------------------------
// Dataset discovery

struct LayoutConfig {
    std::string cyto_suffix = "_cyto";
    std::string nuclei_suffix = "_nuclei";
    std::string dapi_suffix = "_dapi";
    std::string fitc_suffix = "_fitc";
};

struct ImageEntry {
    std::string image_id;
    std::filesystem::path cyto_mask;
    std::filesystem::path nuclei_mask;
    std::optional<std::filesystem::path> dapi_raw;
    std::optional<std::filesystem::path> fitc_raw;
};

struct GroupEntry {
    std::string name;
    std::vector<ImageEntry> images;
};

struct BatchPlan {
    std::vector<GroupEntry> groups;
    std::vector<std::string> warnings;

    std::size_t image_count() const noexcept;
};

/// One sub-directory of `root` per group; mask pairs matched by shared stem
/// plus channel suffix. Masks are `.png` or `.npy`; raw channels `.png`.
/// Throws IoError if `root` is not a readable directory.
BatchPlan discover_dataset(const std::filesystem::path& root, const LayoutConfig& layout = {});

}  // namespace cellmorph
