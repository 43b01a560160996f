#pragma once

#include "cellmorph/mask_io.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace cellmorph {

/// Pixel coordinate in the label grid (column, row).
struct PixelCoord {
    int x = 0;
    int y = 0;
    friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Freeman 8-direction chain code. Direction 0 is +x, codes increase
/// counterclockwise as seen on screen (2 is up, 6 is down).
struct ChainCode {
    PixelCoord start;
    std::vector<std::uint8_t> moves;

    /// Pixels visited, starting with `start`; the closing return to start is
    /// not repeated.
    std::vector<PixelCoord> pixels() const;
    std::size_t axial_moves() const noexcept;
    std::size_t diagonal_moves() const noexcept;
};

inline constexpr int kChainDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int kChainDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

/// Outer boundary of the 8-connected component holding the label's top-most,
/// then left-most pixel. Moore tracing, clockwise on screen. Holes are not
/// traced. Throws NotFoundError if the label is absent.
ChainCode trace_contour(const LabelMask& mask, Label label);

/// Outer contours of every 8-connected component of a label, ordered by
/// each component's start pixel in raster order.
std::vector<ChainCode> trace_contours(const LabelMask& mask, Label label);

struct LabelContours {
    Label label = 0;
    std::vector<ChainCode> contours;
};

/// trace_contours for every label, ascending, in one pass over the mask.
std::vector<LabelContours> trace_all_contours(const LabelMask& mask);

/// Perimeter in micrometers from a chain code and pixel pitch.
using PerimeterEstimator = std::function<double(const ChainCode&, double pitch)>;

/// Axial steps weigh `pitch`, diagonal steps `sqrt(2) * pitch`. A chain with
/// no moves (single pixel) has perimeter 4 * pitch.
double freeman_perimeter(const ChainCode& chain, double pitch);

/// 4*pi*a/p^2, unclamped.
double roundness(double area, double perimeter);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

struct SubjectFeatures {
    Label label = 0;
    std::size_t area_px = 0;
    double area_um2 = 0.0;
    double perimeter_um = 0.0;
    double roundness = 0.0;
    /// Continuous image coordinates: pixel (i, j) covers [i, i+1) x [j, j+1),
    /// so a centroid lies in [0, width) x [0, height).
    Point2 centroid_px;
    Point2 centroid_um;
    bool boundary_touching = false;
    bool small = false;             // area_px below FeatureOptions::min_subject_px
    bool roundness_clamped = false;  // raw 4*pi*a/p^2 exceeded 1
    std::size_t components = 1;
};

struct FeatureOptions {
    PerimeterEstimator perimeter = freeman_perimeter;
    /// Subjects smaller than this are still measured but flagged `small`
    /// and left out of image-level aggregates.
    std::size_t min_subject_px = 5;
};

SubjectFeatures compute_features(const LabelMask& mask, Label label,
                                 const FeatureOptions& options = {});

/// Features for every label, ascending by label, in one pass over the mask.
std::vector<SubjectFeatures> compute_all_features(const LabelMask& mask,
                                                  const FeatureOptions& options = {});

struct ImageSummary {
    int width = 0;
    int height = 0;
    std::size_t n_cells = 0;
    std::size_t n_nuclei = 0;
    double coverage_cells = 0.0;
    double coverage_nuclei = 0.0;
    double total_area_um2 = 0.0;
    double density_per_mm2 = 0.0;

    // Per-image means over the non-small subjects of each channel; absent
    // when the channel has none.
    std::optional<double> mean_cell_area_um2;
    std::optional<double> mean_cell_roundness;
    std::optional<double> mean_nucleus_area_um2;
    std::optional<double> mean_nucleus_roundness;

    // Filled by later stages.
    std::optional<double> mean_ratio;
    std::optional<double> voronoi_entropy;
    std::optional<double> mean_csm;
    bool low_confidence_order = false;
    std::size_t clamped_roundness = 0;
};

/// Counts, coverage and density of one image. Subjects flagged `small` are
/// excluded. Throws DimensionMismatchError if a centroid lies outside the
/// frame.
ImageSummary summarize_image(const std::vector<SubjectFeatures>& cells,
                             const std::vector<SubjectFeatures>& nuclei, const PixelScale& scale,
                             int width, int height);

/// Same, checking that both masks share their dimensions.
ImageSummary summarize_image(const LabelMask& cells_mask, const LabelMask& nuclei_mask,
                             const std::vector<SubjectFeatures>& cells,
                             const std::vector<SubjectFeatures>& nuclei);

}  // namespace cellmorph
