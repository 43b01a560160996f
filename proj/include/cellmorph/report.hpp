#pragma once

#include "cellmorph/mask_io.hpp"
#include "cellmorph/morphometry.hpp"
#include "cellmorph/stats.hpp"
#include "cellmorph/tessellation.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cellmorph {

// ---------------------------------------------------------------------------
// CSV

/// 6 significant digits with a '.' decimal separator and
/// "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double value);

/// Quotes a field when it holds a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

/// Parses RFC-4180 text into rows of fields. Accepts LF or CRLF line ends.
/// Throws IoError on an unterminated quoted field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct SubjectFlags {
    bool small = false;
    bool multi_nucleate = false;
    bool clamped_roundness = false;
    friend bool operator==(const SubjectFlags&, const SubjectFlags&) = default;
};

/// ';'-joined flag names ("small;multi_nucleate;clamped_roundness" order).
std::string format_flags(const SubjectFlags& flags);
SubjectFlags parse_flags(std::string_view text);

struct FeatureRecord {
    std::string group;
    std::string image_id;
    Channel channel = Channel::cytoplasm;
    Label label = 0;
    std::size_t area_px = 0;
    double area_um2 = 0.0;
    double perimeter_um = 0.0;
    double roundness = 0.0;
    double centroid_x_px = 0.0;
    double centroid_y_px = 0.0;
    std::optional<Label> paired_label;
    std::optional<double> ratio;
    SubjectFlags flags;
    friend bool operator==(const FeatureRecord&, const FeatureRecord&) = default;
};

struct ImageRecord {
    std::string group;
    std::string image_id;
    std::size_t n_cells = 0;
    std::size_t n_nuclei = 0;
    double coverage_cells = 0.0;
    double coverage_nuclei = 0.0;
    double density_per_mm2 = 0.0;
    std::optional<double> voronoi_entropy;
    std::optional<double> mean_csm;
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

inline constexpr std::string_view kSubjectHeader =
    "group,image_id,channel,label,area_px,area_um2,perimeter_um,roundness,centroid_x_px,"
    "centroid_y_px,paired_label,ratio,flags";
inline constexpr std::string_view kImageHeader =
    "group,image_id,n_cells,n_nuclei,coverage_cells,coverage_nuclei,density_per_mm2,"
    "voronoi_entropy,mean_csm";
inline constexpr std::string_view kGroupHeader = "group,feature,n,mean,std,min,max";
inline constexpr std::string_view kAnovaHeader = "feature,f_stat,df_between,df_within,p_value";

/// Serialized tables. Rows are sorted by (group, image, channel, label);
/// groups.csv by (group, feature); anova.csv by feature. Duplicate keys
/// throw IoError.
std::string subject_csv(std::vector<FeatureRecord> records);
std::string image_csv(std::vector<ImageRecord> records);
std::string group_csv(std::vector<GroupStats> stats);
std::string anova_csv(std::vector<AnovaResult> results);

void write_subject_csv(const std::vector<FeatureRecord>& records, const std::filesystem::path& path);
void write_image_csv(const std::vector<ImageRecord>& records, const std::filesystem::path& path);
void write_group_csv(const std::vector<GroupStats>& stats, const std::filesystem::path& path);
void write_anova_csv(const std::vector<AnovaResult>& results, const std::filesystem::path& path);

/// Readers for the tables above. Throw IoError on a wrong header or a
/// malformed row.
std::vector<FeatureRecord> parse_subject_csv(std::string_view text);
std::vector<ImageRecord> parse_image_csv(std::string_view text);
std::vector<GroupStats> parse_group_csv(std::string_view text);
std::vector<AnovaResult> parse_anova_csv(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
/// Writes `content` atomically enough for our purposes: to a sibling temp
/// file, then renamed into place. Throws IoError.
void write_text_file(const std::filesystem::path& path, std::string_view content);

// ---------------------------------------------------------------------------
// SVG

/// Fill colour of an edge-count class; classes outside 3..9 share grey.
std::string_view class_color(std::size_t edges);

/// Voronoi figure: viewBox equal to the bounds, one <polygon> per cell
/// filled by its edge-count class, non-interior cells hatched, seeds as
/// dots.
std::string voronoi_svg(const Tessellation& tess);
void render_voronoi_svg(const Tessellation& tess, const std::filesystem::path& path);

struct OverlayLayer {
    const LabelMask* mask = nullptr;
    std::span<const SubjectFeatures> features;
};

struct OverlayInput {
    OverlayLayer cells;
    OverlayLayer nuclei;  // optional; mask may be null
    /// Composited DAPI/FITC background; white when absent.
    std::optional<RgbImage> background;
};

/// Outline figure in pixel coordinates: one closed <path> per subject
/// (cytoplasm first, nuclei drawn above), one <text> with the area in um^2
/// at each centroid. Throws DimensionMismatchError when the masks or the
/// background differ in size.
std::string overlay_svg(const OverlayInput& input);
void render_overlay_svg(const OverlayInput& input, const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace cellmorph
