#pragma once

#include "cellmorph/mask_io.hpp"
#include "cellmorph/morphometry.hpp"
#include "cellmorph/pairing.hpp"
#include "cellmorph/report.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cellmorph {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

struct RunConfig {
    std::filesystem::path root;
    std::filesystem::path out;
    double pitch = 0.625;  // um per pixel
    LayoutConfig layout;
    std::size_t min_size = 5;
    bool strict_labels = false;
    unsigned jobs = 1;
    /// Features aggregated into groups.csv / anova.csv; empty means all.
    std::vector<std::string> features;
    std::optional<std::filesystem::path> manifest;
};

/// Per-image features aggregated per group, in report order.
const std::vector<std::string>& group_feature_names();

/// Parses flat `key = value` text; '#' starts a comment. Throws ConfigError
/// for a line without '=' or a repeated key.
std::map<std::string, std::string> parse_key_values(std::string_view text);

/// Closest known key for a misspelt one, if any looks intended.
std::optional<std::string> suggest_key(std::string_view unknown);

/// Applies key-value pairs over `base`. Throws ConfigError naming the key
/// for unknown keys, type errors and range errors.
RunConfig validate_config(const std::map<std::string, std::string>& values, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Cross-field checks: root and out set, pitch > 0, jobs >= 1, out differs
/// from root. Throws ConfigError.
void check_run_config(const RunConfig& config);

/// Normalized `key = value` listing of a config.
std::string format_config(const RunConfig& config);

/// Everything measured for one image pair.
struct ImageResult {
    std::string group;
    std::string image_id;
    PixelScale scale;
    int width = 0;
    int height = 0;
    std::vector<SubjectFeatures> cells;
    std::vector<SubjectFeatures> nuclei;
    PairingResult pairing;
    ImageSummary summary;
    std::optional<Tessellation> tessellation;
    std::vector<FeatureRecord> records;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
};

struct ProcessOptions {
    LoadOptions load;
    FeatureOptions features;
    /// Pixel-scale override for this image; `scanned_area_mm2` wins over
    /// `pitch` when both are set.
    std::optional<double> pitch;
    std::optional<double> scanned_area_mm2;
    double default_pitch = 0.625;
    /// Write SVGs into this directory when set.
    std::optional<std::filesystem::path> svg_dir;
};

/// Loads, measures, pairs and tessellates one image. Throws on hard
/// per-image errors (unreadable or inconsistent masks).
ImageResult process_image(const std::string& group, const ImageEntry& entry,
                          const ProcessOptions& options);

struct RunSummary {
    int exit_code = kExitOk;
    std::size_t images_total = 0;
    std::size_t images_processed = 0;
    std::size_t warnings = 0;
    std::vector<std::string> log;  // run.log lines
    std::string error;             // set for fatal errors
};

/// Full batch: discovery, per-image work on `jobs` threads, sequential
/// aggregation, reports and run.log in `config.out`.
RunSummary run_batch(const RunConfig& config);

}  // namespace cellmorph
