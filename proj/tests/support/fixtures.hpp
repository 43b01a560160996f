#pragma once

#include "cellmorph/mask_io.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "cellmorph");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct SyntheticImage {
    int width = 0;
    int height = 0;
    std::vector<cellmorph::Label> cells;
    std::vector<cellmorph::Label> nuclei;
};

/// Cells as disks on a jittered grid, each holding a concentric nucleus.
/// `spacing` is the grid pitch in pixels.
SyntheticImage synthetic_image(std::uint64_t seed, int width, int height, int spacing,
                               double cell_radius, double nucleus_radius, double jitter = 0.15);

void write_png(const std::filesystem::path& path, int width, int height,
               const std::vector<cellmorph::Label>& labels,
               cellmorph::Channel channel = cellmorph::Channel::cytoplasm);

/// root/<group>/<image>_cyto.png + _nuclei.png for every group and image.
void write_dataset(const std::filesystem::path& root, const std::vector<std::string>& groups,
                   int images_per_group, int width = 160, int height = 120);

}  // namespace fixture
