#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

namespace fixture {

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

SyntheticImage synthetic_image(std::uint64_t seed, int width, int height, int spacing,
                               double cell_radius, double nucleus_radius, double jitter) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> j(-jitter * spacing, jitter * spacing);
    SyntheticImage img{width, height,
                       std::vector<cellmorph::Label>(static_cast<std::size_t>(width) * height, 0),
                       std::vector<cellmorph::Label>(static_cast<std::size_t>(width) * height, 0)};
    cellmorph::Label next = 1;
    for (double cy = spacing * 0.5; cy < height; cy += spacing) {
        for (double cx = spacing * 0.5; cx < width; cx += spacing) {
            const double x = cx + j(rng), y = cy + j(rng);
            const cellmorph::Label label = next++;
            const int x0 = std::max(0, static_cast<int>(std::floor(x - cell_radius)));
            const int x1 = std::min(width - 1, static_cast<int>(std::ceil(x + cell_radius)));
            const int y0 = std::max(0, static_cast<int>(std::floor(y - cell_radius)));
            const int y1 = std::min(height - 1, static_cast<int>(std::ceil(y + cell_radius)));
            for (int py = y0; py <= y1; ++py) {
                for (int px = x0; px <= x1; ++px) {
                    const double dx = px + 0.5 - x, dy = py + 0.5 - y;
                    const double d2 = dx * dx + dy * dy;
                    const std::size_t i = static_cast<std::size_t>(py) * width + px;
                    if (d2 <= cell_radius * cell_radius) img.cells[i] = label;
                    if (d2 <= nucleus_radius * nucleus_radius) img.nuclei[i] = label;
                }
            }
        }
    }
    return img;
}

void write_png(const std::filesystem::path& path, int width, int height,
               const std::vector<cellmorph::Label>& labels, cellmorph::Channel channel) {
    cellmorph::save_label_png(cellmorph::LabelMask(width, height, labels, channel), path);
}

void write_dataset(const std::filesystem::path& root, const std::vector<std::string>& groups,
                   int images_per_group, int width, int height) {
    std::uint64_t seed = 1;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto dir = root / groups[g];
        std::filesystem::create_directories(dir);
        for (int k = 0; k < images_per_group; ++k) {
            // Vary cell size per group so group means differ.
            const auto img = synthetic_image(seed++, width, height, 20, 8.0 + 1.5 * g, 3.5);
            const std::string stem = "img" + std::to_string(k + 1);
            write_png(dir / (stem + "_cyto.png"), width, height, img.cells);
            write_png(dir / (stem + "_nuclei.png"), width, height, img.nuclei,
                      cellmorph::Channel::nuclei);
        }
    }
}

}  // namespace fixture
