#include "cellmorph/errors.hpp"
#include "cellmorph/mask_io.hpp"

#include <algorithm>
#include <map>
#include <system_error>

namespace cellmorph {

namespace fs = std::filesystem;

std::size_t BatchPlan::image_count() const noexcept {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.images.size();
    return n;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return !suffix.empty() && s.size() > suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lower_extension(const fs::path& p) {
    auto e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return e;
}

struct Slots {
    std::optional<fs::path> cyto;
    std::optional<fs::path> nuclei;
    std::optional<fs::path> dapi;
    std::optional<fs::path> fitc;
};

void assign(std::optional<fs::path>& slot, const fs::path& file, const std::string& group,
            std::vector<std::string>& warnings) {
    if (slot) {
        // Two files for the same slot (e.g. .png and .npy): keep the first in
        // lexicographic order.
        warnings.push_back("group '" + group + "': ignoring " + file.filename().string() +
                           ", already have " + slot->filename().string());
        return;
    }
    slot = file;
}

}  // namespace

BatchPlan discover_dataset(const fs::path& root, const LayoutConfig& layout) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("dataset root is not a readable directory: " + root.string());
    }

    std::vector<fs::path> group_dirs;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        if (entry.is_directory()) group_dirs.push_back(entry.path());
    }
    if (ec) throw IoError("cannot list dataset root " + root.string() + ": " + ec.message());
    std::sort(group_dirs.begin(), group_dirs.end());

    BatchPlan plan;
    for (const auto& dir : group_dirs) {
        const std::string group = dir.filename().string();
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir, ec)) {
            if (entry.is_regular_file()) files.push_back(entry.path());
        }
        if (ec) {
            plan.warnings.push_back("cannot list group directory " + dir.string());
            continue;
        }
        std::sort(files.begin(), files.end());

        std::map<std::string, Slots> by_stem;
        for (const auto& file : files) {
            const std::string ext = lower_extension(file);
            const std::string stem = file.stem().string();
            const bool mask_ext = ext == ".png" || ext == ".npy";
            if (mask_ext && ends_with(stem, layout.cyto_suffix)) {
                auto id = stem.substr(0, stem.size() - layout.cyto_suffix.size());
                assign(by_stem[id].cyto, file, group, plan.warnings);
            } else if (mask_ext && ends_with(stem, layout.nuclei_suffix)) {
                auto id = stem.substr(0, stem.size() - layout.nuclei_suffix.size());
                assign(by_stem[id].nuclei, file, group, plan.warnings);
            } else if (ext == ".png" && ends_with(stem, layout.dapi_suffix)) {
                auto id = stem.substr(0, stem.size() - layout.dapi_suffix.size());
                assign(by_stem[id].dapi, file, group, plan.warnings);
            } else if (ext == ".png" && ends_with(stem, layout.fitc_suffix)) {
                auto id = stem.substr(0, stem.size() - layout.fitc_suffix.size());
                assign(by_stem[id].fitc, file, group, plan.warnings);
            }
        }

        GroupEntry g{group, {}};
        for (auto& [id, slots] : by_stem) {
            if (!slots.cyto || !slots.nuclei) {
                if (slots.cyto || slots.nuclei) {
                    plan.warnings.push_back("group '" + group + "': image '" + id +
                                            "' is missing its " +
                                            (slots.cyto ? "nuclei" : "cytoplasm") +
                                            " mask; excluded");
                }
                continue;
            }
            g.images.push_back(ImageEntry{id, *slots.cyto, *slots.nuclei, slots.dapi, slots.fitc});
        }
        if (g.images.empty()) {
            plan.warnings.push_back("group '" + group + "' has no complete mask pairs; skipped");
            continue;
        }
        plan.groups.push_back(std::move(g));
    }
    if (plan.groups.empty()) {
        plan.warnings.push_back("no groups with complete mask pairs under " + root.string());
    }
    return plan;
}

}  // namespace cellmorph
