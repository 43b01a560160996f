#include "cellmorph/pipeline.hpp"

#include "cellmorph/errors.hpp"
#include "cellmorph/stats.hpp"
#include "cellmorph/tessellation.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>

namespace cellmorph {

namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

struct ScaleOverride {
    std::optional<double> pitch;
    std::optional<double> scanned_area_mm2;
};

struct Manifest {
    ScaleOverride defaults;
    std::map<std::string, ScaleOverride> images;  // "group/image_id"
};

ScaleOverride parse_override(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("manifest", where + " must be an object");
    ScaleOverride o;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_number()) throw ConfigError("manifest", where + "." + k + " must be a number");
        const double x = v.get<double>();
        if (!std::isfinite(x) || x <= 0.0) {
            throw ConfigError("manifest", where + "." + k + " must be positive");
        }
        if (k == "pitch") {
            o.pitch = x;
        } else if (k == "scanned_area_mm2") {
            o.scanned_area_mm2 = x;
        } else {
            throw ConfigError("manifest", "unknown field " + where + "." + k);
        }
    }
    return o;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("manifest", "cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("manifest", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("manifest", "top level must be an object");
    Manifest m;
    for (const auto& [k, v] : j.items()) {
        if (k == "default") {
            m.defaults = parse_override(v, "default");
        } else if (k == "images") {
            if (!v.is_object()) throw ConfigError("manifest", "images must be an object");
            for (const auto& [id, o] : v.items()) m.images[id] = parse_override(o, "images." + id);
        } else {
            throw ConfigError("manifest", "unknown field " + k);
        }
    }
    return m;
}

std::map<std::string, std::optional<double>> image_features(const ImageResult& r) {
    const ImageSummary& s = r.summary;
    return {
        {"cell_area_um2", s.mean_cell_area_um2},
        {"cell_roundness", s.mean_cell_roundness},
        {"coverage_cells", s.coverage_cells},
        {"nucleus_area_um2", s.mean_nucleus_area_um2},
        {"nucleus_roundness", s.mean_nucleus_roundness},
        {"coverage_nuclei", s.coverage_nuclei},
        {"ratio", s.mean_ratio},
        {"voronoi_entropy", s.voronoi_entropy},
        {"mean_csm", s.mean_csm},
        {"density_per_mm2", s.density_per_mm2},
        {"n_cells", static_cast<double>(s.n_cells)},
        {"n_nuclei", static_cast<double>(s.n_nuclei)},
    };
}

std::string safe_name(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == '/' || c == '\\' || c == ':') c = '_';
    }
    return out;
}

}  // namespace

ImageResult process_image(const std::string& group, const ImageEntry& entry,
                          const ProcessOptions& options) {
    ImageResult r;
    r.group = group;
    r.image_id = entry.image_id;

    const bool by_area = options.scanned_area_mm2.has_value();
    const PixelScale given = PixelScale::from_pitch(options.pitch.value_or(options.default_pitch));
    LabelMask cells = load_label_mask(entry.cyto_mask, Channel::cytoplasm, given, options.load);
    LabelMask nuclei = load_label_mask(entry.nuclei_mask, Channel::nuclei, given, options.load);
    if (cells.width() != nuclei.width() || cells.height() != nuclei.height()) {
        throw DimensionMismatchError(
            "cytoplasm mask is " + std::to_string(cells.width()) + "x" +
            std::to_string(cells.height()) + " but nuclei mask is " +
            std::to_string(nuclei.width()) + "x" + std::to_string(nuclei.height()));
    }
    if (by_area) {
        const PixelScale s = derive_scale(*options.scanned_area_mm2, cells.width(), cells.height());
        cells = cells.with_scale(s);
        nuclei = nuclei.with_scale(s);
    }
    r.scale = cells.scale();
    r.width = cells.width();
    r.height = cells.height();

    r.cells = compute_all_features(cells, options.features);
    r.nuclei = compute_all_features(nuclei, options.features);
    r.pairing = pair_subjects(cells, nuclei);
    r.summary = summarize_image(cells, nuclei, r.cells, r.nuclei);

    std::map<Label, const SubjectFeatures*> cell_by_label, nucleus_by_label;
    for (const auto& f : r.cells) cell_by_label[f.label] = &f;
    for (const auto& f : r.nuclei) nucleus_by_label[f.label] = &f;

    // Ratio over pairs whose cell and nucleus both count.
    std::vector<double> ratios;
    std::map<Label, const CellNucleusPair*> pair_of_nucleus, first_pair_of_cell;
    std::size_t multi = 0;
    for (const auto& p : r.pairing.pairs) {
        pair_of_nucleus[p.nucleus_label] = &p;
        first_pair_of_cell.try_emplace(p.cell_label, &p);
        if (p.multi_nucleate) ++multi;
        if (!cell_by_label.at(p.cell_label)->small && !nucleus_by_label.at(p.nucleus_label)->small) {
            ratios.push_back(p.ratio);
        }
    }
    r.summary.mean_ratio = mean_of(ratios);

    // Voronoi seeds: centroids of counted nuclei, in label order.
    std::vector<Point> seeds;
    for (const auto& f : r.nuclei) {
        if (!f.small) seeds.push_back(f.centroid_um);
    }
    {
        std::vector<Point> sorted = seeds;
        std::sort(sorted.begin(), sorted.end(), [](const Point& a, const Point& b) {
            return a.x != b.x ? a.x < b.x : a.y < b.y;
        });
        const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
        if (dup != sorted.end()) {
            std::vector<Point> unique;
            std::size_t dropped = 0;
            for (const auto& p : seeds) {
                if (std::find(unique.begin(), unique.end(), p) == unique.end()) {
                    unique.push_back(p);
                } else {
                    ++dropped;
                }
            }
            seeds = std::move(unique);
            r.warnings.push_back(std::to_string(dropped) +
                                 " nucleus centroid(s) coincide with another; dropped as seeds");
        }
    }
    const Rect bounds{0.0, 0.0, r.width * r.scale.pitch, r.height * r.scale.pitch};
    if (!seeds.empty()) {
        try {
            r.tessellation = build_voronoi(seeds, bounds);
            const EntropyResult ent = voronoi_entropy(*r.tessellation);
            const OrderMetric csm = image_csm(*r.tessellation);
            r.summary.voronoi_entropy = ent.entropy;
            r.summary.mean_csm = csm.value;
            r.summary.low_confidence_order = ent.low_confidence;
            if (ent.low_confidence) {
                r.notes.push_back("low-confidence order metrics: " +
                                  std::to_string(ent.histogram.total) + " interior polygon(s)");
            }
        } catch (const GeometryError& e) {
            r.warnings.push_back(std::string("tessellation failed: ") + e.what());
            r.tessellation.reset();
        }
    } else {
        r.notes.push_back("no nuclei to tessellate");
    }

    std::size_t small_count = 0;
    for (const auto& f : r.cells) {
        FeatureRecord rec{group, entry.image_id, Channel::cytoplasm, f.label, f.area_px,
                          f.area_um2, f.perimeter_um, f.roundness, f.centroid_px.x,
                          f.centroid_px.y, std::nullopt, std::nullopt, {}};
        if (auto it = first_pair_of_cell.find(f.label); it != first_pair_of_cell.end()) {
            rec.paired_label = it->second->nucleus_label;
            rec.ratio = it->second->ratio;
            rec.flags.multi_nucleate = it->second->multi_nucleate;
        }
        rec.flags.small = f.small;
        rec.flags.clamped_roundness = f.roundness_clamped;
        small_count += f.small;
        r.records.push_back(std::move(rec));
    }
    for (const auto& f : r.nuclei) {
        FeatureRecord rec{group, entry.image_id, Channel::nuclei, f.label, f.area_px,
                          f.area_um2, f.perimeter_um, f.roundness, f.centroid_px.x,
                          f.centroid_px.y, std::nullopt, std::nullopt, {}};
        if (auto it = pair_of_nucleus.find(f.label); it != pair_of_nucleus.end()) {
            rec.paired_label = it->second->cell_label;
            rec.ratio = it->second->ratio;
            rec.flags.multi_nucleate = it->second->multi_nucleate;
        }
        rec.flags.small = f.small;
        rec.flags.clamped_roundness = f.roundness_clamped;
        small_count += f.small;
        r.records.push_back(std::move(rec));
    }

    if (!r.pairing.unpaired_nuclei.empty()) {
        r.notes.push_back(std::to_string(r.pairing.unpaired_nuclei.size()) +
                          " unpaired nucleus/nuclei");
    }
    if (!r.pairing.unpaired_cells.empty()) {
        r.notes.push_back(std::to_string(r.pairing.unpaired_cells.size()) + " unpaired cell(s)");
    }
    if (multi > 0) r.notes.push_back(std::to_string(multi) + " nucleus/nuclei in multi-nucleate cells");
    if (r.summary.clamped_roundness > 0) {
        r.notes.push_back(std::to_string(r.summary.clamped_roundness) +
                          " roundness value(s) clamped to 1");
    }
    if (small_count > 0) {
        r.notes.push_back(std::to_string(small_count) + " subject(s) below " +
                          std::to_string(options.features.min_subject_px) +
                          " px excluded from aggregates");
    }

    if (options.svg_dir) {
        std::filesystem::create_directories(*options.svg_dir);
        const std::string stem = safe_name(entry.image_id);
        Tessellation empty;
        empty.bounds = bounds;
        render_voronoi_svg(r.tessellation ? *r.tessellation : empty,
                           *options.svg_dir / (stem + "_voronoi.svg"));

        OverlayInput overlay;
        overlay.cells = {&cells, r.cells};
        overlay.nuclei = {&nuclei, r.nuclei};
        if (entry.dapi_raw || entry.fitc_raw) {
            try {
                std::optional<RgbImage> dapi, fitc;
                if (entry.dapi_raw) dapi = load_raw_image(*entry.dapi_raw);
                if (entry.fitc_raw) fitc = load_raw_image(*entry.fitc_raw);
                RgbImage bg = composite_channels(dapi, fitc);
                if (bg.width == r.width && bg.height == r.height) {
                    overlay.background = std::move(bg);
                } else {
                    r.warnings.push_back("raw channel size differs from masks; overlay on white");
                }
            } catch (const Error& e) {
                r.warnings.push_back(std::string("raw channel unusable (") + e.what() +
                                     "); overlay on white");
            }
        }
        render_overlay_svg(overlay, *options.svg_dir / (stem + "_overlay.svg"));
    }
    return r;
}

RunSummary run_batch(const RunConfig& config) {
    RunSummary sum;
    auto fatal = [&](int code, const std::string& msg) {
        sum.exit_code = code;
        sum.error = msg;
        return sum;
    };

    Manifest manifest;
    try {
        check_run_config(config);
        if (config.manifest) manifest = load_manifest(*config.manifest);
    } catch (const ConfigError& e) {
        return fatal(kExitConfig, e.what());
    }

    std::error_code ec;
    if (!std::filesystem::is_directory(config.root, ec)) {
        return fatal(kExitIo, "input root is not a readable directory: " + config.root.string());
    }
    BatchPlan plan;
    try {
        plan = discover_dataset(config.root, config.layout);
    } catch (const std::exception& e) {
        return fatal(kExitIo, e.what());
    }
    std::filesystem::create_directories(config.out, ec);
    if (ec || !std::filesystem::is_directory(config.out)) {
        return fatal(kExitIo, "cannot create output directory " + config.out.string());
    }

    struct Job {
        const GroupEntry* group;
        const ImageEntry* image;
    };
    std::vector<Job> jobs;
    for (const auto& g : plan.groups) {
        for (const auto& im : g.images) jobs.push_back({&g, &im});
    }
    sum.images_total = jobs.size();

    std::vector<std::optional<ImageResult>> results(jobs.size());
    std::vector<std::string> failures(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            ProcessOptions opt;
            opt.load.strict_labels = config.strict_labels;
            opt.features.min_subject_px = config.min_size;
            opt.default_pitch = config.pitch;
            opt.pitch = manifest.defaults.pitch;
            opt.scanned_area_mm2 = manifest.defaults.scanned_area_mm2;
            const auto key = job.group->name + "/" + job.image->image_id;
            if (auto it = manifest.images.find(key); it != manifest.images.end()) {
                if (it->second.pitch) {
                    opt.pitch = it->second.pitch;
                    opt.scanned_area_mm2.reset();
                }
                if (it->second.scanned_area_mm2) opt.scanned_area_mm2 = it->second.scanned_area_mm2;
            }
            opt.svg_dir = config.out / "svg" / safe_name(job.group->name);
            try {
                results[i] = process_image(job.group->name, *job.image, opt);
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        }
    };
    const unsigned threads =
        static_cast<unsigned>(std::min<std::size_t>(config.jobs, std::max<std::size_t>(jobs.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    // Sequential reduce in plan order.
    auto warn = [&](const std::string& msg) {
        sum.log.push_back("WARN " + msg);
        ++sum.warnings;
    };
    auto info = [&](const std::string& msg) { sum.log.push_back("INFO " + msg); };

    info("root " + config.root.string());
    info("pitch " + format_number(config.pitch) + " um/px, min_size " +
         std::to_string(config.min_size) + " px");
    for (const auto& w : plan.warnings) warn(w);

    const std::vector<std::string> features =
        config.features.empty() ? group_feature_names() : config.features;
    FeatureTable table(group_feature_names());
    std::vector<FeatureRecord> subjects;
    std::vector<ImageRecord> images;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string id = jobs[i].group->name + "/" + jobs[i].image->image_id;
        if (!results[i]) {
            warn(id + ": skipped: " + failures[i]);
            continue;
        }
        const ImageResult& r = *results[i];
        ++sum.images_processed;
        for (const auto& w : r.warnings) warn(id + ": " + w);
        for (const auto& n : r.notes) info(id + ": " + n);
        subjects.insert(subjects.end(), r.records.begin(), r.records.end());
        const ImageSummary& s = r.summary;
        images.push_back({r.group, r.image_id, s.n_cells, s.n_nuclei, s.coverage_cells,
                          s.coverage_nuclei, s.density_per_mm2, s.voronoi_entropy, s.mean_csm});
        table.add(r.group, image_features(r));
    }

    std::vector<GroupStats> group_rows;
    std::vector<AnovaResult> anova_rows;
    for (const auto& feature : features) {
        for (auto& gs : summarize_groups(table, feature)) group_rows.push_back(std::move(gs));
        const auto samples = table.samples(feature);
        if (samples.empty()) continue;
        std::vector<std::vector<double>> groups;
        for (const auto& [_, v] : samples) groups.push_back(v);
        try {
            AnovaResult a = one_way_anova(groups);
            a.feature = feature;
            anova_rows.push_back(std::move(a));
        } catch (const StatsError& e) {
            info("anova skipped for " + feature + ": " + e.what());
        }
    }

    info("processed " + std::to_string(sum.images_processed) + " of " +
         std::to_string(sum.images_total) + " image(s); " + std::to_string(sum.warnings) +
         " warning(s)");

    try {
        write_subject_csv(subjects, config.out / "subjects.csv");
        write_image_csv(images, config.out / "images.csv");
        write_group_csv(group_rows, config.out / "groups.csv");
        write_anova_csv(anova_rows, config.out / "anova.csv");
        std::string log;
        for (const auto& line : sum.log) log += line + "\n";
        write_text_file(config.out / "run.log", log);
    } catch (const std::exception& e) {
        return fatal(kExitIo, e.what());
    }
    return sum;
}

}  // namespace cellmorph
