#include "cellmorph/errors.hpp"
#include "cellmorph/pipeline.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <sys/wait.h>
#include <fstream>

using namespace cellmorph;
namespace fs = std::filesystem;

namespace {

std::size_t files_with_suffix(const fs::path& dir, const std::string& suffix) {
    std::size_t n = 0;
    if (!fs::exists(dir)) return 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.size() >= suffix.size() &&
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            ++n;
        }
    }
    return n;
}

std::size_t lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

#ifdef CELLMORPH_CLI_PATH
int run_cli(const std::string& args) {
    const std::string cmd = std::string(CELLMORPH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

RunConfig config_for(const fs::path& root, const fs::path& out, unsigned jobs = 1) {
    RunConfig c;
    c.root = root;
    c.out = out;
    c.jobs = jobs;
    return c;
}

}  // namespace

TEST(Pipeline, TwoGroupsThreeImages) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"thick", "thin"}, 3);
    const auto s = run_batch(config_for(dir / "data", dir / "out"));
    ASSERT_EQ(s.exit_code, kExitOk) << s.error;
    EXPECT_EQ(s.images_total, 6u);
    EXPECT_EQ(s.images_processed, 6u);
    EXPECT_EQ(s.warnings, 0u);
    for (const auto* f : {"subjects.csv", "images.csv", "groups.csv", "anova.csv", "run.log"}) {
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    }
    EXPECT_EQ(files_with_suffix(dir / "out" / "svg", "_voronoi.svg"), 6u);
    EXPECT_EQ(files_with_suffix(dir / "out" / "svg", "_overlay.svg"), 6u);

    const auto images = parse_image_csv(read_text_file(dir / "out" / "images.csv"));
    ASSERT_EQ(images.size(), 6u);
    EXPECT_EQ(images[0].group, "thick");
    EXPECT_GT(images[0].n_nuclei, 0u);
    const auto groups = parse_group_csv(read_text_file(dir / "out" / "groups.csv"));
    EXPECT_EQ(groups.size(), 2 * group_feature_names().size());
    const auto anova = parse_anova_csv(read_text_file(dir / "out" / "anova.csv"));
    EXPECT_FALSE(anova.empty());
    for (const auto& a : anova) {
        EXPECT_EQ(a.df_between, 1);
        EXPECT_EQ(a.df_within, 4);
    }
    const auto subjects = parse_subject_csv(read_text_file(dir / "out" / "subjects.csv"));
    EXPECT_GT(subjects.size(), 50u);
    for (const auto& r : subjects) {
        if (r.channel == Channel::nuclei) EXPECT_TRUE(r.paired_label.has_value());
    }
}

TEST(Pipeline, DeterministicAcrossJobs) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"a", "b", "c"}, 3);
    ASSERT_EQ(run_batch(config_for(dir / "data", dir / "one", 1)).exit_code, kExitOk);
    ASSERT_EQ(run_batch(config_for(dir / "data", dir / "four", 4)).exit_code, kExitOk);
    for (const auto* f : {"subjects.csv", "images.csv", "groups.csv", "anova.csv", "run.log"}) {
        EXPECT_EQ(read_text_file(dir / "one" / f), read_text_file(dir / "four" / f)) << f;
    }
    EXPECT_EQ(read_text_file(dir / "one" / "svg" / "b" / "img2_voronoi.svg"),
              read_text_file(dir / "four" / "svg" / "b" / "img2_voronoi.svg"));
}

TEST(Pipeline, CorruptMaskIsSkipped) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"g1", "g2"}, 3);
    std::ofstream(dir / "data" / "g2" / "img2_nuclei.png", std::ios::trunc) << "not a png";
    const auto s = run_batch(config_for(dir / "data", dir / "out"));
    ASSERT_EQ(s.exit_code, kExitOk);
    EXPECT_EQ(s.warnings, 1u);
    EXPECT_EQ(s.images_processed, 5u);
    const auto log = read_text_file(dir / "out" / "run.log");
    EXPECT_NE(log.find("WARN g2/img2: skipped"), std::string::npos);
    EXPECT_EQ(parse_image_csv(read_text_file(dir / "out" / "images.csv")).size(), 5u);
}

TEST(Pipeline, EmptyRootWritesHeaders) {
    fixture::TempDir dir;
    fs::create_directories(dir / "data");
    const auto s = run_batch(config_for(dir / "data", dir / "out"));
    ASSERT_EQ(s.exit_code, kExitOk);
    EXPECT_GT(s.warnings, 0u);
    for (const auto* f : {"subjects.csv", "images.csv", "groups.csv", "anova.csv"}) {
        EXPECT_EQ(lines(read_text_file(dir / "out" / f)), 1u) << f;
    }
}

TEST(Pipeline, FatalErrors) {
    fixture::TempDir dir;
    EXPECT_EQ(run_batch(config_for(dir / "missing", dir / "out")).exit_code, kExitIo);
    fs::create_directories(dir / "data");
    EXPECT_EQ(run_batch(config_for(dir / "data", dir / "data")).exit_code, kExitConfig);
    auto c = config_for(dir / "data", dir / "out");
    c.pitch = -1.0;
    EXPECT_EQ(run_batch(c).exit_code, kExitConfig);
    std::ofstream(dir / "blocker") << "file";
    EXPECT_EQ(run_batch(config_for(dir / "data", dir / "blocker" / "out")).exit_code, kExitIo);
}

TEST(Pipeline, ManifestOverridesScale) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"g"}, 2, 160, 120);
    std::ofstream(dir / "manifest.json")
        << R"({"default": {"pitch": 1.0}, "images": {"g/img2": {"scanned_area_mm2": 0.0192}}})";
    auto c = config_for(dir / "data", dir / "out");
    c.manifest = dir / "manifest.json";
    ASSERT_EQ(run_batch(c).exit_code, kExitOk);
    const auto images = parse_image_csv(read_text_file(dir / "out" / "images.csv"));
    ASSERT_EQ(images.size(), 2u);
    // 160x120 px at 1 um/px is 0.0192 mm^2 either way.
    EXPECT_DOUBLE_EQ(images[0].density_per_mm2, images[0].n_nuclei / 0.0192);
    EXPECT_DOUBLE_EQ(images[1].density_per_mm2, images[1].n_nuclei / 0.0192);

    std::ofstream(dir / "bad.json") << R"({"images": {"g/img1": {"pich": 1}}})";
    c.manifest = dir / "bad.json";
    EXPECT_EQ(run_batch(c).exit_code, kExitConfig);
}

TEST(Pipeline, ProcessImageRecords) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"g"}, 1);
    const auto plan = discover_dataset(dir / "data");
    ProcessOptions opt;
    const auto r = process_image("g", plan.groups[0].images[0], opt);
    EXPECT_EQ(r.records.size(), r.cells.size() + r.nuclei.size());
    ASSERT_TRUE(r.tessellation.has_value());
    EXPECT_EQ(r.tessellation->seeds.size(), r.summary.n_nuclei);
    ASSERT_TRUE(r.summary.mean_ratio.has_value());
    EXPECT_GT(*r.summary.mean_ratio, 1.0);
}

#ifdef CELLMORPH_CLI_PATH
TEST(Cli, ExitCodes) {
    fixture::TempDir dir;
    fixture::write_dataset(dir / "data", {"a", "b"}, 2);
    const auto root = (dir / "data").string();
    const auto out = (dir / "out").string();
    EXPECT_EQ(run_cli("version"), 0);
    EXPECT_EQ(run_cli("analyze --root " + root + " --out " + out + " --jobs 2"), 0);
    EXPECT_TRUE(fs::exists(dir / "out" / "subjects.csv"));
    EXPECT_EQ(run_cli("analyze --root " + root + " --out " + out + " --pitch -1"), 2);
    EXPECT_EQ(run_cli("analyze --root " + (dir / "nope").string() + " --out " + out), 3);
    EXPECT_EQ(run_cli("analyze --root " + root + " --out " + root), 2);

    std::ofstream(dir / "good.cfg") << "root = data\nout = cfg_out\nmin_size = 3\n";
    std::ofstream(dir / "bad.cfg") << "pxsize = 0.5\n";
    EXPECT_EQ(run_cli("validate --config " + (dir / "good.cfg").string()), 0);
    EXPECT_EQ(run_cli("validate --config " + (dir / "bad.cfg").string()), 2);
    EXPECT_EQ(run_cli("analyze --config " + (dir / "good.cfg").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "cfg_out" / "images.csv"));
    EXPECT_EQ(run_cli("bogus"), 2);
}
#endif
