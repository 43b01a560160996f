#include "cellmorph/errors.hpp"
#include "cellmorph/pipeline.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace cellmorph;

namespace {

std::string config_error_key(const std::string& text) {
    try {
        validate_config(parse_key_values(text));
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<no error>";
}

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
    const auto c = validate_config(parse_key_values(""));
    EXPECT_EQ(c.pitch, 0.625);
    EXPECT_EQ(c.min_size, 5u);
    EXPECT_EQ(c.jobs, 1u);
    EXPECT_FALSE(c.strict_labels);
    EXPECT_EQ(c.layout.cyto_suffix, "_cyto");
    EXPECT_EQ(c.layout.nuclei_suffix, "_nuclei");
    EXPECT_TRUE(c.features.empty());
    EXPECT_FALSE(c.manifest.has_value());
    // The default pitch is the scanned field spread over the sensor.
    EXPECT_EQ(c.pitch, derive_scale(1.08, 1920, 1440).pitch);
}

TEST(Config, ParsesValues) {
    const auto c = validate_config(parse_key_values(
        "# comment\nroot = data\nout=results  # trailing\npitch = 0.5\nmin_size = 12\n"
        "strict_labels = yes\njobs = 4\nfeatures = ratio, mean_csm\ncyto_suffix = _c\n"));
    EXPECT_EQ(c.root, "data");
    EXPECT_EQ(c.out, "results");
    EXPECT_EQ(c.pitch, 0.5);
    EXPECT_EQ(c.min_size, 12u);
    EXPECT_TRUE(c.strict_labels);
    EXPECT_EQ(c.jobs, 4u);
    EXPECT_EQ(c.features, (std::vector<std::string>{"ratio", "mean_csm"}));
    EXPECT_EQ(c.layout.cyto_suffix, "_c");
}

TEST(Config, RangeErrorNamesPitch) {
    try {
        validate_config(parse_key_values("pitch = -1"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "pitch");
        EXPECT_NE(std::string(e.what()).find("pitch"), std::string::npos);
    }
    EXPECT_EQ(config_error_key("pitch = 0"), "pitch");
    EXPECT_EQ(config_error_key("pitch = abc"), "pitch");
    EXPECT_EQ(config_error_key("jobs = 0"), "jobs");
    EXPECT_EQ(config_error_key("jobs = 2.5"), "jobs");
    EXPECT_EQ(config_error_key("min_size = -3"), "min_size");
    EXPECT_EQ(config_error_key("strict_labels = maybe"), "strict_labels");
    EXPECT_EQ(config_error_key("features = ratio,bogus"), "features");
    EXPECT_EQ(config_error_key("cyto_suffix ="), "cyto_suffix");
}

TEST(Config, UnknownKeySuggestsPitch) {
    try {
        validate_config(parse_key_values("pxsize = 0.5"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.key(), "pxsize");
        EXPECT_NE(std::string(e.what()).find("\"pitch\""), std::string::npos);
    }
    EXPECT_EQ(suggest_key("pitchh"), "pitch");
    EXPECT_EQ(suggest_key("min-size"), "min_size");
    EXPECT_EQ(suggest_key("nuclei_sufix"), "nuclei_suffix");
    EXPECT_FALSE(suggest_key("completely_unrelated").has_value());
}

TEST(Config, MalformedLines) {
    EXPECT_THROW(parse_key_values("just words"), ConfigError);
    EXPECT_THROW(parse_key_values("pitch = 1\npitch = 2"), ConfigError);
    EXPECT_THROW(parse_key_values(" = 2"), ConfigError);
}

TEST(Config, CrossFieldChecks) {
    RunConfig c;
    EXPECT_THROW(check_run_config(c), ConfigError);
    c.root = "/tmp/a";
    EXPECT_THROW(check_run_config(c), ConfigError);
    c.out = "/tmp/a/";
    EXPECT_THROW(check_run_config(c), ConfigError);
    c.out = "/tmp/a/out";
    EXPECT_NO_THROW(check_run_config(c));
}

TEST(Config, FilePathsAreRelativeToTheFile) {
    fixture::TempDir dir;
    std::ofstream(dir / "run.cfg") << "root = data\nout = /abs/out\n";
    const auto c = load_config(dir / "run.cfg");
    EXPECT_EQ(c.root, dir.path() / "data");
    EXPECT_EQ(c.out, "/abs/out");
    EXPECT_THROW(load_config(dir / "missing.cfg"), ConfigError);
}

TEST(Config, FormatRoundTrips) {
    auto c = validate_config(parse_key_values("root = r\nout = o\npitch = 0.3\nfeatures = ratio"));
    EXPECT_EQ(validate_config(parse_key_values(format_config(c))).pitch, 0.3);
    EXPECT_EQ(format_config(validate_config(parse_key_values(format_config(c)))), format_config(c));
}
