#include "cellmorph/errors.hpp"
#include "cellmorph/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

#ifndef CELLMORPH_VERSION
#define CELLMORPH_VERSION "unknown"
#endif

int main(int argc, char** argv) {
    using namespace cellmorph;

    CLI::App app{"Batch morphometry of cytoplasm/nuclei label masks"};
    app.require_subcommand(1);

    auto* analyze = app.add_subcommand("analyze", "Measure every image pair under a dataset root");
    std::string root, out, config_path;
    double pitch = 0.0;
    unsigned jobs = 0;
    std::size_t min_size = 0;
    bool strict = false;
    analyze->add_option("--root", root, "Dataset root, one sub-directory per group");
    analyze->add_option("--out", out, "Output directory");
    analyze->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    auto* pitch_opt = analyze->add_option("--pitch", pitch, "Pixel pitch in um/px");
    auto* jobs_opt = analyze->add_option("--jobs", jobs, "Images processed in parallel");
    auto* min_opt = analyze->add_option("--min-size", min_size, "Smallest counted subject, px");
    auto* strict_opt = analyze->add_flag("--strict-labels", strict,
                                         "Reject labels split into several components");

    auto* validate = app.add_subcommand("validate", "Check a config file and print it resolved");
    std::string validate_path;
    validate->add_option("--config", validate_path, "key = value config file")->required();

    auto* version = app.add_subcommand("version", "Print the version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (version->parsed()) {
        std::cout << "cellmorph " << CELLMORPH_VERSION << "\n";
        return kExitOk;
    }

    if (validate->parsed()) {
        try {
            const RunConfig c = load_config(validate_path);
            std::cout << format_config(c);
            return kExitOk;
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    }

    RunConfig config;
    try {
        if (!config_path.empty()) config = load_config(config_path);
        // Command line wins over the file; values go through the same checks.
        std::map<std::string, std::string> overrides;
        if (!root.empty()) overrides["root"] = root;
        if (!out.empty()) overrides["out"] = out;
        if (pitch_opt->count()) overrides["pitch"] = pitch_opt->as<std::string>();
        if (jobs_opt->count()) overrides["jobs"] = jobs_opt->as<std::string>();
        if (min_opt->count()) overrides["min_size"] = min_opt->as<std::string>();
        if (strict_opt->count()) overrides["strict_labels"] = "true";
        config = validate_config(overrides, std::move(config));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    const RunSummary s = run_batch(config);
    if (s.exit_code != kExitOk) {
        std::cerr << (s.exit_code == kExitConfig ? "config error: " : "error: ") << s.error << "\n";
        return s.exit_code;
    }
    std::cout << "processed " << s.images_processed << " of " << s.images_total << " image(s), "
              << s.warnings << " warning(s); results in " << config.out.string() << "\n";
    return kExitOk;
}
