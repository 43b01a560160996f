#include "cellmorph/errors.hpp"
#include "cellmorph/pipeline.hpp"
#include "cellmorph/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace cellmorph {

namespace {

const std::vector<std::string> kKeys = {
    "root",        "out",        "pitch",    "cyto_suffix",   "nuclei_suffix", "dapi_suffix",
    "fitc_suffix", "min_size",   "strict_labels", "jobs",     "features",      "manifest",
};

// Common names for the pixel pitch in other tools.
const std::map<std::string, std::string, std::less<>> kAliases = {
    {"pxsize", "pitch"},     {"px_size", "pitch"},   {"pixel_size", "pitch"},
    {"pixelsize", "pitch"},  {"um_per_px", "pitch"}, {"resolution", "pitch"},
    {"scale", "pitch"},      {"min_area", "min_size"}, {"threads", "jobs"},
    {"output", "out"},       {"input", "root"},
};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    std::string s = v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::string suffix(const std::string& key, const std::string& v) {
    if (v.empty()) throw ConfigError(key, "suffix must not be empty");
    if (v.find_first_of("/\\") != std::string::npos) {
        throw ConfigError(key, "suffix must not contain path separators");
    }
    return v;
}

}  // namespace

const std::vector<std::string>& group_feature_names() {
    static const std::vector<std::string> names = {
        "cell_area_um2",    "cell_roundness",    "coverage_cells", "nucleus_area_um2",
        "nucleus_roundness", "coverage_nuclei",  "ratio",          "voronoi_entropy",
        "mean_csm",         "density_per_mm2",   "n_cells",        "n_nuclei",
    };
    return names;
}

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(t).substr(0, eq));
        const std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, value).second) throw ConfigError(key, "key given twice");
    }
    return out;
}

std::optional<std::string> suggest_key(std::string_view unknown) {
    std::string lower(unknown);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    std::replace(lower.begin(), lower.end(), '-', '_');
    if (auto it = kAliases.find(lower); it != kAliases.end()) return it->second;
    std::optional<std::string> best;
    std::size_t best_d = 3;
    for (const auto& k : kKeys) {
        const std::size_t d = edit_distance(lower, k);
        if (d <= best_d && d < k.size()) {
            if (!best || d < best_d) best = k;
            best_d = d;
        }
    }
    return best;
}

RunConfig validate_config(const std::map<std::string, std::string>& values, RunConfig base) {
    for (const auto& [key, _] : values) {
        if (std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end()) continue;
        std::string msg = "unknown key";
        if (auto s = suggest_key(key)) msg += "; did you mean \"" + *s + "\"?";
        throw ConfigError(key, msg);
    }
    RunConfig c = std::move(base);
    for (const auto& [key, v] : values) {
        if (key == "root") {
            c.root = v;
        } else if (key == "out") {
            c.out = v;
        } else if (key == "pitch") {
            c.pitch = to_double(key, v);
            if (!std::isfinite(c.pitch) || c.pitch <= 0.0) {
                throw ConfigError(key, "must be a positive number of micrometers, got " + v);
            }
        } else if (key == "cyto_suffix") {
            c.layout.cyto_suffix = suffix(key, v);
        } else if (key == "nuclei_suffix") {
            c.layout.nuclei_suffix = suffix(key, v);
        } else if (key == "dapi_suffix") {
            c.layout.dapi_suffix = suffix(key, v);
        } else if (key == "fitc_suffix") {
            c.layout.fitc_suffix = suffix(key, v);
        } else if (key == "min_size") {
            const long long n = to_integer(key, v);
            if (n < 0) throw ConfigError(key, "must be >= 0, got " + v);
            c.min_size = static_cast<std::size_t>(n);
        } else if (key == "strict_labels") {
            c.strict_labels = to_bool(key, v);
        } else if (key == "jobs") {
            const long long n = to_integer(key, v);
            if (n < 1 || n > 1024) throw ConfigError(key, "must be between 1 and 1024, got " + v);
            c.jobs = static_cast<unsigned>(n);
        } else if (key == "features") {
            c.features.clear();
            std::string_view rest = v;
            while (!rest.empty()) {
                const auto cut = rest.find(',');
                const std::string name = trim(rest.substr(0, cut));
                const auto& known = group_feature_names();
                if (std::find(known.begin(), known.end(), name) == known.end()) {
                    throw ConfigError(key, "unknown feature '" + name + "'");
                }
                if (std::find(c.features.begin(), c.features.end(), name) == c.features.end()) {
                    c.features.push_back(name);
                }
                if (cut == std::string_view::npos) break;
                rest.remove_prefix(cut + 1);
            }
        } else if (key == "manifest") {
            if (v.empty()) {
                c.manifest.reset();
            } else {
                c.manifest = v;
            }
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError("", e.what());
    }
    RunConfig c = validate_config(parse_key_values(text), std::move(base));
    // Relative paths in a config file are relative to the file.
    const auto dir = path.parent_path();
    auto anchor = [&](std::filesystem::path& p) {
        if (!p.empty() && p.is_relative()) p = dir / p;
    };
    anchor(c.root);
    anchor(c.out);
    if (c.manifest) anchor(*c.manifest);
    return c;
}

void check_run_config(const RunConfig& c) {
    if (c.root.empty()) throw ConfigError("root", "input root is required");
    if (c.out.empty()) throw ConfigError("out", "output directory is required");
    if (!std::isfinite(c.pitch) || c.pitch <= 0.0) throw ConfigError("pitch", "must be positive");
    if (c.jobs < 1) throw ConfigError("jobs", "must be >= 1");
    const auto norm = [](const std::filesystem::path& p) {
        auto n = std::filesystem::weakly_canonical(std::filesystem::absolute(p)).lexically_normal();
        return n.has_filename() ? n : n.parent_path();
    };
    if (norm(c.root) == norm(c.out)) throw ConfigError("out", "output directory must differ from root");
}

std::string format_config(const RunConfig& c) {
    std::string s;
    auto line = [&](std::string_view k, const std::string& v) {
        s += std::string(k) + " = " + v + "\n";
    };
    line("root", c.root.string());
    line("out", c.out.string());
    line("pitch", format_number(c.pitch));
    line("cyto_suffix", c.layout.cyto_suffix);
    line("nuclei_suffix", c.layout.nuclei_suffix);
    line("dapi_suffix", c.layout.dapi_suffix);
    line("fitc_suffix", c.layout.fitc_suffix);
    line("min_size", std::to_string(c.min_size));
    line("strict_labels", c.strict_labels ? "true" : "false");
    line("jobs", std::to_string(c.jobs));
    std::string f;
    for (const auto& name : c.features.empty() ? group_feature_names() : c.features) {
        if (!f.empty()) f += ',';
        f += name;
    }
    line("features", f);
    line("manifest", c.manifest ? c.manifest->string() : "");
    return s;
}

}  // namespace cellmorph
