#include "cellmorph/errors.hpp"
#include "cellmorph/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

namespace cellmorph {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // also folds -0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        field_started = false;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                    continue;
                }
                quoted = false;
            } else {
                field += c;
            }
            ++i;
            continue;
        }
        switch (c) {
            case '"':
                quoted = true;
                field_started = true;
                break;
            case ',':
                row.push_back(std::move(field));
                field.clear();
                field_started = true;
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                field += c;
                field_started = true;
        }
        ++i;
    }
    if (quoted) throw IoError("unterminated quoted CSV field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::string format_flags(const SubjectFlags& flags) {
    std::string out;
    auto add = [&](bool on, std::string_view name) {
        if (!on) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(flags.small, "small");
    add(flags.multi_nucleate, "multi_nucleate");
    add(flags.clamped_roundness, "clamped_roundness");
    return out;
}

SubjectFlags parse_flags(std::string_view text) {
    SubjectFlags flags;
    while (!text.empty()) {
        const auto cut = text.find(';');
        const std::string_view name = text.substr(0, cut);
        if (name == "small") {
            flags.small = true;
        } else if (name == "multi_nucleate") {
            flags.multi_nucleate = true;
        } else if (name == "clamped_roundness") {
            flags.clamped_roundness = true;
        } else {
            throw IoError("unknown subject flag '" + std::string(name) + "'");
        }
        if (cut == std::string_view::npos) break;
        text.remove_prefix(cut + 1);
    }
    return flags;
}

namespace {

class RowWriter {
public:
    explicit RowWriter(std::string_view header) : out_(header) { out_ += '\n'; }

    RowWriter& text(std::string_view s) { return raw(csv_escape(s)); }
    RowWriter& num(double v) { return raw(format_number(v)); }
    RowWriter& integer(unsigned long long v) { return raw(std::to_string(v)); }
    RowWriter& opt(const std::optional<double>& v) { return raw(v ? format_number(*v) : ""); }
    RowWriter& end() {
        out_ += '\n';
        first_ = true;
        return *this;
    }
    std::string str() && { return std::move(out_); }

private:
    RowWriter& raw(const std::string& s) {
        if (!first_) out_ += ',';
        out_ += s;
        first_ = false;
        return *this;
    }
    std::string out_;
    bool first_ = true;
};

template <typename T, typename Key>
void sort_unique(std::vector<T>& rows, Key key, std::string_view what) {
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const T& a, const T& b) { return key(a) < key(b); });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!(key(rows[i - 1]) < key(rows[i]))) {
            throw IoError("duplicate " + std::string(what) + " key in report rows");
        }
    }
}

double parse_double(const std::string& s, std::string_view column) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw IoError("bad number '" + s + "' in column " + std::string(column));
    }
    return v;
}

unsigned long long parse_uint(const std::string& s, std::string_view column) {
    unsigned long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw IoError("bad integer '" + s + "' in column " + std::string(column));
    }
    return v;
}

std::optional<double> parse_opt(const std::string& s, std::string_view column) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, column);
}

std::vector<std::vector<std::string>> table_rows(std::string_view text, std::string_view header) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw IoError("CSV is empty; expected header: " + std::string(header));
    std::string got;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        if (i) got += ',';
        got += rows[0][i];
    }
    if (got != header) throw IoError("unexpected CSV header: " + got);
    const std::size_t columns = rows[0].size();
    rows.erase(rows.begin());
    for (const auto& r : rows) {
        if (r.size() != columns) {
            throw IoError("CSV row has " + std::to_string(r.size()) + " fields, expected " +
                          std::to_string(columns));
        }
    }
    return rows;
}

Channel parse_channel(const std::string& s) {
    if (s == to_string(Channel::cytoplasm)) return Channel::cytoplasm;
    if (s == to_string(Channel::nuclei)) return Channel::nuclei;
    throw IoError("unknown channel '" + s + "'");
}

}  // namespace

std::string subject_csv(std::vector<FeatureRecord> records) {
    sort_unique(records,
                [](const FeatureRecord& r) {
                    return std::tie(r.group, r.image_id, r.channel, r.label);
                },
                "(group, image, channel, label)");
    RowWriter w(kSubjectHeader);
    for (const auto& r : records) {
        w.text(r.group).text(r.image_id).text(to_string(r.channel)).integer(r.label);
        w.integer(r.area_px).num(r.area_um2).num(r.perimeter_um).num(r.roundness);
        w.num(r.centroid_x_px).num(r.centroid_y_px);
        if (r.paired_label) {
            w.integer(*r.paired_label);
        } else {
            w.text("");
        }
        w.opt(r.ratio).text(format_flags(r.flags)).end();
    }
    return std::move(w).str();
}

std::string image_csv(std::vector<ImageRecord> records) {
    sort_unique(records, [](const ImageRecord& r) { return std::tie(r.group, r.image_id); },
                "(group, image)");
    RowWriter w(kImageHeader);
    for (const auto& r : records) {
        w.text(r.group).text(r.image_id).integer(r.n_cells).integer(r.n_nuclei);
        w.num(r.coverage_cells).num(r.coverage_nuclei).num(r.density_per_mm2);
        w.opt(r.voronoi_entropy).opt(r.mean_csm).end();
    }
    return std::move(w).str();
}

std::string group_csv(std::vector<GroupStats> stats) {
    sort_unique(stats, [](const GroupStats& s) { return std::tie(s.group, s.feature); },
                "(group, feature)");
    RowWriter w(kGroupHeader);
    for (const auto& s : stats) {
        w.text(s.group).text(s.feature).integer(s.n).num(s.mean).num(s.std).num(s.min).num(s.max);
        w.end();
    }
    return std::move(w).str();
}

std::string anova_csv(std::vector<AnovaResult> results) {
    sort_unique(results, [](const AnovaResult& r) { return std::tie(r.feature); }, "feature");
    RowWriter w(kAnovaHeader);
    for (const auto& r : results) {
        w.text(r.feature).num(r.f_stat).integer(static_cast<unsigned long long>(r.df_between));
        w.integer(static_cast<unsigned long long>(r.df_within)).num(r.p_value).end();
    }
    return std::move(w).str();
}

void write_subject_csv(const std::vector<FeatureRecord>& records,
                       const std::filesystem::path& path) {
    write_text_file(path, subject_csv(records));
}

void write_image_csv(const std::vector<ImageRecord>& records, const std::filesystem::path& path) {
    write_text_file(path, image_csv(records));
}

void write_group_csv(const std::vector<GroupStats>& stats, const std::filesystem::path& path) {
    write_text_file(path, group_csv(stats));
}

void write_anova_csv(const std::vector<AnovaResult>& results, const std::filesystem::path& path) {
    write_text_file(path, anova_csv(results));
}

std::vector<FeatureRecord> parse_subject_csv(std::string_view text) {
    std::vector<FeatureRecord> out;
    for (const auto& f : table_rows(text, kSubjectHeader)) {
        FeatureRecord r;
        r.group = f[0];
        r.image_id = f[1];
        r.channel = parse_channel(f[2]);
        r.label = static_cast<Label>(parse_uint(f[3], "label"));
        r.area_px = parse_uint(f[4], "area_px");
        r.area_um2 = parse_double(f[5], "area_um2");
        r.perimeter_um = parse_double(f[6], "perimeter_um");
        r.roundness = parse_double(f[7], "roundness");
        r.centroid_x_px = parse_double(f[8], "centroid_x_px");
        r.centroid_y_px = parse_double(f[9], "centroid_y_px");
        if (!f[10].empty()) r.paired_label = static_cast<Label>(parse_uint(f[10], "paired_label"));
        r.ratio = parse_opt(f[11], "ratio");
        r.flags = parse_flags(f[12]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ImageRecord> parse_image_csv(std::string_view text) {
    std::vector<ImageRecord> out;
    for (const auto& f : table_rows(text, kImageHeader)) {
        ImageRecord r;
        r.group = f[0];
        r.image_id = f[1];
        r.n_cells = parse_uint(f[2], "n_cells");
        r.n_nuclei = parse_uint(f[3], "n_nuclei");
        r.coverage_cells = parse_double(f[4], "coverage_cells");
        r.coverage_nuclei = parse_double(f[5], "coverage_nuclei");
        r.density_per_mm2 = parse_double(f[6], "density_per_mm2");
        r.voronoi_entropy = parse_opt(f[7], "voronoi_entropy");
        r.mean_csm = parse_opt(f[8], "mean_csm");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<GroupStats> parse_group_csv(std::string_view text) {
    std::vector<GroupStats> out;
    for (const auto& f : table_rows(text, kGroupHeader)) {
        GroupStats s;
        s.group = f[0];
        s.feature = f[1];
        s.n = parse_uint(f[2], "n");
        s.mean = parse_double(f[3], "mean");
        s.std = parse_double(f[4], "std");
        s.min = parse_double(f[5], "min");
        s.max = parse_double(f[6], "max");
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<AnovaResult> parse_anova_csv(std::string_view text) {
    std::vector<AnovaResult> out;
    for (const auto& f : table_rows(text, kAnovaHeader)) {
        AnovaResult r;
        r.feature = f[0];
        r.f_stat = parse_double(f[1], "f_stat");
        r.df_between = static_cast<int>(parse_uint(f[2], "df_between"));
        r.df_within = static_cast<int>(parse_uint(f[3], "df_within"));
        r.p_value = parse_double(f[4], "p_value");
        out.push_back(std::move(r));
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path.string());
    }
}

}  // namespace cellmorph
