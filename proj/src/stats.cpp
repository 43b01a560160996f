#include "cellmorph/stats.hpp"

#include "cellmorph/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace cellmorph {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;

// Continued fraction for I_x(a, b), evaluated by the modified Lentz method.
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double md = m;
        const double m2 = 2.0 * md;
        double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge in " +
                           std::to_string(kMaxIterations) + " iterations");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw StatsError("incomplete beta needs a > 0 and b > 0");
    if (!(x >= 0.0 && x <= 1.0)) throw StatsError("incomplete beta argument outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, int d1, int d2) {
    if (d1 < 1 || d2 < 1) throw StatsError("F distribution needs d1 >= 1 and d2 >= 1");
    if (std::isnan(x) || x < 0.0) throw StatsError("F distribution argument must be >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double a = 0.5 * d1;
    const double b = 0.5 * d2;
    const double t = d1 * x;
    // I_{t/(t+d2)}(a, b); the complement form keeps precision for large x.
    const double z = t / (t + d2);
    if (z > 0.5) return 1.0 - regularized_incomplete_beta(d2 / (t + d2), b, a);
    return regularized_incomplete_beta(z, a, b);
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw StatsError("ANOVA needs at least 2 groups");
    std::size_t total = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) throw StatsError("every ANOVA group needs at least 2 samples");
        total += g.size();
    }
    const std::size_t k = groups.size();

    AnovaResult r;
    r.df_between = static_cast<int>(k - 1);
    r.df_within = static_cast<int>(total - k);

    double sum = 0.0;
    for (const auto& g : groups) {
        const double s = std::accumulate(g.begin(), g.end(), 0.0);
        r.group_means.push_back(s / static_cast<double>(g.size()));
        sum += s;
    }
    r.grand_mean = sum / static_cast<double>(total);

    double ss_between = 0.0, ss_within = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double d = r.group_means[j] - r.grand_mean;
        ss_between += static_cast<double>(groups[j].size()) * d * d;
        for (double x : groups[j]) {
            const double e = x - r.group_means[j];
            ss_within += e * e;
        }
    }
    const double ms_between = ss_between / r.df_between;
    const double ms_within = ss_within / r.df_within;

    if (ms_within == 0.0) {
        if (ms_between > 0.0) {
            r.f_stat = std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        } else {
            r.f_stat = 0.0;
            r.p_value = 1.0;
        }
        return r;
    }
    r.f_stat = ms_between / ms_within;
    r.p_value = std::clamp(1.0 - f_cdf(r.f_stat, r.df_between, r.df_within), 0.0, 1.0);
    return r;
}

FeatureTable::FeatureTable(std::vector<std::string> features) : features_(std::move(features)) {}

bool FeatureTable::has_feature(const std::string& name) const {
    return std::find(features_.begin(), features_.end(), name) != features_.end();
}

std::size_t FeatureTable::index_of(const std::string& feature) const {
    const auto it = std::find(features_.begin(), features_.end(), feature);
    if (it == features_.end()) throw StatsError("unknown feature '" + feature + "'");
    return static_cast<std::size_t>(it - features_.begin());
}

void FeatureTable::add(const std::string& group,
                       const std::map<std::string, std::optional<double>>& values) {
    Row row{group, std::vector<std::optional<double>>(features_.size())};
    for (const auto& [name, value] : values) row.values[index_of(name)] = value;
    rows_.push_back(std::move(row));
}

std::map<std::string, std::vector<double>> FeatureTable::samples(const std::string& feature) const {
    const std::size_t idx = index_of(feature);
    std::map<std::string, std::vector<double>> out;
    for (const auto& row : rows_) {
        if (row.values[idx]) out[row.group].push_back(*row.values[idx]);
    }
    return out;
}

GroupStats describe(std::span<const double> values) {
    if (values.empty()) throw StatsError("cannot describe an empty sample");
    GroupStats s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    // Rounding can nudge the mean a hair outside [min, max] for constant data.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::vector<GroupStats> summarize_groups(const FeatureTable& table, const std::string& feature) {
    std::vector<GroupStats> out;
    for (const auto& [group, values] : table.samples(feature)) {
        GroupStats s = describe(values);
        s.group = group;
        s.feature = feature;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace cellmorph
