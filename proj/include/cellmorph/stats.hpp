#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cellmorph {

/// Regularized incomplete beta I_x(a, b), continued fraction (modified
/// Lentz) with the usual symmetry switch. Throws ConvergenceError after 200
/// iterations without convergence.
double regularized_incomplete_beta(double x, double a, double b);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
/// Throws StatsError for d1 < 1, d2 < 1, or negative/NaN x.
double f_cdf(double x, int d1, int d2);

struct GroupStats {
    std::string group;
    std::string feature;
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // n-1 denominator; 0 when n == 1
    double min = 0.0;
    double max = 0.0;
};

struct AnovaResult {
    std::string feature;
    double f_stat = 0.0;
    int df_between = 0;
    int df_within = 0;
    double p_value = 1.0;
    std::vector<double> group_means;
    double grand_mean = 0.0;
};

/// Plain one-way ANOVA (no Welch correction). Needs >= 2 groups of >= 2
/// samples each; throws StatsError otherwise. Zero within-group variance
/// gives F = +inf, p = 0, unless the between-group term is also zero
/// (F = 0, p = 1).
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

/// Long-format table of per-image feature values keyed by group.
class FeatureTable {
public:
    explicit FeatureTable(std::vector<std::string> features = {});

    const std::vector<std::string>& features() const noexcept { return features_; }
    bool has_feature(const std::string& name) const;

    /// Adds one record; missing features are left empty.
    void add(const std::string& group, const std::map<std::string, std::optional<double>>& values);

    /// Non-missing values of `feature` per group, groups in name order.
    std::map<std::string, std::vector<double>> samples(const std::string& feature) const;

    std::size_t size() const noexcept { return rows_.size(); }

private:
    struct Row {
        std::string group;
        std::vector<std::optional<double>> values;
    };
    std::vector<std::string> features_;
    std::vector<Row> rows_;

    std::size_t index_of(const std::string& feature) const;
};

GroupStats describe(std::span<const double> values);

/// Per-group statistics of one feature, ordered by group name. Groups with
/// no value for the feature are omitted. Throws StatsError for unknown
/// features.
std::vector<GroupStats> summarize_groups(const FeatureTable& table, const std::string& feature);

}  // namespace cellmorph
