#pragma once

#include "favis/model.hpp"

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace favis {

/// Loading-magnitude cutoff alpha >= 0. A loading is "large" iff |lambda| > alpha.
class Threshold {
public:
    explicit Threshold(double alpha);

    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] bool passes(double loading) const noexcept;

    bool operator==(const Threshold&) const = default;

private:
    double alpha_;
};

/// p x q loadings with sub-threshold cells hidden (row-major).
struct MaskedLoadings {
    std::size_t rows = 0;
    std::size_t cols = 0;
    bool absolute = false;
    std::vector<std::optional<double>> cells;

    [[nodiscard]] const std::optional<double>& at(std::size_t variable, std::size_t factor) const {
        return cells[variable * cols + factor];
    }
    [[nodiscard]] std::size_t visible_count() const;

    bool operator==(const MaskedLoadings&) const = default;
};

struct CrossLoading {
    std::size_t variable = 0;
    std::vector<std::size_t> factors;  // ascending, size >= 2

    bool operator==(const CrossLoading&) const = default;
};

struct CrossLoadingReport {
    std::vector<CrossLoading> variables;  // ascending by variable
    std::size_t pair_count = 0;           // sum of C(m, 2)

    bool operator==(const CrossLoadingReport&) const = default;
};

/// Variables i < j both large on factors k < l.
struct RedundantLoading {
    std::size_t first_variable = 0;
    std::size_t second_variable = 0;
    std::size_t first_factor = 0;
    std::size_t second_factor = 0;

    auto operator<=>(const RedundantLoading&) const = default;
};

struct RedundantLoadingReport {
    std::vector<RedundantLoading> quadruples;  // lexicographic (i, j, k, l)

    bool operator==(const RedundantLoadingReport&) const = default;
};

enum class NetworkMode { dominant_factor, cross_load_count };

[[nodiscard]] std::string_view to_string(NetworkMode mode) noexcept;
[[nodiscard]] std::optional<NetworkMode> parse_network_mode(std::string_view text) noexcept;

struct NetworkNode {
    std::size_t variable = 0;
    std::size_t dominant_factor = 0;   // argmax_k |lambda_ik|, lowest index on ties
    std::size_t cross_load_count = 0;  // number of large loadings if >= 2, else 0

    bool operator==(const NetworkNode&) const = default;
};

struct NetworkEdge {
    std::size_t source = 0;  // source < target
    std::size_t target = 0;
    std::vector<std::size_t> factors;  // factors on which both are large, ascending
    std::size_t dominant_factor = 0;   // contributing factor with largest mean |lambda|
    std::size_t cross_load_count = 0;  // factors.size()

    bool operator==(const NetworkEdge&) const = default;
};

/// Co-loading graph over variables. Both colorings are always populated; the
/// mode records which one a view should use.
struct VariableNetwork {
    NetworkMode mode = NetworkMode::dominant_factor;
    std::vector<NetworkNode> nodes;
    std::vector<NetworkEdge> edges;  // lexicographic (source, target)

    bool operator==(const VariableNetwork&) const = default;
};

struct EcdfPoint {
    double value = 0.0;
    double fraction = 0.0;

    bool operator==(const EcdfPoint&) const = default;
};

struct SweepPoint {
    double alpha = 0.0;
    double information_loss = 0.0;
    std::size_t cross_loading_count = 0;
    std::size_t redundant_count = 0;
    std::size_t edge_count = 0;

    bool operator==(const SweepPoint&) const = default;
};

struct ThresholdSweep {
    std::vector<SweepPoint> points;

    bool operator==(const ThresholdSweep&) const = default;
};

struct TagValue {
    std::string tag;
    double value = 0.0;

    bool operator==(const TagValue&) const = default;
};

struct TagSummary {
    bool normalized = false;
    std::vector<std::vector<TagValue>> factors;  // one list per factor
    std::vector<std::string> warnings;

    bool operator==(const TagSummary&) const = default;
};

struct WordWeight {
    std::string variable;
    double weight = 0.0;   // |lambda| / max |lambda| in the column
    double loading = 0.0;  // signed

    bool operator==(const WordWeight&) const = default;
};

struct FactorEdge {
    std::size_t first = 0;
    std::size_t second = 0;
    double correlation = 0.0;

    bool operator==(const FactorEdge&) const = default;
};

struct FactorGraph {
    std::size_t factor_count = 0;
    std::vector<FactorEdge> edges;

    bool operator==(const FactorGraph&) const = default;
};

/// Every threshold-dependent structure at one alpha.
struct ThresholdAnalytics {
    double alpha = 0.0;
    MaskedLoadings matrix;
    CrossLoadingReport cross_loadings;
    RedundantLoadingReport redundant_loadings;
    VariableNetwork network;
    double information_loss = 0.0;
    std::optional<TagSummary> tags;
    std::optional<TagSummary> tags_normalized;

    bool operator==(const ThresholdAnalytics&) const = default;
};

[[nodiscard]] MaskedLoadings apply_threshold(const FactorModel& model, Threshold threshold, bool absolute = false);
[[nodiscard]] CrossLoadingReport find_cross_loadings(const FactorModel& model, Threshold threshold);
[[nodiscard]] RedundantLoadingReport find_redundant_loadings(const FactorModel& model, Threshold threshold);
[[nodiscard]] VariableNetwork build_variable_network(const FactorModel& model, Threshold threshold,
                                                     NetworkMode mode = NetworkMode::dominant_factor);

/// Sorted step points of the empirical CDF of |lambda| over all p*q cells.
[[nodiscard]] std::vector<EcdfPoint> loading_ecdf(const FactorModel& model);
/// Evaluates a step function returned by loading_ecdf.
[[nodiscard]] double ecdf_at(const std::vector<EcdfPoint>& ecdf, double value);

[[nodiscard]] double information_loss(const FactorModel& model, Threshold threshold);

/// Throws EmptyGrid for an empty grid, InvalidArgument for an unsorted or negative one.
[[nodiscard]] ThresholdSweep threshold_sweep(const FactorModel& model, const std::vector<double>& grid);
/// 101 evenly spaced points on [0, max |lambda|].
[[nodiscard]] std::vector<double> default_sweep_grid(const FactorModel& model);

[[nodiscard]] TagSummary tag_summary(const FactorModel& model, Threshold threshold, const Codebook& codebook,
                                     bool normalized);

/// Variable indices by descending |lambda_ik|; stable on ties.
[[nodiscard]] std::vector<std::size_t> sort_by_factor(const FactorModel& model, std::size_t factor);
/// Factor indices by descending |lambda_ik|; stable on ties.
[[nodiscard]] std::vector<std::size_t> sort_by_variable(const FactorModel& model, std::size_t variable);

[[nodiscard]] std::vector<WordWeight> word_cloud_weights(const FactorModel& model, std::size_t factor);

[[nodiscard]] FactorGraph factor_graph(const FactorModel& model, double min_abs_corr = 0.0);

/// Case-insensitive substring match on variable names; empty query matches all.
[[nodiscard]] std::vector<std::size_t> search_variables(const FactorModel& model, std::string_view query);

[[nodiscard]] ThresholdAnalytics analyze(const FactorModel& model, Threshold threshold,
                                         const Codebook* codebook = nullptr);

}  // namespace favis
