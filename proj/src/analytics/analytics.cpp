#include "favis/analytics.hpp"

#include "favis/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace favis {

namespace {

// Per-variable ascending list of factors whose loading passes the threshold.
std::vector<std::vector<std::size_t>> large_factor_sets(const Matrix& lambda, Threshold threshold) {
    std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(lambda.rows()));
    for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
        for (Eigen::Index k = 0; k < lambda.cols(); ++k) {
            if (threshold.passes(lambda(i, k))) {
                sets[static_cast<std::size_t>(i)].push_back(static_cast<std::size_t>(k));
            }
        }
    }
    return sets;
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::size_t choose2(std::size_t m) { return m < 2 ? 0 : m * (m - 1) / 2; }

std::size_t argmax_abs(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    std::size_t best = 0;
    for (Eigen::Index k = 1; k < row.size(); ++k) {
        if (std::abs(row(k)) > std::abs(row(static_cast<Eigen::Index>(best)))) {
            best = static_cast<std::size_t>(k);
        }
    }
    return best;
}

void check_index(std::size_t index, std::size_t count, const char* what) {
    if (index >= count) {
        throw Error(ErrorCode::IndexOutOfRange, std::string(what) + " index " + std::to_string(index) +
                                                    " out of range (count " + std::to_string(count) + ")");
    }
}

std::vector<std::size_t> descending_abs_order(const Eigen::Ref<const Vector>& values) {
    std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(values(static_cast<Eigen::Index>(a))) > std::abs(values(static_cast<Eigen::Index>(b)));
    });
    return order;
}

}  // namespace

Threshold::Threshold(double alpha) : alpha_(alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "threshold must be finite and nonnegative");
    }
}

bool Threshold::passes(double loading) const noexcept { return std::abs(loading) > alpha_; }

std::size_t MaskedLoadings::visible_count() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return c.has_value(); }));
}

std::string_view to_string(NetworkMode mode) noexcept {
    return mode == NetworkMode::dominant_factor ? "dominant-factor" : "cross-load-count";
}

std::optional<NetworkMode> parse_network_mode(std::string_view text) noexcept {
    if (text == "dominant-factor") return NetworkMode::dominant_factor;
    if (text == "cross-load-count") return NetworkMode::cross_load_count;
    return std::nullopt;
}

MaskedLoadings apply_threshold(const FactorModel& model, Threshold threshold, bool absolute) {
    const Matrix& lambda = model.loadings();
    MaskedLoadings masked;
    masked.rows = model.variable_count();
    masked.cols = model.factor_count();
    masked.absolute = absolute;
    masked.cells.reserve(masked.rows * masked.cols);
    for (Eigen::Index i = 0; i < lambda.rows(); ++i) {
        for (Eigen::Index k = 0; k < lambda.cols(); ++k) {
            const double value = lambda(i, k);
            if (threshold.passes(value)) {
                masked.cells.emplace_back(absolute ? std::abs(value) : value);
            } else {
                masked.cells.emplace_back(std::nullopt);
            }
        }
    }
    return masked;
}

CrossLoadingReport find_cross_loadings(const FactorModel& model, Threshold threshold) {
    CrossLoadingReport report;
    auto sets = large_factor_sets(model.loadings(), threshold);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].size() >= 2) {
            report.pair_count += choose2(sets[i].size());
            report.variables.push_back({i, std::move(sets[i])});
        }
    }
    return report;
}

RedundantLoadingReport find_redundant_loadings(const FactorModel& model, Threshold threshold) {
    RedundantLoadingReport report;
    const auto sets = large_factor_sets(model.loadings(), threshold);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].size() < 2) {
            continue;
        }
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            const auto shared = intersect(sets[i], sets[j]);
            for (std::size_t a = 0; a < shared.size(); ++a) {
                for (std::size_t b = a + 1; b < shared.size(); ++b) {
                    report.quadruples.push_back({i, j, shared[a], shared[b]});
                }
            }
        }
    }
    return report;
}

VariableNetwork build_variable_network(const FactorModel& model, Threshold threshold, NetworkMode mode) {
    const Matrix& lambda = model.loadings();
    const auto sets = large_factor_sets(lambda, threshold);
    VariableNetwork network;
    network.mode = mode;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        network.nodes.push_back({i, argmax_abs(lambda.row(row)), sets[i].size() >= 2 ? sets[i].size() : 0});
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].empty()) {
            continue;
        }
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            auto shared = intersect(sets[i], sets[j]);
            if (shared.empty()) {
                continue;
            }
            std::size_t dominant = shared.front();
            double best = -1.0;
            for (const auto k : shared) {
                const auto col = static_cast<Eigen::Index>(k);
                const double mean =
                    0.5 * (std::abs(lambda(static_cast<Eigen::Index>(i), col)) + std::abs(lambda(static_cast<Eigen::Index>(j), col)));
                if (mean > best) {
                    best = mean;
                    dominant = k;
                }
            }
            const auto count = shared.size();
            network.edges.push_back({i, j, std::move(shared), dominant, count});
        }
    }
    return network;
}

std::vector<EcdfPoint> loading_ecdf(const FactorModel& model) {
    std::vector<double> values(static_cast<std::size_t>(model.loadings().size()));
    Eigen::Map<Vector>(values.data(), model.loadings().size()) = model.loadings().reshaped().cwiseAbs();
    std::sort(values.begin(), values.end());
    const double total = static_cast<double>(values.size());
    std::vector<EcdfPoint> points;
    for (std::size_t n = 0; n < values.size(); ++n) {
        if (n + 1 < values.size() && values[n + 1] == values[n]) {
            continue;
        }
        points.push_back({values[n], static_cast<double>(n + 1) / total});
    }
    return points;
}

double ecdf_at(const std::vector<EcdfPoint>& ecdf, double value) {
    const auto it = std::upper_bound(ecdf.begin(), ecdf.end(), value,
                                     [](double v, const EcdfPoint& point) { return v < point.value; });
    return it == ecdf.begin() ? 0.0 : std::prev(it)->fraction;
}

double information_loss(const FactorModel& model, Threshold threshold) {
    const Matrix& lambda = model.loadings();
    const auto hidden = (lambda.array().abs() <= threshold.alpha()).count();
    return static_cast<double>(hidden) / static_cast<double>(lambda.size());
}

std::vector<double> default_sweep_grid(const FactorModel& model) {
    constexpr int kPoints = 101;
    const double top = model.loadings().cwiseAbs().maxCoeff();
    std::vector<double> grid(kPoints);
    for (int n = 0; n < kPoints; ++n) {
        grid[static_cast<std::size_t>(n)] = top * static_cast<double>(n) / static_cast<double>(kPoints - 1);
    }
    grid.back() = top;
    return grid;
}

ThresholdSweep threshold_sweep(const FactorModel& model, const std::vector<double>& grid) {
    if (grid.empty()) {
        throw Error(ErrorCode::EmptyGrid, "threshold sweep needs at least one alpha");
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw Error(ErrorCode::InvalidArgument, "threshold grid must be sorted ascending");
    }
    ThresholdSweep sweep;
    sweep.points.reserve(grid.size());
    for (const double alpha : grid) {
        const Threshold threshold(alpha);
        const auto sets = large_factor_sets(model.loadings(), threshold);
        SweepPoint point;
        point.alpha = alpha;
        point.information_loss = information_loss(model, threshold);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            if (sets[i].size() >= 2) {
                point.cross_loading_count += choose2(sets[i].size());
            }
            for (std::size_t j = i + 1; j < sets.size(); ++j) {
                const auto shared = intersect(sets[i], sets[j]).size();
                point.edge_count += shared > 0 ? 1 : 0;
                point.redundant_count += choose2(shared);
            }
        }
        sweep.points.push_back(point);
    }
    return sweep;
}

TagSummary tag_summary(const FactorModel& model, Threshold threshold, const Codebook& codebook, bool normalized) {
    TagSummary summary;
    summary.normalized = normalized;
    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < model.variable_names().size(); ++i) {
        index_of.emplace(model.variable_names()[i], i);
    }
    for (const auto& [variable, entry] : codebook.entries()) {
        if (index_of.count(variable) == 0) {
            summary.warnings.push_back("codebook entry '" + variable + "' does not name a model variable; ignored");
        }
    }

    const Matrix& lambda = model.loadings();
    summary.factors.resize(model.factor_count());
    for (std::size_t k = 0; k < model.factor_count(); ++k) {
        std::map<std::string, std::size_t> counts;
        std::size_t total = 0;
        for (const auto& [variable, entry] : codebook.entries()) {
            const auto found = index_of.find(variable);
            if (found == index_of.end() ||
                !threshold.passes(lambda(static_cast<Eigen::Index>(found->second), static_cast<Eigen::Index>(k)))) {
                continue;
            }
            for (const auto& tag : entry.tags) {
                ++counts[tag];
                ++total;
            }
        }
        auto& values = summary.factors[k];
        for (const auto& [tag, count] : counts) {
            const double raw = static_cast<double>(count);
            values.push_back({tag, normalized ? raw / static_cast<double>(total) : raw});
        }
        // counts is keyed by tag, so a stable sort leaves ties in name order.
        std::stable_sort(values.begin(), values.end(),
                         [](const TagValue& a, const TagValue& b) { return a.value > b.value; });
    }
    return summary;
}

std::vector<std::size_t> sort_by_factor(const FactorModel& model, std::size_t factor) {
    check_index(factor, model.factor_count(), "factor");
    return descending_abs_order(model.loadings().col(static_cast<Eigen::Index>(factor)));
}

std::vector<std::size_t> sort_by_variable(const FactorModel& model, std::size_t variable) {
    check_index(variable, model.variable_count(), "variable");
    return descending_abs_order(model.loadings().row(static_cast<Eigen::Index>(variable)).transpose());
}

std::vector<WordWeight> word_cloud_weights(const FactorModel& model, std::size_t factor) {
    check_index(factor, model.factor_count(), "factor");
    const auto column = model.loadings().col(static_cast<Eigen::Index>(factor));
    const double top = column.cwiseAbs().maxCoeff();
    std::vector<WordWeight> weights;
    weights.reserve(model.variable_count());
    for (std::size_t i = 0; i < model.variable_count(); ++i) {
        const double loading = column(static_cast<Eigen::Index>(i));
        weights.push_back({model.variable_names()[i], top > 0.0 ? std::abs(loading) / top : 0.0, loading});
    }
    return weights;
}

FactorGraph factor_graph(const FactorModel& model, double min_abs_corr) {
    if (!(min_abs_corr >= 0.0 && min_abs_corr < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "min_abs_corr must lie in [0, 1)");
    }
    const Matrix& phi = model.factor_correlations();
    FactorGraph graph;
    graph.factor_count = model.factor_count();
    for (std::size_t k = 0; k < graph.factor_count; ++k) {
        for (std::size_t l = k + 1; l < graph.factor_count; ++l) {
            const double r = phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            if (std::abs(r) > min_abs_corr) {
                graph.edges.push_back({k, l, r});
            }
        }
    }
    return graph;
}

std::vector<std::size_t> search_variables(const FactorModel& model, std::string_view query) {
    const auto lower = [](std::string_view text) {
        std::string out(text);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    const std::string needle = lower(query);
    std::vector<std::size_t> hits;
    for (std::size_t i = 0; i < model.variable_names().size(); ++i) {
        if (lower(model.variable_names()[i]).find(needle) != std::string::npos) {
            hits.push_back(i);
        }
    }
    return hits;
}

ThresholdAnalytics analyze(const FactorModel& model, Threshold threshold, const Codebook* codebook) {
    ThresholdAnalytics out;
    out.alpha = threshold.alpha();
    out.matrix = apply_threshold(model, threshold, false);
    out.cross_loadings = find_cross_loadings(model, threshold);
    out.redundant_loadings = find_redundant_loadings(model, threshold);
    out.network = build_variable_network(model, threshold, NetworkMode::dominant_factor);
    out.information_loss = information_loss(model, threshold);
    if (codebook != nullptr) {
        out.tags = tag_summary(model, threshold, *codebook, false);
        out.tags_normalized = tag_summary(model, threshold, *codebook, true);
    }
    return out;
}

}  // namespace favis
