#include "favis/analytics.hpp"
#include "favis/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace favis;

namespace {

const Threshold kHalf{0.5};

// Loadings on a 0.05 lattice so that ties with round thresholds actually occur.
Matrix lattice_matrix(Eigen::Index p, Eigen::Index q, std::mt19937_64& rng) {
    Matrix m = fixtures::random_matrix(p, q, rng);
    return (m * 20.0).array().round() / 20.0;
}

FactorModel oblique_model(const Matrix& loadings, const Matrix& phi) {
    FactorModelParts parts;
    parts.loadings = loadings;
    parts.factor_correlations = phi;
    parts.rotation = Rotation::oblimin(0.0);
    return FactorModel(std::move(parts));
}

Codebook random_codebook(const FactorModel& model, std::mt19937_64& rng,
                         std::vector<std::vector<std::string>>& tags_per_variable) {
    const std::vector<std::string> pool{"alpha", "beta", "gamma", "delta"};
    std::bernoulli_distribution coin(0.4);
    std::map<std::string, CodebookEntry> entries;
    tags_per_variable.assign(model.variable_names().size(), {});
    for (std::size_t i = 0; i < model.variable_names().size(); ++i) {
        CodebookEntry entry;
        for (const auto& tag : pool)
            if (coin(rng)) entry.tags.push_back(tag);
        tags_per_variable[i] = entry.tags;
        entries[model.variable_names()[i]] = entry;
    }
    return Codebook(std::move(entries));
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const VariableNetwork& network) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : network.edges) out.insert({e.source, e.target});
    return out;
}

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::IoError;
}

}  // namespace

TEST(ThresholdValue, RejectsNegativeAndNonFinite) {
    EXPECT_EQ(code_of([] { Threshold t(-0.1); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { Threshold t(std::nan("")); }), ErrorCode::InvalidArgument);
    EXPECT_FALSE(Threshold(0.5).passes(0.5));
    EXPECT_TRUE(Threshold(0.5).passes(-0.51));
}

TEST(ApplyThreshold, CanonicalExampleAtHalf) {
    const auto masked = apply_threshold(fixtures::canonical_model(), kHalf);
    EXPECT_EQ(masked.visible_count(), 6u);
    EXPECT_EQ(masked.at(0, 0), 0.8);
    EXPECT_EQ(masked.at(1, 0), 0.7);
    EXPECT_EQ(masked.at(1, 1), 0.6);
    EXPECT_EQ(masked.at(2, 1), 0.9);
    EXPECT_EQ(masked.at(3, 0), 0.6);
    EXPECT_EQ(masked.at(3, 1), 0.7);
    EXPECT_FALSE(masked.at(0, 1).has_value());
    EXPECT_FALSE(masked.at(2, 0).has_value());
}

TEST(ApplyThreshold, BoundaryIsStrict) {
    EXPECT_EQ(apply_threshold(fixtures::canonical_model(), Threshold(0.0)).visible_count(), 8u);
    EXPECT_EQ(apply_threshold(fixtures::canonical_model(), Threshold(0.9)).visible_count(), 0u);
}

TEST(ApplyThreshold, AbsoluteModeDropsSign) {
    Matrix l(2, 2);
    l << -0.8, 0.1, 0.2, 0.7;
    const auto masked = apply_threshold(fixtures::loadings_model(l), kHalf, true);
    EXPECT_EQ(masked.at(0, 0), 0.8);
    EXPECT_TRUE(masked.absolute);
    EXPECT_EQ(apply_threshold(fixtures::loadings_model(l), kHalf).at(0, 0), -0.8);
}

TEST(CrossLoadings, CanonicalExample) {
    const auto report = find_cross_loadings(fixtures::canonical_model(), kHalf);
    ASSERT_EQ(report.variables.size(), 2u);
    EXPECT_EQ(report.variables[0], (CrossLoading{1, {0, 1}}));
    EXPECT_EQ(report.variables[1], (CrossLoading{3, {0, 1}}));
    EXPECT_EQ(report.pair_count, 2u);
}

TEST(CrossLoadings, DiagonalHasNone) {
    Matrix l(2, 2);
    l << 0.9, 0, 0, 0.9;
    const auto report = find_cross_loadings(fixtures::loadings_model(l), kHalf);
    EXPECT_TRUE(report.variables.empty());
    EXPECT_EQ(report.pair_count, 0u);
}

TEST(CrossLoadings, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix l = lattice_matrix(12, 4, rng);
        std::size_t pairs = 0;
        const auto expected = oracle::cross_loadings(l, 0.4, &pairs);
        const auto report = find_cross_loadings(fixtures::loadings_model(l), Threshold(0.4));
        std::map<std::size_t, std::vector<std::size_t>> got;
        for (const auto& v : report.variables) got[v.variable] = v.factors;
        EXPECT_EQ(got, expected);
        EXPECT_EQ(report.pair_count, pairs);
    }
}

TEST(RedundantLoadings, CanonicalExample) {
    const auto report = find_redundant_loadings(fixtures::canonical_model(), kHalf);
    ASSERT_EQ(report.quadruples.size(), 1u);
    EXPECT_EQ(report.quadruples[0], (RedundantLoading{1, 3, 0, 1}));
}

TEST(RedundantLoadings, EmptyAtOrAboveMaximum) {
    std::mt19937_64 rng(4);
    const Matrix l = lattice_matrix(8, 3, rng);
    EXPECT_TRUE(find_redundant_loadings(fixtures::loadings_model(l), Threshold(l.cwiseAbs().maxCoeff())).quadruples.empty());
}

TEST(RedundantLoadings, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix l = lattice_matrix(10, 4, rng);
        const auto report = find_redundant_loadings(fixtures::loadings_model(l), Threshold(0.35));
        std::vector<oracle::Quad> got;
        for (const auto& r : report.quadruples)
            got.emplace_back(r.first_variable, r.second_variable, r.first_factor, r.second_factor);
        EXPECT_EQ(got, oracle::redundant(l, 0.35));
        EXPECT_TRUE(std::is_sorted(report.quadruples.begin(), report.quadruples.end()));
    }
}

TEST(VariableNetwork, CanonicalEdges) {
    const auto network = build_variable_network(fixtures::canonical_model(), kHalf);
    const std::set<std::pair<std::size_t, std::size_t>> expected{{0, 1}, {0, 3}, {1, 3}, {1, 2}, {2, 3}};
    EXPECT_EQ(edge_set(network), expected);
    for (const auto& e : network.edges) {
        if (e.source == 1 && e.target == 3) {
            EXPECT_EQ(e.factors, (std::vector<std::size_t>{0, 1}));
        }
    }
}

TEST(VariableNetwork, CanonicalDominantColoring) {
    const auto network = build_variable_network(fixtures::canonical_model(), kHalf, NetworkMode::dominant_factor);
    EXPECT_EQ(network.mode, NetworkMode::dominant_factor);
    ASSERT_EQ(network.nodes.size(), 4u);
    EXPECT_EQ(network.nodes[0].dominant_factor, 0u);
    EXPECT_EQ(network.nodes[1].dominant_factor, 0u);
    EXPECT_EQ(network.nodes[2].dominant_factor, 1u);
    EXPECT_EQ(network.nodes[3].dominant_factor, 1u);
    EXPECT_EQ(network.edges.front().source, 0u);
    EXPECT_EQ(network.edges.front().target, 1u);
    EXPECT_EQ(network.edges.front().dominant_factor, 0u);
}

TEST(VariableNetwork, CanonicalCountColoring) {
    const auto network = build_variable_network(fixtures::canonical_model(), kHalf, NetworkMode::cross_load_count);
    EXPECT_EQ(network.mode, NetworkMode::cross_load_count);
    for (const auto& e : network.edges) {
        EXPECT_EQ(e.cross_load_count, (e.source == 1 && e.target == 3) ? 2u : 1u);
    }
    EXPECT_EQ(network.nodes[0].cross_load_count, 0u);
    EXPECT_EQ(network.nodes[1].cross_load_count, 2u);
    EXPECT_EQ(network.nodes[2].cross_load_count, 0u);
    EXPECT_EQ(network.nodes[3].cross_load_count, 2u);
}

TEST(VariableNetwork, IsolatedVariablesStayAsNodes) {
    Matrix l(3, 2);
    l << 0.9, 0.0, 0.8, 0.0, 0.0, 0.1;
    const auto network = build_variable_network(fixtures::loadings_model(l), kHalf);
    EXPECT_EQ(network.nodes.size(), 3u);
    EXPECT_EQ(network.edges.size(), 1u);
}

TEST(VariableNetwork, MatchesExhaustiveEnumeration) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix l = lattice_matrix(15, 3, rng);
        const auto network = build_variable_network(fixtures::loadings_model(l), Threshold(0.3));
        std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> got;
        for (const auto& e : network.edges) got[{e.source, e.target}] = e.factors;
        EXPECT_EQ(got, oracle::edges(l, 0.3));
    }
}

TEST(ModeNames, RoundTrip) {
    for (const auto mode : {NetworkMode::dominant_factor, NetworkMode::cross_load_count}) {
        EXPECT_EQ(parse_network_mode(to_string(mode)), mode);
    }
    EXPECT_EQ(to_string(NetworkMode::cross_load_count), "cross-load-count");
    EXPECT_FALSE(parse_network_mode("rainbow").has_value());
}

TEST(Ecdf, CanonicalValues) {
    const auto ecdf = loading_ecdf(fixtures::canonical_model());
    EXPECT_DOUBLE_EQ(ecdf_at(ecdf, 0.6), 0.5);
    EXPECT_DOUBLE_EQ(ecdf_at(ecdf, 0.05), 0.0);
    EXPECT_DOUBLE_EQ(ecdf_at(ecdf, 0.9), 1.0);
}

TEST(Ecdf, ConstantMatrixHasOneStep) {
    const auto ecdf = loading_ecdf(fixtures::loadings_model(Matrix::Constant(3, 2, 0.5)));
    ASSERT_EQ(ecdf.size(), 1u);
    EXPECT_EQ(ecdf[0], (EcdfPoint{0.5, 1.0}));
    EXPECT_EQ(ecdf_at(ecdf, 0.4999), 0.0);
}

TEST(Ecdf, MatchesCountingOracle) {
    std::mt19937_64 rng(24);
    const Matrix l = lattice_matrix(9, 3, rng);
    const auto ecdf = loading_ecdf(fixtures::loadings_model(l));
    EXPECT_EQ(ecdf_at(ecdf, l.cwiseAbs().maxCoeff()), 1.0);
    EXPECT_EQ(ecdf_at(ecdf, l.cwiseAbs().minCoeff() - 1e-9), 0.0);
    for (double t = 0.0; t <= 1.0; t += 0.025) {
        EXPECT_EQ(ecdf_at(ecdf, t), oracle::ecdf(l, t));
    }
}

TEST(InformationLoss, CanonicalAndBoundaries) {
    EXPECT_DOUBLE_EQ(information_loss(fixtures::canonical_model(), kHalf), 0.25);
    EXPECT_EQ(information_loss(fixtures::canonical_model(), Threshold(0.0)), 0.0);
    EXPECT_EQ(information_loss(fixtures::canonical_model(), Threshold(0.9)), 1.0);
}

TEST(InformationLoss, ComplementsVisibleCellsExactly) {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = fixtures::loadings_model(lattice_matrix(7, 3, rng));
        for (const double a : {0.0, 0.25, 0.5, 0.75}) {
            const double loss = information_loss(model, Threshold(a));
            const double visible = static_cast<double>(apply_threshold(model, Threshold(a)).visible_count()) / 21.0;
            EXPECT_EQ(loss + visible, 1.0);
            EXPECT_EQ(loss, oracle::information_loss(model.loadings(), a));
        }
    }
}

TEST(Sweep, CanonicalTwoPointGrid) {
    const auto sweep = threshold_sweep(fixtures::canonical_model(), {0.5, 0.65});
    ASSERT_EQ(sweep.points.size(), 2u);
    EXPECT_EQ(sweep.points[0], (SweepPoint{0.5, 0.25, 2, 1, 5}));
    EXPECT_EQ(sweep.points[1], (SweepPoint{0.65, 0.5, 0, 0, 2}));
    const auto network = build_variable_network(fixtures::canonical_model(), Threshold(0.65));
    ASSERT_EQ(network.edges.size(), 2u);
    EXPECT_EQ(network.edges[0].factors, std::vector<std::size_t>{0});
    EXPECT_EQ(network.edges[1].source, 2u);
    EXPECT_EQ(network.edges[1].factors, std::vector<std::size_t>{1});
}

TEST(Sweep, ZeroThresholdCountsEverything) {
    const auto point = threshold_sweep(fixtures::canonical_model(), {0.0}).points.at(0);
    EXPECT_EQ(point.information_loss, 0.0);
    EXPECT_EQ(point.cross_loading_count, 4u);
    EXPECT_EQ(point.redundant_count, 6u);
    EXPECT_EQ(point.edge_count, 6u);
}

TEST(Sweep, GridValidation) {
    const auto model = fixtures::canonical_model();
    EXPECT_EQ(code_of([&] { (void)threshold_sweep(model, {}); }), ErrorCode::EmptyGrid);
    EXPECT_EQ(code_of([&] { (void)threshold_sweep(model, {0.5, 0.2}); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([&] { (void)threshold_sweep(model, {-0.1, 0.2}); }), ErrorCode::InvalidArgument);
}

TEST(Sweep, DefaultGridMatchesRecomputation) {
    std::mt19937_64 rng(26);
    const auto model = fixtures::loadings_model(lattice_matrix(10, 3, rng));
    const auto grid = default_sweep_grid(model);
    ASSERT_EQ(grid.size(), 101u);
    EXPECT_EQ(grid.front(), 0.0);
    EXPECT_EQ(grid.back(), model.loadings().cwiseAbs().maxCoeff());
    const auto sweep = threshold_sweep(model, grid);
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const double a = grid[n];
        std::size_t pairs = 0;
        oracle::cross_loadings(model.loadings(), a, &pairs);
        EXPECT_EQ(sweep.points[n].information_loss, oracle::information_loss(model.loadings(), a));
        EXPECT_EQ(sweep.points[n].cross_loading_count, pairs);
        EXPECT_EQ(sweep.points[n].redundant_count, oracle::redundant(model.loadings(), a).size());
        EXPECT_EQ(sweep.points[n].edge_count, oracle::edges(model.loadings(), a).size());
    }
}

TEST(TagSummary, CanonicalCounts) {
    const auto summary = tag_summary(fixtures::canonical_model(), kHalf, fixtures::canonical_codebook(), false);
    ASSERT_EQ(summary.factors.size(), 2u);
    const std::vector<TagValue> f1{{"fear", 2}, {"arousal", 1}, {"optimism", 1}};
    EXPECT_EQ(summary.factors[0], f1);
    EXPECT_FALSE(summary.normalized);
}

TEST(TagSummary, CanonicalProportions) {
    const auto summary = tag_summary(fixtures::canonical_model(), kHalf, fixtures::canonical_codebook(), true);
    const std::vector<TagValue> f1{{"fear", 0.5}, {"arousal", 0.25}, {"optimism", 0.25}};
    EXPECT_EQ(summary.factors[0], f1);
    EXPECT_TRUE(summary.normalized);
    for (const auto& factor : summary.factors) {
        double total = 0.0;
        for (const auto& tv : factor) total += tv.value;
        EXPECT_NEAR(total, 1.0, 1e-15);
    }
}

TEST(TagSummary, HighThresholdLeavesEmptyLists) {
    for (const bool normalized : {false, true}) {
        const auto summary = tag_summary(fixtures::canonical_model(), Threshold(0.9), fixtures::canonical_codebook(), normalized);
        EXPECT_TRUE(summary.factors[0].empty());
        EXPECT_TRUE(summary.factors[1].empty());
    }
}

TEST(TagSummary, UnknownCodebookVariablesWarn) {
    auto entries = fixtures::canonical_codebook().entries();
    entries["ghost"] = CodebookEntry{"", {"fear"}};
    const auto summary = tag_summary(fixtures::canonical_model(), kHalf, Codebook(entries), false);
    ASSERT_EQ(summary.warnings.size(), 1u);
    EXPECT_NE(summary.warnings[0].find("ghost"), std::string::npos);
    EXPECT_EQ(summary.factors[0].front(), (TagValue{"fear", 2}));
}

TEST(TagSummary, MatchesCountingOracleAndSumsTagsOfQualifiers) {
    std::mt19937_64 rng(27);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = fixtures::loadings_model(lattice_matrix(9, 3, rng));
        std::vector<std::vector<std::string>> tags;
        const auto codebook = random_codebook(model, rng, tags);
        const auto summary = tag_summary(model, Threshold(0.4), codebook, false);
        const auto expected = oracle::tag_counts(model.loadings(), 0.4, tags);
        for (std::size_t k = 0; k < 3; ++k) {
            std::map<std::string, std::size_t> got;
            double total = 0.0;
            for (const auto& tv : summary.factors[k]) {
                got[tv.tag] = static_cast<std::size_t>(tv.value);
                EXPECT_EQ(tv.value, std::floor(tv.value));
                total += tv.value;
            }
            EXPECT_EQ(got, expected[k]);
            std::size_t tag_total = 0;
            for (Eigen::Index i = 0; i < 9; ++i)
                if (std::abs(model.loadings()(i, static_cast<Eigen::Index>(k))) > 0.4) tag_total += tags[static_cast<std::size_t>(i)].size();
            EXPECT_EQ(total, static_cast<double>(tag_total));
            for (std::size_t n = 1; n < summary.factors[k].size(); ++n) {
                const auto& a = summary.factors[k][n - 1];
                const auto& b = summary.factors[k][n];
                EXPECT_TRUE(a.value > b.value || (a.value == b.value && a.tag < b.tag));
            }
        }
    }
}

TEST(Sorting, CanonicalOrders) {
    EXPECT_EQ(sort_by_factor(fixtures::canonical_model(), 0), (std::vector<std::size_t>{0, 1, 3, 2}));
    EXPECT_EQ(sort_by_variable(fixtures::canonical_model(), 2), (std::vector<std::size_t>{1, 0}));
}

TEST(Sorting, TiesKeepOriginalOrder) {
    EXPECT_EQ(sort_by_factor(fixtures::loadings_model(Matrix::Constant(4, 2, 0.3)), 1),
              (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(code_of([] { (void)sort_by_factor(fixtures::canonical_model(), 2); }), ErrorCode::IndexOutOfRange);
    EXPECT_EQ(code_of([] { (void)sort_by_variable(fixtures::canonical_model(), 4); }), ErrorCode::IndexOutOfRange);
}

TEST(WordCloud, CanonicalSecondFactor) {
    const auto words = word_cloud_weights(fixtures::canonical_model(), 1);
    ASSERT_EQ(words.size(), 4u);
    EXPECT_EQ(words[2].variable, "v3");
    EXPECT_DOUBLE_EQ(words[2].weight, 1.0);
    EXPECT_NEAR(words[3].weight, 0.7 / 0.9, 1e-12);
    EXPECT_NEAR(words[1].weight, 0.6 / 0.9, 1e-12);
    EXPECT_NEAR(words[0].weight, 0.1 / 0.9, 1e-12);
}

TEST(WordCloud, ZeroAndNegativeColumns) {
    Matrix l(3, 2);
    l << 0.0, -0.9, 0.0, 0.45, 0.0, 0.3;
    const auto model = fixtures::loadings_model(l);
    for (const auto& w : word_cloud_weights(model, 0)) EXPECT_EQ(w.weight, 0.0);
    const auto words = word_cloud_weights(model, 1);
    EXPECT_EQ(words[0].weight, 1.0);
    EXPECT_EQ(words[0].loading, -0.9);
    EXPECT_EQ(code_of([&] { (void)word_cloud_weights(model, 2); }), ErrorCode::IndexOutOfRange);
}

TEST(FactorGraph, IdentityHasNoEdges) {
    const auto graph = factor_graph(fixtures::canonical_model());
    EXPECT_EQ(graph.factor_count, 2u);
    EXPECT_TRUE(graph.edges.empty());
}

TEST(FactorGraph, SingleCorrelation) {
    Matrix phi = Matrix::Identity(2, 2);
    phi(0, 1) = phi(1, 0) = 0.4;
    const auto graph = factor_graph(oblique_model(fixtures::canonical_model().loadings(), phi));
    ASSERT_EQ(graph.edges.size(), 1u);
    EXPECT_EQ(graph.edges[0], (FactorEdge{0, 1, 0.4}));
}

TEST(FactorGraph, MatchesPairScan) {
    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix t = fixtures::random_matrix(4, 4, rng);
        for (Eigen::Index j = 0; j < 4; ++j) t.col(j).normalize();
        Matrix phi = t.transpose() * t;
        phi = 0.5 * (phi + phi.transpose()).eval();
        phi.diagonal().setOnes();
        const auto graph = factor_graph(oblique_model(fixtures::random_matrix(6, 4, rng), phi), 0.2);
        std::vector<FactorEdge> expected;
        for (std::size_t k = 0; k < 4; ++k)
            for (std::size_t m = k + 1; m < 4; ++m)
                if (std::abs(phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m))) > 0.2)
                    expected.push_back({k, m, phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m))});
        EXPECT_EQ(graph.edges, expected);
    }
    EXPECT_EQ(code_of([] { (void)factor_graph(fixtures::canonical_model(), 1.0); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { (void)factor_graph(fixtures::canonical_model(), -0.1); }), ErrorCode::InvalidArgument);
}

TEST(Search, CaseInsensitiveSubstring) {
    const auto model = fixtures::canonical_model();
    EXPECT_EQ(search_variables(model, "v"), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(search_variables(model, "V"), (std::vector<std::size_t>{0, 1, 2, 3}));
    EXPECT_EQ(search_variables(model, "2"), (std::vector<std::size_t>{1}));
    EXPECT_TRUE(search_variables(model, "zzz").empty());
    EXPECT_EQ(search_variables(model, "").size(), 4u);
}

TEST(Properties, MonotoneInAlpha) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const auto model = fixtures::loadings_model(lattice_matrix(10, 4, rng));
        const auto grid = default_sweep_grid(model);
        for (std::size_t n = 1; n < grid.size(); ++n) {
            const Threshold lo(grid[n - 1]), hi(grid[n]);
            const auto a = apply_threshold(model, lo), b = apply_threshold(model, hi);
            for (std::size_t c = 0; c < a.cells.size(); ++c)
                if (b.cells[c]) EXPECT_TRUE(a.cells[c].has_value());
            const auto ea = edge_set(build_variable_network(model, lo));
            const auto eb = edge_set(build_variable_network(model, hi));
            EXPECT_TRUE(std::includes(ea.begin(), ea.end(), eb.begin(), eb.end()));
            const auto ca = find_cross_loadings(model, lo), cb = find_cross_loadings(model, hi);
            for (const auto& v : cb.variables) {
                const auto it = std::find_if(ca.variables.begin(), ca.variables.end(),
                                             [&](const CrossLoading& x) { return x.variable == v.variable; });
                ASSERT_NE(it, ca.variables.end());
                EXPECT_TRUE(std::includes(it->factors.begin(), it->factors.end(), v.factors.begin(), v.factors.end()));
            }
        }
    }
}

TEST(Properties, RedundancyImpliesCrossLoadingsAndEdges) {
    std::mt19937_64 rng(30);
    for (int trial = 0; trial < 20; ++trial) {
        const auto model = fixtures::loadings_model(lattice_matrix(10, 4, rng));
        const Threshold t(0.3);
        const auto cross = find_cross_loadings(model, t);
        const auto network = build_variable_network(model, t);
        for (const auto& r : find_redundant_loadings(model, t).quadruples) {
            for (const auto v : {r.first_variable, r.second_variable}) {
                EXPECT_TRUE(std::any_of(cross.variables.begin(), cross.variables.end(),
                                        [&](const CrossLoading& c) { return c.variable == v; }));
            }
            const auto edge = std::find_if(network.edges.begin(), network.edges.end(), [&](const NetworkEdge& e) {
                return e.source == r.first_variable && e.target == r.second_variable;
            });
            ASSERT_NE(edge, network.edges.end());
            EXPECT_TRUE(std::count(edge->factors.begin(), edge->factors.end(), r.first_factor) == 1);
            EXPECT_TRUE(std::count(edge->factors.begin(), edge->factors.end(), r.second_factor) == 1);
        }
    }
}

TEST(Properties, SignFlipsChangeNothingStructural) {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix l = lattice_matrix(8, 3, rng);
        Matrix flipped = l;
        for (Eigen::Index i = 0; i < l.rows(); ++i)
            for (Eigen::Index k = 0; k < l.cols(); ++k)
                if (coin(rng)) flipped(i, k) = -flipped(i, k);
        const Threshold t(0.3);
        const auto a = build_variable_network(fixtures::loadings_model(l), t);
        const auto b = build_variable_network(fixtures::loadings_model(flipped), t);
        EXPECT_EQ(a, b);
        EXPECT_EQ(find_redundant_loadings(fixtures::loadings_model(l), t),
                  find_redundant_loadings(fixtures::loadings_model(flipped), t));
    }
}

TEST(Properties, AnalyzeIsPure) {
    const auto model = fixtures::canonical_model();
    const auto codebook = fixtures::canonical_codebook();
    const auto a = analyze(model, kHalf, &codebook);
    const auto b = analyze(model, kHalf, &codebook);
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.matrix.visible_count(), 6u);
    EXPECT_EQ(a.cross_loadings.variables.size(), 2u);
    EXPECT_EQ(a.redundant_loadings.quadruples.size(), 1u);
    EXPECT_EQ(a.network.edges.size(), 5u);
    EXPECT_DOUBLE_EQ(a.information_loss, 0.25);
    ASSERT_TRUE(a.tags.has_value());
    ASSERT_TRUE(a.tags_normalized.has_value());
    EXPECT_FALSE(analyze(model, kHalf).tags.has_value());
}
