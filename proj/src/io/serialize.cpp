#include "favis/serialize.hpp"

#include "favis/error.hpp"

#include <algorithm>
#include <set>

namespace favis {

namespace {

[[noreturn]] void bad_shape(const std::string& what) { throw Error(ErrorCode::InvalidShape, what); }

const Json& field(const Json& json, const char* key) {
    if (!json.is_object()) {
        bad_shape(std::string("expected an object holding '") + key + "'");
    }
    const auto it = json.find(key);
    if (it == json.end()) {
        bad_shape(std::string("missing field '") + key + "'");
    }
    return *it;
}

template <typename T>
T get_as(const Json& json, const char* what) {
    try {
        return json.get<T>();
    } catch (const Json::exception&) {
        bad_shape(std::string("field '") + what + "' has the wrong type");
    }
}

template <typename T>
T get_field(const Json& json, const char* key) {
    return get_as<T>(field(json, key), key);
}

const Json& array_field(const Json& json, const char* key) {
    const Json& value = field(json, key);
    if (!value.is_array()) {
        bad_shape(std::string("field '") + key + "' must be an array");
    }
    return value;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& json, const char* key) {
    if (!json.is_array() || json.empty() || !json.front().is_array()) {
        bad_shape(std::string("field '") + key + "' must be a non-empty array of rows");
    }
    const auto rows = json.size();
    const auto cols = json.front().size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!json[i].is_array() || json[i].size() != cols) {
            bad_shape(std::string("field '") + key + "' has ragged rows");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!json[i][j].is_number()) {
                bad_shape(std::string("field '") + key + "' must hold numbers");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = json[i][j].get<double>();
        }
    }
    return m;
}

Json vector_to_json(const Vector& v) {
    return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector vector_from_json(const Json& json, const char* key) {
    const auto values = get_as<std::vector<double>>(json, key);
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json tag_list_to_json(const std::vector<TagValue>& values) {
    Json list = Json::array();
    for (const auto& v : values) {
        list.push_back({{"tag", v.tag}, {"value", v.value}});
    }
    return list;
}

TagSummary tag_summary_from_json(const Json& json) {
    TagSummary summary;
    summary.normalized = get_field<bool>(json, "normalized");
    summary.warnings = get_field<std::vector<std::string>>(json, "warnings");
    for (const auto& factor : array_field(json, "factors")) {
        if (!factor.is_array()) {
            bad_shape("tag summary factors must be arrays");
        }
        auto& values = summary.factors.emplace_back();
        for (const auto& item : factor) {
            values.push_back({get_field<std::string>(item, "tag"), get_field<double>(item, "value")});
        }
    }
    return summary;
}

}  // namespace

Json to_json(const FactorModel& model) {
    Json json;
    json["loadings"] = matrix_to_json(model.loadings());
    json["factor_correlations"] = matrix_to_json(model.factor_correlations());
    json["unique_variances"] = vector_to_json(model.unique_variances());
    json["mean"] = vector_to_json(model.mean());
    json["variable_names"] = model.variable_names();
    json["factor_names"] = model.factor_names();
    json["rotation"] = {{"kind", std::string(to_string(model.rotation().kind))}, {"gamma", model.rotation().gamma}};
    json["ppca_sigma2"] = model.ppca_sigma2() ? Json(*model.ppca_sigma2()) : Json(nullptr);
    if (const auto& d = model.diagnostics()) {
        json["diagnostics"] = {{"method", d->method},
                               {"iterations", d->iterations},
                               {"converged", d->converged},
                               {"objective", d->objective ? Json(*d->objective) : Json(nullptr)},
                               {"objective_trace", d->objective_trace}};
    } else {
        json["diagnostics"] = nullptr;
    }
    json["warnings"] = model.warnings();
    return json;
}

FactorModel factor_model_from_json(const Json& json) {
    FactorModelParts parts;
    parts.loadings = matrix_from_json(field(json, "loadings"), "loadings");
    parts.factor_correlations = matrix_from_json(field(json, "factor_correlations"), "factor_correlations");
    parts.unique_variances = vector_from_json(field(json, "unique_variances"), "unique_variances");
    parts.mean = vector_from_json(field(json, "mean"), "mean");
    parts.variable_names = get_field<std::vector<std::string>>(json, "variable_names");
    parts.factor_names = get_field<std::vector<std::string>>(json, "factor_names");
    if (parts.variable_names.empty() || parts.factor_names.empty()) {
        throw Error(ErrorCode::InvalidModel, "variable and factor names must be present");
    }

    const Json& rotation = field(json, "rotation");
    const auto kind = parse_rotation_kind(get_field<std::string>(rotation, "kind"));
    if (!kind) {
        bad_shape("unknown rotation kind");
    }
    parts.rotation = {*kind, get_field<double>(rotation, "gamma")};

    const Json& sigma2 = field(json, "ppca_sigma2");
    if (!sigma2.is_null()) {
        parts.ppca_sigma2 = get_as<double>(sigma2, "ppca_sigma2");
    }
    const Json& diagnostics = field(json, "diagnostics");
    if (!diagnostics.is_null()) {
        FitDiagnostics d;
        d.method = get_field<std::string>(diagnostics, "method");
        d.iterations = get_field<int>(diagnostics, "iterations");
        d.converged = get_field<bool>(diagnostics, "converged");
        const Json& objective = field(diagnostics, "objective");
        if (!objective.is_null()) {
            d.objective = get_as<double>(objective, "objective");
        }
        d.objective_trace = get_field<std::vector<double>>(diagnostics, "objective_trace");
        parts.diagnostics = std::move(d);
    }
    parts.warnings = get_field<std::vector<std::string>>(json, "warnings");
    return FactorModel(std::move(parts));
}

Json to_json(const Codebook& codebook) {
    Json json = Json::object();
    for (const auto& [variable, entry] : codebook.entries()) {
        json[variable] = {{"text", entry.text}, {"tags", entry.tags}};
    }
    return json;
}

Codebook codebook_from_json(const Json& json, std::vector<std::string>* warnings) {
    if (!json.is_object()) {
        bad_shape("codebook must be a JSON object keyed by variable name");
    }
    std::map<std::string, CodebookEntry> entries;
    for (const auto& [variable, value] : json.items()) {
        if (!value.is_object()) {
            bad_shape("codebook entry '" + variable + "' must be an object");
        }
        CodebookEntry entry;
        if (const auto text = value.find("text"); text != value.end()) {
            if (!text->is_string()) {
                bad_shape("codebook text for '" + variable + "' must be a string");
            }
            entry.text = text->get<std::string>();
        }
        if (const auto tags = value.find("tags"); tags != value.end()) {
            if (!tags->is_array()) {
                bad_shape("codebook tags for '" + variable + "' must be a list");
            }
            std::set<std::string> seen;
            for (const auto& tag : *tags) {
                if (!tag.is_string() || tag.get<std::string>().empty()) {
                    bad_shape("codebook tags for '" + variable + "' must be non-empty strings");
                }
                auto name = tag.get<std::string>();
                if (!seen.insert(name).second) {
                    if (warnings != nullptr) {
                        warnings->push_back("duplicate tag '" + name + "' for '" + variable + "' removed");
                    }
                    continue;
                }
                entry.tags.push_back(std::move(name));
            }
        }
        entries.emplace(variable, std::move(entry));
    }
    return Codebook(std::move(entries));
}

Json to_json(const MaskedLoadings& matrix) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < matrix.rows; ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < matrix.cols; ++k) {
            const auto& cell = matrix.at(i, k);
            row.push_back(cell ? Json(*cell) : Json(nullptr));
        }
        rows.push_back(std::move(row));
    }
    return {{"absolute", matrix.absolute}, {"values", std::move(rows)}};
}

Json to_json(const CrossLoadingReport& report) {
    Json variables = Json::array();
    for (const auto& v : report.variables) {
        variables.push_back({{"variable", v.variable}, {"factors", v.factors}});
    }
    return {{"variables", std::move(variables)}, {"pair_count", report.pair_count}};
}

Json to_json(const RedundantLoadingReport& report) {
    Json list = Json::array();
    for (const auto& r : report.quadruples) {
        list.push_back({{"variables", {r.first_variable, r.second_variable}},
                        {"factors", {r.first_factor, r.second_factor}}});
    }
    return list;
}

Json to_json(const VariableNetwork& network) {
    Json nodes = Json::array();
    for (const auto& n : network.nodes) {
        nodes.push_back({{"variable", n.variable},
                         {"dominant_factor", n.dominant_factor},
                         {"cross_load_count", n.cross_load_count}});
    }
    Json edges = Json::array();
    for (const auto& e : network.edges) {
        edges.push_back({{"source", e.source},
                         {"target", e.target},
                         {"factors", e.factors},
                         {"dominant_factor", e.dominant_factor},
                         {"cross_load_count", e.cross_load_count}});
    }
    return {{"mode", std::string(to_string(network.mode))}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

Json to_json(const ThresholdSweep& sweep) {
    Json list = Json::array();
    for (const auto& p : sweep.points) {
        list.push_back({{"alpha", p.alpha},
                        {"information_loss", p.information_loss},
                        {"cross_loading_count", p.cross_loading_count},
                        {"redundant_count", p.redundant_count},
                        {"edge_count", p.edge_count}});
    }
    return list;
}

Json to_json(const TagSummary& summary) {
    Json factors = Json::array();
    for (const auto& values : summary.factors) {
        factors.push_back(tag_list_to_json(values));
    }
    return {{"normalized", summary.normalized}, {"factors", std::move(factors)}, {"warnings", summary.warnings}};
}

Json to_json(const ThresholdAnalytics& analytics) {
    return {{"alpha", analytics.alpha},
            {"matrix", to_json(analytics.matrix)},
            {"cross_loadings", to_json(analytics.cross_loadings)},
            {"redundant_loadings", to_json(analytics.redundant_loadings)},
            {"network", to_json(analytics.network)},
            {"information_loss", analytics.information_loss},
            {"tags", analytics.tags ? to_json(*analytics.tags) : Json(nullptr)},
            {"tags_normalized", analytics.tags_normalized ? to_json(*analytics.tags_normalized) : Json(nullptr)}};
}

Json to_json(const std::vector<EcdfPoint>& ecdf) {
    Json list = Json::array();
    for (const auto& p : ecdf) {
        list.push_back({{"value", p.value}, {"fraction", p.fraction}});
    }
    return list;
}

Json to_json(const FactorGraph& graph) {
    Json edges = Json::array();
    for (const auto& e : graph.edges) {
        edges.push_back({{"first", e.first}, {"second", e.second}, {"correlation", e.correlation}});
    }
    return {{"factor_count", graph.factor_count}, {"edges", std::move(edges)}};
}

Json to_json(const std::vector<WordWeight>& weights) {
    Json list = Json::array();
    for (const auto& w : weights) {
        list.push_back({{"variable", w.variable}, {"weight", w.weight}, {"loading", w.loading}});
    }
    return list;
}

ThresholdSweep threshold_sweep_from_json(const Json& json) {
    if (!json.is_array()) {
        bad_shape("sweep must be an array");
    }
    ThresholdSweep sweep;
    for (const auto& p : json) {
        sweep.points.push_back({get_field<double>(p, "alpha"), get_field<double>(p, "information_loss"),
                                get_field<std::size_t>(p, "cross_loading_count"),
                                get_field<std::size_t>(p, "redundant_count"), get_field<std::size_t>(p, "edge_count")});
    }
    return sweep;
}

ThresholdAnalytics threshold_analytics_from_json(const Json& json) {
    ThresholdAnalytics out;
    out.alpha = get_field<double>(json, "alpha");
    out.information_loss = get_field<double>(json, "information_loss");

    const Json& matrix = field(json, "matrix");
    out.matrix.absolute = get_field<bool>(matrix, "absolute");
    const Json& rows = array_field(matrix, "values");
    out.matrix.rows = rows.size();
    out.matrix.cols = rows.empty() ? 0 : rows.front().size();
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != out.matrix.cols) {
            bad_shape("masked matrix rows are ragged");
        }
        for (const auto& cell : row) {
            if (cell.is_null()) {
                out.matrix.cells.emplace_back(std::nullopt);
            } else {
                out.matrix.cells.emplace_back(get_as<double>(cell, "values"));
            }
        }
    }

    const Json& cross = field(json, "cross_loadings");
    out.cross_loadings.pair_count = get_field<std::size_t>(cross, "pair_count");
    for (const auto& v : array_field(cross, "variables")) {
        out.cross_loadings.variables.push_back(
            {get_field<std::size_t>(v, "variable"), get_field<std::vector<std::size_t>>(v, "factors")});
    }

    const Json& redundant = field(json, "redundant_loadings");
    if (!redundant.is_array()) {
        bad_shape("redundant_loadings must be an array");
    }
    for (const auto& r : redundant) {
        const auto vars = get_field<std::vector<std::size_t>>(r, "variables");
        const auto facs = get_field<std::vector<std::size_t>>(r, "factors");
        if (vars.size() != 2 || facs.size() != 2) {
            bad_shape("redundant loading entries need two variables and two factors");
        }
        out.redundant_loadings.quadruples.push_back({vars[0], vars[1], facs[0], facs[1]});
    }

    const Json& network = field(json, "network");
    const auto mode = parse_network_mode(get_field<std::string>(network, "mode"));
    if (!mode) {
        bad_shape("unknown network mode");
    }
    out.network.mode = *mode;
    for (const auto& n : array_field(network, "nodes")) {
        out.network.nodes.push_back({get_field<std::size_t>(n, "variable"), get_field<std::size_t>(n, "dominant_factor"),
                                     get_field<std::size_t>(n, "cross_load_count")});
    }
    for (const auto& e : array_field(network, "edges")) {
        out.network.edges.push_back({get_field<std::size_t>(e, "source"), get_field<std::size_t>(e, "target"),
                                     get_field<std::vector<std::size_t>>(e, "factors"),
                                     get_field<std::size_t>(e, "dominant_factor"),
                                     get_field<std::size_t>(e, "cross_load_count")});
    }

    if (const Json& tags = field(json, "tags"); !tags.is_null()) {
        out.tags = tag_summary_from_json(tags);
    }
    if (const Json& tags = field(json, "tags_normalized"); !tags.is_null()) {
        out.tags_normalized = tag_summary_from_json(tags);
    }
    return out;
}

}  // namespace favis
