#include "favis/error.hpp"
#include "favis/io.hpp"
#include "favis/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace favis {

namespace {

constexpr int kSupportedSchema = 1;

void check_schema(const Json& json) {
    if (!json.is_object() || !json.contains("schema") || !json["schema"].is_string()) {
        throw Error(ErrorCode::UnsupportedVersion, "bundle carries no schema version");
    }
    const auto schema = json["schema"].get<std::string>();
    constexpr std::string_view prefix = "favis/";
    int version = 0;
    const bool well_formed = schema.rfind(prefix, 0) == 0 && schema.size() > prefix.size() && [&] {
        const char* first = schema.data() + prefix.size();
        const char* last = schema.data() + schema.size();
        const auto [end, ec] = std::from_chars(first, last, version);
        return ec == std::errc() && end == last;
    }();
    if (!well_formed || version != kSupportedSchema) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "bundle schema '" + schema + "' is not supported (expected " + std::string(kSchemaVersion) + ")");
    }
}

void check_consistency(const AnalysisBundle& bundle) {
    const auto p = bundle.model.variable_count();
    const auto q = bundle.model.factor_count();
    const auto& a = bundle.analytics;
    const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidShape, what); };
    if (a.matrix.rows != p || a.matrix.cols != q) {
        fail("analytics matrix does not match the model dimensions");
    }
    if (a.network.nodes.size() != p) {
        fail("analytics network does not list every variable");
    }
    for (const auto& e : a.network.edges) {
        if (e.source >= p || e.target >= p) {
            fail("analytics network edge references an unknown variable");
        }
    }
    for (const auto* tags : {&a.tags, &a.tags_normalized}) {
        if (*tags && (*tags)->factors.size() != q) {
            fail("tag summary does not match the factor count");
        }
    }
    if (!(a.alpha >= 0.0)) {
        fail("analytics alpha must be nonnegative");
    }
}

}  // namespace

AnalysisBundle make_bundle(FactorModel model, std::optional<Codebook> codebook, double alpha) {
    const Threshold threshold(alpha);
    auto sweep = threshold_sweep(model, default_sweep_grid(model));
    auto analytics = analyze(model, threshold, codebook ? &*codebook : nullptr);
    return AnalysisBundle{std::string(kSchemaVersion), std::move(model), std::move(codebook), std::move(sweep),
                          std::move(analytics)};
}

std::string format_bundle(const AnalysisBundle& bundle) {
    Json json;
    json["schema"] = bundle.schema;
    json["model"] = to_json(bundle.model);
    json["codebook"] = bundle.codebook ? to_json(*bundle.codebook) : Json(nullptr);
    json["sweep"] = to_json(bundle.sweep);
    json["analytics"] = to_json(bundle.analytics);
    return json.dump(2) + "\n";
}

AnalysisBundle parse_bundle(std::string_view text) {
    Json json;
    try {
        json = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(0, 0, std::string("bundle is not valid JSON (byte ") + std::to_string(e.byte) + ")");
    }
    check_schema(json);
    const auto member = [&](const char* key) -> const Json& {
        if (!json.contains(key)) {
            throw ParseError(0, 0, std::string("bundle is missing '") + key + "'");
        }
        return json[key];
    };
    std::optional<Codebook> codebook;
    if (!member("codebook").is_null()) {
        codebook = codebook_from_json(member("codebook"));
    }
    AnalysisBundle bundle{json["schema"].get<std::string>(), factor_model_from_json(member("model")),
                          std::move(codebook), threshold_sweep_from_json(member("sweep")),
                          threshold_analytics_from_json(member("analytics"))};
    check_consistency(bundle);
    return bundle;
}

void write_bundle(const AnalysisBundle& bundle, const std::filesystem::path& path) {
    write_text_file_atomic(path, format_bundle(bundle));
}

AnalysisBundle read_bundle(const std::filesystem::path& path) { return parse_bundle(read_text_file(path)); }

std::string render_analytics_document(const FactorModel& model, const Codebook* codebook, Threshold threshold) {
    const auto analytics = analyze(model, threshold, codebook);
    Json doc = to_json(analytics);
    doc["schema"] = std::string(kSchemaVersion);
    doc["variables"] = model.variable_names();
    doc["factors"] = model.factor_names();
    doc["rotation"] = std::string(to_string(model.rotation().kind));
    doc["ecdf"] = to_json(loading_ecdf(model));
    doc["sweep"] = to_json(threshold_sweep(model, default_sweep_grid(model)));
    doc["factor_graph"] = to_json(factor_graph(model));

    Json by_factor = Json::array();
    for (std::size_t k = 0; k < model.factor_count(); ++k) {
        by_factor.push_back(sort_by_factor(model, k));
    }
    Json by_variable = Json::array();
    for (std::size_t i = 0; i < model.variable_count(); ++i) {
        by_variable.push_back(sort_by_variable(model, i));
    }
    doc["orderings"] = {{"by_factor", std::move(by_factor)}, {"by_variable", std::move(by_variable)}};
    return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw Error(ErrorCode::FileNotFound, "no such file: " + path.string());
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto temporary = path;
    temporary += ".tmp";
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoError, "cannot write " + temporary.string());
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out.flush()) {
            throw Error(ErrorCode::IoError, "failed writing " + temporary.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(temporary, path, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot move " + temporary.string() + " to " + path.string());
    }
}

}  // namespace favis
