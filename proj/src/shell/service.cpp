#include "internal.hpp"

#include "favis/error.hpp"

#include "httplib.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>

namespace favis {

struct Service::Session {
    std::mutex mutex;
    SessionState state;
    TagOverlay overlay;
    std::uint64_t revision = 0;
};

namespace {

// Failures attributable to the request itself rather than to a module.
struct RequestError {
    int status;
    std::string code;
    std::string message;
};

HttpResponse json_response(int status, const Json& body) { return {status, body.dump(2) + "\n", "application/json"}; }

HttpResponse error_response(int status, std::string_view code, const std::string& message) {
    return json_response(status, {{"schema", std::string(kSchemaVersion)},
                                  {"error", {{"code", std::string(code)}, {"message", message}}}});
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::IndexOutOfRange:
        case ErrorCode::EmptyGrid:
            return 422;
        case ErrorCode::ParseError:
        case ErrorCode::InvalidShape:
            return 400;
        default:
            return 500;
    }
}

Json envelope() { return {{"schema", std::string(kSchemaVersion)}}; }

std::optional<std::string> query(const HttpRequest& request, const std::string& key) {
    const auto it = request.query.find(key);
    return it == request.query.end() ? std::nullopt : std::optional<std::string>(it->second);
}

double parse_number(const std::string& text, const std::string& key) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw RequestError{400, "BadRequest", key + " must be a finite number, got '" + text + "'"};
    }
    return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1") {
        return true;
    }
    if (text == "false" || text == "0") {
        return false;
    }
    throw RequestError{400, "BadRequest", key + " must be true or false, got '" + text + "'"};
}

Json parse_body(const HttpRequest& request) {
    try {
        return Json::parse(request.body);
    } catch (const Json::parse_error& e) {
        throw RequestError{400, "BadRequest", std::string("body is not valid JSON: ") + e.what()};
    }
}

std::size_t resolve_factor(const FactorModel& model, const std::string& text) {
    const auto& names = model.factor_names();
    if (const auto it = std::find(names.begin(), names.end(), text); it != names.end()) {
        return static_cast<std::size_t>(it - names.begin());
    }
    std::size_t index = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, index);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw Error(ErrorCode::IndexOutOfRange, "no factor named '" + text + "'");
    }
    if (index >= model.factor_count()) {
        throw Error(ErrorCode::IndexOutOfRange, "factor index " + text + " out of range for " +
                                                    std::to_string(model.factor_count()) + " factors");
    }
    return index;
}

const std::vector<std::pair<std::string, std::vector<std::string>>>& routes() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
        {"/api/model", {"GET"}},        {"/api/analytics", {"GET"}},    {"/api/sweep", {"GET"}},
        {"/api/network", {"GET"}},      {"/api/tags", {"GET", "POST"}}, {"/api/wordcloud", {"GET"}},
        {"/api/factor-graph", {"GET"}}, {"/api/search", {"GET"}},       {"/api/session", {"GET", "PUT"}},
    };
    return table;
}

}  // namespace

Service::Service(std::filesystem::path bundle_path) : Service(read_bundle(bundle_path), bundle_path) {}

Service::Service(AnalysisBundle bundle, std::optional<std::filesystem::path> overlay_base)
    : bundle_(std::move(bundle)), overlay_base_(std::move(overlay_base)) {}

Service::~Service() = default;

std::optional<std::filesystem::path> Service::overlay_path(const std::string& session) const {
    if (!overlay_base_) {
        return std::nullopt;
    }
    auto path = *overlay_base_;
    path += ".tags-" + session + ".json";
    return path;
}

Service::Session& Service::session(const std::string& id) const {
    std::lock_guard lock(sessions_mutex_);
    auto& slot = sessions_[id];
    if (!slot) {
        auto fresh = std::make_unique<Session>();
        fresh->state.max_variables = bundle_.model.variable_count();
        fresh->state.max_factors = bundle_.model.factor_count();
        const auto path = overlay_path(id);
        std::error_code ec;
        if (path && std::filesystem::exists(*path, ec)) {
            Json stored;
            try {
                stored = Json::parse(read_text_file(*path));
            } catch (const Json::parse_error&) {
                throw ParseError(0, 0, "tag overlay " + path->string() + " is not valid JSON");
            }
            fresh->overlay = shell::tag_overlay_from_json(stored);
            if (stored.contains("revision") && stored.at("revision").is_number_unsigned()) {
                fresh->revision = stored.at("revision").get<std::uint64_t>();
            }
        }
        slot = std::move(fresh);
    }
    return *slot;
}

HttpResponse Service::handle(const HttpRequest& request) const {
    try {
        const auto known = std::find_if(routes().begin(), routes().end(),
                                        [&](const auto& route) { return route.first == request.path; });
        if (known == routes().end()) {
            throw RequestError{404, "NotFound", "no endpoint " + request.path};
        }
        const auto& methods = known->second;
        if (std::find(methods.begin(), methods.end(), request.method) == methods.end()) {
            throw RequestError{405, "MethodNotAllowed", request.method + " not supported on " + request.path};
        }
        const auto id = session_name_for(request);
        if (!shell::valid_session_name(id)) {
            throw RequestError{400, "BadRequest", "session names use letters, digits, '_' and '-' only"};
        }
        auto& current = session(id);
        std::lock_guard lock(current.mutex);
        return route(request, current);
    } catch (const RequestError& e) {
        return error_response(e.status, e.code, e.message);
    } catch (const Error& e) {
        std::string message = e.what();
        const auto prefix = std::string(e.name()) + ": ";
        if (message.starts_with(prefix)) {
            message.erase(0, prefix.size());
        }
        return error_response(status_for(e.code()), e.name(), message);
    } catch (const std::exception& e) {
        return error_response(500, "Internal", e.what());
    }
}

HttpResponse Service::route(const HttpRequest& request, Session& session) const {
    const auto& model = bundle_.model;
    const auto base = bundle_.codebook.value_or(Codebook{});
    const auto codebook = session.overlay.apply(base);
    const bool has_codebook = bundle_.codebook.has_value() || !session.overlay.empty();
    const Codebook* effective = has_codebook ? &codebook : nullptr;
    const auto alpha = [&] {
        const auto text = query(request, "alpha");
        return Threshold(text ? parse_number(*text, "alpha") : session.state.alpha);
    };
    const auto& path = request.path;

    if (path == "/api/model") {
        auto body = envelope();
        body["model"] = to_json(model);
        body["codebook"] = effective ? to_json(codebook) : Json(nullptr);
        return json_response(200, body);
    }
    if (path == "/api/analytics") {
        return {200, render_analytics_document(model, effective, alpha()), "application/json"};
    }
    if (path == "/api/sweep") {
        auto body = envelope();
        body["sweep"] = to_json(bundle_.sweep);
        body["ecdf"] = to_json(loading_ecdf(model));
        return json_response(200, body);
    }
    if (path == "/api/network") {
        auto mode = session.state.network_mode;
        if (const auto text = query(request, "mode")) {
            const auto parsed = parse_network_mode(*text);
            if (!parsed) {
                throw RequestError{400, "BadRequest", "unknown network mode '" + *text + "'"};
            }
            mode = *parsed;
        }
        const auto threshold = alpha();
        auto body = envelope();
        body["alpha"] = threshold.alpha();
        body["network"] = to_json(build_variable_network(model, threshold, mode));
        return json_response(200, body);
    }
    if (path == "/api/tags" && request.method == "GET") {
        const auto text = query(request, "normalized");
        const bool normalized = text ? parse_bool(*text, "normalized") : false;
        const auto threshold = alpha();
        auto body = envelope();
        body["alpha"] = threshold.alpha();
        body["tags"] = to_json(tag_summary(model, threshold, codebook, normalized));
        body["codebook"] = to_json(codebook);
        body["revision"] = session.revision;
        return json_response(200, body);
    }
    if (path == "/api/tags") {
        const auto json = parse_body(request);
        if (!json.is_object() || !json.contains("variable") || !json.contains("tag") ||
            !json.at("variable").is_string() || !json.at("tag").is_string()) {
            throw RequestError{400, "BadRequest", "expected {\"variable\": string, \"tag\": string}"};
        }
        const auto variable = json.at("variable").get<std::string>();
        const auto tag = json.at("tag").get<std::string>();
        const auto& names = model.variable_names();
        if (std::find(names.begin(), names.end(), variable) == names.end()) {
            throw Error(ErrorCode::InvalidArgument, "unknown variable '" + variable + "'");
        }
        auto overlay = session.overlay;
        const bool assigned = overlay.toggle(base, variable, tag);
        const auto revision = session.revision + 1;
        if (const auto file = overlay_path(session_name_for(request))) {
            auto stored = shell::to_json(overlay);
            stored["schema"] = std::string(kSchemaVersion);
            stored["session"] = session_name_for(request);
            stored["revision"] = revision;
            write_text_file_atomic(*file, stored.dump(2) + "\n");
        }
        session.overlay = std::move(overlay);
        session.revision = revision;
        auto body = envelope();
        body["revision"] = revision;
        body["variable"] = variable;
        body["tag"] = tag;
        body["assigned"] = assigned;
        body["codebook"] = to_json(session.overlay.apply(base));
        return json_response(200, body);
    }
    if (path == "/api/wordcloud") {
        const auto text = query(request, "factor");
        if (!text) {
            throw RequestError{400, "BadRequest", "factor is required"};
        }
        const auto factor = resolve_factor(model, *text);
        auto body = envelope();
        body["factor"] = model.factor_names()[factor];
        body["index"] = factor;
        body["weights"] = to_json(word_cloud_weights(model, factor));
        return json_response(200, body);
    }
    if (path == "/api/factor-graph") {
        const auto text = query(request, "min_abs_corr");
        const double min_abs_corr = text ? parse_number(*text, "min_abs_corr") : 0.0;
        auto body = envelope();
        body["graph"] = to_json(factor_graph(model, min_abs_corr));
        return json_response(200, body);
    }
    if (path == "/api/search") {
        const auto text = query(request, "q").value_or("");
        Json matches = Json::array();
        for (const auto i : search_variables(model, text)) {
            const auto* entry = codebook.find(model.variable_names()[i]);
            matches.push_back({{"index", i},
                               {"name", model.variable_names()[i]},
                               {"text", entry ? Json(entry->text) : Json(nullptr)}});
        }
        auto body = envelope();
        body["query"] = text;
        body["matches"] = std::move(matches);
        return json_response(200, body);
    }
    // /api/session
    if (request.method == "PUT") {
        const auto json = parse_body(request);
        try {
            session.state = shell::patch_session_state(session.state, json, model);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidShape) {
                throw RequestError{400, "BadRequest", e.what()};
            }
            throw;
        }
        ++session.revision;
    }
    auto body = envelope();
    body["session"] = session_name_for(request);
    body["revision"] = session.revision;
    body["state"] = shell::to_json(session.state);
    return json_response(200, body);
}

std::string Service::session_name_for(const HttpRequest& request) {
    if (const auto it = request.headers.find("x-favis-session"); it != request.headers.end()) {
        return it->second;
    }
    return query(request, "session").value_or("default");
}

struct HttpServer::Impl {
    explicit Impl(const Service& s) : service(s) {}
    const Service& service;
    httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        HttpRequest request;
        request.method = req.method;
        request.path = req.path;
        for (const auto& [key, value] : req.params) {
            request.query.emplace(key, value);
        }
        for (const auto& [key, value] : req.headers) {
            std::string name = key;
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            request.headers.emplace(std::move(name), value);
        }
        request.body = req.body;
        const auto response = impl_->service.handle(request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    };
    // httplib's defaults add SO_REUSEPORT, which would let a second server share a busy port.
    impl_->server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    impl_->server.Get(".*", handler);
    impl_->server.Post(".*", handler);
    impl_->server.Put(".*", handler);
    impl_->server.Delete(".*", handler);
    impl_->server.Patch(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) {
            throw Error(ErrorCode::PortInUse, "cannot bind any port on " + host);
        }
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_->server.is_running()) {
        impl_->server.stop();
    }
}

int resolve_port(std::optional<int> flag) {
    if (flag) {
        return *flag;
    }
    const char* env = std::getenv("FAVIS_PORT");
    if (env == nullptr || *env == '\0') {
        return 8765;
    }
    const std::string text(env);
    int port = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), port);
    if (ec != std::errc() || ptr != text.data() + text.size() || port < 0 || port > 65535) {
        throw Error(ErrorCode::InvalidArgument, "FAVIS_PORT must be a port number, got '" + text + "'");
    }
    return port;
}

}  // namespace favis
