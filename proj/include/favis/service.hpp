#pragma once

#include "favis/analytics.hpp"
#include "favis/io.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>

namespace favis {

/// Per-client view state. Selections hold names, not indices.
struct SessionState {
    double alpha = 0.3;
    std::optional<std::string> selected_variable;
    std::optional<std::string> selected_factor;
    std::size_t max_variables = 1;
    std::size_t max_factors = 1;
    bool transpose = false;
    bool absolute = false;
    NetworkMode network_mode = NetworkMode::dominant_factor;

    bool operator==(const SessionState&) const = default;
};

/// Tag edits layered over the bundle codebook, stored as a diff so the base
/// stays untouched: tags added to and removed from each variable.
struct TagOverlay {
    std::map<std::string, std::set<std::string>> added;
    std::map<std::string, std::set<std::string>> removed;

    [[nodiscard]] bool empty() const { return added.empty() && removed.empty(); }
    [[nodiscard]] Codebook apply(const Codebook& base) const;
    /// Flips one assignment relative to `base` + this overlay; returns whether the tag is now assigned.
    bool toggle(const Codebook& base, const std::string& variable, const std::string& tag);

    bool operator==(const TagOverlay&) const = default;
};

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::map<std::string, std::string> headers;  // lower-case names
    std::string body;
};

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

/// The JSON API over one bundle. Transport-independent so it can be driven
/// directly in tests; HttpServer adapts it to sockets. Thread-safe.
class Service {
public:
    /// Loads and validates the bundle. Overlay files live next to it.
    explicit Service(std::filesystem::path bundle_path);
    Service(AnalysisBundle bundle, std::optional<std::filesystem::path> overlay_base);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    [[nodiscard]] HttpResponse handle(const HttpRequest& request) const;

    [[nodiscard]] const AnalysisBundle& bundle() const noexcept { return bundle_; }
    /// Where a session's tag edits are persisted, if persistence is enabled.
    [[nodiscard]] std::optional<std::filesystem::path> overlay_path(const std::string& session) const;

private:
    struct Session;
    Session& session(const std::string& id) const;
    [[nodiscard]] HttpResponse route(const HttpRequest& request, Session& session) const;
    static std::string session_name_for(const HttpRequest& request);

    AnalysisBundle bundle_;
    std::optional<std::filesystem::path> overlay_base_;
    mutable std::mutex sessions_mutex_;
    mutable std::map<std::string, std::unique_ptr<Session>> sessions_;
};

/// Binds a Service to a TCP port.
class HttpServer {
public:
    explicit HttpServer(const Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port 0 picks a free port. Returns the bound port; throws PortInUse.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Port from the flag, else FAVIS_PORT, else 8765. Throws InvalidArgument on a malformed value.
[[nodiscard]] int resolve_port(std::optional<int> flag);

}  // namespace favis
