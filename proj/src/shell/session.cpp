#include "internal.hpp"

#include "favis/error.hpp"

#include <algorithm>
#include <cmath>

namespace favis {

Codebook TagOverlay::apply(const Codebook& base) const {
    auto entries = base.entries();
    for (const auto& [variable, tags] : removed) {
        const auto it = entries.find(variable);
        if (it == entries.end()) {
            continue;
        }
        auto& list = it->second.tags;
        std::erase_if(list, [&](const std::string& tag) { return tags.contains(tag); });
    }
    for (const auto& [variable, tags] : added) {
        auto& list = entries[variable].tags;
        for (const auto& tag : tags) {
            if (std::find(list.begin(), list.end(), tag) == list.end()) {
                list.push_back(tag);
            }
        }
    }
    return Codebook(std::move(entries));
}

bool TagOverlay::toggle(const Codebook& base, const std::string& variable, const std::string& tag) {
    if (tag.empty()) {
        throw Error(ErrorCode::InvalidArgument, "tag must be non-empty");
    }
    const bool assigned = apply(base).has_tag(variable, tag);
    auto flip = [&](std::map<std::string, std::set<std::string>>& undo,
                    std::map<std::string, std::set<std::string>>& record) {
        const auto it = undo.find(variable);
        if (it != undo.end() && it->second.erase(tag) > 0) {
            if (it->second.empty()) {
                undo.erase(it);
            }
            return;
        }
        record[variable].insert(tag);
    };
    if (assigned) {
        flip(added, removed);
    } else {
        flip(removed, added);
    }
    return !assigned;
}

namespace shell {

namespace {

std::optional<std::string> optional_name(const Json& value, const std::vector<std::string>& names,
                                         const char* field) {
    if (value.is_null()) {
        return std::nullopt;
    }
    if (!value.is_string()) {
        throw Error(ErrorCode::InvalidShape, std::string(field) + " must be a string or null");
    }
    const auto name = value.get<std::string>();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw Error(ErrorCode::InvalidArgument, std::string(field) + " '" + name + "' does not exist");
    }
    return name;
}

std::size_t limit(const Json& value, const char* field) {
    if (!value.is_number_integer()) {
        throw Error(ErrorCode::InvalidShape, std::string(field) + " must be an integer");
    }
    const auto n = value.get<long long>();
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, std::string(field) + " must be >= 1");
    }
    return static_cast<std::size_t>(n);
}

bool flag(const Json& value, const char* field) {
    if (!value.is_boolean()) {
        throw Error(ErrorCode::InvalidShape, std::string(field) + " must be a boolean");
    }
    return value.get<bool>();
}

Json tag_map_to_json(const std::map<std::string, std::set<std::string>>& map) {
    Json out = Json::object();
    for (const auto& [variable, tags] : map) {
        out[variable] = tags;
    }
    return out;
}

std::map<std::string, std::set<std::string>> tag_map_from_json(const Json& json, const char* field) {
    if (!json.is_object()) {
        throw Error(ErrorCode::InvalidShape, std::string("overlay '") + field + "' must be an object");
    }
    std::map<std::string, std::set<std::string>> out;
    for (const auto& [variable, tags] : json.items()) {
        if (!tags.is_array()) {
            throw Error(ErrorCode::InvalidShape, "overlay tags for '" + variable + "' must be an array");
        }
        for (const auto& tag : tags) {
            if (!tag.is_string() || tag.get<std::string>().empty()) {
                throw Error(ErrorCode::InvalidShape, "overlay tag for '" + variable + "' must be a non-empty string");
            }
            out[variable].insert(tag.get<std::string>());
        }
        if (out[variable].empty()) {
            out.erase(variable);
        }
    }
    return out;
}

}  // namespace

Json to_json(const SessionState& state) {
    auto optional = [](const std::optional<std::string>& name) { return name ? Json(*name) : Json(nullptr); };
    return {
        {"alpha", state.alpha},
        {"selected_variable", optional(state.selected_variable)},
        {"selected_factor", optional(state.selected_factor)},
        {"max_variables", state.max_variables},
        {"max_factors", state.max_factors},
        {"transpose", state.transpose},
        {"absolute", state.absolute},
        {"network_mode", std::string(to_string(state.network_mode))},
    };
}

SessionState patch_session_state(SessionState state, const Json& patch, const FactorModel& model) {
    if (!patch.is_object()) {
        throw Error(ErrorCode::InvalidShape, "session body must be a JSON object");
    }
    for (const auto& [key, value] : patch.items()) {
        if (key == "alpha") {
            if (!value.is_number()) {
                throw Error(ErrorCode::InvalidShape, "alpha must be a number");
            }
            const double alpha = value.get<double>();
            if (!std::isfinite(alpha) || alpha < 0.0) {
                throw Error(ErrorCode::InvalidArgument, "alpha must be finite and >= 0");
            }
            state.alpha = alpha;
        } else if (key == "selected_variable") {
            state.selected_variable = optional_name(value, model.variable_names(), "selected_variable");
        } else if (key == "selected_factor") {
            state.selected_factor = optional_name(value, model.factor_names(), "selected_factor");
        } else if (key == "max_variables") {
            state.max_variables = limit(value, "max_variables");
        } else if (key == "max_factors") {
            state.max_factors = limit(value, "max_factors");
        } else if (key == "transpose") {
            state.transpose = flag(value, "transpose");
        } else if (key == "absolute") {
            state.absolute = flag(value, "absolute");
        } else if (key == "network_mode") {
            if (!value.is_string()) {
                throw Error(ErrorCode::InvalidShape, "network_mode must be a string");
            }
            const auto mode = parse_network_mode(value.get<std::string>());
            if (!mode) {
                throw Error(ErrorCode::InvalidArgument, "unknown network_mode '" + value.get<std::string>() + "'");
            }
            state.network_mode = *mode;
        } else if (key == "revision") {
            // Echoed back by clients; the server owns it.
        } else {
            throw Error(ErrorCode::InvalidShape, "unknown session field '" + key + "'");
        }
    }
    return state;
}

Json to_json(const TagOverlay& overlay) {
    return {{"added", tag_map_to_json(overlay.added)}, {"removed", tag_map_to_json(overlay.removed)}};
}

TagOverlay tag_overlay_from_json(const Json& json) {
    if (!json.is_object() || !json.contains("added") || !json.contains("removed")) {
        throw Error(ErrorCode::InvalidShape, "overlay must have 'added' and 'removed'");
    }
    TagOverlay overlay;
    overlay.added = tag_map_from_json(json.at("added"), "added");
    overlay.removed = tag_map_from_json(json.at("removed"), "removed");
    return overlay;
}

bool valid_session_name(const std::string& name) {
    return !name.empty() && name.size() <= 64 && std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    });
}

}  // namespace shell
}  // namespace favis
