#pragma once

#include "favis/serialize.hpp"
#include "favis/service.hpp"

#include <string>

namespace favis::shell {

[[nodiscard]] Json to_json(const SessionState& state);
/// Applies the fields present in `patch` to `state`. Wrong JSON types throw
/// InvalidShape; values violating SessionState invariants throw InvalidArgument.
[[nodiscard]] SessionState patch_session_state(SessionState state, const Json& patch, const FactorModel& model);

[[nodiscard]] Json to_json(const TagOverlay& overlay);
[[nodiscard]] TagOverlay tag_overlay_from_json(const Json& json);

[[nodiscard]] bool valid_session_name(const std::string& name);

}  // namespace favis::shell
