#pragma once

#include "favis/analytics.hpp"
#include "favis/model.hpp"

#include "json.hpp"

#include <vector>

namespace favis {

using Json = nlohmann::json;

// JSON mappings shared by the bundle format, the analytics document and the
// HTTP API. Decoders throw Error(InvalidShape) for structurally wrong input
// and Error(InvalidModel) for values that violate model invariants.

[[nodiscard]] Json to_json(const FactorModel& model);
[[nodiscard]] FactorModel factor_model_from_json(const Json& json);

[[nodiscard]] Json to_json(const Codebook& codebook);
/// Duplicate tags within one variable are dropped and reported in warnings.
[[nodiscard]] Codebook codebook_from_json(const Json& json, std::vector<std::string>* warnings = nullptr);

[[nodiscard]] Json to_json(const MaskedLoadings& matrix);
[[nodiscard]] Json to_json(const CrossLoadingReport& report);
[[nodiscard]] Json to_json(const RedundantLoadingReport& report);
[[nodiscard]] Json to_json(const VariableNetwork& network);
[[nodiscard]] Json to_json(const ThresholdSweep& sweep);
[[nodiscard]] Json to_json(const TagSummary& summary);
[[nodiscard]] Json to_json(const ThresholdAnalytics& analytics);
[[nodiscard]] Json to_json(const std::vector<EcdfPoint>& ecdf);
[[nodiscard]] Json to_json(const FactorGraph& graph);
[[nodiscard]] Json to_json(const std::vector<WordWeight>& weights);

[[nodiscard]] ThresholdSweep threshold_sweep_from_json(const Json& json);
[[nodiscard]] ThresholdAnalytics threshold_analytics_from_json(const Json& json);

}  // namespace favis
