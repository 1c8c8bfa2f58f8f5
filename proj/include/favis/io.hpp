#pragma once

#include "favis/analytics.hpp"
#include "favis/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace favis {

inline constexpr std::string_view kSchemaVersion = "favis/1";

struct DatasetReadResult {
    Dataset dataset;
    std::size_t dropped_rows = 0;
    std::vector<std::string> warnings;
};

struct LoadingsReadResult {
    FactorModel model;
    std::vector<std::string> warnings;
};

struct CodebookReadResult {
    Codebook codebook;
    std::vector<std::string> warnings;
};

/// Header row of variable names, numeric cells. Rows with an empty or
/// non-numeric cell are dropped (listwise deletion) and counted.
[[nodiscard]] DatasetReadResult read_dataset_csv(const std::filesystem::path& path);
[[nodiscard]] DatasetReadResult parse_dataset_csv(std::string_view text);

/// First column holds variable names, header holds factor names; cell (0,0) is ignored.
[[nodiscard]] LoadingsReadResult read_loadings_csv(const std::filesystem::path& path);
[[nodiscard]] LoadingsReadResult parse_loadings_csv(std::string_view text);
void write_loadings_csv(const FactorModel& model, const std::filesystem::path& path);
[[nodiscard]] std::string format_loadings_csv(const FactorModel& model);

/// JSON object: variable -> {"text": string, "tags": [string, ...]}.
[[nodiscard]] CodebookReadResult read_codebook(const std::filesystem::path& path);
[[nodiscard]] CodebookReadResult parse_codebook(std::string_view text);

/// Everything the explorer needs for one model.
struct AnalysisBundle {
    std::string schema{kSchemaVersion};
    FactorModel model;
    std::optional<Codebook> codebook;
    ThresholdSweep sweep;
    ThresholdAnalytics analytics;

    friend bool operator==(const AnalysisBundle&, const AnalysisBundle&) = default;
};

/// Sweep over the default grid plus full analytics at alpha.
[[nodiscard]] AnalysisBundle make_bundle(FactorModel model, std::optional<Codebook> codebook, double alpha);

void write_bundle(const AnalysisBundle& bundle, const std::filesystem::path& path);
[[nodiscard]] AnalysisBundle read_bundle(const std::filesystem::path& path);
[[nodiscard]] std::string format_bundle(const AnalysisBundle& bundle);
[[nodiscard]] AnalysisBundle parse_bundle(std::string_view text);

/// The analytics document served by the API and written by `analyze`:
/// threshold analytics, ECDF, default sweep, factor graph and orderings.
[[nodiscard]] std::string render_analytics_document(const FactorModel& model, const Codebook* codebook,
                                                    Threshold threshold);

/// Reads a whole file; throws FileNotFound.
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace favis
