#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace favis {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class RotationKind { none, varimax, oblimin };

/// Provenance of the loadings: which rotation produced them.
struct Rotation {
    RotationKind kind = RotationKind::none;
    double gamma = 0.0;  // oblimin only

    static Rotation none() { return {}; }
    static Rotation varimax() { return {RotationKind::varimax, 0.0}; }
    static Rotation oblimin(double gamma) { return {RotationKind::oblimin, gamma}; }

    [[nodiscard]] bool is_orthogonal() const noexcept { return kind != RotationKind::oblimin; }

    bool operator==(const Rotation&) const = default;
};

[[nodiscard]] std::string_view to_string(RotationKind kind) noexcept;
[[nodiscard]] std::optional<RotationKind> parse_rotation_kind(std::string_view text) noexcept;

/// How a model was estimated. Absent for models read from external loadings.
struct FitDiagnostics {
    std::string method;  // "ml" or "ppca"
    int iterations = 0;
    bool converged = true;
    // ML discrepancy log|Sigma| + tr(S Sigma^-1) - log|S| - p; absent when S is singular.
    std::optional<double> objective;
    std::vector<double> objective_trace;

    bool operator==(const FitDiagnostics&) const = default;
};

/// Plain aggregate used to assemble a FactorModel. Empty optional-ish fields
/// are filled with defaults on construction: identity factor correlations,
/// zero unique variances, zero mean, names V1..Vp and F1..Fq.
struct FactorModelParts {
    Matrix loadings;
    Matrix factor_correlations;
    Vector unique_variances;
    Vector mean;
    std::vector<std::string> variable_names;
    std::vector<std::string> factor_names;
    Rotation rotation;
    std::optional<double> ppca_sigma2;
    std::optional<FitDiagnostics> diagnostics;
    std::vector<std::string> warnings;
};

/// The fitted common factor model x = Lambda y + mu + eps with y ~ N(0, Phi)
/// and eps ~ N(0, Psi). Immutable; the constructor enforces every invariant
/// and throws Error(InvalidModel) naming the first one violated.
class FactorModel {
public:
    explicit FactorModel(FactorModelParts parts);

    [[nodiscard]] const Matrix& loadings() const noexcept { return parts_.loadings; }
    [[nodiscard]] const Matrix& factor_correlations() const noexcept { return parts_.factor_correlations; }
    [[nodiscard]] const Vector& unique_variances() const noexcept { return parts_.unique_variances; }
    [[nodiscard]] const Vector& mean() const noexcept { return parts_.mean; }
    [[nodiscard]] const std::vector<std::string>& variable_names() const noexcept { return parts_.variable_names; }
    [[nodiscard]] const std::vector<std::string>& factor_names() const noexcept { return parts_.factor_names; }
    [[nodiscard]] const Rotation& rotation() const noexcept { return parts_.rotation; }
    [[nodiscard]] const std::optional<double>& ppca_sigma2() const noexcept { return parts_.ppca_sigma2; }
    [[nodiscard]] const std::optional<FitDiagnostics>& diagnostics() const noexcept { return parts_.diagnostics; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return parts_.warnings; }

    [[nodiscard]] std::size_t variable_count() const noexcept { return static_cast<std::size_t>(parts_.loadings.rows()); }
    [[nodiscard]] std::size_t factor_count() const noexcept { return static_cast<std::size_t>(parts_.loadings.cols()); }

    /// Copy of the underlying parts, for building a derived model.
    [[nodiscard]] const FactorModelParts& parts() const noexcept { return parts_; }

    friend bool operator==(const FactorModel& a, const FactorModel& b);

private:
    FactorModelParts parts_;
};

/// Observations (n rows) by variables (p columns), all finite, n >= 2.
class Dataset {
public:
    Dataset(Matrix values, std::vector<std::string> variable_names);

    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::string>& variable_names() const noexcept { return names_; }
    [[nodiscard]] std::size_t observation_count() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    [[nodiscard]] std::size_t variable_count() const noexcept { return static_cast<std::size_t>(values_.cols()); }

private:
    Matrix values_;
    std::vector<std::string> names_;
};

struct CodebookEntry {
    std::string text;
    std::vector<std::string> tags;

    bool operator==(const CodebookEntry&) const = default;
};

/// Variable name -> descriptive text and theory tags.
class Codebook {
public:
    Codebook() = default;
    explicit Codebook(std::map<std::string, CodebookEntry> entries);

    [[nodiscard]] const std::map<std::string, CodebookEntry>& entries() const noexcept { return entries_; }
    [[nodiscard]] const CodebookEntry* find(const std::string& variable) const;
    [[nodiscard]] bool has_tag(const std::string& variable, const std::string& tag) const;

    /// Adds the tag to the variable if absent, removes it otherwise.
    [[nodiscard]] Codebook with_toggled_tag(const std::string& variable, const std::string& tag) const;

    bool operator==(const Codebook&) const = default;

private:
    std::map<std::string, CodebookEntry> entries_;
};

/// "V1".."Vn" style names.
[[nodiscard]] std::vector<std::string> generated_names(std::string_view prefix, std::size_t count);

/// Lambda Phi Lambda^T + Psi.
[[nodiscard]] Matrix model_implied_correlation(const FactorModel& model);

/// diag(Lambda Phi Lambda^T).
[[nodiscard]] Vector communalities(const FactorModel& model);

}  // namespace favis
