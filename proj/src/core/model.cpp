#include "favis/model.hpp"

#include "favis/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace favis {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kPsdTolerance = 1e-8;
constexpr double kOrthogonalPhiTolerance = 1e-10;

[[noreturn]] void invalid(const std::string& what) {
    throw Error(ErrorCode::InvalidModel, what);
}

void check_names(const std::vector<std::string>& names, std::size_t expected, const char* kind) {
    if (names.size() != expected) {
        invalid(std::string(kind) + " names: expected " + std::to_string(expected) + ", got " +
                std::to_string(names.size()));
    }
    std::set<std::string_view> seen;
    for (const auto& name : names) {
        if (name.empty()) {
            invalid(std::string(kind) + " names must be non-empty");
        }
        if (!seen.insert(name).second) {
            invalid(std::string(kind) + " names must be unique (duplicate '" + name + "')");
        }
    }
}

}  // namespace

std::string_view to_string(RotationKind kind) noexcept {
    switch (kind) {
        case RotationKind::none: return "none";
        case RotationKind::varimax: return "varimax";
        case RotationKind::oblimin: return "oblimin";
    }
    return "none";
}

std::optional<RotationKind> parse_rotation_kind(std::string_view text) noexcept {
    if (text == "none") return RotationKind::none;
    if (text == "varimax") return RotationKind::varimax;
    if (text == "oblimin") return RotationKind::oblimin;
    return std::nullopt;
}

std::vector<std::string> generated_names(std::string_view prefix, std::size_t count) {
    std::vector<std::string> names;
    names.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        names.push_back(std::string(prefix) + std::to_string(i));
    }
    return names;
}

FactorModel::FactorModel(FactorModelParts parts) : parts_(std::move(parts)) {
    const auto p = parts_.loadings.rows();
    const auto q = parts_.loadings.cols();
    if (p < 1 || q < 1) {
        invalid("loadings must have at least one variable and one factor");
    }
    if (q > p) {
        invalid("more factors (" + std::to_string(q) + ") than variables (" + std::to_string(p) + ")");
    }
    if (!parts_.loadings.allFinite()) {
        invalid("loadings must be finite");
    }

    if (parts_.factor_correlations.size() == 0) {
        parts_.factor_correlations = Matrix::Identity(q, q);
    }
    if (parts_.unique_variances.size() == 0) {
        parts_.unique_variances = Vector::Zero(p);
    }
    if (parts_.mean.size() == 0) {
        parts_.mean = Vector::Zero(p);
    }
    if (parts_.variable_names.empty()) {
        parts_.variable_names = generated_names("V", static_cast<std::size_t>(p));
    }
    if (parts_.factor_names.empty()) {
        parts_.factor_names = generated_names("F", static_cast<std::size_t>(q));
    }

    check_names(parts_.variable_names, static_cast<std::size_t>(p), "variable");
    check_names(parts_.factor_names, static_cast<std::size_t>(q), "factor");

    const Matrix& phi = parts_.factor_correlations;
    if (phi.rows() != q || phi.cols() != q) {
        invalid("factor correlation matrix must be q x q");
    }
    if (!phi.allFinite()) {
        invalid("factor correlations must be finite");
    }
    if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
        invalid("factor correlation matrix must be symmetric");
    }
    if ((phi.diagonal().array() - 1.0).abs().maxCoeff() > kSymmetryTolerance) {
        invalid("factor correlation matrix must have unit diagonal");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> phi_eigen(phi, Eigen::EigenvaluesOnly);
    if (phi_eigen.eigenvalues().minCoeff() < -kPsdTolerance) {
        invalid("factor correlation matrix must be positive semi-definite");
    }
    if (parts_.rotation.is_orthogonal() &&
        (phi - Matrix::Identity(q, q)).cwiseAbs().maxCoeff() > kOrthogonalPhiTolerance) {
        invalid("factor correlations must be the identity for an orthogonal or unrotated solution");
    }
    if (!std::isfinite(parts_.rotation.gamma)) {
        invalid("oblimin gamma must be finite");
    }

    const Vector& psi = parts_.unique_variances;
    if (psi.size() != p) {
        invalid("unique variances must have length p");
    }
    if (!psi.allFinite() || (psi.array() < 0.0).any()) {
        invalid("unique variances must be finite and nonnegative");
    }
    if (parts_.mean.size() != p || !parts_.mean.allFinite()) {
        invalid("mean must be a finite vector of length p");
    }
    if (parts_.ppca_sigma2) {
        const double sigma2 = *parts_.ppca_sigma2;
        if (!std::isfinite(sigma2) || sigma2 < 0.0) {
            invalid("ppca sigma^2 must be finite and nonnegative");
        }
        if ((psi.array() - sigma2).abs().maxCoeff() > 1e-12 * std::max(1.0, sigma2)) {
            invalid("unique variances must all equal ppca sigma^2");
        }
    }
}

bool operator==(const FactorModel& a, const FactorModel& b) {
    const auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
    };
    const auto& l = a.parts_;
    const auto& r = b.parts_;
    return same(l.loadings, r.loadings) && same(l.factor_correlations, r.factor_correlations) &&
           same(l.unique_variances, r.unique_variances) && same(l.mean, r.mean) &&
           l.variable_names == r.variable_names && l.factor_names == r.factor_names &&
           l.rotation == r.rotation && l.ppca_sigma2 == r.ppca_sigma2 &&
           l.diagnostics == r.diagnostics && l.warnings == r.warnings;
}

Dataset::Dataset(Matrix values, std::vector<std::string> variable_names)
    : values_(std::move(values)), names_(std::move(variable_names)) {
    if (values_.rows() < 2) {
        throw Error(ErrorCode::TooFewRows,
                    "a dataset needs at least 2 observations, got " + std::to_string(values_.rows()));
    }
    if (values_.cols() < 1) {
        throw Error(ErrorCode::EmptyMatrix, "a dataset needs at least one variable");
    }
    if (names_.empty()) {
        names_ = generated_names("V", static_cast<std::size_t>(values_.cols()));
    }
    if (names_.size() != static_cast<std::size_t>(values_.cols())) {
        throw Error(ErrorCode::InvalidArgument, "dataset name count does not match its columns");
    }
    std::set<std::string_view> seen;
    for (const auto& name : names_) {
        if (name.empty() || !seen.insert(name).second) {
            throw Error(ErrorCode::DuplicateHeader, "variable names must be unique and non-empty ('" + name + "')");
        }
    }
    if (!values_.allFinite()) {
        throw Error(ErrorCode::InvalidArgument, "dataset contains non-finite values");
    }
}

Codebook::Codebook(std::map<std::string, CodebookEntry> entries) : entries_(std::move(entries)) {
    for (const auto& [variable, entry] : entries_) {
        std::set<std::string_view> seen;
        for (const auto& tag : entry.tags) {
            if (tag.empty()) {
                throw Error(ErrorCode::InvalidShape, "empty tag for variable '" + variable + "'");
            }
            if (!seen.insert(tag).second) {
                throw Error(ErrorCode::InvalidShape, "duplicate tag '" + tag + "' for variable '" + variable + "'");
            }
        }
    }
}

const CodebookEntry* Codebook::find(const std::string& variable) const {
    const auto it = entries_.find(variable);
    return it == entries_.end() ? nullptr : &it->second;
}

bool Codebook::has_tag(const std::string& variable, const std::string& tag) const {
    const auto* entry = find(variable);
    return entry != nullptr && std::find(entry->tags.begin(), entry->tags.end(), tag) != entry->tags.end();
}

Codebook Codebook::with_toggled_tag(const std::string& variable, const std::string& tag) const {
    if (tag.empty()) {
        throw Error(ErrorCode::InvalidArgument, "tag must be non-empty");
    }
    auto entries = entries_;
    auto& tags = entries[variable].tags;
    const auto it = std::find(tags.begin(), tags.end(), tag);
    if (it == tags.end()) {
        tags.push_back(tag);
    } else {
        tags.erase(it);
    }
    return Codebook(std::move(entries));
}

Matrix model_implied_correlation(const FactorModel& model) {
    const Matrix& lambda = model.loadings();
    Matrix implied = lambda * model.factor_correlations() * lambda.transpose();
    implied = 0.5 * (implied + implied.transpose());
    implied.diagonal() += model.unique_variances();
    return implied;
}

Vector communalities(const FactorModel& model) {
    const Matrix& lambda = model.loadings();
    return ((lambda * model.factor_correlations()).array() * lambda.array()).rowwise().sum().cwiseMax(0.0);
}

}  // namespace favis
