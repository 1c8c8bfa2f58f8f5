#include "favis/error.hpp"
#include "favis/estimator.hpp"
#include "internal.hpp"

#include <cmath>
#include <sstream>

namespace favis {

namespace {
constexpr double kDegenerateGap = 1e-10;
}

FactorModel fit_ppca(const Matrix& corr, const FitOptions& options, std::vector<std::string> variable_names) {
    if (options.n_factors < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_factors must be at least 1");
    }
    validate_correlation(corr);
    const Eigen::Index p = corr.rows();
    const Eigen::Index q = options.n_factors;
    if (q >= p) {
        throw Error(ErrorCode::InvalidArgument, "probabilistic PCA needs fewer factors (" + std::to_string(q) +
                                                    ") than variables (" + std::to_string(p) + ")");
    }
    if (!variable_names.empty() && variable_names.size() != static_cast<std::size_t>(p)) {
        throw Error(ErrorCode::InvalidArgument, "variable name count does not match the correlation matrix");
    }

    const Matrix symmetric = 0.5 * (corr + corr.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eigen(symmetric);
    const Vector& ascending = eigen.eigenvalues();
    // Descending index k maps to ascending index p - 1 - k.
    const auto value = [&](Eigen::Index k) { return ascending(p - 1 - k); };

    if (std::abs(value(q - 1) - value(q)) <= kDegenerateGap) {
        throw Error(ErrorCode::DegenerateSpectrum, "eigenvalues " + std::to_string(q) + " and " +
                                                       std::to_string(q + 1) +
                                                       " coincide; the principal subspace is not unique");
    }

    const double sigma2 = ascending.head(p - q).mean();

    FactorModelParts parts;
    parts.loadings = Matrix(p, q);
    for (Eigen::Index k = 0; k < q; ++k) {
        parts.loadings.col(k) = eigen.eigenvectors().col(p - 1 - k) * std::sqrt(std::max(value(k) - sigma2, 0.0));
    }
    detail::canonicalize_columns(parts.loadings);
    parts.unique_variances = Vector::Constant(p, sigma2);
    parts.ppca_sigma2 = sigma2;
    parts.variable_names = std::move(variable_names);
    if (sigma2 < options.unique_variance_floor) {
        std::ostringstream msg;
        msg << "isotropic unique variance " << sigma2 << " is below the floor " << options.unique_variance_floor;
        parts.warnings.push_back(msg.str());
    }

    FitDiagnostics diagnostics;
    diagnostics.method = "ppca";
    Matrix implied = parts.loadings * parts.loadings.transpose();
    implied.diagonal().array() += sigma2;
    const double discrepancy = detail::ml_discrepancy(symmetric, implied);
    if (std::isfinite(discrepancy)) {
        diagnostics.objective = discrepancy;
    }
    parts.diagnostics = std::move(diagnostics);
    return FactorModel(std::move(parts));
}

}  // namespace favis
