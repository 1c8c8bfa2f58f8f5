#pragma once

#include "favis/model.hpp"

#include <cstdint>

namespace favis {

struct FitOptions {
    int n_factors = 1;
    int max_iterations = 1000;
    // Projected-gradient convergence threshold for the ML profile likelihood.
    double tolerance = 1e-8;
    // Heywood guard: unique variances never drop below this.
    double unique_variance_floor = 0.005;
};

struct RotationOptions {
    int max_iterations = 10000;
    double tolerance = 1e-9;
    // Starting points: the identity plus (restarts - 1) random rotations.
    int restarts = 10;
    std::uint64_t seed = 1;
    // Kaiser row normalization during varimax.
    bool kaiser_normalize = true;
};

/// Centers each column and scales it to unit sample standard deviation (n - 1).
[[nodiscard]] Dataset standardize(const Dataset& data);

/// Pearson correlation matrix of the columns.
[[nodiscard]] Matrix correlation_matrix(const Dataset& data);

/// Maximum-likelihood EFA of a correlation matrix; unrotated, Phi = I.
[[nodiscard]] FactorModel fit_ml_efa(const Matrix& corr, const FitOptions& options,
                                     std::vector<std::string> variable_names = {});

/// Probabilistic PCA: isotropic unique variance, closed form from the spectrum.
[[nodiscard]] FactorModel fit_ppca(const Matrix& corr, const FitOptions& options,
                                   std::vector<std::string> variable_names = {});

[[nodiscard]] FactorModel rotate_varimax(const FactorModel& model, const RotationOptions& options = {});

[[nodiscard]] FactorModel rotate_oblimin(const FactorModel& model, double gamma = 0.0,
                                         const RotationOptions& options = {});

/// Sum over columns of the population variance of the squared loadings.
[[nodiscard]] double varimax_criterion(const Matrix& loadings);

/// Direct oblimin criterion (1/4) sum(L^2 .* ((I - gamma/p 11^T) L^2 N)), N = 11^T - I.
[[nodiscard]] double oblimin_criterion(const Matrix& loadings, double gamma);

/// Verifies a correlation matrix (square, finite, symmetric, unit diagonal,
/// PSD); throws Error(InvalidCorrelation).
void validate_correlation(const Matrix& corr);

}  // namespace favis
