#include "internal.hpp"
#include "favis/error.hpp"
#include "favis/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace favis {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr int kMaxStalls = 10;

void validate_options(const FitOptions& options) {
    if (options.n_factors < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_factors must be at least 1");
    }
    if (options.max_iterations < 1) {
        throw Error(ErrorCode::InvalidArgument, "max_iterations must be positive");
    }
    if (!(options.tolerance > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
    }
    if (!(options.unique_variance_floor > 0.0 && options.unique_variance_floor < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "unique_variance_floor must lie in (0, 1)");
    }
}

struct ProfileValue {
    double value = 0.0;
    Vector gradient;  // with respect to log(psi)
    double scale = 1.0;  // magnitude of the terms that cancel in value
};

// Concentrated ML discrepancy as a function of the unique variances. With
// S* = Psi^-1/2 S Psi^-1/2 and eigenvalues theta_1 >= ... >= theta_p,
//   F(psi) = sum_{j > q} (theta_j - log theta_j - 1),
// and the optimal loadings for fixed psi are Psi^1/2 U_q (Theta_q - I)^1/2.
// The discarded eigenvalues are never used directly: tr S* and log|S*| give the
// full sums, and the small eigenvalues lose relative accuracy when some psi is tiny.
class ProfileLikelihood {
public:
    ProfileLikelihood(const Matrix& corr, Eigen::Index factors) : corr_(corr), factors_(factors) {
        Eigen::LLT<Matrix> llt(corr_);
        log_det_ = llt.info() == Eigen::Success ? 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum()
                                                : std::numeric_limits<double>::quiet_NaN();
    }

    [[nodiscard]] bool positive_definite() const { return std::isfinite(log_det_); }

    [[nodiscard]] ProfileValue evaluate(const Vector& log_psi) const {
        const auto eigen = scaled_spectrum(log_psi);
        const Vector& theta = eigen.eigenvalues();  // ascending
        const Matrix& u = eigen.eigenvectors();
        const Eigen::Index p = corr_.rows();

        const Vector scaled_diag = corr_.diagonal().cwiseProduct((-log_psi).array().exp().matrix());
        double trace = scaled_diag.sum();
        double log_det = log_det_ - log_psi.sum();
        ProfileValue out;
        out.gradient = -(scaled_diag.array() - 1.0).matrix();
        for (Eigen::Index j = p - factors_; j < p; ++j) {
            trace -= theta(j);
            log_det -= std::log(theta(j));
            out.gradient += (theta(j) - 1.0) * u.col(j).cwiseAbs2();
        }
        out.value = trace - log_det - static_cast<double>(p - factors_);
        out.scale = scaled_diag.sum() + std::abs(log_det_) + log_psi.cwiseAbs().sum();
        return out;
    }

    [[nodiscard]] Matrix loadings(const Vector& log_psi) const {
        const auto eigen = scaled_spectrum(log_psi);
        const Eigen::Index p = corr_.rows();
        const Vector root_psi = (0.5 * log_psi).array().exp();
        Matrix lambda(p, factors_);
        for (Eigen::Index k = 0; k < factors_; ++k) {
            const Eigen::Index j = p - 1 - k;
            const double scale = std::sqrt(std::max(eigen.eigenvalues()(j) - 1.0, 0.0));
            lambda.col(k) = root_psi.cwiseProduct(eigen.eigenvectors().col(j)) * scale;
        }
        return lambda;
    }

private:
    [[nodiscard]] Eigen::SelfAdjointEigenSolver<Matrix> scaled_spectrum(const Vector& log_psi) const {
        const Vector inv_root = (-0.5 * log_psi).array().exp();
        const Matrix scaled = inv_root.asDiagonal() * corr_ * inv_root.asDiagonal();
        return Eigen::SelfAdjointEigenSolver<Matrix>(scaled);
    }

    const Matrix& corr_;
    Eigen::Index factors_;
    double log_det_ = 0.0;
};

Vector starting_unique_variances(const Matrix& corr, const FitOptions& options) {
    const auto p = corr.rows();
    Eigen::LLT<Matrix> llt(corr);
    Vector psi;
    if (llt.info() == Eigen::Success) {
        // 1 - squared multiple correlation.
        const Matrix inverse = llt.solve(Matrix::Identity(p, p));
        psi = inverse.diagonal().cwiseInverse();
    } else {
        psi = Vector::Constant(p, 1.0 - 0.5 * static_cast<double>(options.n_factors) / static_cast<double>(p));
    }
    return psi.cwiseMax(options.unique_variance_floor).cwiseMin(1.0);
}

struct BoxMinimum {
    Vector point;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

// Projected quasi-Newton (Bertsekas) on the box [lower, upper]^p: BFGS inverse
// Hessian restricted to the free variables, Armijo search along the projection arc.
BoxMinimum minimize_on_box(const ProfileLikelihood& profile, Vector z, double lower, double upper,
                           const FitOptions& options) {
    const auto project = [&](const Vector& v) { return v.cwiseMax(lower).cwiseMin(upper).eval(); };
    const auto stationarity_at = [&](const Vector& v, const Vector& g) { return (v - project(v - g)).cwiseAbs().maxCoeff(); };
    const auto n = z.size();

    BoxMinimum result;
    z = project(z);
    auto current = profile.evaluate(z);
    result.trace.push_back(current.value);

    Matrix inverse_hessian = Matrix::Identity(n, n);
    bool fresh_hessian = true;
    int stalls = 0;

    for (int iteration = 1; iteration <= options.max_iterations; ++iteration) {
        const double stationarity = stationarity_at(z, current.gradient);
        // Objective noise from the eigensolver; progress below it cannot be measured.
        const double noise = 1e-13 * std::max(1.0, current.scale);
        if (stationarity < options.tolerance) {
            result.converged = true;
            break;
        }
        result.iterations = iteration;

        const double eps = std::min(1e-6, stationarity);
        std::vector<bool> active(static_cast<std::size_t>(n), false);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool at_lower = z(i) <= lower + eps && current.gradient(i) > 0.0;
            const bool at_upper = z(i) >= upper - eps && current.gradient(i) < 0.0;
            active[static_cast<std::size_t>(i)] = at_lower || at_upper;
        }

        const auto direction_for = [&](const Matrix& h) {
            Vector d = Vector::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (active[static_cast<std::size_t>(i)]) {
                    d(i) = -current.gradient(i);
                    continue;
                }
                double acc = 0.0;
                for (Eigen::Index j = 0; j < n; ++j) {
                    if (!active[static_cast<std::size_t>(j)]) {
                        acc -= h(i, j) * current.gradient(j);
                    }
                }
                d(i) = acc;
            }
            return d;
        };

        Vector direction = direction_for(inverse_hessian);
        if (current.gradient.dot(direction) >= 0.0) {
            inverse_hessian.setIdentity();
            fresh_hessian = true;
            direction = -current.gradient;
        }

        double full_step_gain = 0.0;
        bool accepted = false;
        Vector trial;
        ProfileValue trial_value;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            full_step_gain = -current.gradient.dot(project(z + direction) - z);
            double t = 1.0;
            for (int halving = 0; halving < kMaxHalvings; ++halving, t *= 0.5) {
                trial = project(z + t * direction);
                trial_value = profile.evaluate(trial);
                if (!std::isfinite(trial_value.value)) {
                    continue;
                }
                if (trial == z) {
                    break;
                }
                const double predicted = current.gradient.dot(trial - z);
                const bool sufficient = trial_value.value <= current.value + kArmijo * predicted;
                // Below rounding level the objective can no longer certify progress,
                // so fall back to asking for a smaller projected gradient.
                const bool flat = -predicted <= noise &&
                                  trial_value.value <= current.value &&
                                  stationarity_at(trial, trial_value.gradient) < stationarity;
                if (sufficient || flat) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted && !fresh_hessian) {
                inverse_hessian.setIdentity();
                fresh_hessian = true;
                direction = -current.gradient;
            } else {
                break;
            }
        }
        if (!accepted) {
            result.converged = full_step_gain <= noise;
            break;
        }

        const Vector s = trial - z;
        const Vector y = trial_value.gradient - current.gradient;
        const double sy = s.dot(y);
        // Steps at rounding level carry no curvature information.
        if (sy > 1e-12 * s.norm() * y.norm() && s.cwiseAbs().maxCoeff() > 1e-10) {
            if (fresh_hessian) {
                inverse_hessian *= sy / y.squaredNorm();
                fresh_hessian = false;
            }
            const double rho = 1.0 / sy;
            const Matrix left = Matrix::Identity(n, n) - rho * s * y.transpose();
            inverse_hessian = left * inverse_hessian * left.transpose() + rho * s * s.transpose();
        }

        // Accepted steps that change nothing measurable mean the iterate sits at the
        // minimum to working precision.
        const bool stalled = current.value - trial_value.value <= noise &&
                             -current.gradient.dot(trial - z) <= noise;
        stalls = stalled ? stalls + 1 : 0;
        z = trial;
        current = std::move(trial_value);
        result.trace.push_back(current.value);
        if (stalls >= kMaxStalls) {
            result.converged = true;
            break;
        }
    }

    if (!result.converged) {
        result.converged = stationarity_at(z, current.gradient) < options.tolerance;
    }
    result.point = z;
    result.value = current.value;
    return result;
}

}  // namespace

FactorModel fit_ml_efa(const Matrix& corr, const FitOptions& options, std::vector<std::string> variable_names) {
    validate_options(options);
    validate_correlation(corr);
    const Eigen::Index p = corr.rows();
    const Eigen::Index q = options.n_factors;
    if (q > p) {
        throw Error(ErrorCode::InvalidArgument,
                    "cannot extract " + std::to_string(q) + " factors from " + std::to_string(p) + " variables");
    }
    const Eigen::Index dof2 = (p - q) * (p - q) - (p + q);
    if (dof2 < 0) {
        throw Error(ErrorCode::Underidentified, "model with " + std::to_string(q) + " factors and " + std::to_string(p) +
                                                    " variables has negative degrees of freedom");
    }
    if (!variable_names.empty() && variable_names.size() != static_cast<std::size_t>(p)) {
        throw Error(ErrorCode::InvalidArgument, "variable name count does not match the correlation matrix");
    }

    const Matrix symmetric = 0.5 * (corr + corr.transpose());
    const ProfileLikelihood profile(symmetric, q);
    if (!profile.positive_definite()) {
        throw Error(ErrorCode::InvalidCorrelation, "correlation matrix is singular; ML factor analysis needs it positive definite");
    }
    const double lower = std::log(options.unique_variance_floor);
    const Vector start = starting_unique_variances(symmetric, options).array().log();
    const BoxMinimum minimum = minimize_on_box(profile, start, lower, 0.0, options);
    if (!minimum.converged) {
        throw Error(ErrorCode::NotConverged,
                    "ML factor extraction did not converge after " + std::to_string(minimum.iterations) + " iterations");
    }

    FactorModelParts parts;
    parts.loadings = profile.loadings(minimum.point);
    detail::canonicalize_columns(parts.loadings);
    parts.unique_variances = minimum.point.array().exp().cwiseMax(options.unique_variance_floor).cwiseMin(1.0);
    parts.variable_names = std::move(variable_names);
    parts.rotation = Rotation::none();

    const std::vector<std::string> names =
        parts.variable_names.empty() ? generated_names("V", static_cast<std::size_t>(p)) : parts.variable_names;
    for (Eigen::Index i = 0; i < p; ++i) {
        if (minimum.point(i) <= lower + 1e-12) {
            std::ostringstream msg;
            msg << "Heywood case: unique variance of '" << names[static_cast<std::size_t>(i)] << "' held at floor "
                << options.unique_variance_floor;
            parts.warnings.push_back(msg.str());
        }
    }

    FitDiagnostics diagnostics;
    diagnostics.method = "ml";
    diagnostics.iterations = minimum.iterations;
    diagnostics.converged = true;
    diagnostics.objective_trace = minimum.trace;
    Matrix implied = parts.loadings * parts.loadings.transpose();
    implied.diagonal() += parts.unique_variances;
    const double discrepancy = detail::ml_discrepancy(symmetric, implied);
    if (std::isfinite(discrepancy)) {
        diagnostics.objective = discrepancy;
    }
    parts.diagnostics = std::move(diagnostics);
    return FactorModel(std::move(parts));
}

}  // namespace favis
