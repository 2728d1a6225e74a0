#pragma once

#include <Eigen/Cholesky>
#include <cstdint>

#include "gdas/acquisition.hpp"

#include "json.hpp"

namespace gdas {

/// Raised when a GP fit cannot proceed (duplicate conflicting points,
/// irrecoverable ill-conditioning).
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Squared-exponential kernel: exp(-sum_j ((x_j - x'_j) / theta_j)^2).
struct KernelConfig {
    Vec length_scales;            // one per input dimension, > 0
    double signal_variance = 1.0;  // sigma^2 > 0
    double nugget = 1e-12;         // added to the diagonal of R
};

double kernel_eval(const Vec& x1, const Vec& x2, const KernelConfig& config);

struct GpFitConfig {
    double log10_theta_lo = -2.0;
    double log10_theta_hi = 2.0;
    int population = 0;   // 0 -> 15 * dimension
    int generations = 100;
    uint64_t seed = 0;
    double nugget = 1e-12;
    /// Optional warm-start length scales injected into the DE population.
    Vec warm_start_theta;
};

/// Concentrated (profile) log-likelihood for ordinary kriging: beta and
/// sigma^2 eliminated in closed form given the length scales.  The nugget is
/// escalated by decades up to 1e-6 on Cholesky failure; -inf past that.
double log_marginal_likelihood(const Mat& X, const Vec& y, const Vec& theta,
                               double nugget = 1e-12);

/// Ordinary-kriging Gaussian process with maximum-likelihood length scales.
/// Training inputs are expected in normalized [0,1]^d coordinates.
class GpModel {
public:
    static GpModel fit(const Mat& X, const Vec& y, const GpFitConfig& config = {});

    /// Rebuild a model from explicit hyperparameters (no search).
    static GpModel from_hyperparameters(const Mat& X, const Vec& y, const Vec& theta,
                                        double nugget = 1e-12);

    PredictiveGaussian predict(const Vec& x) const;
    /// True when x falls outside [-0.1, 1.1] in any coordinate.
    bool is_extrapolating(const Vec& x) const;

    const KernelConfig& kernel() const { return kernel_; }
    double trend() const { return beta_; }
    const Mat& training_inputs() const { return X_; }
    const Vec& training_outputs() const { return y_; }
    int dimension() const { return static_cast<int>(X_.cols()); }

    nlohmann::json to_json() const;
    static GpModel from_json(const nlohmann::json& j);

private:
    GpModel() = default;
    void factorize();

    Mat X_;          // n x d
    Vec y_;          // n
    KernelConfig kernel_;
    double beta_ = 0.0;
    // Precomputed pieces of the predictor.
    Eigen::LLT<Mat> chol_;
    Vec alpha_;       // R^{-1} (y - 1 beta)
    Vec rinv_ones_;   // R^{-1} 1
    double ones_rinv_ones_ = 0.0;
};

}  // namespace gdas
