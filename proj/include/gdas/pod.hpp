#pragma once

#include "gdas/gp.hpp"

namespace gdas {

struct PodBasis {
    Vec mean_field;        // length p
    Mat modes;             // p x M, orthonormal columns
    Vec singular_values;   // non-increasing, length M
    Vec energy_fractions;  // cumulative ratios, length = full rank
    double discarded_energy = 0.0;  // sum of squared singular values dropped

    int num_modes() const { return static_cast<int>(modes.cols()); }
};

struct PodTruncation {
    int mode_count = -1;     // explicit M when >= 0
    double energy = 0.9999;  // cumulative-energy threshold otherwise
};

/// Mean-centered snapshot SVD via the N0 x N0 Gram matrix (snapshots are
/// columns).  Keeps the smallest M whose cumulative energy reaches the
/// threshold, or the explicit mode count.
PodBasis compute_basis(const Mat& snapshots, const PodTruncation& truncation = {});

/// Mode amplitudes alpha_i = phi_i^T (u - u0).
Vec project(const Vec& snapshot, const PodBasis& basis);

Vec reconstruct(const Vec& amplitudes, const PodBasis& basis);

/// POD basis plus one amplitude GP per mode.
class PodiModel {
public:
    /// inputs: n x d in normalized coordinates; snapshots: p x n.
    static PodiModel fit(const Mat& inputs, const Mat& snapshots,
                         const PodTruncation& truncation = {},
                         const GpFitConfig& gp_config = {});

    /// Node-wise mean and variance, treating mode GPs as independent.
    void predict_field(const Vec& x, Vec& mean, Vec& variance) const;

    /// Distribution of the weighted field integral w^T u.
    PredictiveGaussian predict_scalar(const Vec& x, const Vec& weights) const;

    const PodBasis& basis() const { return basis_; }
    const std::vector<GpModel>& amplitude_gps() const { return amplitude_gps_; }

private:
    PodBasis basis_;
    std::vector<GpModel> amplitude_gps_;
};

}  // namespace gdas
