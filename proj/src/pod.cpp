#include "gdas/pod.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace gdas {

PodBasis compute_basis(const Mat& snapshots, const PodTruncation& truncation) {
    const int p = static_cast<int>(snapshots.rows());
    const int n = static_cast<int>(snapshots.cols());
    if (n < 2) throw ConfigError("compute_basis: need at least 2 snapshots");

    PodBasis basis;
    basis.mean_field = snapshots.rowwise().mean();
    Mat centered = snapshots.colwise() - basis.mean_field;

    // Gram-matrix eigendecomposition; p can be much larger than n.
    Mat gram = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Mat> eig(gram);
    // Ascending eigenvalues from Eigen; reverse to non-increasing.
    Vec evals = eig.eigenvalues().reverse();
    Mat evecs = eig.eigenvectors().rowwise().reverse();

    const double total = std::max(evals.sum(), 0.0);
    const double field_scale = snapshots.cwiseAbs().maxCoeff();
    const double degenerate_tol =
        1e-24 * static_cast<double>(p * n) * std::max(field_scale * field_scale, 1.0);
    if (total <= degenerate_tol) {
        // All snapshots identical: the mean field carries everything.
        basis.modes = Mat(p, 0);
        basis.singular_values = Vec(0);
        basis.energy_fractions = Vec(0);
        return basis;
    }

    int rank = 0;
    double cum = 0.0;
    Vec fractions(n);
    for (int i = 0; i < n; ++i) {
        cum += std::max(evals[i], 0.0);
        fractions[i] = cum / total;
        if (evals[i] > 1e-12 * evals[0]) rank = i + 1;
    }
    basis.energy_fractions = fractions.head(rank);

    int m;
    if (truncation.mode_count >= 0) {
        m = std::min(truncation.mode_count, rank);
    } else {
        m = rank;
        for (int i = 0; i < rank; ++i) {
            if (fractions[i] >= truncation.energy) {
                m = i + 1;
                break;
            }
        }
    }

    basis.singular_values = Vec(m);
    basis.modes = Mat(p, m);
    for (int i = 0; i < m; ++i) {
        const double sv = std::sqrt(std::max(evals[i], 0.0));
        basis.singular_values[i] = sv;
        basis.modes.col(i) = centered * evecs.col(i) / sv;
    }
    basis.discarded_energy = total - evals.head(m).sum();
    return basis;
}

Vec project(const Vec& snapshot, const PodBasis& basis) {
    if (snapshot.size() != basis.mean_field.size())
        throw ConfigError("project: snapshot length mismatch");
    return basis.modes.transpose() * (snapshot - basis.mean_field);
}

Vec reconstruct(const Vec& amplitudes, const PodBasis& basis) {
    if (amplitudes.size() != basis.num_modes())
        throw ConfigError("reconstruct: amplitude length mismatch");
    return basis.mean_field + basis.modes * amplitudes;
}

PodiModel PodiModel::fit(const Mat& inputs, const Mat& snapshots,
                         const PodTruncation& truncation,
                         const GpFitConfig& gp_config) {
    if (inputs.rows() != snapshots.cols())
        throw ConfigError("PodiModel::fit: inputs and snapshots misaligned");
    PodiModel model;
    model.basis_ = compute_basis(snapshots, truncation);
    const int m = model.basis_.num_modes();
    model.amplitude_gps_.reserve(m);
    for (int i = 0; i < m; ++i) {
        Vec amps(snapshots.cols());
        for (int k = 0; k < snapshots.cols(); ++k)
            amps[k] = model.basis_.modes.col(i).dot(snapshots.col(k) -
                                                    model.basis_.mean_field);
        GpFitConfig cfg = gp_config;
        cfg.seed = gp_config.seed + static_cast<uint64_t>(i);
        model.amplitude_gps_.push_back(GpModel::fit(inputs, amps, cfg));
    }
    return model;
}

void PodiModel::predict_field(const Vec& x, Vec& mean, Vec& variance) const {
    const int p = static_cast<int>(basis_.mean_field.size());
    mean = basis_.mean_field;
    variance = Vec::Zero(p);
    for (int i = 0; i < basis_.num_modes(); ++i) {
        const PredictiveGaussian g = amplitude_gps_[i].predict(x);
        mean += g.mean * basis_.modes.col(i);
        variance += g.variance * basis_.modes.col(i).cwiseAbs2();
    }
}

PredictiveGaussian PodiModel::predict_scalar(const Vec& x, const Vec& weights) const {
    if (weights.size() != basis_.mean_field.size())
        throw ConfigError("predict_scalar: weights length mismatch");
    PredictiveGaussian out;
    out.mean = weights.dot(basis_.mean_field);
    for (int i = 0; i < basis_.num_modes(); ++i) {
        const PredictiveGaussian g = amplitude_gps_[i].predict(x);
        const double wphi = weights.dot(basis_.modes.col(i));
        out.mean += g.mean * wphi;
        out.variance += g.variance * wphi * wphi;
    }
    return out;
}

}  // namespace gdas
