#pragma once

#include "gdas/gp.hpp"

namespace gdas {

/// Raised on graph/model structural mismatches.
struct StructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mesh as a graph: node coordinates (normalized), symmetric directed edge
/// list and per-edge features (coordinate difference and its length).
struct MeshGraph {
    Mat coords;              // p x d_geo
    Eigen::VectorXi src;     // directed edges, both orientations
    Eigen::VectorXi dst;
    Mat edge_features;       // n_edges x (d_geo + 1)

    int num_nodes() const { return static_cast<int>(coords.rows()); }
    int num_edges() const { return static_cast<int>(src.size()); }
    int geo_dim() const { return static_cast<int>(coords.cols()); }

    static MeshGraph build(const Mat& coords,
                           const std::vector<std::pair<int, int>>& undirected_edges);
};

struct NetworkConfig {
    int message_passing_layers = 4;
    int hidden_width = 64;
    int n_fields = 1;
    double dropout_rate = 0.05;
    double lr_initial = 1e-3;
    double lr_final = 5e-4;
    int max_epochs_initial = 3000;
    int max_epochs_refit = 300;
    int patience = 20;
};

/// Message-passing field network: node features (coords || xi) through an
/// encoder MLP, L rounds of m_i = sum_j phi(h_i, h_j, e_ij) followed by
/// h_i <- psi(h_i, m_i) with single-hidden-layer phi/psi, then a linear
/// head.  ReLU activations with dropout on hidden layers only.  Gradients
/// by reverse-mode accumulation over this explicit layer graph.
class NeuralFieldModel {
public:
    NeuralFieldModel(const NetworkConfig& config, int input_dim, int geo_dim,
                     uint64_t init_seed);

    /// Deterministic forward pass; returns p x n_fields de-normalized values.
    Mat forward(const MeshGraph& graph, const Vec& xi) const;
    /// Forward pass with seeded dropout masks on hidden activations.
    Mat forward_dropout(const MeshGraph& graph, const Vec& xi, uint64_t seed) const;

    struct TrainReport {
        std::vector<double> train_rmse;  // standardized targets
        std::vector<double> val_rmse;
        int best_epoch = -1;
        bool aborted_non_finite = false;
    };

    /// Full-batch Adam on the node-wise MSE over standardized targets, with
    /// early stopping on validation RMSE.  targets[k] is p x n_fields.
    /// Normalization statistics are frozen on the first call so warm-started
    /// refits stay consistent.
    TrainReport train(const MeshGraph& graph, const Mat& inputs,
                      const std::vector<Mat>& targets, const Mat& val_inputs,
                      const std::vector<Mat>& val_targets, int max_epochs,
                      uint64_t seed);

    /// Sets the xi min-max scaling box; otherwise taken from training data.
    void set_input_box(const Vec& lo, const Vec& hi);

    /// Mean/variance of the weighted field integral over n_samples dropout
    /// passes (field index 0 unless qoi_weights has n_fields columns).
    PredictiveGaussian mc_dropout_scalar(const MeshGraph& graph, const Vec& xi,
                                         const Vec& weights, int n_samples,
                                         uint64_t seed) const;

    /// Same, for an arbitrary scalar functional of the field (evaluated on
    /// every dropout sample, so nonlinear integrands are handled exactly).
    PredictiveGaussian mc_dropout_functional(
        const MeshGraph& graph, const Vec& xi,
        const std::function<double(const Vec&)>& qoi, int n_samples,
        uint64_t seed) const;

    /// Appendix-style pre-compute: probes the input space with quasi-random
    /// points, evaluates mc_dropout_scalar at each with probe_samples passes,
    /// and fits GPs (over unit-box inputs) to the means and to the standard
    /// deviations.
    struct UncertaintySurrogates {
        GpModel mean;
        GpModel stddev;
        Mat probe_inputs;   // physical coordinates, probe_count x d
        Vec probe_means;
        Vec probe_stddevs;
    };
    UncertaintySurrogates build_uncertainty_surrogates(
        const MeshGraph& graph, const InputSpace& space, const Vec& weights,
        int probe_count, int probe_samples, uint64_t seed,
        const GpFitConfig& gp_config = {}) const;
    UncertaintySurrogates build_uncertainty_surrogates(
        const MeshGraph& graph, const InputSpace& space,
        const std::function<double(const Vec&)>& qoi, int probe_count,
        int probe_samples, uint64_t seed, const GpFitConfig& gp_config = {}) const;

    // Parameter access (tests, checkpointing, warm starts).
    const Vec& parameters() const { return params_; }
    void set_parameters(const Vec& p);
    int parameter_count() const { return static_cast<int>(params_.size()); }

    /// Loss and gradient on standardized targets; dropout_seed < 0 disables
    /// dropout.  Exposed for the finite-difference oracle.
    double loss_and_gradient(const MeshGraph& graph, const Mat& inputs,
                             const std::vector<Mat>& targets, Vec& grad,
                             int64_t dropout_seed = -1) const;

    const NetworkConfig& config() const { return config_; }
    bool has_normalization() const { return normalized_; }

    nlohmann::json to_json() const;
    static NeuralFieldModel from_json(const nlohmann::json& j);

private:
    struct Cache;
    Mat forward_standardized(const MeshGraph& graph, const Vec& xi,
                             int64_t dropout_seed, Cache* cache) const;
    void check_graph(const MeshGraph& graph) const;
    Vec normalize_input(const Vec& xi) const;
    void freeze_normalization(const Mat& inputs, const std::vector<Mat>& targets);

    NetworkConfig config_;
    int input_dim_ = 0;
    int geo_dim_ = 0;
    int edge_dim_ = 0;
    Vec params_;

    bool normalized_ = false;
    Vec x_lo_, x_hi_;        // xi min-max box
    Vec target_mean_, target_std_;  // per field

    // Flat-parameter layout.
    struct TensorRef {
        int offset;
        int rows;
        int cols;  // cols == 0 marks a bias vector
    };
    std::vector<TensorRef> layout_;
    Eigen::Map<const Mat> tensor(int idx) const;
    Eigen::Map<const Vec> bias(int idx) const;
};

}  // namespace gdas
