#include "gdas/neural_field.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace gdas {

MeshGraph MeshGraph::build(const Mat& coords,
                           const std::vector<std::pair<int, int>>& undirected_edges) {
    const int p = static_cast<int>(coords.rows());
    const int d = static_cast<int>(coords.cols());
    MeshGraph g;
    g.coords = coords;
    const int ne = static_cast<int>(undirected_edges.size());
    g.src.resize(2 * ne);
    g.dst.resize(2 * ne);
    g.edge_features.resize(2 * ne, d + 1);
    int e = 0;
    for (const auto& [a, b] : undirected_edges) {
        if (a == b) throw StructureError("MeshGraph: self-loop");
        if (a < 0 || b < 0 || a >= p || b >= p)
            throw StructureError("MeshGraph: edge endpoint out of range");
        for (int dir = 0; dir < 2; ++dir) {
            const int i = dir == 0 ? a : b;
            const int j = dir == 0 ? b : a;
            g.src[e] = i;
            g.dst[e] = j;
            const Vec diff = coords.row(j) - coords.row(i);
            g.edge_features.row(e).head(d) = diff;
            g.edge_features(e, d) = diff.norm();
            ++e;
        }
    }
    return g;
}

namespace {

// Tensor layout indices per message-passing layer.
enum { kPhiW1 = 0, kPhiB1, kPhiW2, kPhiB2, kPsiW1, kPsiB1, kPsiW2, kPsiB2, kPerLayer };

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Dropout mask with entries 0 or 1/(1-rate).
Mat dropout_mask(int rows, int cols, double rate, uint64_t& rng_state) {
    Mat m(rows, cols);
    const double keep_scale = 1.0 / (1.0 - rate);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            const double u = (splitmix64(rng_state) >> 11) * 0x1.0p-53;
            m(r, c) = u < rate ? 0.0 : keep_scale;
        }
    return m;
}

inline Mat relu(const Mat& x) { return x.cwiseMax(0.0); }

}  // namespace

struct NeuralFieldModel::Cache {
    Mat z;                       // p x din
    Mat pre_enc, act_enc, h0;    // encoder
    Mat mask_enc;
    struct Layer {
        Mat u;                   // E x (2W + de)
        Mat pre_phi, act_phi;    // E x W
        Mat mask_phi;
        Mat v;                   // p x 2W
        Mat pre_psi, act_psi;    // p x W
        Mat mask_psi;
        Mat h;                   // p x W
    };
    std::vector<Layer> layers;
    Mat y;                       // p x nf, standardized
    bool with_dropout = false;
};

NeuralFieldModel::NeuralFieldModel(const NetworkConfig& config, int input_dim,
                                   int geo_dim, uint64_t init_seed)
    : config_(config), input_dim_(input_dim), geo_dim_(geo_dim),
      edge_dim_(geo_dim + 1) {
    if (config.hidden_width < 1 || config.n_fields < 1 ||
        config.message_passing_layers < 0)
        throw ConfigError("NeuralFieldModel: invalid network dimensions");
    if (config.dropout_rate < 0.0 || config.dropout_rate > 0.5)
        throw ConfigError("NeuralFieldModel: dropout_rate must be in [0, 0.5]");

    const int w = config.hidden_width;
    const int din = geo_dim + input_dim;
    const int de = edge_dim_;
    auto add = [&](int rows, int cols) {
        const int off = layout_.empty()
                            ? 0
                            : layout_.back().offset +
                                  layout_.back().rows * std::max(layout_.back().cols, 1);
        layout_.push_back({off, rows, cols});
    };
    add(w, din); add(w, 0); add(w, w); add(w, 0);  // encoder
    for (int l = 0; l < config.message_passing_layers; ++l) {
        add(w, 2 * w + de); add(w, 0); add(w, w); add(w, 0);  // phi
        add(w, 2 * w); add(w, 0); add(w, w); add(w, 0);       // psi
    }
    add(config.n_fields, w); add(config.n_fields, 0);          // head

    const auto& last = layout_.back();
    params_ = Vec::Zero(last.offset + last.rows * std::max(last.cols, 1));

    std::mt19937_64 rng(init_seed);
    for (const auto& t : layout_) {
        if (t.cols == 0) continue;  // biases start at zero
        const double limit = std::sqrt(6.0 / (t.rows + t.cols));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (int i = 0; i < t.rows * t.cols; ++i) params_[t.offset + i] = dist(rng);
    }
}

Eigen::Map<const Mat> NeuralFieldModel::tensor(int idx) const {
    const auto& t = layout_[idx];
    return Eigen::Map<const Mat>(params_.data() + t.offset, t.rows, t.cols);
}

Eigen::Map<const Vec> NeuralFieldModel::bias(int idx) const {
    const auto& t = layout_[idx];
    return Eigen::Map<const Vec>(params_.data() + t.offset, t.rows);
}

void NeuralFieldModel::set_parameters(const Vec& p) {
    if (p.size() != params_.size())
        throw StructureError("set_parameters: size mismatch");
    params_ = p;
}

void NeuralFieldModel::set_input_box(const Vec& lo, const Vec& hi) {
    if (lo.size() != input_dim_ || hi.size() != input_dim_)
        throw ConfigError("set_input_box: dimension mismatch");
    x_lo_ = lo;
    x_hi_ = hi;
}

void NeuralFieldModel::check_graph(const MeshGraph& graph) const {
    if (graph.geo_dim() != geo_dim_)
        throw StructureError("NeuralFieldModel: mesh geometric dimension mismatch");
    if (graph.edge_features.cols() != edge_dim_)
        throw StructureError("NeuralFieldModel: edge feature dimension mismatch");
}

Vec NeuralFieldModel::normalize_input(const Vec& xi) const {
    if (xi.size() != input_dim_)
        throw StructureError("NeuralFieldModel: input dimension mismatch");
    if (x_lo_.size() != input_dim_) return xi;  // no box yet: pass through
    Vec u(input_dim_);
    for (int j = 0; j < input_dim_; ++j) {
        const double w = x_hi_[j] - x_lo_[j];
        u[j] = w > 0.0 ? (xi[j] - x_lo_[j]) / w : 0.0;
    }
    return u;
}

Mat NeuralFieldModel::forward_standardized(const MeshGraph& graph, const Vec& xi,
                                           int64_t dropout_seed, Cache* cache) const {
    check_graph(graph);
    const int p = graph.num_nodes();
    const int ne = graph.num_edges();
    const int w = config_.hidden_width;
    const int nl = config_.message_passing_layers;
    const bool drop = dropout_seed >= 0 && config_.dropout_rate > 0.0;
    uint64_t rng_state = static_cast<uint64_t>(dropout_seed) * 0x9e3779b97f4a7c15ull + 1;

    Cache local;
    Cache& c = cache ? *cache : local;
    c.with_dropout = drop;
    c.layers.resize(nl);

    const Vec u = normalize_input(xi);
    c.z.resize(p, geo_dim_ + input_dim_);
    c.z.leftCols(geo_dim_) = graph.coords;
    c.z.rightCols(input_dim_) = u.transpose().replicate(p, 1);

    c.pre_enc = (c.z * tensor(0).transpose()).rowwise() + bias(1).transpose();
    c.act_enc = relu(c.pre_enc);
    if (drop) {
        c.mask_enc = dropout_mask(p, w, config_.dropout_rate, rng_state);
        c.act_enc = c.act_enc.cwiseProduct(c.mask_enc);
    }
    c.h0 = (c.act_enc * tensor(2).transpose()).rowwise() + bias(3).transpose();

    const Mat* h_prev = &c.h0;
    for (int l = 0; l < nl; ++l) {
        auto& cl = c.layers[l];
        const int base = 4 + l * kPerLayer;
        cl.u.resize(ne, 2 * w + edge_dim_);
        for (int e = 0; e < ne; ++e) {
            cl.u.row(e).head(w) = h_prev->row(graph.src[e]);
            cl.u.row(e).segment(w, w) = h_prev->row(graph.dst[e]);
            cl.u.row(e).tail(edge_dim_) = graph.edge_features.row(e);
        }
        cl.pre_phi = (cl.u * tensor(base + kPhiW1).transpose()).rowwise() +
                     bias(base + kPhiB1).transpose();
        cl.act_phi = relu(cl.pre_phi);
        if (drop) {
            cl.mask_phi = dropout_mask(ne, w, config_.dropout_rate, rng_state);
            cl.act_phi = cl.act_phi.cwiseProduct(cl.mask_phi);
        }
        const Mat messages = (cl.act_phi * tensor(base + kPhiW2).transpose()).rowwise() +
                             bias(base + kPhiB2).transpose();
        Mat agg = Mat::Zero(p, w);
        for (int e = 0; e < ne; ++e) agg.row(graph.src[e]) += messages.row(e);

        cl.v.resize(p, 2 * w);
        cl.v.leftCols(w) = *h_prev;
        cl.v.rightCols(w) = agg;
        cl.pre_psi = (cl.v * tensor(base + kPsiW1).transpose()).rowwise() +
                     bias(base + kPsiB1).transpose();
        cl.act_psi = relu(cl.pre_psi);
        if (drop) {
            cl.mask_psi = dropout_mask(p, w, config_.dropout_rate, rng_state);
            cl.act_psi = cl.act_psi.cwiseProduct(cl.mask_psi);
        }
        cl.h = (cl.act_psi * tensor(base + kPsiW2).transpose()).rowwise() +
               bias(base + kPsiB2).transpose();
        h_prev = &cl.h;
    }

    const int head = 4 + nl * kPerLayer;
    c.y = (*h_prev * tensor(head).transpose()).rowwise() + bias(head + 1).transpose();
    return c.y;
}

Mat NeuralFieldModel::forward(const MeshGraph& graph, const Vec& xi) const {
    Mat y = forward_standardized(graph, xi, -1, nullptr);
    if (normalized_)
        for (int f = 0; f < config_.n_fields; ++f)
            y.col(f) = y.col(f) * target_std_[f] + Vec::Constant(y.rows(), target_mean_[f]);
    return y;
}

Mat NeuralFieldModel::forward_dropout(const MeshGraph& graph, const Vec& xi,
                                      uint64_t seed) const {
    Mat y = forward_standardized(graph, xi, static_cast<int64_t>(seed & 0x7fffffffffffffffull),
                                 nullptr);
    if (normalized_)
        for (int f = 0; f < config_.n_fields; ++f)
            y.col(f) = y.col(f) * target_std_[f] + Vec::Constant(y.rows(), target_mean_[f]);
    return y;
}

double NeuralFieldModel::loss_and_gradient(const MeshGraph& graph, const Mat& inputs,
                                           const std::vector<Mat>& targets, Vec& grad,
                                           int64_t dropout_seed) const {
    check_graph(graph);
    const int n = static_cast<int>(inputs.rows());
    if (static_cast<int>(targets.size()) != n)
        throw StructureError("loss_and_gradient: inputs/targets misaligned");
    const int p = graph.num_nodes();
    const int ne = graph.num_edges();
    const int w = config_.hidden_width;
    const int nl = config_.message_passing_layers;
    const int nf = config_.n_fields;

    grad = Vec::Zero(params_.size());
    auto gmat = [&](int idx) {
        const auto& t = layout_[idx];
        return Eigen::Map<Mat>(grad.data() + t.offset, t.rows, t.cols);
    };
    auto gvec = [&](int idx) {
        const auto& t = layout_[idx];
        return Eigen::Map<Vec>(grad.data() + t.offset, t.rows);
    };

    double loss = 0.0;
    const double inv_norm = 1.0 / (static_cast<double>(n) * p * nf);
    Cache c;
    for (int k = 0; k < n; ++k) {
        const int64_t sample_seed =
            dropout_seed >= 0 ? dropout_seed * 1000003 + k : int64_t(-1);
        forward_standardized(graph, inputs.row(k).transpose(), sample_seed, &c);

        Mat ts(p, nf);
        for (int f = 0; f < nf; ++f) {
            const double mu = normalized_ ? target_mean_[f] : 0.0;
            const double sd = normalized_ ? target_std_[f] : 1.0;
            ts.col(f) = (targets[k].col(f).array() - mu) / sd;
        }
        const Mat err = c.y - ts;
        loss += err.squaredNorm() * inv_norm;

        // Head.
        const Mat dy = 2.0 * inv_norm * err;  // p x nf
        const int head = 4 + nl * kPerLayer;
        const Mat& h_last = nl > 0 ? c.layers[nl - 1].h : c.h0;
        gmat(head) += dy.transpose() * h_last;
        gvec(head + 1) += dy.colwise().sum().transpose();
        Mat dh = dy * tensor(head);  // p x w

        for (int l = nl - 1; l >= 0; --l) {
            const auto& cl = c.layers[l];
            const int base = 4 + l * kPerLayer;
            // psi second layer
            gmat(base + kPsiW2) += dh.transpose() * cl.act_psi;
            gvec(base + kPsiB2) += dh.colwise().sum().transpose();
            Mat dact = dh * tensor(base + kPsiW2);  // p x w
            if (c.with_dropout) dact = dact.cwiseProduct(cl.mask_psi);
            const Mat dpre_psi =
                dact.cwiseProduct((cl.pre_psi.array() > 0.0).cast<double>().matrix());
            gmat(base + kPsiW1) += dpre_psi.transpose() * cl.v;
            gvec(base + kPsiB1) += dpre_psi.colwise().sum().transpose();
            const Mat dv = dpre_psi * tensor(base + kPsiW1);  // p x 2w
            Mat dh_prev = dv.leftCols(w);
            const Mat dagg = dv.rightCols(w);

            // phi over edges: message gradient gathered from aggregation.
            Mat dmsg(ne, w);
            for (int e = 0; e < ne; ++e) dmsg.row(e) = dagg.row(graph.src[e]);
            gmat(base + kPhiW2) += dmsg.transpose() * cl.act_phi;
            gvec(base + kPhiB2) += dmsg.colwise().sum().transpose();
            Mat dact_phi = dmsg * tensor(base + kPhiW2);
            if (c.with_dropout) dact_phi = dact_phi.cwiseProduct(cl.mask_phi);
            const Mat dpre_phi =
                dact_phi.cwiseProduct((cl.pre_phi.array() > 0.0).cast<double>().matrix());
            gmat(base + kPhiW1) += dpre_phi.transpose() * cl.u;
            gvec(base + kPhiB1) += dpre_phi.colwise().sum().transpose();
            const Mat du = dpre_phi * tensor(base + kPhiW1);  // ne x (2w + de)
            for (int e = 0; e < ne; ++e) {
                dh_prev.row(graph.src[e]) += du.row(e).head(w);
                dh_prev.row(graph.dst[e]) += du.row(e).segment(w, w);
            }
            dh = std::move(dh_prev);
        }

        // Encoder.
        gmat(2) += dh.transpose() * c.act_enc;
        gvec(3) += dh.colwise().sum().transpose();
        Mat dact_enc = dh * tensor(2);
        if (c.with_dropout) dact_enc = dact_enc.cwiseProduct(c.mask_enc);
        const Mat dpre_enc =
            dact_enc.cwiseProduct((c.pre_enc.array() > 0.0).cast<double>().matrix());
        gmat(0) += dpre_enc.transpose() * c.z;
        gvec(1) += dpre_enc.colwise().sum().transpose();
    }
    return loss;
}

void NeuralFieldModel::freeze_normalization(const Mat& inputs,
                                            const std::vector<Mat>& targets) {
    if (x_lo_.size() != input_dim_) {
        x_lo_ = inputs.colwise().minCoeff();
        x_hi_ = inputs.colwise().maxCoeff();
        for (int j = 0; j < input_dim_; ++j)
            if (!(x_hi_[j] > x_lo_[j])) x_hi_[j] = x_lo_[j] + 1.0;
    }
    const int nf = config_.n_fields;
    target_mean_ = Vec::Zero(nf);
    target_std_ = Vec::Ones(nf);
    for (int f = 0; f < nf; ++f) {
        double sum = 0.0, count = 0.0;
        for (const Mat& t : targets) {
            sum += t.col(f).sum();
            count += static_cast<double>(t.rows());
        }
        const double mean = sum / count;
        double ss = 0.0;
        for (const Mat& t : targets) ss += (t.col(f).array() - mean).square().sum();
        const double sd = std::sqrt(ss / count);
        target_mean_[f] = mean;
        target_std_[f] = sd > 1e-12 ? sd : 1.0;
    }
    normalized_ = true;
}

NeuralFieldModel::TrainReport NeuralFieldModel::train(
    const MeshGraph& graph, const Mat& inputs, const std::vector<Mat>& targets,
    const Mat& val_inputs, const std::vector<Mat>& val_targets, int max_epochs,
    uint64_t seed) {
    if (targets.size() < 2)
        throw StructureError("train: need at least 2 training snapshots");
    if (!normalized_) freeze_normalization(inputs, targets);

    TrainReport report;
    const int np = parameter_count();
    Vec m = Vec::Zero(np), v = Vec::Zero(np), grad(np);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double decay = config_.lr_final / config_.lr_initial;

    auto val_rmse = [&]() {
        if (val_inputs.rows() == 0) return 0.0;
        double ss = 0.0;
        double count = 0.0;
        for (int k = 0; k < val_inputs.rows(); ++k) {
            const Mat y = forward_standardized(graph, val_inputs.row(k).transpose(), -1, nullptr);
            for (int f = 0; f < config_.n_fields; ++f) {
                const Vec ts = (val_targets[k].col(f).array() - target_mean_[f]) /
                               target_std_[f];
                ss += (y.col(f) - ts).squaredNorm();
                count += static_cast<double>(y.rows());
            }
        }
        return std::sqrt(ss / count);
    };

    Vec best_params = params_;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Vec last_finite = params_;

    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        const int64_t drop_seed =
            config_.dropout_rate > 0.0
                ? static_cast<int64_t>((seed ^ 0x5deece66dull) + epoch)
                : int64_t(-1);
        const double loss = loss_and_gradient(graph, inputs, targets, grad, drop_seed);
        if (!std::isfinite(loss)) {
            params_ = last_finite;
            report.aborted_non_finite = true;
            break;
        }
        last_finite = params_;
        report.train_rmse.push_back(std::sqrt(loss));

        const double t = max_epochs > 1 ? static_cast<double>(epoch) / (max_epochs - 1) : 0.0;
        const double lr = config_.lr_initial * std::pow(decay, t);
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
        const double bc1 = 1.0 - std::pow(beta1, epoch + 1);
        const double bc2 = 1.0 - std::pow(beta2, epoch + 1);
        params_ -= (lr / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + eps).matrix());

        const double vr = val_rmse();
        report.val_rmse.push_back(vr);
        if (vr < best_val - 1e-12) {
            best_val = vr;
            best_params = params_;
            report.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config_.patience && val_inputs.rows() > 0) {
            break;
        }
    }
    if (val_inputs.rows() > 0 && report.best_epoch >= 0) params_ = best_params;
    return report;
}

PredictiveGaussian NeuralFieldModel::mc_dropout_scalar(const MeshGraph& graph,
                                                       const Vec& xi, const Vec& weights,
                                                       int n_samples,
                                                       uint64_t seed) const {
    if (config_.dropout_rate <= 0.0)
        throw ConfigError("mc_dropout_scalar: dropout rate is zero, no epistemic signal");
    if (weights.size() != graph.num_nodes())
        throw StructureError("mc_dropout_scalar: weights length mismatch");
    return mc_dropout_functional(
        graph, xi, [&weights](const Vec& f) { return weights.dot(f); }, n_samples, seed);
}

PredictiveGaussian NeuralFieldModel::mc_dropout_functional(
    const MeshGraph& graph, const Vec& xi, const std::function<double(const Vec&)>& qoi,
    int n_samples, uint64_t seed) const {
    if (config_.dropout_rate <= 0.0)
        throw ConfigError("mc_dropout_scalar: dropout rate is zero, no epistemic signal");
    if (n_samples < 2) throw ConfigError("mc_dropout_scalar: need at least 2 samples");

    double sum = 0.0;
    std::vector<double> values(n_samples);
    for (int s = 0; s < n_samples; ++s) {
        const Mat y = forward_dropout(graph, xi, seed + static_cast<uint64_t>(s));
        values[s] = qoi(y.col(0));
        sum += values[s];
    }
    const double mean = sum / n_samples;
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    return PredictiveGaussian{mean, ss / (n_samples - 1)};
}

NeuralFieldModel::UncertaintySurrogates NeuralFieldModel::build_uncertainty_surrogates(
    const MeshGraph& graph, const InputSpace& space, const Vec& weights,
    int probe_count, int probe_samples, uint64_t seed,
    const GpFitConfig& gp_config) const {
    if (weights.size() != graph.num_nodes())
        throw StructureError("build_uncertainty_surrogates: weights length mismatch");
    return build_uncertainty_surrogates(
        graph, space, [&weights](const Vec& f) { return weights.dot(f); }, probe_count,
        probe_samples, seed, gp_config);
}

NeuralFieldModel::UncertaintySurrogates NeuralFieldModel::build_uncertainty_surrogates(
    const MeshGraph& graph, const InputSpace& space,
    const std::function<double(const Vec&)>& qoi, int probe_count, int probe_samples,
    uint64_t seed, const GpFitConfig& gp_config) const {
    if (probe_count < 20)
        throw ConfigError("build_uncertainty_surrogates: probe_count must be >= 20");
    const int d = space.dimension();
    const auto probes = sobol_sequence(d, probe_count, 1);
    Mat x_phys(probe_count, d), x_unit(probe_count, d);
    Vec means(probe_count), stds(probe_count);
    for (int i = 0; i < probe_count; ++i) {
        const Vec xi = transform(probes[i], space);
        x_phys.row(i) = xi;
        x_unit.row(i) = to_unit(xi, space);
        const PredictiveGaussian g = mc_dropout_functional(
            graph, xi, qoi, probe_samples, seed + 7919ull * static_cast<uint64_t>(i));
        means[i] = g.mean;
        stds[i] = std::sqrt(g.variance);
    }
    GpFitConfig cfg_mean = gp_config;
    GpFitConfig cfg_std = gp_config;
    cfg_std.seed = gp_config.seed + 1;
    UncertaintySurrogates out{GpModel::fit(x_unit, means, cfg_mean),
                              GpModel::fit(x_unit, stds, cfg_std), x_phys, means, stds};
    return out;
}

nlohmann::json NeuralFieldModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["config"] = {{"message_passing_layers", config_.message_passing_layers},
                   {"hidden_width", config_.hidden_width},
                   {"n_fields", config_.n_fields},
                   {"dropout_rate", config_.dropout_rate},
                   {"lr_initial", config_.lr_initial},
                   {"lr_final", config_.lr_final},
                   {"max_epochs_initial", config_.max_epochs_initial},
                   {"max_epochs_refit", config_.max_epochs_refit},
                   {"patience", config_.patience}};
    j["input_dim"] = input_dim_;
    j["geo_dim"] = geo_dim_;
    j["parameters"] = std::vector<double>(params_.begin(), params_.end());
    j["normalized"] = normalized_;
    if (normalized_) {
        j["x_lo"] = std::vector<double>(x_lo_.begin(), x_lo_.end());
        j["x_hi"] = std::vector<double>(x_hi_.begin(), x_hi_.end());
        j["target_mean"] = std::vector<double>(target_mean_.begin(), target_mean_.end());
        j["target_std"] = std::vector<double>(target_std_.begin(), target_std_.end());
    } else if (x_lo_.size() == input_dim_) {
        j["x_lo"] = std::vector<double>(x_lo_.begin(), x_lo_.end());
        j["x_hi"] = std::vector<double>(x_hi_.begin(), x_hi_.end());
    }
    return j;
}

NeuralFieldModel NeuralFieldModel::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw ConfigError("NeuralFieldModel::from_json: unsupported format version");
    const auto& jc = j.at("config");
    NetworkConfig cfg;
    cfg.message_passing_layers = jc.at("message_passing_layers").get<int>();
    cfg.hidden_width = jc.at("hidden_width").get<int>();
    cfg.n_fields = jc.at("n_fields").get<int>();
    cfg.dropout_rate = jc.at("dropout_rate").get<double>();
    cfg.lr_initial = jc.at("lr_initial").get<double>();
    cfg.lr_final = jc.at("lr_final").get<double>();
    cfg.max_epochs_initial = jc.at("max_epochs_initial").get<int>();
    cfg.max_epochs_refit = jc.at("max_epochs_refit").get<int>();
    cfg.patience = jc.at("patience").get<int>();
    NeuralFieldModel m(cfg, j.at("input_dim").get<int>(), j.at("geo_dim").get<int>(), 0);
    const auto p = j.at("parameters").get<std::vector<double>>();
    m.set_parameters(Eigen::Map<const Vec>(p.data(), p.size()));
    auto load_vec = [&](const char* key) {
        const auto v = j.at(key).get<std::vector<double>>();
        return Vec(Eigen::Map<const Vec>(v.data(), v.size()));
    };
    if (j.contains("x_lo")) {
        m.x_lo_ = load_vec("x_lo");
        m.x_hi_ = load_vec("x_hi");
    }
    m.normalized_ = j.at("normalized").get<bool>();
    if (m.normalized_) {
        m.target_mean_ = load_vec("target_mean");
        m.target_std_ = load_vec("target_std");
    }
    return m;
}

}  // namespace gdas
