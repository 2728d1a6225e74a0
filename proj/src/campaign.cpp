#include "gdas/campaign.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

namespace gdas {

namespace {

uint64_t mix_seed(uint64_t base, uint64_t salt) {
    uint64_t z = base + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Scalar functional of a field: value plus gradient for delta-method
/// variance propagation.
struct ScalarFunctional {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
};

ScalarFunctional lift_functional(const Mesh& mesh) {
    const Vec w = -mesh.weights;
    return {[w](const Vec& f) { return w.dot(f); },
            [w](const Vec&) { return w; }};
}

ScalarFunctional drag_functional(const Mesh& mesh) {
    Vec ws = mesh.weights.cwiseProduct(mesh.nodes.col(0));
    return {[ws](const Vec& f) { return ws.dot(f.cwiseAbs2()); },
            [ws](const Vec& f) -> Vec { return 2.0 * ws.cwiseProduct(f); }};
}

ScalarFunctional qoi_functional(const Mesh& mesh, int qoi) {
    return qoi == 0 ? lift_functional(mesh) : drag_functional(mesh);
}

PredictiveGaussian podi_scalar(const PodiModel& model, const Vec& x_unit,
                               const ScalarFunctional& fn) {
    Vec mean, var;
    model.predict_field(x_unit, mean, var);
    const PredictiveGaussian lin = model.predict_scalar(x_unit, fn.gradient(mean));
    return PredictiveGaussian{fn.value(mean), lin.variance};
}

struct Models {
    std::optional<GpModel> gp_lift;
    std::optional<GpModel> gp_drag;
    std::optional<PodiModel> podi;
    std::shared_ptr<NeuralFieldModel> neural;
    std::optional<NeuralFieldModel::UncertaintySurrogates> unc;
};

Mat unit_inputs(const Dataset& data, const InputSpace& space) {
    Mat xu(data.size(), space.dimension());
    for (int i = 0; i < data.size(); ++i)
        xu.row(i) = to_unit(data.inputs.row(i).transpose(), space);
    return xu;
}

}  // namespace

void Dataset::append(const Vec& xi, const BlackBoxResult& r) {
    const int n = size();
    inputs.conservativeResize(n + 1, xi.size());
    inputs.row(n) = xi;
    snapshots.push_back(r.field);
    scalars.conservativeResize(n + 1, 2);
    scalars(n, 0) = r.lift;
    scalars(n, 1) = r.drag;
}

MetricsResult metrics(const Vec& predictions, const Vec& truths) {
    if (predictions.size() != truths.size() || truths.size() == 0)
        throw ConfigError("metrics: need equal non-empty lengths");
    const double range = truths.maxCoeff() - truths.minCoeff();
    if (range <= 0.0)
        throw ConfigError("metrics: truths are all identical, r2/nRMSE undefined");
    const double mean = truths.mean();
    const double ss_tot = (truths.array() - mean).square().sum();
    const double ss_res = (predictions - truths).squaredNorm();
    MetricsResult out;
    out.r2 = 1.0 - ss_res / ss_tot;
    out.nrmse = std::sqrt(ss_res / truths.size()) / range;
    return out;
}

double mean_epistemic_variance(const std::function<double(const Vec&)>& sigma,
                               const InputSpace& space, int n_probe, uint64_t seed) {
    const int skip = 1 + static_cast<int>(seed % 65536);
    const auto probes = sobol_sequence(space.dimension(), n_probe, skip);
    double sum = 0.0;
    for (const Vec& u : probes) sum += sigma(transform(u, space));
    return sum / n_probe;
}

nlohmann::json CampaignConfig::to_json() const {
    nlohmann::json j;
    j["problem"] = problem_id;
    j["doe"] = {{"sequence", doe.sequence}, {"size", doe.size}, {"skip", doe.skip}};
    const char* kind = nullptr;
    switch (criterion.kind) {
        case CriterionKind::SeGp: kind = "se_gp"; break;
        case CriterionKind::SeField: kind = "se_field"; break;
        case CriterionKind::SeWithMisfit: kind = "se_with_misfit"; break;
        case CriterionKind::Jsd: kind = "jsd"; break;
    }
    j["infill"] = {{"criterion", kind},
                   {"lambda", criterion.lambda},
                   {"pdf_weighting", criterion.pdf_weighting},
                   {"scalar_qoi", criterion.scalar_qoi == 0 ? "lift" : "drag"},
                   {"budget", infill_budget}};
    j["field_surrogate"] = field_surrogate == FieldSurrogateKind::Podi ? "podi" : "neural";
    j["validation_size"] = validation_size;
    j["test_size"] = test_size;
    j["targets"] = {{"r2", target_r2}, {"nrmse", target_nrmse}};
    j["seed"] = seed;
    j["de"] = {{"population", de.population},
               {"mutation", de.mutation},
               {"crossover", de.crossover},
               {"generations", de.generations}};
    j["gp"] = {{"population", gp.population},
               {"generations", gp.generations},
               {"log10_theta_lo", gp.log10_theta_lo},
               {"log10_theta_hi", gp.log10_theta_hi},
               {"nugget", gp.nugget}};
    j["pod"] = {{"mode_count", pod_truncation.mode_count},
                {"energy", pod_truncation.energy}};
    j["network"] = {{"message_passing_layers", network.message_passing_layers},
                    {"hidden_width", network.hidden_width},
                    {"dropout_rate", network.dropout_rate},
                    {"lr_initial", network.lr_initial},
                    {"lr_final", network.lr_final},
                    {"max_epochs_initial", network.max_epochs_initial},
                    {"max_epochs_refit", network.max_epochs_refit},
                    {"patience", network.patience}};
    j["probe_count"] = probe_count;
    j["probe_samples"] = probe_samples;
    j["epistemic_probes"] = epistemic_probes;
    return j;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j) {
    CampaignConfig c;
    c.problem_id = j.value("problem", std::string("p1"));
    if (j.contains("doe")) {
        const auto& d = j.at("doe");
        c.doe.sequence = d.value("sequence", c.doe.sequence);
        c.doe.size = d.value("size", c.doe.size);
        c.doe.skip = d.value("skip", c.doe.skip);
    }
    if (j.contains("infill")) {
        const auto& inf = j.at("infill");
        const std::string kind = inf.value("criterion", std::string("se_gp"));
        if (kind == "se_gp") c.criterion.kind = CriterionKind::SeGp;
        else if (kind == "se_field") c.criterion.kind = CriterionKind::SeField;
        else if (kind == "se_with_misfit") c.criterion.kind = CriterionKind::SeWithMisfit;
        else if (kind == "jsd") c.criterion.kind = CriterionKind::Jsd;
        else throw ConfigError("unknown criterion: " + kind);
        c.criterion.lambda = inf.value("lambda", 1.0);
        c.criterion.pdf_weighting = inf.value("pdf_weighting", true);
        const std::string qoi = inf.value("scalar_qoi", std::string("drag"));
        if (qoi == "lift") c.criterion.scalar_qoi = 0;
        else if (qoi == "drag") c.criterion.scalar_qoi = 1;
        else throw ConfigError("unknown scalar_qoi: " + qoi);
        c.infill_budget = inf.value("budget", c.infill_budget);
    }
    const std::string fs = j.value("field_surrogate", std::string("podi"));
    if (fs == "podi") c.field_surrogate = FieldSurrogateKind::Podi;
    else if (fs == "neural") c.field_surrogate = FieldSurrogateKind::Neural;
    else throw ConfigError("unknown field_surrogate: " + fs);
    c.validation_size = j.value("validation_size", c.validation_size);
    c.test_size = j.value("test_size", c.test_size);
    if (j.contains("targets")) {
        c.target_r2 = j.at("targets").value("r2", c.target_r2);
        c.target_nrmse = j.at("targets").value("nrmse", c.target_nrmse);
    }
    c.seed = j.value("seed", uint64_t(0));
    if (j.contains("de")) {
        const auto& d = j.at("de");
        c.de.population = d.value("population", c.de.population);
        c.de.mutation = d.value("mutation", c.de.mutation);
        c.de.crossover = d.value("crossover", c.de.crossover);
        c.de.generations = d.value("generations", c.de.generations);
    }
    if (j.contains("gp")) {
        const auto& g = j.at("gp");
        c.gp.population = g.value("population", c.gp.population);
        c.gp.generations = g.value("generations", c.gp.generations);
        c.gp.log10_theta_lo = g.value("log10_theta_lo", c.gp.log10_theta_lo);
        c.gp.log10_theta_hi = g.value("log10_theta_hi", c.gp.log10_theta_hi);
        c.gp.nugget = g.value("nugget", c.gp.nugget);
    }
    if (j.contains("pod")) {
        c.pod_truncation.mode_count = j.at("pod").value("mode_count", -1);
        c.pod_truncation.energy = j.at("pod").value("energy", 0.9999);
    }
    if (j.contains("network")) {
        const auto& n = j.at("network");
        c.network.message_passing_layers =
            n.value("message_passing_layers", c.network.message_passing_layers);
        c.network.hidden_width = n.value("hidden_width", c.network.hidden_width);
        c.network.dropout_rate = n.value("dropout_rate", c.network.dropout_rate);
        c.network.lr_initial = n.value("lr_initial", c.network.lr_initial);
        c.network.lr_final = n.value("lr_final", c.network.lr_final);
        c.network.max_epochs_initial =
            n.value("max_epochs_initial", c.network.max_epochs_initial);
        c.network.max_epochs_refit = n.value("max_epochs_refit", c.network.max_epochs_refit);
        c.network.patience = n.value("patience", c.network.patience);
    }
    c.probe_count = j.value("probe_count", c.probe_count);
    c.probe_samples = j.value("probe_samples", c.probe_samples);
    c.epistemic_probes = j.value("epistemic_probes", c.epistemic_probes);
    if (c.doe.size < 1 || c.validation_size < 1 || c.test_size < 1 ||
        c.infill_budget < 0)
        throw ConfigError("campaign config: sizes must be positive, budget >= 0");
    return c;
}

namespace {

nlohmann::json dataset_to_json(const Dataset& d) {
    nlohmann::json j;
    j["inputs"] = nlohmann::json::array();
    for (int i = 0; i < d.size(); ++i) {
        std::vector<double> row(d.inputs.cols());
        for (int c = 0; c < d.inputs.cols(); ++c) row[c] = d.inputs(i, c);
        j["inputs"].push_back(row);
    }
    j["snapshots"] = nlohmann::json::array();
    for (const Vec& s : d.snapshots)
        j["snapshots"].push_back(std::vector<double>(s.begin(), s.end()));
    j["scalars"] = nlohmann::json::array();
    for (int i = 0; i < d.size(); ++i)
        j["scalars"].push_back(std::vector<double>{d.scalars(i, 0), d.scalars(i, 1)});
    return j;
}

Dataset dataset_from_json(const nlohmann::json& j) {
    Dataset d;
    const auto& inputs = j.at("inputs");
    const auto& snaps = j.at("snapshots");
    const auto& scalars = j.at("scalars");
    if (inputs.size() != snaps.size() || inputs.size() != scalars.size())
        throw ConfigError("dataset: misaligned arrays");
    const int n = static_cast<int>(inputs.size());
    for (int i = 0; i < n; ++i) {
        const auto xi = inputs[i].get<std::vector<double>>();
        const auto field = snaps[i].get<std::vector<double>>();
        const auto sc = scalars[i].get<std::vector<double>>();
        BlackBoxResult r;
        r.field = Eigen::Map<const Vec>(field.data(), field.size());
        r.lift = sc.at(0);
        r.drag = sc.at(1);
        d.append(Eigen::Map<const Vec>(xi.data(), xi.size()), r);
    }
    return d;
}

nlohmann::json record_to_json(const IterationRecord& r) {
    nlohmann::json j;
    j["iteration"] = r.iteration;
    j["r2_lift"] = r.r2_lift;
    j["nrmse_lift"] = r.nrmse_lift;
    j["r2_drag"] = r.r2_drag;
    j["nrmse_drag"] = r.nrmse_drag;
    j["field_nrmse"] = r.field_nrmse;
    j["mean_sigma_gp_lift"] = r.mean_sigma_gp_lift;
    j["mean_sigma_gp_drag"] = r.mean_sigma_gp_drag;
    j["mean_sigma_field"] = r.mean_sigma_field;
    j["has_proposal"] = r.has_proposal;
    if (r.has_proposal) {
        j["proposed_xi"] = std::vector<double>(r.proposed_xi.begin(), r.proposed_xi.end());
        j["parts"] = {{"sigma_gp", r.parts.sigma_gp},
                      {"misfit", r.parts.misfit},
                      {"sigma_field", r.parts.sigma_field},
                      {"pdf", r.parts.pdf},
                      {"total", r.parts.total}};
    }
    return j;
}

IterationRecord record_from_json(const nlohmann::json& j) {
    IterationRecord r;
    r.iteration = j.at("iteration").get<int>();
    r.r2_lift = j.at("r2_lift").get<double>();
    r.nrmse_lift = j.at("nrmse_lift").get<double>();
    r.r2_drag = j.at("r2_drag").get<double>();
    r.nrmse_drag = j.at("nrmse_drag").get<double>();
    r.field_nrmse = j.at("field_nrmse").get<double>();
    r.mean_sigma_gp_lift = j.at("mean_sigma_gp_lift").get<double>();
    r.mean_sigma_gp_drag = j.at("mean_sigma_gp_drag").get<double>();
    r.mean_sigma_field = j.at("mean_sigma_field").get<double>();
    r.has_proposal = j.at("has_proposal").get<bool>();
    if (r.has_proposal) {
        const auto xi = j.at("proposed_xi").get<std::vector<double>>();
        r.proposed_xi = Eigen::Map<const Vec>(xi.data(), xi.size());
        const auto& p = j.at("parts");
        r.parts.sigma_gp = p.at("sigma_gp").get<double>();
        r.parts.misfit = p.at("misfit").get<double>();
        r.parts.sigma_field = p.at("sigma_field").get<double>();
        r.parts.pdf = p.at("pdf").get<double>();
        r.parts.total = p.at("total").get<double>();
    }
    return r;
}

}  // namespace

nlohmann::json CampaignState::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["config"] = config.to_json();
    j["train"] = dataset_to_json(train);
    j["validation"] = dataset_to_json(validation);
    j["test"] = dataset_to_json(test);
    j["records"] = nlohmann::json::array();
    for (const auto& r : records) j["records"].push_back(record_to_json(r));
    j["completed_infills"] = completed_infills;
    j["gp_theta_lift"] = std::vector<double>(gp_theta_lift.begin(), gp_theta_lift.end());
    j["gp_theta_drag"] = std::vector<double>(gp_theta_drag.begin(), gp_theta_drag.end());
    if (neural_model) j["neural_model"] = *neural_model;
    return j;
}

CampaignState CampaignState::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw ConfigError("campaign state: unsupported format version (migration required)");
    CampaignState s;
    s.config = CampaignConfig::from_json(j.at("config"));
    s.train = dataset_from_json(j.at("train"));
    s.validation = dataset_from_json(j.at("validation"));
    s.test = dataset_from_json(j.at("test"));
    for (const auto& r : j.at("records")) s.records.push_back(record_from_json(r));
    s.completed_infills = j.at("completed_infills").get<int>();
    auto load_vec = [&](const char* key) {
        const auto v = j.at(key).get<std::vector<double>>();
        return Vec(Eigen::Map<const Vec>(v.data(), v.size()));
    };
    s.gp_theta_lift = load_vec("gp_theta_lift");
    s.gp_theta_drag = load_vec("gp_theta_drag");
    if (j.contains("neural_model")) s.neural_model = j.at("neural_model");
    return s;
}

namespace {

Models fit_models(CampaignState& state, const Problem& problem,
                  const MeshGraph& graph, int it) {
    const CampaignConfig& cfg = state.config;
    const Mat xu = unit_inputs(state.train, problem.space);

    Models m;
    GpFitConfig gl = cfg.gp;
    gl.seed = mix_seed(cfg.seed, 2 * it);
    gl.warm_start_theta = state.gp_theta_lift;
    m.gp_lift = GpModel::fit(xu, state.train.scalars.col(0), gl);
    state.gp_theta_lift = m.gp_lift->kernel().length_scales;

    GpFitConfig gd = cfg.gp;
    gd.seed = mix_seed(cfg.seed, 2 * it + 1);
    gd.warm_start_theta = state.gp_theta_drag;
    m.gp_drag = GpModel::fit(xu, state.train.scalars.col(1), gd);
    state.gp_theta_drag = m.gp_drag->kernel().length_scales;

    const int p = static_cast<int>(problem.mesh.weights.size());
    if (cfg.field_surrogate == FieldSurrogateKind::Podi) {
        Mat snaps(p, state.train.size());
        for (int k = 0; k < state.train.size(); ++k) snaps.col(k) = state.train.snapshots[k];
        GpFitConfig ga = cfg.gp;
        ga.seed = mix_seed(cfg.seed, 1000 + it);
        m.podi = PodiModel::fit(xu, snaps, cfg.pod_truncation, ga);
    } else {
        if (state.neural_model) {
            m.neural = std::make_shared<NeuralFieldModel>(
                NeuralFieldModel::from_json(*state.neural_model));
        } else {
            m.neural = std::make_shared<NeuralFieldModel>(
                cfg.network, problem.space.dimension(), graph.geo_dim(),
                mix_seed(cfg.seed, 77));
            Vec lo(problem.space.dimension()), hi(problem.space.dimension());
            for (int j = 0; j < problem.space.dimension(); ++j) {
                lo[j] = problem.space.marginals[j].box_lo();
                hi[j] = problem.space.marginals[j].box_hi();
            }
            m.neural->set_input_box(lo, hi);
        }
        auto to_targets = [&](const Dataset& d) {
            std::vector<Mat> t;
            t.reserve(d.size());
            for (const Vec& s : d.snapshots) t.push_back(s);
            return t;
        };
        const int epochs = state.neural_model ? cfg.network.max_epochs_refit
                                              : cfg.network.max_epochs_initial;
        m.neural->train(graph, state.train.inputs, to_targets(state.train),
                        state.validation.inputs, to_targets(state.validation), epochs,
                        mix_seed(cfg.seed, 5000 + it));
        state.neural_model = m.neural->to_json();

        const ScalarFunctional qoi = qoi_functional(problem.mesh, cfg.criterion.scalar_qoi);
        GpFitConfig gu = cfg.gp;
        gu.seed = mix_seed(cfg.seed, 9000 + it);
        m.unc = m.neural->build_uncertainty_surrogates(
            graph, problem.space,
            [&](const Vec& f) { return qoi.value(f); }, cfg.probe_count,
            cfg.probe_samples, mix_seed(cfg.seed, 13000 + it), gu);
    }
    return m;
}

SurrogateViews make_views(const Models& m, const Problem& problem,
                          const CampaignConfig& cfg) {
    const InputSpace space = problem.space;
    const GpModel* qoi_gp = cfg.criterion.scalar_qoi == 0 ? &*m.gp_lift : &*m.gp_drag;
    SurrogateViews views;
    views.gp = [qoi_gp, space](const Vec& xi) {
        return qoi_gp->predict(to_unit(xi, space));
    };
    if (m.unc) {
        const auto* unc = &*m.unc;
        views.field = [unc, space](const Vec& xi) {
            const Vec u = to_unit(xi, space);
            const double mean = unc->mean.predict(u).mean;
            const double sd = std::max(unc->stddev.predict(u).mean, 0.0);
            return PredictiveGaussian{mean, sd * sd};
        };
    } else if (m.podi) {
        const auto* podi = &*m.podi;
        const auto fn = std::make_shared<ScalarFunctional>(
            qoi_functional(problem.mesh, cfg.criterion.scalar_qoi));
        views.field = [podi, space, fn](const Vec& xi) {
            return podi_scalar(*podi, to_unit(xi, space), *fn);
        };
    }
    return views;
}

IterationRecord make_record(CampaignState& state, const Problem& problem,
                            const MeshGraph& graph, const Models& m, int it) {
    const CampaignConfig& cfg = state.config;
    const InputSpace& space = problem.space;
    IterationRecord rec;
    rec.iteration = it;

    const int ntest = state.test.size();
    Vec pred_lift(ntest), pred_drag(ntest);
    for (int k = 0; k < ntest; ++k) {
        const Vec u = to_unit(state.test.inputs.row(k).transpose(), space);
        pred_lift[k] = m.gp_lift->predict(u).mean;
        pred_drag[k] = m.gp_drag->predict(u).mean;
    }
    const MetricsResult ml = metrics(pred_lift, state.test.scalars.col(0));
    const MetricsResult md = metrics(pred_drag, state.test.scalars.col(1));
    rec.r2_lift = ml.r2;
    rec.nrmse_lift = ml.nrmse;
    rec.r2_drag = md.r2;
    rec.nrmse_drag = md.nrmse;

    // Field surrogate accuracy pooled over test snapshots and nodes.
    double ss = 0.0;
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
    long count = 0;
    for (int k = 0; k < ntest; ++k) {
        const Vec u = to_unit(state.test.inputs.row(k).transpose(), space);
        Vec pred;
        if (m.podi) {
            Vec var;
            m.podi->predict_field(u, pred, var);
        } else {
            pred = m.neural->forward(graph, state.test.inputs.row(k).transpose()).col(0);
        }
        const Vec& truth = state.test.snapshots[k];
        ss += (pred - truth).squaredNorm();
        count += truth.size();
        tmin = std::min(tmin, truth.minCoeff());
        tmax = std::max(tmax, truth.maxCoeff());
    }
    rec.field_nrmse = std::sqrt(ss / count) / (tmax - tmin);

    const uint64_t probe_seed = cfg.seed;  // same probe set at every iteration
    rec.mean_sigma_gp_lift = mean_epistemic_variance(
        [&](const Vec& xi) {
            return std::sqrt(std::max(m.gp_lift->predict(to_unit(xi, space)).variance, 0.0));
        },
        space, cfg.epistemic_probes, probe_seed);
    rec.mean_sigma_gp_drag = mean_epistemic_variance(
        [&](const Vec& xi) {
            return std::sqrt(std::max(m.gp_drag->predict(to_unit(xi, space)).variance, 0.0));
        },
        space, cfg.epistemic_probes, probe_seed);

    if (m.unc) {
        rec.mean_sigma_field = mean_epistemic_variance(
            [&](const Vec& xi) {
                return std::max(m.unc->stddev.predict(to_unit(xi, space)).mean, 0.0);
            },
            space, cfg.epistemic_probes, probe_seed);
    } else if (m.podi) {
        const ScalarFunctional fn = qoi_functional(problem.mesh, cfg.criterion.scalar_qoi);
        rec.mean_sigma_field = mean_epistemic_variance(
            [&](const Vec& xi) {
                return std::sqrt(
                    std::max(podi_scalar(*m.podi, to_unit(xi, space), fn).variance, 0.0));
            },
            space, cfg.epistemic_probes, probe_seed);
    }

    if (it < cfg.infill_budget) {
        const SurrogateViews views = make_views(m, problem, cfg);
        DeConfig de = cfg.de;
        de.seed = mix_seed(cfg.seed, 40000 + it);
        std::vector<Vec> existing;
        existing.reserve(state.train.size());
        for (int k = 0; k < state.train.size(); ++k)
            existing.push_back(state.train.inputs.row(k).transpose());
        const InfillProposal prop =
            propose_infill(cfg.criterion, views, space, de, existing);
        rec.has_proposal = true;
        rec.proposed_xi = prop.xi;
        rec.parts = prop.parts;
    }
    return rec;
}

void write_field_error_csv(const CampaignState& state, const Problem& problem,
                           const MeshGraph& graph, const Models& m, int it,
                           const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "fields");
    char name[64];
    std::snprintf(name, sizeof(name), "iter_%03d.csv", it);
    std::ofstream f(fs::path(out_dir) / "fields" / name);
    const int p = static_cast<int>(problem.mesh.weights.size());
    const int ntest = state.test.size();
    Vec mean_err = Vec::Zero(p), mean_abs = Vec::Zero(p);
    for (int k = 0; k < ntest; ++k) {
        Vec pred;
        if (m.podi) {
            Vec var;
            m.podi->predict_field(to_unit(state.test.inputs.row(k).transpose(), problem.space),
                                  pred, var);
        } else {
            pred = m.neural->forward(graph, state.test.inputs.row(k).transpose()).col(0);
        }
        const Vec err = pred - state.test.snapshots[k];
        mean_err += err / ntest;
        mean_abs += err.cwiseAbs() / ntest;
    }
    f << "node_index";
    for (int c = 0; c < problem.mesh.nodes.cols(); ++c) f << ",coord" << c;
    f << ",mean_error,mean_abs_error\n";
    for (int i = 0; i < p; ++i) {
        f << i;
        for (int c = 0; c < problem.mesh.nodes.cols(); ++c)
            f << ',' << fmt_double(problem.mesh.nodes(i, c));
        f << ',' << fmt_double(mean_err[i]) << ',' << fmt_double(mean_abs[i]) << '\n';
    }
}

Vec evaluate_with_retries(CampaignState& state, const Problem& problem,
                          const MeshGraph& graph, std::optional<Models>& models,
                          const Vec& first_xi, int it, BlackBoxResult& result) {
    Vec xi = first_xi;
    for (int failures = 0;; ++failures) {
        try {
            result = problem.evaluate(xi);
            return xi;
        } catch (const std::exception&) {
            if (failures >= 2)
                throw std::runtime_error("campaign: 3 consecutive black-box failures");
            if (!models) {
                // Resume path: refit on a scratch copy so the warm-start
                // carries in the state stay on the uninterrupted trajectory.
                CampaignState scratch = state;
                models = fit_models(scratch, problem, graph, it);
            }
            const SurrogateViews views = make_views(*models, problem, state.config);
            DeConfig de = state.config.de;
            de.seed = mix_seed(state.config.seed, 40000 + it) + 100 + failures;
            std::vector<Vec> existing;
            for (int k = 0; k < state.train.size(); ++k)
                existing.push_back(state.train.inputs.row(k).transpose());
            xi = propose_infill(state.config.criterion, views, problem.space, de, existing).xi;
        }
    }
}

void write_outputs(const CampaignState& state, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    save_state(state, (fs::path(out_dir) / "state.json").string());
    write_metrics_csv(state, (fs::path(out_dir) / "metrics.csv").string());
    write_trace_csv(state, (fs::path(out_dir) / "trace.csv").string());
}

}  // namespace

void continue_campaign(CampaignState& state, const std::string& out_dir,
                       int max_additional) {
    const Problem problem = make_problem(state.config.problem_id);
    const MeshGraph graph = problem.mesh.graph();
    const CampaignConfig& cfg = state.config;
    int added = 0;

    while (true) {
        const int it = state.completed_infills;
        std::optional<Models> models;
        if (static_cast<int>(state.records.size()) <= it) {
            models = fit_models(state, problem, graph, it);
            state.records.push_back(make_record(state, problem, graph, *models, it));
            if (!out_dir.empty())
                write_field_error_csv(state, problem, graph, *models, it, out_dir);
        }
        if (it >= cfg.infill_budget) break;
        if (max_additional >= 0 && added >= max_additional) break;

        const IterationRecord& rec = state.records[it];
        BlackBoxResult result;
        const Vec xi = evaluate_with_retries(state, problem, graph, models,
                                             rec.proposed_xi, it, result);
        state.train.append(xi, result);
        ++state.completed_infills;
        ++added;
    }
    if (!out_dir.empty()) write_outputs(state, out_dir);
}

CampaignState run_campaign(const CampaignConfig& config, const std::string& out_dir) {
    const Problem problem = make_problem(config.problem_id);
    const int d = problem.space.dimension();
    CampaignState state;
    state.config = config;

    const int total = config.doe.size + config.validation_size + config.test_size;
    std::vector<Vec> unit;
    if (config.doe.sequence == "sobol") {
        unit = sobol_sequence(d, total, config.doe.skip);
    } else if (config.doe.sequence == "halton") {
        unit = halton_sequence(d, total);
    } else {
        throw ConfigError("unknown DoE sequence: " + config.doe.sequence);
    }
    auto fill = [&](Dataset& data, int begin, int count) {
        for (int i = 0; i < count; ++i) {
            const Vec xi = transform(unit[begin + i], problem.space);
            data.append(xi, problem.evaluate(xi));
        }
    };
    fill(state.train, 0, config.doe.size);
    fill(state.validation, config.doe.size, config.validation_size);
    fill(state.test, config.doe.size + config.validation_size, config.test_size);

    continue_campaign(state, out_dir);
    return state;
}

void save_state(const CampaignState& state, const std::string& path) {
    // Write-then-rename so a crash never leaves a truncated state behind.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp);
        if (!f) throw std::runtime_error("save_state: cannot write " + tmp);
        f << state.to_json().dump(1, '\t') << '\n';
    }
    std::filesystem::rename(tmp, path);
}

CampaignState load_state(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_state: cannot read " + path);
    nlohmann::json j = nlohmann::json::parse(f);  // throws with byte offset
    return CampaignState::from_json(j);
}

void write_metrics_csv(const CampaignState& state, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_metrics_csv: cannot write " + path);
    f << "iteration,qoi,r2,nrmse,mean_sigma_gp,mean_sigma_field\n";
    for (const auto& r : state.records) {
        f << r.iteration << ",lift," << fmt_double(r.r2_lift) << ','
          << fmt_double(r.nrmse_lift) << ',' << fmt_double(r.mean_sigma_gp_lift) << ','
          << fmt_double(r.mean_sigma_field) << '\n';
        f << r.iteration << ",drag," << fmt_double(r.r2_drag) << ','
          << fmt_double(r.nrmse_drag) << ',' << fmt_double(r.mean_sigma_gp_drag) << ','
          << fmt_double(r.mean_sigma_field) << '\n';
    }
}

void write_trace_csv(const CampaignState& state, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_trace_csv: cannot write " + path);
    const char* kind = nullptr;
    switch (state.config.criterion.kind) {
        case CriterionKind::SeGp: kind = "se_gp"; break;
        case CriterionKind::SeField: kind = "se_field"; break;
        case CriterionKind::SeWithMisfit: kind = "se_with_misfit"; break;
        case CriterionKind::Jsd: kind = "jsd"; break;
    }
    f << "iteration,kind,sigma_gp_part,misfit_part,sigma_field_part,pdf_value,total\n";
    for (const auto& r : state.records) {
        if (!r.has_proposal) continue;
        f << r.iteration << ',' << kind << ',' << fmt_double(r.parts.sigma_gp) << ','
          << fmt_double(r.parts.misfit) << ',' << fmt_double(r.parts.sigma_field) << ','
          << fmt_double(r.parts.pdf) << ',' << fmt_double(r.parts.total) << '\n';
    }
}

SurrogateBundle rebuild_surrogates(const CampaignState& state) {
    const Problem problem = make_problem(state.config.problem_id);
    const MeshGraph graph = problem.mesh.graph();
    CampaignState scratch = state;  // fit_models updates warm-start carries
    auto models = std::make_shared<Models>(
        fit_models(scratch, problem, graph, scratch.completed_infills));
    const InputSpace space = problem.space;
    const Mesh mesh = problem.mesh;
    const CampaignConfig cfg = state.config;

    SurrogateBundle bundle;
    bundle.space = space;
    bundle.gp_lift = [models, space](const Vec& xi) {
        return models->gp_lift->predict(to_unit(xi, space));
    };
    bundle.gp_drag = [models, space](const Vec& xi) {
        return models->gp_drag->predict(to_unit(xi, space));
    };
    const SurrogateViews views = make_views(*models, problem, cfg);
    bundle.field_scalar = views.field;
    auto graph_ptr = std::make_shared<MeshGraph>(graph);
    bundle.field_mean = [models, space, graph_ptr](const Vec& xi) -> Vec {
        if (models->podi) {
            Vec mean, var;
            models->podi->predict_field(to_unit(xi, space), mean, var);
            return mean;
        }
        return models->neural->forward(*graph_ptr, xi).col(0);
    };
    return bundle;
}

}  // namespace gdas
