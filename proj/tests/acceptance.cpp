// Acceptance suite: one criterion per --criterion index, one pass/fail line
// each.  Run without arguments to execute all twelve.
#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <sstream>
#include <string>

#include "gdas/uqprop.hpp"

using namespace gdas;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- helpers

PredictiveGaussian dense_gp_oracle(const Mat& X, const Vec& y, const Vec& theta,
                                   double nugget, double sigma2, const Vec& x) {
    const int n = static_cast<int>(X.rows());
    Mat r(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < X.cols(); ++j) {
                const double d = (X(i, j) - X(k, j)) / theta[j];
                s += d * d;
            }
            r(i, k) = std::exp(-s) + (i == k ? nugget : 0.0);
        }
    const Mat rinv = r.inverse();
    const Vec ones = Vec::Ones(n);
    const double ftrf = ones.dot(rinv * ones);
    const double beta = ones.dot(rinv * y) / ftrf;
    Vec rx(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < X.cols(); ++j) {
            const double d = (x[j] - X(i, j)) / theta[j];
            s += d * d;
        }
        rx[i] = std::exp(-s);
    }
    PredictiveGaussian out;
    out.mean = beta + rx.dot(rinv * (y - beta * ones));
    const double u = ones.dot(rinv * rx) - 1.0;
    out.variance = std::max(sigma2 * (1.0 - rx.dot(rinv * rx) + u * u / ftrf), 0.0);
    return out;
}

std::string tmpdir(const char* name) {
    const auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CampaignConfig podi_base_config() {
    CampaignConfig c;
    c.problem_id = "p1";
    c.doe.size = 30;
    c.validation_size = 20;
    c.test_size = 20;
    c.field_surrogate = FieldSurrogateKind::Podi;
    c.seed = 2024;
    c.gp.population = 20;
    c.gp.generations = 60;
    c.de.population = 40;
    c.de.generations = 80;
    c.epistemic_probes = 10000;
    return c;
}

CampaignConfig neural_base_config() {
    CampaignConfig c = podi_base_config();
    c.field_surrogate = FieldSurrogateKind::Neural;
    c.network.message_passing_layers = 1;
    c.network.hidden_width = 16;
    c.network.max_epochs_initial = 400;
    c.network.max_epochs_refit = 120;
    c.probe_count = 100;
    c.probe_samples = 200;
    return c;
}

// ---------------------------------------------------------------- criteria

Outcome criterion_gp_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_real_distribution<double> tdist(0.15, 0.45);
    double worst_rel = 0.0, worst_train_var = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int d = trial < 10 ? 1 : 2;
        const int n = 5;
        // Latin-hypercube rows keep the 5-point kernel well conditioned.
        Mat X(n, d);
        for (int j = 0; j < d; ++j) {
            std::vector<int> strata{0, 1, 2, 3, 4};
            std::shuffle(strata.begin(), strata.end(), rng);
            for (int i = 0; i < n; ++i)
                X(i, j) = (strata[i] + 0.2 + 0.6 * u01(rng)) / n;
        }
        Vec y(n), theta(d);
        for (int i = 0; i < n; ++i) y[i] = std::sin(9.0 * X(i, 0)) + u01(rng);
        for (int j = 0; j < d; ++j) theta[j] = tdist(rng);
        const GpModel gp = GpModel::from_hyperparameters(X, y, theta);
        const double s2 = gp.kernel().signal_variance;
        for (int t = 0; t < 5; ++t) {
            Vec x(d);
            for (int j = 0; j < d; ++j) x[j] = u01(rng);
            const PredictiveGaussian got = gp.predict(x);
            const PredictiveGaussian want =
                dense_gp_oracle(X, y, theta, gp.kernel().nugget, s2, x);
            worst_rel = std::max(worst_rel, std::abs(got.mean - want.mean) /
                                                std::max(std::abs(want.mean), 1e-12));
            worst_rel = std::max(worst_rel,
                                 std::abs(got.variance - want.variance) /
                                     std::max(std::abs(want.variance), 1e-12 * s2));
        }
        for (int i = 0; i < n; ++i)
            worst_train_var =
                std::max(worst_train_var, gp.predict(X.row(i).transpose()).variance / s2);
    }
    Outcome o;
    o.pass = worst_rel < 1e-8 && worst_train_var <= 1e-8;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max oracle rel err %.2e (limit 1e-8), max training var/sigma^2 %.2e",
                  worst_rel, worst_train_var);
    o.detail = buf;
    return o;
}

Outcome criterion_gp_accuracy() {
    const auto train_u = sobol_sequence(1, 40, 1);
    Mat X(40, 1);
    Vec y(40);
    for (int i = 0; i < 40; ++i) {
        X(i, 0) = train_u[i][0];
        y[i] = std::sin(12.0 * X(i, 0)) * X(i, 0);
    }
    GpFitConfig cfg;
    cfg.seed = 1;
    const GpModel gp = GpModel::fit(X, y, cfg);
    Vec pred(100), truth(100);
    for (int i = 0; i < 100; ++i) {
        Vec x(1);
        x << (i + 0.5) / 100.0;
        pred[i] = gp.predict(x).mean;
        truth[i] = std::sin(12.0 * x[0]) * x[0];
    }
    const MetricsResult m = metrics(pred, truth);
    Outcome o;
    o.pass = m.r2 >= 0.99 && m.nrmse <= 0.03;
    char buf[120];
    std::snprintf(buf, sizeof(buf), "r2 %.6f (>= 0.99), nrmse %.4f (<= 0.03)", m.r2,
                  m.nrmse);
    o.detail = buf;
    return o;
}

Outcome criterion_pod_exactness() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    // Full-rank random snapshots.
    const int p = 40, n = 8;
    Mat snaps(p, n);
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < n; ++k) snaps(i, k) = g(rng);
    PodTruncation full;
    full.energy = 1.0;
    const PodBasis basis = compute_basis(snaps, full);
    double recon_err = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec rec = reconstruct(project(snaps.col(k), basis), basis);
        recon_err = std::max(recon_err, (rec - snaps.col(k)).norm());
    }
    const Mat gram = basis.modes.transpose() * basis.modes;
    const double ortho =
        (gram - Mat::Identity(basis.num_modes(), basis.num_modes())).cwiseAbs().maxCoeff();

    // Two-mode synthetic data: principal angles between recovered and true span.
    Vec u0(p), v1(p), v2(p);
    for (int i = 0; i < p; ++i) {
        u0[i] = std::sin(0.2 * i);
        v1[i] = std::cos(0.13 * i);
        v2[i] = std::sin(0.41 * i + 1.0);
    }
    Mat two(p, 12);
    std::uniform_real_distribution<double> a(-2.0, 2.0);
    for (int k = 0; k < 12; ++k) two.col(k) = u0 + a(rng) * v1 + a(rng) * v2;
    PodTruncation two_modes;
    two_modes.mode_count = 2;
    const PodBasis tb = compute_basis(two, two_modes);
    Mat span(p, 2);
    span.col(0) = v1.normalized();
    span.col(1) = (v2 - v2.dot(span.col(0)) * span.col(0)).normalized();
    const Eigen::JacobiSVD<Mat> svd(span.transpose() * tb.modes);
    const double angle_err = 1.0 - svd.singularValues().minCoeff();

    Outcome o;
    o.pass = recon_err < 1e-9 && ortho < 1e-10 && angle_err < 1e-8;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "reconstruction %.2e (<1e-9), orthonormality %.2e (<1e-10), "
                  "principal-angle defect %.2e (<1e-8)",
                  recon_err, ortho, angle_err);
    o.detail = buf;
    return o;
}

Outcome criterion_jsd() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mu(-5.0, 5.0);
    std::uniform_real_distribution<double> var(1e-2, 4.0);
    double max_sym = 0.0, max_oracle = 0.0;
    bool in_range = true;
    for (int t = 0; t < 100; ++t) {
        const PredictiveGaussian p{mu(rng), var(rng)}, q{mu(rng), var(rng)};
        const double pq = jsd_gaussians(p, q);
        max_sym = std::max(max_sym, std::abs(pq - jsd_gaussians(q, p)));
        in_range = in_range && pq >= 0.0 && pq <= std::log(2.0) + 1e-12;
        max_oracle = std::max(max_oracle, std::abs(pq - jsd_gaussians(p, q, 20001)));
    }
    const double far = jsd_gaussians({0.0, 1.0}, {10.0, 1.0});
    Outcome o;
    o.pass = max_sym < 1e-12 && in_range &&
             std::abs(far - std::log(2.0)) < 1e-4 && max_oracle <= 1e-6;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "symmetry %.2e (<1e-12), |JSD(0,10)-ln2| %.2e (<1e-4), refined-grid "
                  "gap %.2e (<=1e-6), range ok: %s",
                  max_sym, std::abs(far - std::log(2.0)), max_oracle,
                  in_range ? "yes" : "no");
    o.detail = buf;
    return o;
}

Outcome criterion_de() {
    Mat bounds(2, 2);
    bounds << -5.12, 5.12, -5.12, 5.12;
    DeConfig cfg;
    cfg.population = 30;
    cfg.generations = 200;
    cfg.seed = 7;
    const DeResult res = differential_evolution(
        [](const Vec& x) {
            double s = 20.0;
            for (int j = 0; j < 2; ++j)
                s += x[j] * x[j] - 10.0 * std::cos(2.0 * M_PI * x[j]);
            return s;
        },
        bounds, cfg);

    bool in_bounds = true;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 1000 && in_bounds; ++t) {
        Mat b(2, 2);
        const double lo0 = u(rng), lo1 = u(rng);
        b << lo0, lo0 + 1.0 + std::abs(u(rng)), lo1, lo1 + 1.0 + std::abs(u(rng));
        DeConfig small;
        small.population = 10;
        small.generations = 5;
        small.seed = 100 + t;
        const double c0 = u(rng), c1 = u(rng);
        const DeResult r = differential_evolution(
            [&](const Vec& x) {
                return std::sin(3.0 * x[0] + c0) + (x[1] - c1) * (x[1] - c1);
            },
            b, small);
        for (int j = 0; j < 2; ++j)
            in_bounds = in_bounds && r.argmin[j] >= b(j, 0) && r.argmin[j] <= b(j, 1);
    }
    Outcome o;
    o.pass = res.value < 1e-6 && in_bounds;
    char buf[140];
    std::snprintf(buf, sizeof(buf),
                  "Rastrigin f* %.2e (<1e-6), 1000 random runs in bounds: %s", res.value,
                  in_bounds ? "yes" : "no");
    o.detail = buf;
    return o;
}

Outcome criterion_neural_gradients() {
    std::mt19937_64 rng(2718);
    std::normal_distribution<double> noise(0.0, 0.05);
    Mat coords(6, 1);
    for (int i = 0; i < 6; ++i) coords(i, 0) = double(i) / 5;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < 5; ++i) edges.emplace_back(i, i + 1);
    const MeshGraph graph = MeshGraph::build(coords, edges);

    double worst = 0.0;
    for (const int layers : {0, 2}) {
        NetworkConfig cfg;
        cfg.message_passing_layers = layers;
        cfg.hidden_width = 6;
        NeuralFieldModel m(cfg, 2, 1, 31 + layers);
        Vec p = m.parameters();
        for (int i = 0; i < p.size(); ++i) p[i] += noise(rng) + 0.02;
        m.set_parameters(p);

        Mat inputs(3, 2);
        inputs << 0.2, 0.8, 0.6, -0.3, 0.9, 0.5;
        std::vector<Mat> targets;
        for (int k = 0; k < 3; ++k) {
            Mat t(6, 1);
            for (int i = 0; i < 6; ++i)
                t(i, 0) = std::sin(3.0 * coords(i, 0) + inputs(k, 0)) +
                          inputs(k, 1) * coords(i, 0);
            targets.push_back(t);
        }
        Vec grad;
        m.loss_and_gradient(graph, inputs, targets, grad);
        const double h = 1e-6;
        for (int i = 0; i < p.size(); ++i) {
            Vec pp = p, pm = p, dummy;
            pp[i] += h;
            pm[i] -= h;
            m.set_parameters(pp);
            const double lp = m.loss_and_gradient(graph, inputs, targets, dummy);
            m.set_parameters(pm);
            const double lm = m.loss_and_gradient(graph, inputs, targets, dummy);
            m.set_parameters(p);
            const double fd = (lp - lm) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - grad[i]) /
                                        std::max({std::abs(fd), std::abs(grad[i]), 1e-8}));
        }
    }
    Outcome o;
    o.pass = worst < 1e-4;
    char buf[100];
    std::snprintf(buf, sizeof(buf), "max FD relative error %.2e (<1e-4), L in {0,2}", worst);
    o.detail = buf;
    return o;
}

Outcome criterion_uncertainty_precompute() {
    const Problem problem = make_problem("p1");
    const MeshGraph graph = problem.mesh.graph();
    const int d = problem.space.dimension();

    // Train a small field network on a 30-point DoE (10 validation points).
    const auto unit = sobol_sequence(d, 40 + 50, 1);
    Mat train_x(30, d), val_x(10, d);
    std::vector<Mat> train_t, val_t;
    for (int i = 0; i < 40; ++i) {
        const Vec xi = transform(unit[i], problem.space);
        const Mat t = problem.evaluate(xi).field;
        if (i < 30) {
            train_x.row(i) = xi;
            train_t.push_back(t);
        } else {
            val_x.row(i - 30) = xi;
            val_t.push_back(t);
        }
    }
    NetworkConfig ncfg;
    ncfg.message_passing_layers = 1;
    ncfg.hidden_width = 8;
    NeuralFieldModel model(ncfg, d, 1, 99);
    Vec lo(d), hi(d);
    for (int j = 0; j < d; ++j) {
        lo[j] = problem.space.marginals[j].box_lo();
        hi[j] = problem.space.marginals[j].box_hi();
    }
    model.set_input_box(lo, hi);
    model.train(graph, train_x, train_t, val_x, val_t, 400, 7);

    GpFitConfig gcfg;
    gcfg.population = 20;
    gcfg.generations = 60;
    const auto surr = model.build_uncertainty_surrogates(
        graph, problem.space, problem.mesh.weights, 90, 3000, 17, gcfg);

    // 50 held-out inputs from further down the same stream.
    double range_lo = 1e300, range_hi = -1e300;
    std::vector<double> direct(50), fitted(50);
    std::vector<std::future<void>> jobs;
    for (int t = 0; t < 4; ++t)
        jobs.push_back(std::async(std::launch::async, [&, t] {
            for (int i = t; i < 50; i += 4) {
                const Vec xi = transform(unit[40 + i], problem.space);
                direct[i] = model
                                .mc_dropout_scalar(graph, xi, problem.mesh.weights,
                                                   10000, 1000 + i)
                                .mean;
                fitted[i] = surr.mean.predict(to_unit(xi, problem.space)).mean;
            }
        }));
    for (auto& j : jobs) j.get();
    for (int i = 0; i < 50; ++i) {
        range_lo = std::min(range_lo, direct[i]);
        range_hi = std::max(range_hi, direct[i]);
    }
    const double range = range_hi - range_lo;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i)
        worst = std::max(worst, std::abs(fitted[i] - direct[i]) / range);
    Outcome o;
    o.pass = worst <= 0.02;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "max |surrogate - 10k-sample MC| %.4f of output range (<= 0.02)", worst);
    o.detail = buf;
    return o;
}

Outcome criterion_campaign_comparative() {
    CampaignConfig adaptive = podi_base_config();
    adaptive.criterion.kind = CriterionKind::SeGp;
    adaptive.infill_budget = 30;
    adaptive.epistemic_probes = 500;  // metrics only; keep the loop fast
    const CampaignState state = run_campaign(adaptive);

    int adaptive_total = -1;
    for (const auto& rec : state.records)
        if (rec.r2_drag >= 0.99) {
            adaptive_total = adaptive.doe.size + rec.iteration;
            break;
        }

    int baseline_total = -1;
    for (int m = 30; m <= 60 && baseline_total < 0; ++m) {
        CampaignConfig base = podi_base_config();
        base.doe.size = m;
        base.infill_budget = 0;
        base.epistemic_probes = 500;
        const CampaignState s = run_campaign(base);
        if (s.records[0].r2_drag >= 0.99) baseline_total = m;
    }

    Outcome o;
    o.pass = adaptive_total >= 0 &&
             (baseline_total < 0 || adaptive_total <= baseline_total);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "r2 >= 0.99 at %d adaptive samples vs %d pure-DoE samples (never = -1)",
                  adaptive_total, baseline_total);
    o.detail = buf;
    return o;
}

Outcome criterion_coupled_criteria() {
    auto run_with = [&](CriterionKind kind) {
        CampaignConfig c = neural_base_config();
        c.criterion.kind = kind;
        c.infill_budget = 30;
        return run_campaign(c);
    };
    const CampaignState segp = run_with(CriterionKind::SeGp);
    const CampaignState misfit = run_with(CriterionKind::SeWithMisfit);
    const CampaignState jsd = run_with(CriterionKind::Jsd);

    const double base_nrmse = segp.records.back().field_nrmse;
    const double base_sigma = segp.records.back().mean_sigma_field;
    const double m_nrmse = misfit.records.back().field_nrmse;
    const double m_sigma = misfit.records.back().mean_sigma_field;
    const double j_nrmse = jsd.records.back().field_nrmse;
    const double j_sigma = jsd.records.back().mean_sigma_field;

    Outcome o;
    o.pass = m_nrmse < base_nrmse && j_nrmse < base_nrmse &&
             m_sigma <= 0.5 * base_sigma && j_sigma <= 0.5 * base_sigma;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "field nRMSE se_gp %.4f vs misfit %.4f / jsd %.4f (both <); "
                  "<sigma_field> se_gp %.2e vs misfit %.2e / jsd %.2e (both <= 0.5x)",
                  base_nrmse, m_nrmse, j_nrmse, base_sigma, m_sigma, j_sigma);
    o.detail = buf;
    return o;
}

Outcome criterion_misfit_reduction() {
    const Problem problem = make_problem("p1");
    const int d = problem.space.dimension();
    const auto unit = sobol_sequence(d, 30, 1);
    Mat X(30, d);
    Vec y(30);
    std::vector<Vec> existing;
    for (int i = 0; i < 30; ++i) {
        const Vec xi = transform(unit[i], problem.space);
        X.row(i) = to_unit(xi, problem.space);
        y[i] = problem.evaluate(xi).drag;
        existing.push_back(xi);
    }
    GpFitConfig gcfg;
    gcfg.population = 20;
    gcfg.generations = 60;
    gcfg.seed = 3;
    const GpModel gp = GpModel::fit(X, y, gcfg);

    SurrogateViews views;
    const InputSpace space = problem.space;
    views.gp = [&gp, space](const Vec& xi) { return gp.predict(to_unit(xi, space)); };
    views.field = views.gp;  // field surrogate reproduces the GP mean exactly

    DeConfig de;
    de.population = 40;
    de.generations = 80;
    de.seed = 9;
    CriterionSpec se;
    se.kind = CriterionKind::SeGp;
    CriterionSpec sewm;
    sewm.kind = CriterionKind::SeWithMisfit;
    const InfillProposal a = propose_infill(se, views, space, de, existing);
    const InfillProposal b = propose_infill(sewm, views, space, de, existing);

    double dist = 0.0;
    const Vec ua = to_unit(a.xi, space), ub = to_unit(b.xi, space);
    for (int j = 0; j < d; ++j) dist = std::max(dist, std::abs(ua[j] - ub[j]));
    Outcome o;
    o.pass = dist < 1e-6;
    char buf[120];
    std::snprintf(buf, sizeof(buf),
                  "normalized argmax distance SEwMisfit vs SE_GP: %.2e (<1e-6)", dist);
    o.detail = buf;
    return o;
}

Outcome criterion_uq() {
    // Linear pushforward.
    InputSpace space1;
    space1.marginals.push_back(Marginal::uniform("x", 2.0, 6.0));
    SurrogateBundle lin;
    lin.space = space1;
    const auto f = [](const Vec& xi) { return PredictiveGaussian{3.0 * xi[0] + 1.0, 0.0}; };
    lin.gp_lift = f;
    lin.gp_drag = f;
    lin.field_scalar = f;
    lin.field_mean = [](const Vec& xi) { return Vec::Constant(2, xi[0]); };
    UqConfig cfg;
    cfg.n_qmc = 10000;
    cfg.seed = 1;
    const double mean = propagate(lin, cfg).scalars.at("lift").mean;
    const double lin_err = std::abs(mean - 13.0) / 13.0;

    // QMC self-convergence on a curved pushforward.
    InputSpace space2;
    space2.marginals.push_back(Marginal::uniform("a", 0.0, 1.0));
    space2.marginals.push_back(Marginal::uniform("b", 0.0, 1.0));
    SurrogateBundle curved;
    curved.space = space2;
    const auto g = [](const Vec& xi) {
        return PredictiveGaussian{std::sin(3.0 * xi[0]) + xi[1] * xi[1], 0.0};
    };
    curved.gp_lift = g;
    curved.gp_drag = g;
    curved.field_scalar = g;
    curved.field_mean = [](const Vec& xi) { return Vec::Constant(2, xi[0]); };
    auto mean_at = [&](int n) {
        UqConfig c;
        c.n_qmc = n;
        c.seed = 7;
        return propagate(curved, c).scalars.at("lift").mean;
    };
    const double m1 = mean_at(2500), m2 = mean_at(10000), m3 = mean_at(40000);
    const bool monotone = std::abs(m1 - m2) > std::abs(m2 - m3);

    Outcome o;
    o.pass = lin_err < 1e-3 && monotone;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "linear pushforward rel err %.2e (<1e-3); |m2500-m10000| %.2e > "
                  "|m10000-m40000| %.2e: %s",
                  lin_err, std::abs(m1 - m2), std::abs(m2 - m3), monotone ? "yes" : "no");
    o.detail = buf;
    return o;
}

Outcome criterion_determinism() {
    CampaignConfig cfg = podi_base_config();
    cfg.criterion.kind = CriterionKind::SeGp;
    cfg.infill_budget = 30;
    cfg.epistemic_probes = 500;

    const std::string dir_a = tmpdir("gdas_acc_det_a");
    const std::string dir_b = tmpdir("gdas_acc_det_b");
    const CampaignState run_a = run_campaign(cfg, dir_a);
    run_campaign(cfg, dir_b);
    const bool rerun_identical =
        slurp(dir_a + "/metrics.csv") == slurp(dir_b + "/metrics.csv");

    // Interrupt after 15 infills, save, load, finish.
    const Problem problem = make_problem(cfg.problem_id);
    const int total = cfg.doe.size + cfg.validation_size + cfg.test_size;
    const auto unit = sobol_sequence(problem.space.dimension(), total, cfg.doe.skip);
    CampaignState s;
    s.config = cfg;
    auto fill = [&](Dataset& data, int begin, int count) {
        for (int i = 0; i < count; ++i) {
            const Vec xi = transform(unit[begin + i], problem.space);
            data.append(xi, problem.evaluate(xi));
        }
    };
    fill(s.train, 0, cfg.doe.size);
    fill(s.validation, cfg.doe.size, cfg.validation_size);
    fill(s.test, cfg.doe.size + cfg.validation_size, cfg.test_size);
    continue_campaign(s, "", 15);
    const std::string path = dir_a + "/interrupted.json";
    save_state(s, path);
    CampaignState resumed = load_state(path);
    continue_campaign(resumed, "");
    const bool resume_identical = resumed.to_json() == run_a.to_json();

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    Outcome o;
    o.pass = rerun_identical && resume_identical;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "re-run metrics.csv identical: %s; save/resume at infill 15 identical: %s",
                  rerun_identical ? "yes" : "no", resume_identical ? "yes" : "no");
    o.detail = buf;
    return o;
}

struct Criterion {
    const char* name;
    Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {"GP dense-algebra oracle", criterion_gp_oracle},
    {"GP accuracy on sin(12x)*x", criterion_gp_accuracy},
    {"POD exactness", criterion_pod_exactness},
    {"JSD quadrature", criterion_jsd},
    {"differential evolution", criterion_de},
    {"neural finite-difference gradients", criterion_neural_gradients},
    {"uncertainty pre-compute surrogates", criterion_uncertainty_precompute},
    {"adaptive campaign vs pure DoE", criterion_campaign_comparative},
    {"coupled criteria vs SE_GP", criterion_coupled_criteria},
    {"SEwMisfit reduction to SE_GP", criterion_misfit_reduction},
    {"UQ propagation", criterion_uq},
    {"determinism and resume", criterion_determinism},
};

}  // namespace

int main(int argc, char** argv) {
    int selected = -1;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            selected = std::atoi(argv[++i]);
    }
    if (selected != -1 && (selected < 1 || selected > 12)) {
        std::fprintf(stderr, "usage: acceptance [--criterion 1..12]\n");
        return 2;
    }

    int failures = 0;
    for (int i = 0; i < 12; ++i) {
        if (selected != -1 && selected != i + 1) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = kCriteria[i].fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d [%s]: %s — %s (%.1fs)\n", i + 1, kCriteria[i].name,
                    o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
