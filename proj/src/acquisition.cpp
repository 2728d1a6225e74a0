#include "gdas/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gdas {

namespace {

double reflect_into(double x, double lo, double hi) {
    const double w = hi - lo;
    if (w <= 0.0) return lo;
    while (x < lo || x > hi) {
        if (x < lo) x = lo + (lo - x);
        if (x > hi) x = hi - (x - hi);
    }
    return x;
}

}  // namespace

DeResult differential_evolution(const std::function<double(const Vec&)>& objective,
                                const Mat& bounds, const DeConfig& config) {
    const int d = static_cast<int>(bounds.rows());
    if (d < 1 || bounds.cols() != 2) throw ConfigError("differential_evolution: bounds must be d x 2");
    for (int j = 0; j < d; ++j) {
        if (!std::isfinite(bounds(j, 0)) || !std::isfinite(bounds(j, 1)) ||
            !(bounds(j, 0) < bounds(j, 1)))
            throw ConfigError("differential_evolution: bounds must be finite with lo < hi");
    }
    const int np = config.population > 0 ? config.population : 15 * d;
    if (np < 4) throw ConfigError("differential_evolution: population must be >= 4");
    if (!(config.mutation > 0.0 && config.mutation < 2.0))
        throw ConfigError("differential_evolution: mutation must be in (0, 2)");
    if (!(config.crossover >= 0.0 && config.crossover <= 1.0))
        throw ConfigError("differential_evolution: crossover must be in [0, 1]");

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const double inf = std::numeric_limits<double>::infinity();
    auto safe_eval = [&](const Vec& x) {
        const double v = objective(x);
        return std::isfinite(v) ? v : inf;
    };

    std::vector<Vec> pop(np);
    std::vector<double> cost(np);
    long evals = 0;
    for (int i = 0; i < np; ++i) {
        Vec x(d);
        for (int j = 0; j < d; ++j)
            x[j] = bounds(j, 0) + unit(rng) * (bounds(j, 1) - bounds(j, 0));
        pop[i] = std::move(x);
    }
    if (config.initial_member) {
        if (config.initial_member->size() != d)
            throw ConfigError("differential_evolution: initial_member dimension mismatch");
        Vec x = *config.initial_member;
        for (int j = 0; j < d; ++j) x[j] = reflect_into(x[j], bounds(j, 0), bounds(j, 1));
        pop[0] = std::move(x);
    }
    for (int i = 0; i < np; ++i) {
        cost[i] = safe_eval(pop[i]);
        ++evals;
    }

    std::uniform_int_distribution<int> pick(0, np - 1);
    std::uniform_int_distribution<int> pick_dim(0, d - 1);
    Vec trial(d);
    for (int gen = 0; gen < config.generations; ++gen) {
        // Selection applied after the full generation so results do not
        // depend on evaluation order.
        std::vector<Vec> next_pop = pop;
        std::vector<double> next_cost = cost;
        for (int i = 0; i < np; ++i) {
            int a, b, c;
            do { a = pick(rng); } while (a == i);
            do { b = pick(rng); } while (b == i || b == a);
            do { c = pick(rng); } while (c == i || c == a || c == b);
            const int jrand = pick_dim(rng);
            for (int j = 0; j < d; ++j) {
                if (j == jrand || unit(rng) < config.crossover) {
                    double v = pop[a][j] + config.mutation * (pop[b][j] - pop[c][j]);
                    trial[j] = reflect_into(v, bounds(j, 0), bounds(j, 1));
                } else {
                    trial[j] = pop[i][j];
                }
            }
            const double tc = safe_eval(trial);
            ++evals;
            if (tc < cost[i]) {
                next_pop[i] = trial;
                next_cost[i] = tc;
            }
        }
        pop = std::move(next_pop);
        cost = std::move(next_cost);
    }

    int best = 0;
    for (int i = 1; i < np; ++i)
        if (cost[i] < cost[best]) best = i;
    return DeResult{pop[best], cost[best], evals};
}

double jsd_gaussians(const PredictiveGaussian& p, const PredictiveGaussian& q,
                     int grid_resolution) {
    if (!std::isfinite(p.mean) || !std::isfinite(q.mean) ||
        !std::isfinite(p.variance) || !std::isfinite(q.variance))
        throw std::domain_error("jsd_gaussians: non-finite inputs");
    if (grid_resolution < 3) throw ConfigError("jsd_gaussians: grid too small");

    // Floor tiny variances relative to the QoI scale.
    const double scale = std::max({std::abs(p.mean), std::abs(q.mean), 1.0});
    const double floor_var = 1e-18 * scale * scale;
    const double vp = std::max(p.variance, floor_var);
    const double vq = std::max(q.variance, floor_var);
    const double sp = std::sqrt(vp), sq = std::sqrt(vq);
    const double smax = std::max(sp, sq);

    const double lo = std::min(p.mean, q.mean) - 8.0 * smax;
    const double hi = std::max(p.mean, q.mean) + 8.0 * smax;
    const double h = (hi - lo) / (grid_resolution - 1);

    auto gauss = [](double x, double mu, double s) {
        const double z = (x - mu) / s;
        return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
    };

    double kl_pm = 0.0, kl_qm = 0.0;
    for (int i = 0; i < grid_resolution; ++i) {
        const double x = lo + i * h;
        const double fp = gauss(x, p.mean, sp);
        const double fq = gauss(x, q.mean, sq);
        const double fm = 0.5 * (fp + fq);
        const double w = (i == 0 || i == grid_resolution - 1) ? 0.5 : 1.0;
        if (fp > 0.0 && fm > 0.0) kl_pm += w * fp * std::log(fp / fm);
        if (fq > 0.0 && fm > 0.0) kl_qm += w * fq * std::log(fq / fm);
    }
    const double jsd = 0.5 * h * (kl_pm + kl_qm);
    return std::clamp(jsd, 0.0, std::log(2.0));
}

double criterion_value(const CriterionSpec& spec, const SurrogateViews& views,
                       const Vec& xi, const InputSpace& space,
                       CriterionParts* parts) {
    if (spec.lambda < 0.0) throw ConfigError("criterion_value: lambda must be >= 0");
    CriterionParts cp;
    double value = 0.0;
    switch (spec.kind) {
        case CriterionKind::SeGp: {
            if (!views.gp) throw ConfigError("criterion SE_GP requires a scalar GP surrogate");
            const auto g = views.gp(xi);
            cp.sigma_gp = std::sqrt(std::max(g.variance, 0.0));
            value = cp.sigma_gp;
            break;
        }
        case CriterionKind::SeField: {
            if (!views.field) throw ConfigError("criterion SE_FIELD requires a field surrogate");
            const auto f = views.field(xi);
            cp.sigma_field = std::sqrt(std::max(f.variance, 0.0));
            value = cp.sigma_field;
            break;
        }
        case CriterionKind::SeWithMisfit: {
            if (!views.gp || !views.field)
                throw ConfigError("criterion SE_WITH_MISFIT requires both surrogates");
            const auto g = views.gp(xi);
            const auto f = views.field(xi);
            cp.sigma_gp = std::sqrt(std::max(g.variance, 0.0));
            cp.misfit = spec.lambda * std::abs(g.mean - f.mean);
            value = cp.sigma_gp + cp.misfit;
            break;
        }
        case CriterionKind::Jsd: {
            if (!views.gp || !views.field)
                throw ConfigError("criterion JSD requires both surrogates");
            const auto g = views.gp(xi);
            const auto f = views.field(xi);
            cp.sigma_gp = std::sqrt(std::max(g.variance, 0.0));
            cp.sigma_field = std::sqrt(std::max(f.variance, 0.0));
            cp.misfit = std::abs(g.mean - f.mean);
            value = jsd_gaussians(g, f);
            break;
        }
    }
    cp.pdf = spec.pdf_weighting ? joint_pdf(xi, space) : 1.0;
    cp.total = value * cp.pdf;
    if (parts) *parts = cp;
    return cp.total;
}

InfillProposal propose_infill(const CriterionSpec& spec, const SurrogateViews& views,
                              const InputSpace& space, const DeConfig& de_config,
                              const std::vector<Vec>& existing_points) {
    const int d = space.dimension();
    Mat bounds(d, 2);
    for (int j = 0; j < d; ++j) {
        bounds(j, 0) = space.marginals[j].box_lo();
        bounds(j, 1) = space.marginals[j].box_hi();
    }
    auto objective = [&](const Vec& xi) {
        return -criterion_value(spec, views, xi, space);
    };

    auto is_duplicate = [&](const Vec& xi) {
        const Vec u = to_unit(xi, space);
        for (const Vec& p : existing_points) {
            if ((to_unit(p, space) - u).lpNorm<Eigen::Infinity>() < 1e-6) return true;
        }
        return false;
    };

    DeResult res = differential_evolution(objective, bounds, de_config);
    InfillProposal prop;
    if (!existing_points.empty() && is_duplicate(res.argmin)) {
        DeConfig retry = de_config;
        retry.seed = de_config.seed + 1;
        res = differential_evolution(objective, bounds, retry);
        prop.duplicate_retry = true;
        prop.duplicate_accepted = is_duplicate(res.argmin);
    }
    prop.xi = res.argmin;
    prop.criterion = criterion_value(spec, views, res.argmin, space, &prop.parts);
    return prop;
}

}  // namespace gdas
