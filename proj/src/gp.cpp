#include "gdas/gp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gdas {

double kernel_eval(const Vec& x1, const Vec& x2, const KernelConfig& config) {
    if (x1.size() != config.length_scales.size() || x2.size() != x1.size())
        throw ConfigError("kernel_eval: dimension mismatch with length_scales");
    double s = 0.0;
    for (int j = 0; j < x1.size(); ++j) {
        const double d = (x1[j] - x2[j]) / config.length_scales[j];
        s += d * d;
    }
    return std::exp(-s);
}

namespace {

Mat correlation_matrix(const Mat& X, const Vec& theta, double nugget) {
    const int n = static_cast<int>(X.rows());
    Mat r(n, n);
    for (int i = 0; i < n; ++i) {
        r(i, i) = 1.0 + nugget;
        for (int k = i + 1; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < X.cols(); ++j) {
                const double d = (X(i, j) - X(k, j)) / theta[j];
                s += d * d;
            }
            r(i, k) = r(k, i) = std::exp(-s);
        }
    }
    return r;
}

struct ProfileFit {
    Eigen::LLT<Mat> chol;
    double beta = 0.0;
    double sigma2 = 0.0;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    double nugget_used = 0.0;
    bool ok = false;
};

// Cholesky of R with decade nugget escalation, plus closed-form beta and
// sigma^2 for the constant trend.
ProfileFit profile_fit(const Mat& X, const Vec& y, const Vec& theta, double nugget) {
    const int n = static_cast<int>(X.rows());
    ProfileFit out;
    for (double nug = nugget; nug <= 1e-6 + 1e-18; nug *= 10.0) {
        Mat r = correlation_matrix(X, theta, nug);
        Eigen::LLT<Mat> llt(r);
        if (llt.info() != Eigen::Success) continue;
        const Vec ones = Vec::Ones(n);
        const Vec rinv_ones = llt.solve(ones);
        const double denom = ones.dot(rinv_ones);
        if (!(denom > 0.0)) continue;
        const double beta = y.dot(rinv_ones) / denom;
        const Vec resid = y - beta * ones;
        const Vec rinv_resid = llt.solve(resid);
        const double sigma2 = resid.dot(rinv_resid) / n;
        double log_det = 0.0;
        const auto& l = llt.matrixLLT();
        for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(l(i, i));
        // Concentrated log-likelihood up to an additive constant; a tiny
        // floor on sigma^2 keeps exactly-interpolated data finite.
        const double ll = -0.5 * n * std::log(std::max(sigma2, 1e-300)) - 0.5 * log_det;
        out.chol = llt;
        out.beta = beta;
        out.sigma2 = sigma2;
        out.log_likelihood = ll;
        out.nugget_used = nug;
        out.ok = true;
        return out;
    }
    return out;
}

}  // namespace

double log_marginal_likelihood(const Mat& X, const Vec& y, const Vec& theta,
                               double nugget) {
    if (X.rows() < 2) throw FitError("log_marginal_likelihood: need at least 2 points");
    if (theta.size() != X.cols())
        throw ConfigError("log_marginal_likelihood: theta dimension mismatch");
    return profile_fit(X, y, theta, nugget).log_likelihood;
}

GpModel GpModel::fit(const Mat& X, const Vec& y, const GpFitConfig& config) {
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (n < 2) throw FitError("GpModel::fit: need at least 2 training points");
    if (y.size() != n) throw ConfigError("GpModel::fit: X/y size mismatch");

    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            if ((X.row(i) - X.row(k)).lpNorm<Eigen::Infinity>() < 1e-14 &&
                std::abs(y[i] - y[k]) > 1e-12) {
                std::ostringstream msg;
                msg << "GpModel::fit: duplicate inputs at rows " << i << " and " << k
                    << " with conflicting outputs";
                throw FitError(msg.str());
            }
        }
    }

    auto objective = [&](const Vec& log_theta) {
        Vec theta(d);
        for (int j = 0; j < d; ++j) theta[j] = std::pow(10.0, log_theta[j]);
        return -profile_fit(X, y, theta, config.nugget).log_likelihood;
    };

    Mat bounds(d, 2);
    bounds.col(0).setConstant(config.log10_theta_lo);
    bounds.col(1).setConstant(config.log10_theta_hi);

    DeConfig de;
    de.population = config.population > 0 ? config.population : 15 * d;
    de.generations = config.generations;
    de.seed = config.seed;
    if (config.warm_start_theta.size() == d) {
        // Previous optimum joins the initial DE population.
        Vec warm(d);
        for (int j = 0; j < d; ++j)
            warm[j] = std::clamp(std::log10(config.warm_start_theta[j]),
                                 config.log10_theta_lo, config.log10_theta_hi);
        de.initial_member = warm;
    }
    const DeResult best = differential_evolution(objective, bounds, de);

    Vec theta(d);
    for (int j = 0; j < d; ++j) theta[j] = std::pow(10.0, best.argmin[j]);
    return from_hyperparameters(X, y, theta, config.nugget);
}

GpModel GpModel::from_hyperparameters(const Mat& X, const Vec& y, const Vec& theta,
                                      double nugget) {
    if (X.rows() < 1) throw FitError("GpModel: empty training set");
    if (theta.size() != X.cols()) throw ConfigError("GpModel: theta dimension mismatch");
    GpModel m;
    m.X_ = X;
    m.y_ = y;
    m.kernel_.length_scales = theta;
    m.kernel_.nugget = nugget;
    m.factorize();
    return m;
}

void GpModel::factorize() {
    const int n = static_cast<int>(X_.rows());
    ProfileFit pf = profile_fit(X_, y_, kernel_.length_scales, kernel_.nugget);
    if (!pf.ok)
        throw FitError("GpModel: correlation matrix not positive definite even at nugget 1e-6");
    kernel_.nugget = pf.nugget_used;
    kernel_.signal_variance = pf.sigma2;
    beta_ = pf.beta;
    chol_ = pf.chol;
    const Vec ones = Vec::Ones(n);
    rinv_ones_ = chol_.solve(ones);
    ones_rinv_ones_ = ones.dot(rinv_ones_);
    alpha_ = chol_.solve(y_ - beta_ * ones);
}

PredictiveGaussian GpModel::predict(const Vec& x) const {
    const int n = static_cast<int>(X_.rows());
    Vec r(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < X_.cols(); ++j) {
            const double d = (x[j] - X_(i, j)) / kernel_.length_scales[j];
            s += d * d;
        }
        r[i] = std::exp(-s);
    }
    PredictiveGaussian out;
    out.mean = beta_ + r.dot(alpha_);
    const Vec rinv_r = chol_.solve(r);
    const double u = rinv_ones_.dot(r) - 1.0;
    double var = kernel_.signal_variance *
                 (1.0 - r.dot(rinv_r) + u * u / ones_rinv_ones_);
    out.variance = std::max(var, 0.0);
    return out;
}

bool GpModel::is_extrapolating(const Vec& x) const {
    for (int j = 0; j < x.size(); ++j)
        if (x[j] < -0.1 || x[j] > 1.1) return true;
    return false;
}

nlohmann::json GpModel::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["length_scales"] = std::vector<double>(kernel_.length_scales.begin(),
                                             kernel_.length_scales.end());
    j["nugget"] = kernel_.nugget;
    j["inputs"] = nlohmann::json::array();
    for (int i = 0; i < X_.rows(); ++i) {
        std::vector<double> row(X_.cols());
        for (int c = 0; c < X_.cols(); ++c) row[c] = X_(i, c);
        j["inputs"].push_back(row);
    }
    j["outputs"] = std::vector<double>(y_.begin(), y_.end());
    return j;
}

GpModel GpModel::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw ConfigError("GpModel::from_json: unsupported format version");
    const auto ls = j.at("length_scales").get<std::vector<double>>();
    const auto ys = j.at("outputs").get<std::vector<double>>();
    const auto& rows = j.at("inputs");
    Mat x(rows.size(), ls.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i].get<std::vector<double>>();
        for (size_t c = 0; c < row.size(); ++c) x(i, c) = row[c];
    }
    Vec theta = Eigen::Map<const Vec>(ls.data(), ls.size());
    Vec y = Eigen::Map<const Vec>(ys.data(), ys.size());
    return from_hyperparameters(x, y, theta, j.at("nugget").get<double>());
}

}  // namespace gdas
