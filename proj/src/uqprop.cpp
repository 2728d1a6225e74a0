#include "gdas/uqprop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gdas {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Chunked summation with a fixed reduction order, so results do not depend
// on how the evaluation loop might be scheduled.
double chunked_sum(const std::vector<double>& v) {
    constexpr size_t kChunk = 1024;
    std::vector<double> partial;
    for (size_t begin = 0; begin < v.size(); begin += kChunk) {
        const size_t end = std::min(begin + kChunk, v.size());
        double s = 0.0;
        for (size_t i = begin; i < end; ++i) s += v[i];
        partial.push_back(s);
    }
    while (partial.size() > 1) {
        std::vector<double> next;
        for (size_t i = 0; i < partial.size(); i += 2)
            next.push_back(i + 1 < partial.size() ? partial[i] + partial[i + 1]
                                                  : partial[i]);
        partial.swap(next);
    }
    return partial.empty() ? 0.0 : partial[0];
}

UqScalarStats scalar_stats(const std::vector<double>& samples,
                           double epistemic_var) {
    const int n = static_cast<int>(samples.size());
    UqScalarStats s;
    s.samples = n;
    s.mean = chunked_sum(samples) / n;
    std::vector<double> sq(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - s.mean;
        sq[i] = d * d;
    }
    s.stddev = std::sqrt(chunked_sum(sq) / n + std::max(epistemic_var, 0.0));
    s.p025 = percentile(samples, 0.025);
    s.p500 = percentile(samples, 0.5);
    s.p975 = percentile(samples, 0.975);
    return s;
}

}  // namespace

double percentile(std::vector<double> samples, double q) {
    if (samples.empty()) throw ConfigError("percentile: no samples");
    if (q < 0.0 || q > 1.0) throw ConfigError("percentile: q outside [0,1]");
    std::sort(samples.begin(), samples.end());
    const double h = q * (samples.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, samples.size() - 1);
    const double frac = h - lo;
    return samples[lo] + frac * (samples[hi] - samples[lo]);
}

UqReport propagate(const SurrogateBundle& surrogates, const UqConfig& config,
                   const std::string& state_hash) {
    if (config.n_qmc < 100) throw ConfigError("propagate: n_qmc must be >= 100");
    const InputSpace& space = surrogates.space;
    const int skip = 1 + static_cast<int>(config.seed % 65536);
    const auto unit = sobol_sequence(space.dimension(), config.n_qmc, skip);

    const int n = config.n_qmc;
    std::vector<double> lift(n), drag(n), fscalar(n);
    std::vector<double> lift_var(n), drag_var(n);
    Vec field_sum, field_sq;
    for (int i = 0; i < n; ++i) {
        const Vec xi = transform(unit[i], space);
        const PredictiveGaussian gl = surrogates.gp_lift(xi);
        const PredictiveGaussian gd = surrogates.gp_drag(xi);
        lift[i] = gl.mean;
        drag[i] = gd.mean;
        lift_var[i] = std::max(gl.variance, 0.0);
        drag_var[i] = std::max(gd.variance, 0.0);
        fscalar[i] = surrogates.field_scalar(xi).mean;
        const Vec f = surrogates.field_mean(xi);
        if (i == 0) {
            field_sum = Vec::Zero(f.size());
            field_sq = Vec::Zero(f.size());
        }
        field_sum += f;
        field_sq += f.cwiseAbs2();
    }

    UqReport report;
    report.n_qmc = n;
    report.seed = config.seed;
    report.state_hash = state_hash;
    const double ep_lift = config.include_epistemic ? chunked_sum(lift_var) / n : 0.0;
    const double ep_drag = config.include_epistemic ? chunked_sum(drag_var) / n : 0.0;
    report.scalars["lift"] = scalar_stats(lift, ep_lift);
    report.scalars["drag"] = scalar_stats(drag, ep_drag);
    report.scalars["field_scalar"] = scalar_stats(fscalar, 0.0);
    report.field_mean = field_sum / n;
    report.field_std =
        (field_sq / n - report.field_mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
    return report;
}

nlohmann::json UqReport::to_json() const {
    nlohmann::json j;
    j["format_version"] = 1;
    j["provenance"] = {{"state_hash", state_hash}, {"n_qmc", n_qmc}, {"seed", seed}};
    for (const auto& [name, s] : scalars)
        j["scalars"][name] = {{"mean", s.mean},       {"std", s.stddev},
                              {"p2.5", s.p025},       {"p50", s.p500},
                              {"p97.5", s.p975},      {"samples", s.samples}};
    j["field_mean"] = std::vector<double>(field_mean.begin(), field_mean.end());
    j["field_std"] = std::vector<double>(field_std.begin(), field_std.end());
    return j;
}

UqReport UqReport::from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != 1)
        throw ConfigError("UqReport::from_json: unsupported format version");
    UqReport r;
    const auto& prov = j.at("provenance");
    r.state_hash = prov.at("state_hash").get<std::string>();
    r.n_qmc = prov.at("n_qmc").get<int>();
    r.seed = prov.at("seed").get<uint64_t>();
    for (const auto& [name, s] : j.at("scalars").items()) {
        UqScalarStats st;
        st.mean = s.at("mean").get<double>();
        st.stddev = s.at("std").get<double>();
        st.p025 = s.at("p2.5").get<double>();
        st.p500 = s.at("p50").get<double>();
        st.p975 = s.at("p97.5").get<double>();
        st.samples = s.at("samples").get<int>();
        r.scalars[name] = st;
    }
    const auto fm = j.at("field_mean").get<std::vector<double>>();
    const auto fs = j.at("field_std").get<std::vector<double>>();
    r.field_mean = Eigen::Map<const Vec>(fm.data(), fm.size());
    r.field_std = Eigen::Map<const Vec>(fs.data(), fs.size());
    return r;
}

void export_report(const UqReport& report, const Mesh& mesh,
                   const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    if (report.field_mean.size() != mesh.weights.size())
        throw StructureError("export_report: report field length != mesh node count");

    const fs::path json_path = fs::path(out_dir) / "uq_scalars.json";
    {
        std::ofstream f(json_path);
        if (!f) throw std::runtime_error("export_report: cannot write " + json_path.string());
        f << report.to_json().dump(1, '\t') << '\n';
    }
    const fs::path csv_path = fs::path(out_dir) / "uq_field.csv";
    std::ofstream f(csv_path);
    if (!f) throw std::runtime_error("export_report: cannot write " + csv_path.string());
    f << "node_index";
    for (int c = 0; c < mesh.nodes.cols(); ++c) f << ",coord" << c;
    f << ",mean,std,mean_minus_2std,mean_plus_2std\n";
    for (int i = 0; i < report.field_mean.size(); ++i) {
        f << i;
        for (int c = 0; c < mesh.nodes.cols(); ++c)
            f << ',' << fmt_double(mesh.nodes(i, c));
        const double m = report.field_mean[i], s = report.field_std[i];
        f << ',' << fmt_double(m) << ',' << fmt_double(s) << ','
          << fmt_double(m - 2.0 * s) << ',' << fmt_double(m + 2.0 * s) << '\n';
    }
}

}  // namespace gdas
