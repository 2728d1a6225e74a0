#pragma once

#include <map>

#include "gdas/campaign.hpp"

namespace gdas {

struct UqScalarStats {
    double mean = 0.0;
    double stddev = 0.0;
    double p025 = 0.0;  // 2.5th percentile
    double p500 = 0.0;
    double p975 = 0.0;
    int samples = 0;
};

struct UqConfig {
    int n_qmc = 10000;
    uint64_t seed = 0;
    // When set, epistemic surrogate std is added in quadrature to the
    // propagated scalar std (sensitivity studies only; off by default).
    bool include_epistemic = false;
};

struct UqReport {
    std::map<std::string, UqScalarStats> scalars;  // lift, drag, field_scalar
    Vec field_mean;  // per-node pushforward statistics
    Vec field_std;
    std::string state_hash;
    int n_qmc = 0;
    uint64_t seed = 0;

    nlohmann::json to_json() const;
    static UqReport from_json(const nlohmann::json& j);
};

/// Empirical percentile with linear interpolation between order statistics.
double percentile(std::vector<double> samples, double q);

/// Quasi-Monte-Carlo pushforward of the input distributions through the
/// surrogate means.  Deterministic for a fixed seed.
UqReport propagate(const SurrogateBundle& surrogates, const UqConfig& config = {},
                   const std::string& state_hash = "");

/// Writes uq_scalars.json and uq_field.csv (node_index, coords, mean, std,
/// mean-2std, mean+2std) into out_dir.
void export_report(const UqReport& report, const Mesh& mesh,
                   const std::string& out_dir);

}  // namespace gdas
