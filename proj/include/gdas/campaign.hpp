#pragma once

#include <optional>

#include "gdas/benchmarks.hpp"
#include "gdas/pod.hpp"

namespace gdas {

struct MetricsResult {
    double r2 = 0.0;
    double nrmse = 0.0;
};

/// r2 = 1 - SS_res / SS_tot; nRMSE = RMSE / range(truths).
MetricsResult metrics(const Vec& predictions, const Vec& truths);

/// Average predictive standard deviation over quasi-random probe points.
double mean_epistemic_variance(const std::function<double(const Vec&)>& sigma,
                               const InputSpace& space, int n_probe = 10000,
                               uint64_t seed = 0);

enum class FieldSurrogateKind { Podi, Neural };

struct DoeConfig {
    std::string sequence = "sobol";  // "sobol" or "halton"
    int size = 30;
    int skip = 1;  // Sobol points discarded before the DoE block
};

struct CampaignConfig {
    std::string problem_id = "p1";
    DoeConfig doe;
    CriterionSpec criterion;
    int infill_budget = 30;
    FieldSurrogateKind field_surrogate = FieldSurrogateKind::Podi;
    int validation_size = 20;
    int test_size = 20;
    double target_r2 = 0.99;
    double target_nrmse = 0.03;
    uint64_t seed = 0;

    DeConfig de;              // acquisition optimizer
    GpFitConfig gp;           // scalar/amplitude GP search
    PodTruncation pod_truncation;
    NetworkConfig network;    // neural field surrogate
    int probe_count = 1000;   // uncertainty pre-compute probes
    int probe_samples = 500;  // MC dropout passes per probe
    int epistemic_probes = 10000;  // <sigma> probe points

    nlohmann::json to_json() const;
    static CampaignConfig from_json(const nlohmann::json& j);
};

struct IterationRecord {
    int iteration = 0;       // 0 = DoE only
    double r2_lift = 0.0, nrmse_lift = 0.0;
    double r2_drag = 0.0, nrmse_drag = 0.0;
    double field_nrmse = 0.0;
    double mean_sigma_gp_lift = 0.0, mean_sigma_gp_drag = 0.0;
    double mean_sigma_field = 0.0;
    // Proposal made from this iteration's surrogates (absent at the end).
    bool has_proposal = false;
    Vec proposed_xi;
    CriterionParts parts;
};

struct Dataset {
    Mat inputs;                  // n x d, physical coordinates
    std::vector<Vec> snapshots;  // n fields of length p
    Mat scalars;                 // n x 2 (lift, drag)

    int size() const { return static_cast<int>(inputs.rows()); }
    void append(const Vec& xi, const BlackBoxResult& r);
};

struct CampaignState {
    CampaignConfig config;
    Dataset train, validation, test;
    std::vector<IterationRecord> records;
    int completed_infills = 0;
    // Carried between iterations for warm starts / resume.
    Vec gp_theta_lift, gp_theta_drag;
    std::optional<nlohmann::json> neural_model;

    nlohmann::json to_json() const;
    static CampaignState from_json(const nlohmann::json& j);
};

/// Runs the full DoE + infill loop.  `out_dir`, when set, receives
/// state.json, metrics.csv, trace.csv and fields/ error maps.
CampaignState run_campaign(const CampaignConfig& config,
                           const std::string& out_dir = "");

/// Continues a loaded state until the configured budget is exhausted (or
/// until `max_additional` more infills when >= 0).
void continue_campaign(CampaignState& state, const std::string& out_dir = "",
                       int max_additional = -1);

void save_state(const CampaignState& state, const std::string& path);
CampaignState load_state(const std::string& path);

/// metrics.csv / trace.csv writers (also used by the `report` subcommand).
void write_metrics_csv(const CampaignState& state, const std::string& path);
void write_trace_csv(const CampaignState& state, const std::string& path);

/// Fitted surrogates of one campaign iteration, in physical coordinates.
struct SurrogateBundle {
    std::function<PredictiveGaussian(const Vec&)> gp_lift;
    std::function<PredictiveGaussian(const Vec&)> gp_drag;
    std::function<PredictiveGaussian(const Vec&)> field_scalar;  // QoI from field
    std::function<Vec(const Vec&)> field_mean;
    InputSpace space;
};

/// Refits surrogates on the state's current dataset (deterministic).
SurrogateBundle rebuild_surrogates(const CampaignState& state);

}  // namespace gdas
