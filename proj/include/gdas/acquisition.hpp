#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "gdas/sampling.hpp"

namespace gdas {

/// Scalar predictive distribution of a surrogate at one input.
struct PredictiveGaussian {
    double mean = 0.0;
    double variance = 0.0;
};

enum class CriterionKind { SeGp, SeField, SeWithMisfit, Jsd };

struct CriterionSpec {
    CriterionKind kind = CriterionKind::SeGp;
    double lambda = 1.0;       // misfit weight in SeWithMisfit
    bool pdf_weighting = true;
    int scalar_qoi = 1;        // index of the QoI driving acquisition
};

struct DeConfig {
    int population = 0;   // 0 -> 15 * dimension
    double mutation = 0.8;
    double crossover = 0.9;
    int generations = 200;
    uint64_t seed = 0;
    // Optional warm-start member placed into the initial population.
    std::optional<Vec> initial_member;
};

struct DeResult {
    Vec argmin;
    double value = 0.0;
    long evaluations = 0;
};

/// DE/rand/1/bin with reflection at the bounds and greedy selection that
/// keeps the incumbent on ties.  bounds is d x 2 (lo, hi per row).
DeResult differential_evolution(const std::function<double(const Vec&)>& objective,
                                const Mat& bounds, const DeConfig& config);

/// Jensen-Shannon divergence between two Gaussians, by trapezoid quadrature
/// of both KL terms against the mixture M = (P+Q)/2.  Result in [0, ln 2].
double jsd_gaussians(const PredictiveGaussian& p, const PredictiveGaussian& q,
                     int grid_resolution = 2001);

/// Predictive-distribution accessors in physical coordinates.  Criteria that
/// do not need one of them tolerate a null function.
struct SurrogateViews {
    std::function<PredictiveGaussian(const Vec&)> gp;
    std::function<PredictiveGaussian(const Vec&)> field;
};

/// Additive decomposition of a criterion evaluation, for tracing.
struct CriterionParts {
    double sigma_gp = 0.0;
    double misfit = 0.0;
    double sigma_field = 0.0;
    double pdf = 1.0;
    double total = 0.0;  // criterion including the PDF factor when enabled
};

double criterion_value(const CriterionSpec& spec, const SurrogateViews& views,
                       const Vec& xi, const InputSpace& space,
                       CriterionParts* parts = nullptr);

struct InfillProposal {
    Vec xi;                 // physical coordinates
    CriterionParts parts;
    double criterion = 0.0;
    bool duplicate_retry = false;   // DE was re-run once due to a duplicate
    bool duplicate_accepted = false;  // still a duplicate after the retry
};

/// Maximizes the criterion over the input box (Normal marginals truncated to
/// +/- 6 sigma).  `existing_points` triggers the duplicate guard: a proposal
/// within 1e-6 (normalized) of a training point is re-optimized once with
/// seed+1.
InfillProposal propose_infill(const CriterionSpec& spec, const SurrogateViews& views,
                              const InputSpace& space, const DeConfig& de_config,
                              const std::vector<Vec>& existing_points = {});

}  // namespace gdas
