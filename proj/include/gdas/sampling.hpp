#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdas {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Raised for invalid configuration (bad dimensions, unsupported settings).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MarginalKind { Uniform, Normal };

/// One independent input distribution.  Uniform(lo, hi) or Normal with a
/// mean and a coefficient-of-variation (stddev = |mean| * cov_fraction).
struct Marginal {
    MarginalKind kind = MarginalKind::Uniform;
    std::string name;
    std::string units;
    double lo = 0.0, hi = 1.0;          // Uniform
    double mean = 0.0, cov_fraction = 0.0;  // Normal

    static Marginal uniform(std::string name, double lo, double hi,
                            std::string units = "");
    static Marginal normal(std::string name, double mean, double cov_fraction,
                           std::string units = "");

    double stddev() const;
    /// Inverse CDF; u outside (0,1) is clamped for Normal marginals.
    double inverse_cdf(double u, bool* clamped = nullptr) const;
    double pdf(double x) const;
    /// Finite search/normalization box: the support for Uniform,
    /// mean +/- 6 sigma for Normal.
    double box_lo() const;
    double box_hi() const;
};

struct InputSpace {
    std::vector<Marginal> marginals;
    int dimension() const { return static_cast<int>(marginals.size()); }
};

/// Consecutive points of the Sobol sequence (Gray-code order, index 0 is the
/// origin), discarding the first `skip`.  Supports dimension <= 16.
std::vector<Vec> sobol_sequence(int dimension, int count, int skip = 0);

/// Halton sequence: point i coordinate j is the radical inverse of (i+1)
/// in the j-th prime base.  Supports dimension <= 16.
std::vector<Vec> halton_sequence(int dimension, int count);

/// Inverse standard normal CDF (Wichura's AS 241, double precision).
double inverse_normal_cdf(double p);

/// Inverse-CDF transform of a unit-hypercube sample to physical coordinates.
Vec transform(const Vec& unit_sample, const InputSpace& space,
              bool* clamped = nullptr);

/// Product of marginal densities; zero outside uniform supports.
double joint_pdf(const Vec& point, const InputSpace& space);

/// Mack's relation between the transition N-factor and freestream
/// turbulence intensity: Tu = exp(-(8.43 + N_TS) / 2.4).
double mack_transform(double n_ts);
double mack_nfactor(double tu);

/// Map physical coordinates into the unit box defined by the marginals'
/// search boxes, and back.  Used before GP / neural-network fitting.
Vec to_unit(const Vec& physical, const InputSpace& space);
Vec from_unit(const Vec& unit, const InputSpace& space);

}  // namespace gdas
