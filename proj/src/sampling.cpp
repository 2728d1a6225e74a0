#include "gdas/sampling.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>

namespace gdas {

Marginal Marginal::uniform(std::string name, double lo, double hi,
                           std::string units) {
    if (!(lo < hi)) throw ConfigError("Uniform marginal '" + name + "': lo must be < hi");
    Marginal m;
    m.kind = MarginalKind::Uniform;
    m.name = std::move(name);
    m.units = std::move(units);
    m.lo = lo;
    m.hi = hi;
    return m;
}

Marginal Marginal::normal(std::string name, double mean, double cov_fraction,
                          std::string units) {
    if (mean == 0.0) throw ConfigError("Normal marginal '" + name + "': mean must be nonzero with CoV");
    if (!(cov_fraction > 0.0)) throw ConfigError("Normal marginal '" + name + "': cov_fraction must be > 0");
    Marginal m;
    m.kind = MarginalKind::Normal;
    m.name = std::move(name);
    m.units = std::move(units);
    m.mean = mean;
    m.cov_fraction = cov_fraction;
    return m;
}

double Marginal::stddev() const {
    if (kind == MarginalKind::Uniform) return (hi - lo) / std::sqrt(12.0);
    return std::abs(mean) * cov_fraction;
}

double Marginal::inverse_cdf(double u, bool* clamped) const {
    if (kind == MarginalKind::Uniform) return lo + u * (hi - lo);
    constexpr double eps = 1e-12;
    if (u < eps || u > 1.0 - eps) {
        u = std::min(std::max(u, eps), 1.0 - eps);
        if (clamped) *clamped = true;
    }
    return mean + stddev() * inverse_normal_cdf(u);
}

double Marginal::pdf(double x) const {
    if (kind == MarginalKind::Uniform) {
        return (x >= lo && x <= hi) ? 1.0 / (hi - lo) : 0.0;
    }
    const double s = stddev();
    const double z = (x - mean) / s;
    return std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
}

double Marginal::box_lo() const {
    return kind == MarginalKind::Uniform ? lo : mean - 6.0 * stddev();
}

double Marginal::box_hi() const {
    return kind == MarginalKind::Uniform ? hi : mean + 6.0 * stddev();
}

namespace {

// Joe-Kuo primitive-polynomial initialization (new-joe-kuo-6) for up to 16
// dimensions.  Per dimension d >= 2: polynomial degree s, coefficients a,
// initial direction numbers m_1..m_s.
struct SobolInit {
    int s;
    uint32_t a;
    uint32_t m[6];
};

constexpr SobolInit kJoeKuo[15] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
};

constexpr int kSobolBits = 32;
constexpr int kMaxQrngDim = 16;

// Direction numbers V_k, scaled by 2^32, for one dimension.
void sobol_directions(int dim_index, uint32_t v[kSobolBits]) {
    if (dim_index == 0) {
        for (int k = 0; k < kSobolBits; ++k) v[k] = 1u << (31 - k);
        return;
    }
    const SobolInit& init = kJoeKuo[dim_index - 1];
    const int s = init.s;
    uint32_t m[kSobolBits];
    for (int k = 0; k < s; ++k) m[k] = init.m[k];
    for (int k = s; k < kSobolBits; ++k) {
        uint32_t mk = m[k - s] ^ (m[k - s] << s);
        for (int i = 1; i < s; ++i) {
            if ((init.a >> (s - 1 - i)) & 1u) mk ^= m[k - i] << i;
        }
        m[k] = mk;
    }
    for (int k = 0; k < kSobolBits; ++k) v[k] = m[k] << (31 - k);
}

constexpr int kPrimes[kMaxQrngDim] = {2,  3,  5,  7,  11, 13, 17, 19,
                                      23, 29, 31, 37, 41, 43, 47, 53};

}  // namespace

std::vector<Vec> sobol_sequence(int dimension, int count, int skip) {
    if (dimension < 1 || dimension > kMaxQrngDim)
        throw ConfigError("sobol_sequence: dimension must be in [1, 16]");
    if (count < 1) throw ConfigError("sobol_sequence: count must be positive");
    if (skip < 0) throw ConfigError("sobol_sequence: skip must be non-negative");

    std::vector<std::array<uint32_t, kSobolBits>> v(dimension);
    for (int j = 0; j < dimension; ++j) sobol_directions(j, v[j].data());

    std::vector<uint32_t> x(dimension, 0);
    std::vector<Vec> out;
    out.reserve(count);
    const double scale = std::ldexp(1.0, -32);
    // Gray-code recursion: point 0 is the origin; point i flips direction
    // number ctz(i) of point i-1.
    for (long i = 0; i < static_cast<long>(skip) + count; ++i) {
        if (i > 0) {
            const int c = std::countr_zero(static_cast<uint32_t>(i));
            for (int j = 0; j < dimension; ++j) x[j] ^= v[j][c];
        }
        if (i >= skip) {
            Vec p(dimension);
            for (int j = 0; j < dimension; ++j) p[j] = x[j] * scale;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<Vec> halton_sequence(int dimension, int count) {
    if (dimension < 1 || dimension > kMaxQrngDim)
        throw ConfigError("halton_sequence: dimension must be in [1, 16]");
    if (count < 1) throw ConfigError("halton_sequence: count must be positive");
    std::vector<Vec> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        Vec p(dimension);
        for (int j = 0; j < dimension; ++j) {
            const int base = kPrimes[j];
            double f = 1.0, r = 0.0;
            for (long n = i + 1; n > 0; n /= base) {
                f /= base;
                r += f * (n % base);
            }
            p[j] = r;
        }
        out.push_back(std::move(p));
    }
    return out;
}

double inverse_normal_cdf(double p) {
    // Wichura's algorithm AS 241, PPND16.
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: p must be in (0, 1)");
    const double q = p - 0.5;
    double r;
    if (std::abs(q) <= 0.425) {
        r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -x : x;
}

Vec transform(const Vec& unit_sample, const InputSpace& space, bool* clamped) {
    if (unit_sample.size() != space.dimension())
        throw ConfigError("transform: sample dimension does not match input space");
    Vec out(space.dimension());
    for (int j = 0; j < space.dimension(); ++j)
        out[j] = space.marginals[j].inverse_cdf(unit_sample[j], clamped);
    return out;
}

double joint_pdf(const Vec& point, const InputSpace& space) {
    if (point.size() != space.dimension())
        throw ConfigError("joint_pdf: point dimension does not match input space");
    double density = 1.0;
    for (int j = 0; j < space.dimension(); ++j)
        density *= space.marginals[j].pdf(point[j]);
    return density;
}

double mack_transform(double n_ts) { return std::exp(-(8.43 + n_ts) / 2.4); }

double mack_nfactor(double tu) {
    if (!(tu > 0.0)) throw std::domain_error("mack_nfactor: Tu must be > 0");
    return -8.43 - 2.4 * std::log(tu);
}

Vec to_unit(const Vec& physical, const InputSpace& space) {
    if (physical.size() != space.dimension())
        throw ConfigError("to_unit: dimension mismatch");
    Vec u(space.dimension());
    for (int j = 0; j < space.dimension(); ++j) {
        const Marginal& m = space.marginals[j];
        u[j] = (physical[j] - m.box_lo()) / (m.box_hi() - m.box_lo());
    }
    return u;
}

Vec from_unit(const Vec& unit, const InputSpace& space) {
    if (unit.size() != space.dimension())
        throw ConfigError("from_unit: dimension mismatch");
    Vec x(space.dimension());
    for (int j = 0; j < space.dimension(); ++j) {
        const Marginal& m = space.marginals[j];
        x[j] = m.box_lo() + unit[j] * (m.box_hi() - m.box_lo());
    }
    return x;
}

}  // namespace gdas
