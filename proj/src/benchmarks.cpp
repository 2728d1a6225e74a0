#include "gdas/benchmarks.hpp"

#include <cmath>

namespace gdas {

double integrate_field(const Vec& field, const Vec& weights) {
    if (field.size() != weights.size())
        throw StructureError("integrate_field: length mismatch");
    return weights.dot(field);
}

namespace {

constexpr int kP1Nodes = 201;
constexpr double kReNominal = 15e6;
constexpr double kMachNominal = 0.856;

Vec trapezoid_weights(int n, double measure) {
    Vec w = Vec::Constant(n, measure / (n - 1));
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    return w;
}

double clamp01(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Shared 1D profile: a smooth bowl modulated by Re, a steep tanh shock and a
// logistic transition front whose locations move with the inputs.
double p1_profile(double s, double alpha, double re_ratio, double x_sh,
                  double x_tr) {
    return -4.0 * (1.2 + 0.3 * alpha) * s * (1.0 - s) * std::pow(re_ratio, 0.1) +
           0.8 * std::tanh(80.0 * (s - x_sh)) +
           0.15 / (1.0 + std::exp(-120.0 * (s - x_tr)));
}

}  // namespace

double p1_shock_location(double alpha, double mach) {
    return 0.40 + 0.08 * alpha + 2.0 * (mach - kMachNominal);
}

double p1_front_location(double n_factor, double alpha) {
    return clamp01(0.15 + 0.04 * n_factor - 0.05 * (alpha - 1.0), 0.05, 0.95);
}

Mesh make_p1_mesh() {
    Mesh m;
    m.id = "p1";
    m.nodes.resize(kP1Nodes, 1);
    for (int i = 0; i < kP1Nodes; ++i) m.nodes(i, 0) = double(i) / (kP1Nodes - 1);
    m.weights = trapezoid_weights(kP1Nodes, 1.0);
    m.edges.reserve(kP1Nodes - 1);
    for (int i = 0; i + 1 < kP1Nodes; ++i) m.edges.emplace_back(i, i + 1);
    return m;
}

InputSpace make_p1_input_space(double nts_lo, double nts_hi) {
    InputSpace space;
    // Tu is sampled through N_TS ~ U[nts_lo, nts_hi] via Mack's relation;
    // N_TS decreases in Tu, so the Tu interval endpoints swap.
    space.marginals.push_back(
        Marginal::uniform("Tu", mack_transform(nts_hi), mack_transform(nts_lo), "-"));
    space.marginals.push_back(Marginal::uniform("alpha", 1.0, 3.5, "deg"));
    space.marginals.push_back(Marginal::normal("Re", kReNominal, 0.01, "-"));
    space.marginals.push_back(Marginal::normal("M", kMachNominal, 0.01, "-"));
    return space;
}

BlackBoxResult evaluate_p1(const Vec& xi) {
    if (xi.size() != 4) throw ConfigError("evaluate_p1: expects (Tu, alpha, Re, M)");
    const double tu = xi[0], alpha = xi[1], re = xi[2], mach = xi[3];
    const double n_factor = mack_nfactor(tu);  // throws for Tu <= 0
    const double re_ratio = re / kReNominal;
    const double x_sh = p1_shock_location(alpha, mach);
    const double x_tr = p1_front_location(n_factor, alpha);

    static const Mesh mesh = make_p1_mesh();
    BlackBoxResult out;
    out.field.resize(kP1Nodes);
    for (int i = 0; i < kP1Nodes; ++i) {
        const double s = mesh.nodes(i, 0);
        out.field[i] = p1_profile(s, alpha, re_ratio, x_sh, x_tr);
    }
    out.lift = integrate_field(-out.field, mesh.weights);
    Vec drag_integrand(kP1Nodes);
    for (int i = 0; i < kP1Nodes; ++i)
        drag_integrand[i] = out.field[i] * out.field[i] * mesh.nodes(i, 0);
    out.drag = integrate_field(drag_integrand, mesh.weights);
    return out;
}

namespace {
constexpr int kP2Ns = 41;
constexpr int kP2Nt = 21;
}  // namespace

Mesh make_p2_mesh() {
    Mesh m;
    m.id = "p2";
    const int p = kP2Ns * kP2Nt;
    m.nodes.resize(p, 2);
    m.weights.resize(p);
    const Vec ws = trapezoid_weights(kP2Ns, 1.0);
    const Vec wt = trapezoid_weights(kP2Nt, 1.0);
    for (int it = 0; it < kP2Nt; ++it) {
        for (int is = 0; is < kP2Ns; ++is) {
            const int idx = it * kP2Ns + is;
            m.nodes(idx, 0) = double(is) / (kP2Ns - 1);
            m.nodes(idx, 1) = double(it) / (kP2Nt - 1);
            m.weights[idx] = ws[is] * wt[it];
        }
    }
    for (int it = 0; it < kP2Nt; ++it)
        for (int is = 0; is < kP2Ns; ++is) {
            const int idx = it * kP2Ns + is;
            if (is + 1 < kP2Ns) m.edges.emplace_back(idx, idx + 1);
            if (it + 1 < kP2Nt) m.edges.emplace_back(idx, idx + kP2Ns);
        }
    return m;
}

BlackBoxResult evaluate_p2(const Vec& xi) {
    if (xi.size() != 4) throw ConfigError("evaluate_p2: expects (Tu, alpha, Re, M)");
    const double tu = xi[0], alpha = xi[1], re = xi[2], mach = xi[3];
    const double n_factor = mack_nfactor(tu);
    const double re_ratio = re / kReNominal;
    const double x_sh = p1_shock_location(alpha, mach);
    const double x_tr = p1_front_location(n_factor, alpha);

    static const Mesh mesh = make_p2_mesh();
    const int p = kP2Ns * kP2Nt;
    BlackBoxResult out;
    out.field.resize(p);
    for (int i = 0; i < p; ++i) {
        const double s = mesh.nodes(i, 0);
        const double t = mesh.nodes(i, 1);
        out.field[i] = p1_profile(s, alpha, re_ratio, x_sh, x_tr) * (1.0 - 0.5 * t) +
                       0.1 * std::sin(2.0 * M_PI * t) * std::tanh(80.0 * (s - x_sh));
    }
    out.lift = integrate_field(-out.field, mesh.weights);
    Vec drag_integrand(p);
    for (int i = 0; i < p; ++i)
        drag_integrand[i] = out.field[i] * out.field[i] * mesh.nodes(i, 0);
    out.drag = integrate_field(drag_integrand, mesh.weights);
    return out;
}

Problem make_problem(const std::string& id) {
    if (id == "p1")
        return Problem{make_p1_mesh(), make_p1_input_space(), evaluate_p1, "p1"};
    if (id == "p2")
        return Problem{make_p2_mesh(), make_p1_input_space(), evaluate_p2, "p2"};
    throw ConfigError("unknown problem id: " + id);
}

}  // namespace gdas
