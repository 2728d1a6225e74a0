#pragma once

#include "gdas/neural_field.hpp"

namespace gdas {

/// Fixed evaluation mesh with quadrature weights and graph connectivity.
struct Mesh {
    Mat nodes;     // p x d_geo, coordinates in [0,1]
    Vec weights;   // trapezoid quadrature weights, sum = domain measure
    std::vector<std::pair<int, int>> edges;
    std::string id;

    MeshGraph graph() const { return MeshGraph::build(nodes, edges); }
};

/// Black-box response: one field snapshot plus integrated scalars.
struct BlackBoxResult {
    Vec field;         // length p
    double lift = 0.0;  // L-analog
    double drag = 0.0;  // D-analog
};

/// Weighted field integral.
double integrate_field(const Vec& field, const Vec& weights);

/// 1D problem on s in [0,1] with 201 nodes; inputs (Tu, alpha, Re, M).
Mesh make_p1_mesh();
InputSpace make_p1_input_space(double nts_lo = 5.0, double nts_hi = 14.0);
BlackBoxResult evaluate_p1(const Vec& xi);

/// Shock and transition-front locations of the synthetic field.
double p1_shock_location(double alpha, double mach);
double p1_front_location(double n_factor, double alpha);

/// 2D analog on a 41 x 21 structured mesh over [0,1]^2.
Mesh make_p2_mesh();
BlackBoxResult evaluate_p2(const Vec& xi);

struct Problem {
    Mesh mesh;
    InputSpace space;
    std::function<BlackBoxResult(const Vec&)> evaluate;
    std::string id;
};

/// Lookup by id ("p1", "p2"); throws ConfigError for unknown ids.
Problem make_problem(const std::string& id);

}  // namespace gdas
