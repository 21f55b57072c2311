#pragma once

#include "arborwalk/percolation.hpp"
#include "arborwalk/tree.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace arborwalk::flows {

using tree::EdgeWeighting;
using tree::RootedTree;

// Adapted conductances c(e) = Psi(e) / (1 - psi(e)), with c = 1 at generation
// 1. Edges with psi = 1 beyond depth 1 become shorts (infinite conductance)
// and are counted rather than rejected.
struct AdaptedNetwork {
    EdgeWeighting c;
    std::size_t shorted = 0;
};

AdaptedNetwork adapted_conductances(const RootedTree& t, const percolation::PsiFunction& psi);

double adapted_conductance_value(double psi_e, double big_psi_e, int edge_depth,
                                 bool* shorted = nullptr);

// Effective conductance of the truncation with the depth-N sphere grounded;
// series/parallel reduction, exact on materialized trees. Infinite entries in
// c are treated as shorts.
double effective_conductance(const RootedTree& t, const EdgeWeighting& c, int max_depth);

// Per-level variant for symmetric profiles: arity[n] children at depth n
// (0 <= n < N), conductance cond[n] on the depth-n edges (1 <= n <= N).
double effective_conductance_profile(std::span<const double> arity, std::span<const double> cond);

// A unit flow from the root to the depth-N sphere under the capacities
// u_e c(e) = Psi(e)^gamma, built by the tree max-flow DP and scaled to unit
// strength; reports the energy and the largest root-path sum of u.
struct FlowAssignment {
    EdgeWeighting theta;       // unit-strength flow per edge
    double strength_raw = 0.0; // max-flow value before normalization
    double energy = 0.0;       // sum theta^2 / c
    double path_sum_bound = 0.0;
    std::size_t shorted = 0;
};

FlowAssignment build_unit_flow(const RootedTree& t, const percolation::PsiFunction& psi,
                               double gamma, int max_depth);

// Survival sandwich at the truncation: second-moment lower bound through the
// adapted network against the first-moment cutset upper bound.
struct SurvivalBounds {
    double lower = 0.0;
    double upper = 1.0;
    double c_eff = 0.0;
    std::size_t shorted = 0;
    bool degenerate = false; // psi identically 1 up to the horizon
};

SurvivalBounds survival_bounds(const RootedTree& t, const percolation::PsiFunction& psi,
                               int max_depth, double c_q);

// Kirchhoff residual at interior vertices (max over vertices), for checks.
double kirchhoff_residual(const RootedTree& t, const EdgeWeighting& theta, int max_depth);

} // namespace arborwalk::flows
