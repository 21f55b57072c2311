#pragma once

#include "arborwalk/tree.hpp"

#include <functional>
#include <span>
#include <vector>

namespace arborwalk::cutset {

// Exact minimum over all cutsets of the truncation of the edge-weight sum,
// by the tree DP F(e) = min(w(e), sum over child edges of F), with leaf edges
// facing infinity. Result is the sum of F over depth-1 edges.
double min_cutset_value(const tree::RootedTree& t, const tree::EdgeWeighting& w);

// Same DP in log space (weights given as logs), truncated at `depth`
// (edges deeper than `depth` are ignored; depth-`depth` edges act as leaves).
double log_min_cutset(const tree::RootedTree& t, std::span<const double> log_w, int depth);

// One probe of the cutset functional at a truncation depth: the log of the
// minimal cutset value and the log of the deepest sphere's sum (the sphere is
// itself a cutset, so log_value <= log_deepest_sphere).
struct Probe {
    double log_value = 0.0;
    double log_deepest_sphere = 0.0;
};

// A family evaluates probes at any truncation depth and exponent gamma.
using ProbeFn = std::function<Probe(int depth, double gamma)>;

enum class WeightKind {
    polynomial,  // w(e) = |e|^-gamma (branching-ruin)
    exponential, // w(e) = gamma^-|e| (branching)
};

// Per-level aggregation for symmetric families: treats each sphere as a
// candidate cutset and takes the best one, in log space. Exact for paths and
// regular trees; an estimate for round-robin sphere trees.
ProbeFn profile_probe(const tree::LevelTree& lt, WeightKind kind);

// log Psi per level (index = depth, entry 0 unused) drives RT probes on
// symmetric trees: w(e) = exp(gamma * log_psi_prefix[|e|]).
ProbeFn profile_psi_probe(const tree::LevelTree& lt, std::vector<double> log_big_psi);

// Exact DP probes on a materialized tree.
ProbeFn tree_probe(const tree::RootedTree& t, WeightKind kind);

// Exact DP probes with per-edge log Psi (indexed by child vertex).
ProbeFn tree_psi_probe(const tree::RootedTree& t, std::vector<double> log_big_psi_edge);

struct EstimatorOptions {
    double gamma_min = 1e-3;
    double gamma_max = 64.0;   // DIVERGENT sentinel threshold
    double tolerance = 0.05;
    double slope_threshold = 0.1;
    double value_floor = 1e-6; // below this a flat sequence is not "bounded away"
    double divergence_log_factor = 6.9; // deepest sphere exceeding the min by e^6.9
};

enum class SequenceClass { decaying, nondecaying, inconclusive };

// Fits log v_N against log N over the probed depths. Slope below the
// threshold decays; otherwise the value must sit above the floor, or the
// minimum must be frozen strictly below a growing sphere, to count as
// bounded away from zero.
SequenceClass classify_sequence(std::span<const int> depths, std::span<const double> log_values,
                                std::span<const double> log_spheres, const EstimatorOptions& opt);

struct BranchingEstimate {
    enum class Status { ok, divergent, inconclusive };
    Status status = Status::ok;
    double lo = 0.0;
    double hi = 0.0;
    bool is(Status s) const { return status == s; }
};

// Bisection on gamma between the largest non-decaying and smallest decaying
// exponents. `lower_clamp` is 0 for branching-ruin and 1 for branching.
BranchingEstimate estimate_exponent(const ProbeFn& probe, std::span<const int> depths,
                                    const EstimatorOptions& opt, double lower_clamp);

BranchingEstimate estimate_branching_ruin(const tree::LevelTree& lt, std::span<const int> depths,
                                          const EstimatorOptions& opt = {});
BranchingEstimate estimate_branching(const tree::LevelTree& lt, std::span<const int> depths,
                                     const EstimatorOptions& opt = {});
BranchingEstimate estimate_branching_ruin(const tree::RootedTree& t, std::span<const int> depths,
                                          const EstimatorOptions& opt = {});
BranchingEstimate estimate_branching(const tree::RootedTree& t, std::span<const int> depths,
                                     const EstimatorOptions& opt = {});

// Geometric depth grid {N/8, N/4, N/2, N} (deduplicated, all >= 2).
std::vector<int> default_depths(int max_depth);

} // namespace arborwalk::cutset
