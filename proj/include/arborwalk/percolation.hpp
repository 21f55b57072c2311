#pragma once

#include "arborwalk/conductance.hpp"
#include "arborwalk/cutset.hpp"
#include "arborwalk/mdrw.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace arborwalk::percolation {

using tree::RootedTree;

// Per-edge survival factor psi(e) in (0,1]. The paper kinds evaluate to 1 at
// generation 1; CONSTANT applies its value everywhere.
class PsiFunction {
public:
    enum class Kind { constant, delta, mdrw, rc, custom };

    static PsiFunction constant(double c);
    // 1 - delta/|e| for |e| > n0, 1 otherwise; requires delta < n0 + 1.
    static PsiFunction delta(double d, int n0);
    static PsiFunction mdrw_homogeneous(double lambda, int m);
    static PsiFunction rc(const conductance::ConductanceField& field);
    static PsiFunction custom(std::function<double(const RootedTree&, std::uint64_t)> fn,
                              std::string label = "custom");

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    bool depth_only() const { return kind_ == Kind::constant || kind_ == Kind::delta || kind_ == Kind::mdrw; }

    // Depth-only kinds evaluate without a tree.
    double value_at_depth(int edge_depth) const;

    // Any kind evaluates on a materialized tree edge.
    double value(const RootedTree& t, std::uint64_t edge_child) const;

    // log Psi(e) per edge (prefix log-products along root paths).
    std::vector<double> log_big_psi_edges(const RootedTree& t) const;

    // log Psi by depth, for symmetric-profile probes (depth-only kinds).
    std::vector<double> log_big_psi_profile(int max_depth) const;

    double param_c() const { return c_; }
    double param_delta() const { return delta_; }
    int param_n0() const { return n0_; }
    double param_lambda() const { return lambda_; }
    int param_m() const { return m_; }

private:
    PsiFunction() = default;
    Kind kind_ = Kind::constant;
    std::string label_;
    double c_ = 1.0;
    double delta_ = 0.0;
    int n0_ = 1;
    double lambda_ = 1.0;
    int m_ = 0;
    const conductance::ConductanceField* field_ = nullptr;
    std::function<double(const RootedTree&, std::uint64_t)> fn_;
};

// Cluster of open edges containing the root; downward closed by construction.
struct Cluster {
    std::vector<std::uint32_t> open; // sorted child endpoints
    std::uint64_t tested = 0;        // frontier edges examined
    int survival_depth = 0;          // deepest open generation

    bool contains(std::uint32_t child_vertex) const;
};

// Child edges of open edges open independently with probability psi(e).
Cluster independent_percolation(const RootedTree& t, const PsiFunction& psi, rng::Stream& s,
                                int max_depth);

struct SurvivalEstimate {
    double estimate = 0.0;
    stats::Interval ci95;
    std::size_t trials = 0;
    std::size_t survived = 0;
};

SurvivalEstimate survival_estimate(const RootedTree& t, const PsiFunction& psi, int max_depth,
                                   std::size_t trials, std::uint64_t seed);

// Materialize a cluster as its own rooted tree (for estimators).
RootedTree cluster_to_tree(const RootedTree& t, const Cluster& c);

enum class RtClass { lt1, gt1, undecided, inconclusive };

struct RtResult {
    cutset::BranchingEstimate estimate;
    RtClass verdict = RtClass::undecided;
};

// RT(T, psi) against 1: bisection over the cutset functional with weights
// Psi(e)^gamma. The margin absorbs the estimator's slope bias near 1.
RtResult rt_value(const RootedTree& t, const PsiFunction& psi, std::span<const int> depths,
                  const cutset::EstimatorOptions& opt = {}, double boundary_margin = 0.12);
RtResult rt_value(const tree::LevelTree& lt, const PsiFunction& psi, std::span<const int> depths,
                  const cutset::EstimatorOptions& opt = {}, double boundary_margin = 0.12);

struct DeltaSuiteRow {
    double delta = 0.0;
    int n0 = 1;
    SurvivalEstimate survival;
    cutset::BranchingEstimate cluster_brr; // over surviving clusters, when any
    bool cluster_brr_valid = false;
};

// Runs the 1 - delta/|e| percolation across a delta grid; n0 is lifted per
// delta when needed to keep psi positive, and recorded in the row.
std::vector<DeltaSuiteRow> delta_percolation_suite(const RootedTree& t,
                                                   std::span<const double> deltas, int n0,
                                                   int max_depth, std::size_t trials,
                                                   std::uint64_t seed);

// Validity of the barrier-percolation epsilon for the declared (m, b) regime.
void validate_barrier_epsilon(double m, double b, double eps);

// Deterministic cluster of the conductance barrier rule: an edge is open when
// its own reciprocal conductance and the root-path reciprocal sum both sit
// below their depth-power thresholds; depth-1 edges are open unconditionally.
Cluster barrier_percolation(const RootedTree& t, const conductance::ConductanceField& field,
                            double b_declared, double eps, int max_depth);

} // namespace arborwalk::percolation
