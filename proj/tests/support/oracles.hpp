#pragma once

// Independent reference computations for the test suites. Everything here is
// deliberately brute force or dense linear algebra, not the production path.

#include "arborwalk/rng.hpp"
#include "arborwalk/tree.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracles {

using arborwalk::tree::EdgeWeighting;
using arborwalk::tree::RootedTree;

// Gambler's ruin on a conductance path v0..vn: probability that the walk
// started at v1 hits vn before v0, by a dense solve of the full harmonic
// system (potential 0 at v0, 1 at vn).
inline double path_hitting_probability(const std::vector<double>& conductances) {
    const int n = static_cast<int>(conductances.size());
    if (n < 1) throw std::invalid_argument("need at least one edge");
    if (n == 1) return 1.0;
    const int m = n - 1; // interior vertices v1..v_{n-1}
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 1; i <= m; ++i) {
        const double cl = conductances[i - 1], cr = conductances[i];
        a(i - 1, i - 1) = -(cl + cr);
        if (i - 2 >= 0) a(i - 1, i - 2) = cl;
        if (i <= m - 1) a(i - 1, i) = cr;
        if (i == m) rhs(i - 1) = -cr; // h(vn) = 1
    }
    Eigen::VectorXd h = a.fullPivLu().solve(rhs);
    return h(0);
}

// Effective conductance between the root (potential 1) and the depth-N sphere
// (potential 0) by a dense Dirichlet solve over all non-boundary vertices.
inline double dirichlet_effective_conductance(const RootedTree& t, const EdgeWeighting& c, int target_depth) {
    const std::uint32_t n = t.vertex_count();
    std::vector<int> sys_index(n, -1);
    int m = 0;
    for (std::uint32_t v = 1; v < n; ++v)
        if (t.depth_of(v) < target_depth) sys_index[v] = m++;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    auto edge_c = [&](std::uint32_t child) { return c[child]; };
    for (std::uint32_t v = 1; v < n; ++v) {
        if (sys_index[v] < 0) continue;
        const int row = sys_index[v];
        double diag = 0.0;
        const std::uint32_t p = t.parent_of(v);
        const double cp = edge_c(v);
        diag += cp;
        if (p == 0) rhs(row) -= cp * 1.0;
        else if (sys_index[p] >= 0) a(row, sys_index[p]) += cp;
        for (int k = 0; k < t.child_count(v); ++k) {
            const std::uint32_t ch = static_cast<std::uint32_t>(t.child_at(v, k));
            if (t.depth_of(ch) > target_depth) continue;
            const double cc = edge_c(ch);
            diag += cc;
            if (sys_index[ch] >= 0) a(row, sys_index[ch]) += cc;
            // boundary children sit at potential 0: no rhs contribution
        }
        a(row, row) = -diag;
    }
    Eigen::VectorXd h;
    if (m > 0) h = a.fullPivLu().solve(rhs);
    double current = 0.0;
    for (int k = 0; k < t.child_count(0); ++k) {
        const std::uint32_t ch = static_cast<std::uint32_t>(t.child_at(0, k));
        if (t.depth_of(ch) > target_depth) continue;
        const double hc = t.depth_of(ch) == target_depth ? 0.0 : h(sys_index[ch]);
        current += edge_c(ch) * (1.0 - hc);
    }
    return current;
}

// Exhaustive minimum over all root/infinity-separating edge sets: a subset is
// separating when every root-to-leaf path contains at least one of its edges.
inline double brute_force_min_cutset(const RootedTree& t, const EdgeWeighting& w) {
    const std::uint32_t e = t.edge_count();
    if (e > 22) throw std::invalid_argument("brute force capped at 22 edges");
    // Collect root-to-leaf paths as edge bitmasks (edge id = child vertex - 1).
    std::vector<std::uint64_t> paths;
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v) {
        if (t.child_count(v) != 0) continue;
        std::uint64_t mask = 0;
        for (std::uint32_t cur = v; cur != 0; cur = t.parent_of(cur)) mask |= 1ULL << (cur - 1);
        paths.push_back(mask);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t sub = 1; sub < (1ULL << e); ++sub) {
        bool separating = true;
        for (std::uint64_t pm : paths)
            if ((pm & sub) == 0) { separating = false; break; }
        if (!separating) continue;
        double sum = 0.0;
        for (std::uint32_t i = 0; i < e; ++i)
            if (sub & (1ULL << i)) sum += w[i + 1];
        best = std::min(best, sum);
    }
    return best;
}

// Survival of a Galton-Watson process to generation n, by iterating the
// offspring generating function on the extinction probabilities.
inline double gw_survival(const std::function<double(double)>& f, int generations) {
    double u = 0.0; // P(dead by generation 0) from one individual's children
    for (int k = 0; k < generations; ++k) u = f(u);
    return 1.0 - u;
}

// Uniform random recursive tree shape with `edges` edges.
inline RootedTree random_tree(int edges, arborwalk::rng::Stream& s) {
    std::vector<std::uint32_t> parents(edges);
    for (int i = 0; i < edges; ++i)
        parents[i] = static_cast<std::uint32_t>(s.next_u64() % static_cast<std::uint64_t>(i + 1));
    return RootedTree::from_parents(parents);
}

// Dyadic rational weights make DP and brute-force sums exactly representable.
inline EdgeWeighting random_dyadic_weights(const RootedTree& t, arborwalk::rng::Stream& s) {
    EdgeWeighting w{std::vector<double>(t.vertex_count(), 0.0)};
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v)
        w[v] = static_cast<double>(s.next_u64() % 1025) / 64.0;
    return w;
}

} // namespace oracles
