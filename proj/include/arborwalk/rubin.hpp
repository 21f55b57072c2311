#pragma once

#include "arborwalk/mdrw.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"

#include <cstdint>
#include <mutex>
#include <unordered_map>
#include <vector>

namespace arborwalk::rubin {

using tree::RootedTree;

// The clock family Y(nu, mu, k) for ordered neighbor pairs: the first
// downward clock is Gamma(m_mu + 1, 1), realized as the sum of m_mu + 1 unit
// exponentials; every other clock is a unit exponential. Values are pure
// functions of (seed, nu, mu, k); the memo makes coupled re-reads cheap and
// supports concurrent read-mostly access with first-write-wins insertion.
class ClockBank {
public:
    ClockBank(const RootedTree& t, const mdrw::CookieConfig& cfg, std::uint64_t seed)
        : tree_(t), cfg_(cfg), seed_(seed) {}

    double clock(std::uint64_t from, std::uint64_t to, int k) const;

    // Rate of the race on the oriented pair: lambda^{-(|nu| v |mu|) + 1}.
    double rate(std::uint64_t from, std::uint64_t to) const;

    const RootedTree& tree() const { return tree_; }
    const mdrw::CookieConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }

private:
    const RootedTree& tree_;
    const mdrw::CookieConfig& cfg_;
    std::uint64_t seed_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::uint64_t, double> cache_;
};

// A rooted subtree given by its vertex set; neighbor lists are sorted so that
// floating-point ties in the clock race break toward the smallest id.
class Subtree {
public:
    static Subtree root_path(const RootedTree& t, std::uint64_t endpoint);
    static Subtree whole(const RootedTree& t);
    // Edges named by their child endpoints; the root is always included.
    static Subtree from_edges(const RootedTree& t, const std::vector<std::uint32_t>& child_vertices);

    std::uint64_t root() const { return root_; }
    bool contains(std::uint64_t v) const { return adjacency_.count(v) > 0; }
    const std::vector<std::uint64_t>& neighbors(std::uint64_t v) const {
        return adjacency_.at(v);
    }
    bool has_edge(std::uint64_t a, std::uint64_t b) const;

private:
    std::uint64_t root_ = 0;
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> adjacency_;
};

struct ExtensionResult {
    std::vector<std::uint64_t> trajectory; // positions, starting at the subtree root
    bool hit = false;                      // stopped on the hit set
};

// Runs the coupled extension on the subtree: from nu, the next vertex
// minimizes the cumulative clock total over subtree neighbors. Stops when a
// hit-set vertex is reached at step >= 1 or when max_steps elapse.
ExtensionResult run_extension(const ClockBank& bank, const Subtree& sub,
                              const std::vector<std::uint64_t>& hit_set, std::uint64_t max_steps,
                              std::uint64_t budget = 100'000'000);

// T(e+) < T(rho) for the extension restricted to [rho, e+].
bool path_extension_event(const ClockBank& bank, std::uint64_t edge_child);

// C_CP(rho) up to the given depth, explored frontier-first; returned as a
// sorted list of child endpoints (depth-1 edges are always open).
std::vector<std::uint32_t> explore_ccp(const ClockBank& bank, int max_depth);

struct RestrictionReport {
    stats::Chi2Result chi2;
    std::size_t samples = 0;
    std::size_t cells = 0;
    bool pass = false; // p > 0.01
};

// Compares the law of the embedded walk's edge trace on the subtree against
// the extension's law over `banks` independent banks (chi-square on the
// first `prefix_len` trace steps).
RestrictionReport check_restriction_property(const RootedTree& t, const mdrw::CookieConfig& cfg,
                                             const Subtree& sub, std::size_t banks,
                                             int prefix_len, std::uint64_t seed);

struct QuasiIndependenceReport {
    double ratio = 1.0;            // P(A,B|C) / (P(A|C) P(B|C))
    stats::Interval ci95;          // bootstrap percentile interval
    double se = 0.0;               // bootstrap standard error
    std::size_t conditioning = 0;  // banks with the ancestor event
    std::size_t joint = 0;
    double bound = 1.0;            // exp(M+1)
    bool pass = false;             // ci95.lo <= bound
};

// Empirical quasi-independence ratio for two edges against the exp(M+1)
// bound; the conditioning event is the common ancestor's membership.
QuasiIndependenceReport estimate_quasi_independence(const RootedTree& t,
                                                    const mdrw::CookieConfig& cfg,
                                                    std::uint64_t e1_child, std::uint64_t e2_child,
                                                    std::size_t banks, std::uint64_t seed);

// Deepest common ancestor vertex of two edges.
std::uint64_t meet_vertex(const RootedTree& t, std::uint64_t e1_child, std::uint64_t e2_child);

} // namespace arborwalk::rubin
