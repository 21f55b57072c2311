#pragma once

#include "arborwalk/errors.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace arborwalk::conductance {

// P(C <= 1/t) = (1-p1) * t^-m for t >= 1, with an atom of mass p1 at 1.
// This realizes the heavy tail at zero with a constant slowly varying part.
struct HeavyTailLaw {
    double m = 1.0;
    double p1 = 0.5;

    HeavyTailLaw(double m_, double p1_) : m(m_), p1(p1_) {
        if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("tail exponent m must be > 0");
        if (!(p1 >= 0.0 && p1 < 1.0)) throw std::invalid_argument("atom mass p1 must be in [0,1)");
    }

    double sample(rng::Stream& s) const {
        if (s.next_unit() < p1) return 1.0;
        return std::pow(s.next_unit(), 1.0 / m);
    }

    double cdf(double x) const {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return (1.0 - p1) * std::pow(x, m);
    }
};

// Environment of i.i.d. conductances; each edge's value is a pure function of
// (seed, edge key), so regeneration and insertion order cannot change it.
class ConductanceField {
public:
    ConductanceField(HeavyTailLaw law, std::uint64_t seed) : law_(law), seed_(seed) {}

    double value(std::uint64_t edge_key) const {
        auto s = rng::stream(seed_, rng::Domain::conductance, {edge_key});
        return law_.sample(s);
    }

    const HeavyTailLaw& law() const { return law_; }
    std::uint64_t seed() const { return seed_; }

private:
    HeavyTailLaw law_;
    std::uint64_t seed_;
};

// psi_RC(e): 1 at generation 1, else the ratio of resistance path sums
// strictly above e to those up to and including e.
template <class TreeT>
double psi_rc(const TreeT& t, const ConductanceField& field, std::uint64_t child_vertex) {
    const int d = t.depth_of(child_vertex);
    if (d < 1) throw std::invalid_argument("psi_rc: not an edge");
    if (d == 1) return 1.0;
    double below = 0.0;
    std::uint64_t cur = child_vertex;
    for (int k = d; k >= 1; --k) {
        const double r = 1.0 / field.value(t.edge_key(cur));
        if (k < d) below += r; // strict ancestors only
        if (k > 1) cur = t.parent_of(cur);
    }
    const double at = 1.0 / field.value(t.edge_key(child_vertex));
    return below / (below + at);
}

// Product of psi_RC over the root-to-e path.
template <class TreeT>
double psi_rc_product(const TreeT& t, const ConductanceField& field, std::uint64_t child_vertex) {
    double prod = 1.0;
    std::uint64_t cur = child_vertex;
    while (t.depth_of(cur) >= 1) {
        prod *= psi_rc(t, field, cur);
        if (t.depth_of(cur) == 1) break;
        cur = t.parent_of(cur);
    }
    return prod;
}

enum class Outcome { escaped, returned };

enum class BudgetPolicy {
    raise,   // throw BudgetExceeded when the step cap is hit
    resolve, // settle the trial by one Bernoulli draw from the exact quenched
             // escape probability at the current position (first-transition step)
};

struct TrialResult {
    Outcome outcome = Outcome::returned;
    std::uint64_t steps = 0;
    bool resolved = false;
};

// Per-environment cache of incident-edge conductances, shared across trials.
struct StarCache {
    struct Star {
        std::vector<double> cum; // cumulative child-edge conductances
    };
    std::unordered_map<std::uint64_t, Star> stars;

    template <class TreeT>
    const Star& get(const TreeT& t, const ConductanceField& field, std::uint64_t v, int depth) {
        auto it = stars.find(v);
        if (it != stars.end()) return it->second;
        Star s;
        const int cc = t.child_count(v, depth);
        s.cum.reserve(cc);
        double acc = 0.0;
        for (int k = 0; k < cc; ++k) {
            acc += field.value(t.edge_key(t.child_at(v, depth, k)));
            s.cum.push_back(acc);
        }
        return stars.emplace(v, std::move(s)).first->second;
    }
};

// Dirichlet elimination on the truncation: h(root) = 0, h(depth-N sphere) = 1,
// h harmonic for the conductance network elsewhere. Computed in one post-order
// sweep as h(v) = alpha_v * h(parent) + beta_v.
template <class TreeT>
class HarmonicSolve {
public:
    HarmonicSolve(const TreeT& t, const ConductanceField& field, int target_depth)
        : tree_(t), field_(&field), target_(target_depth) {
        if (!t.dense_indexable())
            throw std::invalid_argument("harmonic solve requires a dense-indexable tree");
        alpha_.assign(t.dense_count(), 0.0);
        beta_.assign(t.dense_count(), 0.0);
        build();
    }

    // Escape probability of the walk started at the root: first step lands on a
    // child c with probability proportional to C, then hits depth N before the
    // root with probability h(c) = beta_c.
    double escape_from_root() const {
        const std::uint64_t r = tree_.root();
        double num = 0.0, den = 0.0;
        const int cc = tree_.child_count(r, 0);
        for (int k = 0; k < cc; ++k) {
            const std::uint64_t c = tree_.child_at(r, 0, k);
            const double ce = field_value(c);
            num += ce * beta_[tree_.dense_index(c)];
            den += ce;
        }
        return den > 0.0 ? num / den : 0.0;
    }

    // h at the end of a root-started path (successive vertex keys, root first).
    double hit_probability(std::span<const std::uint64_t> root_path) const {
        double h = 0.0;
        for (std::size_t i = 1; i < root_path.size(); ++i) {
            const std::uint64_t di = tree_.dense_index(root_path[i]);
            h = alpha_[di] * h + beta_[di];
        }
        return h;
    }

private:
    double field_value(std::uint64_t v) const { return field_->value(tree_.edge_key(v)); }

    void build();

    const TreeT& tree_;
    const ConductanceField* field_;
    int target_;
    std::vector<double> alpha_, beta_;
};

template <class TreeT>
void HarmonicSolve<TreeT>::build() {
    // Iterative post-order: children contribute (alpha, beta) before parents.
    struct Frame {
        std::uint64_t v;
        int depth;
        int next_child;
    };
    std::vector<Frame> stack;
    stack.push_back({tree_.root(), 0, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        const int cc = f.depth >= target_ ? 0 : tree_.child_count(f.v, f.depth);
        if (f.next_child < cc) {
            const std::uint64_t c = tree_.child_at(f.v, f.depth, f.next_child++);
            stack.push_back({c, f.depth + 1, 0});
            continue;
        }
        if (f.depth > 0) {
            const std::uint64_t di = tree_.dense_index(f.v);
            if (f.depth == target_) {
                alpha_[di] = 0.0;
                beta_[di] = 1.0;
            } else if (cc == 0) {
                alpha_[di] = 1.0; // interior leaf: reflecting
                beta_[di] = 0.0;
            } else {
                const double cp = field_value(f.v);
                double num_beta = 0.0, denom = cp;
                for (int k = 0; k < cc; ++k) {
                    const std::uint64_t c = tree_.child_at(f.v, f.depth, k);
                    const std::uint64_t dc = tree_.dense_index(c);
                    const double ce = field_value(c);
                    denom += ce * (1.0 - alpha_[dc]);
                    num_beta += ce * beta_[dc];
                }
                alpha_[di] = cp / denom;
                beta_[di] = num_beta / denom;
            }
        }
        stack.pop_back();
    }
}

// Exact quenched escape probability P_root(hit depth N before returning).
template <class TreeT>
double quenched_escape_probability(const TreeT& t, const ConductanceField& field, int target_depth) {
    HarmonicSolve<TreeT> h(t, field, target_depth);
    return h.escape_from_root();
}

// One trial of the random walk on conductances started at the root. ESCAPED
// if depth N is reached before the walk re-enters the root.
template <class TreeT>
TrialResult run_rwrc_trial(const TreeT& t, const ConductanceField& field, int target_depth,
                           rng::Stream& stream, std::uint64_t budget = 100'000'000,
                           BudgetPolicy policy = BudgetPolicy::raise, StarCache* cache = nullptr,
                           const HarmonicSolve<TreeT>* resolver = nullptr) {
    if (target_depth < 1 || target_depth > t.max_depth())
        throw std::invalid_argument("run_rwrc_trial: target depth out of range");
    StarCache local;
    StarCache& stars = cache ? *cache : local;

    struct PathEntry {
        std::uint64_t v;
        double c_edge_above; // conductance of the edge to the parent
    };
    std::vector<PathEntry> path;
    path.push_back({t.root(), 0.0});
    TrialResult res;

    std::optional<HarmonicSolve<TreeT>> lazy_resolver;
    while (true) {
        const std::uint64_t v = path.back().v;
        const int depth = static_cast<int>(path.size()) - 1;
        if (depth == target_depth) {
            res.outcome = Outcome::escaped;
            return res;
        }
        if (depth == 0 && res.steps > 0) {
            res.outcome = Outcome::returned;
            return res;
        }
        if (res.steps >= budget) {
            if (policy == BudgetPolicy::raise)
                throw BudgetExceeded("rwrc trial exceeded " + std::to_string(budget) + " steps");
            const HarmonicSolve<TreeT>* h = resolver;
            if (h == nullptr) {
                lazy_resolver.emplace(t, field, target_depth);
                h = &*lazy_resolver;
            }
            std::vector<std::uint64_t> keys;
            keys.reserve(path.size());
            for (const auto& pe : path) keys.push_back(pe.v);
            const double p = h->hit_probability(keys);
            res.outcome = stream.next_unit() < p ? Outcome::escaped : Outcome::returned;
            res.resolved = true;
            return res;
        }
        ++res.steps;

        const auto& star = stars.get(t, field, v, depth);
        const double child_mass = star.cum.empty() ? 0.0 : star.cum.back();
        const double parent_mass = depth > 0 ? path.back().c_edge_above : 0.0;
        const double u = stream.next_unit() * (child_mass + parent_mass);
        if (depth > 0 && u < parent_mass) {
            path.pop_back();
            continue;
        }
        const double target = u - parent_mass;
        std::size_t lo = 0, hi = star.cum.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (star.cum[mid] > target) hi = mid; else lo = mid + 1;
        }
        const std::uint64_t c = t.child_at(v, depth, static_cast<int>(lo));
        const double ce = (lo == 0 ? star.cum[0] : star.cum[lo] - star.cum[lo - 1]);
        path.push_back({c, ce});
    }
}

struct EscapeEstimate {
    double estimate = 0.0;
    stats::Interval ci95;
    double env_spread = 0.0;       // stddev of per-environment escape frequencies
    std::uint64_t resolved_trials = 0;
    int environments = 0;
    int trials_per_env = 0;
};

// Annealed escape probe: K_env independent environments, K_tr trials each,
// normal-approximation CI across environment means.
template <class TreeT>
EscapeEstimate estimate_escape_probability(const TreeT& t, const HeavyTailLaw& law, int target_depth,
                                           int n_env, int trials_per_env, std::uint64_t seed,
                                           std::uint64_t budget = 100'000'000,
                                           BudgetPolicy policy = BudgetPolicy::raise) {
    if (n_env < 1 || trials_per_env < 1)
        throw std::invalid_argument("estimate_escape_probability: need >= 1 environment and trial");
    EscapeEstimate out;
    out.environments = n_env;
    out.trials_per_env = trials_per_env;
    std::vector<double> env_means;
    env_means.reserve(n_env);
    for (int e = 0; e < n_env; ++e) {
        ConductanceField field(law, rng::key_of(seed, rng::Domain::conductance, {static_cast<std::uint64_t>(e)}));
        StarCache cache;
        std::optional<HarmonicSolve<TreeT>> resolver;
        std::uint64_t escaped = 0;
        for (int k = 0; k < trials_per_env; ++k) {
            // depth is not part of the key: trials at nested depths share their
            // trajectory prefix, so escape events are monotone pathwise
            auto stream = rng::stream(seed, rng::Domain::walk_trial,
                                      {static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(k)});
            if (policy == BudgetPolicy::resolve && !resolver && t.dense_indexable())
                resolver.emplace(t, field, target_depth);
            const TrialResult r = run_rwrc_trial(t, field, target_depth, stream, budget, policy,
                                                 &cache, resolver ? &*resolver : nullptr);
            escaped += r.outcome == Outcome::escaped ? 1 : 0;
            out.resolved_trials += r.resolved ? 1 : 0;
        }
        env_means.push_back(static_cast<double>(escaped) / trials_per_env);
    }
    const auto ci = stats::normal_ci(env_means);
    out.estimate = ci.mean;
    out.ci95 = ci.ci95;
    out.env_spread = ci.stddev;
    return out;
}

// Test-facing helper: incident conductances at a vertex (parent edge first).
template <class TreeT>
std::vector<double> incident_conductances(const TreeT& t, const ConductanceField& field, std::uint64_t v) {
    std::vector<double> w;
    const int depth = t.depth_of(v);
    if (depth > 0) w.push_back(field.value(t.edge_key(v)));
    for (int k = 0; k < t.child_count(v, depth); ++k)
        w.push_back(field.value(t.edge_key(t.child_at(v, depth, k))));
    return w;
}

} // namespace arborwalk::conductance
