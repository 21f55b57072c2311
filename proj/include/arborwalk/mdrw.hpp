#pragma once

#include "arborwalk/errors.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace arborwalk::mdrw {

// Bias lambda plus per-vertex cookie counts m_v (m_root = 0 always) and the
// smallest uniform cap M when one exists.
class CookieConfig {
public:
    static CookieConfig homogeneous(double lambda, int m) {
        if (m < 0) throw std::invalid_argument("cookie count must be >= 0");
        CookieConfig c(lambda);
        c.uniform_m_ = m;
        c.cap_ = m;
        return c;
    }

    static CookieConfig inhomogeneous(double lambda, std::unordered_map<std::uint64_t, int> per_vertex,
                                      std::optional<int> cap) {
        CookieConfig c(lambda);
        for (const auto& [v, m] : per_vertex) {
            if (m < 0) throw std::invalid_argument("cookie count must be >= 0");
            if (cap && m > *cap) throw std::invalid_argument("cookie count exceeds the declared cap");
        }
        c.per_vertex_ = std::move(per_vertex);
        c.uniform_m_ = 0;
        c.cap_ = cap;
        return c;
    }

    double lambda() const { return lambda_; }
    std::optional<int> cap() const { return cap_; }

    int cookies(std::uint64_t vertex_key, int depth) const {
        if (depth == 0) return 0;
        if (!per_vertex_.empty()) {
            auto it = per_vertex_.find(vertex_key);
            if (it != per_vertex_.end()) return it->second;
        }
        return uniform_m_;
    }

private:
    explicit CookieConfig(double lambda) : lambda_(lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("bias lambda must be positive and finite");
    }

    double lambda_;
    int uniform_m_ = 0;
    std::optional<int> cap_;
    std::unordered_map<std::uint64_t, int> per_vertex_;
};

namespace detail {

// log(lambda^k - 1) for lambda != 1, stable for arbitrarily deep generations.
inline double log_pow_minus_one(double log_lambda, double k) {
    const double x = k * log_lambda;
    if (x > 0.0) return x + std::log1p(-std::exp(-x)); // log of a large positive value
    return std::log(-std::expm1(x));                   // log of |lambda^k - 1|, lambda < 1
}

} // namespace detail

// log psi_{M,lambda}(e) for an edge at generation n whose child endpoint
// holds m cookies; smooth through lambda = 1 and safe at any depth.
inline double log_psi_m_lambda(int edge_depth, int m_child, double lambda) {
    if (edge_depth < 1) throw std::invalid_argument("psi_m_lambda: not an edge");
    if (edge_depth == 1) return 0.0;
    double log_base;
    if (lambda == 1.0) {
        log_base = std::log((edge_depth - 1.0) / edge_depth);
    } else {
        const double ll = std::log(lambda);
        log_base = detail::log_pow_minus_one(ll, edge_depth - 1.0) -
                   detail::log_pow_minus_one(ll, edge_depth);
    }
    return (m_child + 1.0) * log_base;
}

inline double psi_m_lambda(int edge_depth, int m_child, double lambda) {
    return std::exp(log_psi_m_lambda(edge_depth, m_child, lambda));
}

// log Psi for the homogeneous configuration: -(M+1) log|e| at lambda = 1,
// else (M+1) log((lambda-1)/(lambda^|e|-1)).
inline double log_big_psi_homogeneous(int edge_depth, double lambda, int m) {
    if (edge_depth < 1) throw std::invalid_argument("big_psi: not an edge");
    if (lambda == 1.0) return -(m + 1.0) * std::log(static_cast<double>(edge_depth));
    const double ll = std::log(lambda);
    return (m + 1.0) *
           (detail::log_pow_minus_one(ll, 1.0) - detail::log_pow_minus_one(ll, edge_depth));
}

inline double big_psi_homogeneous(int edge_depth, double lambda, int m) {
    return std::exp(log_big_psi_homogeneous(edge_depth, lambda, m));
}

// Product of psi over the root-to-e path on a materialized tree.
template <class TreeT>
double big_psi(const TreeT& t, const CookieConfig& cfg, std::uint64_t child_vertex) {
    double prod = 1.0;
    std::uint64_t cur = child_vertex;
    while (true) {
        const int d = t.depth_of(cur);
        if (d < 1) break;
        prod *= psi_m_lambda(d, cfg.cookies(cur, d), cfg.lambda());
        if (d == 1) break;
        cur = t.parent_of(cur);
    }
    return prod;
}

// Walk state: the root-to-position stack, local times, and the embedded
// position X-tilde tracked online through the observation-time rule.
template <class TreeT>
class Walk {
public:
    Walk(const TreeT& t, const CookieConfig& cfg) : tree_(t), cfg_(cfg) { reset(); }

    void reset() {
        path_.clear();
        path_.push_back(tree_.root());
        local_times_.clear();
        local_times_[tree_.root()] = 1; // arrival accounting at time 0
        step_ = 0;
        embedded_ = tree_.root();
        embedded_steps_ = 0;
    }

    std::uint64_t position() const { return path_.back(); }
    int depth() const { return static_cast<int>(path_.size()) - 1; }
    std::uint64_t raw_steps() const { return step_; }
    std::uint64_t embedded_steps() const { return embedded_steps_; }
    std::uint64_t embedded_position() const { return embedded_; }
    int local_time(std::uint64_t v) const {
        auto it = local_times_.find(v);
        return it == local_times_.end() ? 0 : it->second;
    }

    // Probabilities over (parent, children...) for the current state; weights
    // are W_n up to the common factor lambda^-depth, which cancels.
    std::vector<double> step_distribution() const {
        const std::uint64_t v = position();
        const int d = depth();
        const int cc = tree_.child_count(v, d);
        std::vector<double> probs;
        const bool cookie_left = local_time(v) <= cfg_.cookies(v, d);
        const double parent_w = d > 0 ? cfg_.lambda() : 0.0;
        const double child_w = cookie_left ? 0.0 : 1.0;
        const double total = parent_w + cc * child_w;
        if (d > 0) probs.push_back(parent_w / total);
        for (int k = 0; k < cc; ++k) probs.push_back(child_w / total);
        return probs;
    }

    // One raw step; returns true when the arrival is an observation time
    // (the embedded walk moved).
    bool step(rng::Stream& s) {
        const std::uint64_t v = position();
        const int d = depth();
        const bool cookie_left = local_times_[v] <= cfg_.cookies(v, d);
        if (cookie_left) {
            // eat one cookie and jump to the parent
            move_up();
        } else {
            const int cc = tree_.child_count(v, d);
            const double parent_w = d > 0 ? cfg_.lambda() : 0.0;
            const double u = s.next_unit() * (parent_w + cc);
            if (d > 0 && u < parent_w) {
                move_up();
            } else {
                const int k = std::min(cc - 1, static_cast<int>(u - parent_w));
                path_.push_back(tree_.child_at(v, d, k));
            }
        }
        ++step_;
        const std::uint64_t w = position();
        const int lw = ++local_times_[w];
        if (w != embedded_ && lw >= cfg_.cookies(w, depth()) + 1) {
            embedded_ = w;
            ++embedded_steps_;
            return true;
        }
        return false;
    }

private:
    void move_up() {
        if (path_.size() < 2) throw std::logic_error("attempted to step above the root");
        path_.pop_back();
    }

    const TreeT& tree_;
    const CookieConfig& cfg_;
    std::vector<std::uint64_t> path_;
    std::unordered_map<std::uint64_t, int> local_times_;
    std::uint64_t step_ = 0;
    std::uint64_t embedded_ = 0;
    std::uint64_t embedded_steps_ = 0;
};

enum class Outcome { escaped, returned };

struct TrialResult {
    Outcome outcome = Outcome::returned;
    std::uint64_t raw_steps = 0;
};

// One trial: ESCAPED if the embedded walk reaches the target depth before its
// first return (k >= 1) to the root.
template <class TreeT>
TrialResult run_mdrw_trial(const TreeT& t, const CookieConfig& cfg, int target_depth,
                           rng::Stream& s, std::uint64_t budget = 100'000'000) {
    if (target_depth < 1 || target_depth > t.max_depth())
        throw std::invalid_argument("run_mdrw_trial: target depth out of range");
    Walk<TreeT> walk(t, cfg);
    while (true) {
        if (walk.raw_steps() >= budget)
            throw BudgetExceeded("mdrw trial exceeded " + std::to_string(budget) + " raw steps");
        if (walk.step(s)) {
            if (walk.depth() == target_depth) return {Outcome::escaped, walk.raw_steps()};
            if (walk.embedded_position() == t.root()) return {Outcome::returned, walk.raw_steps()};
        }
    }
}

// Observation times sigma_n applied to a recorded raw trajectory.
template <class TreeT>
std::vector<std::uint64_t> embed_tilde(const TreeT& t, std::span<const std::uint64_t> trajectory,
                                       const CookieConfig& cfg) {
    if (trajectory.empty()) return {};
    std::unordered_map<std::uint64_t, int> local;
    std::vector<std::uint64_t> embedded;
    embedded.push_back(trajectory.front());
    local[trajectory.front()] = 1;
    for (std::size_t k = 1; k < trajectory.size(); ++k) {
        const std::uint64_t w = trajectory[k];
        const int lw = ++local[w];
        if (w != embedded.back() && lw >= cfg.cookies(w, t.depth_of(w)) + 1) embedded.push_back(w);
    }
    return embedded;
}

struct HittingReport {
    double estimate = 0.0;
    double expected = 0.0; // Psi value from the closed form
    double z = 0.0;
    std::size_t trials = 0;
    bool pass = false;
};

// Monte Carlo check of the hitting identity on a path of length n: frequency
// of {hit the endpoint before returning to the root} against Psi.
HittingReport verify_hitting_identity(int path_length, double lambda, int m, std::size_t trials,
                                      std::uint64_t seed);

struct EscapeEstimate {
    double estimate = 0.0;
    stats::Interval ci95;
    std::size_t trials = 0;
};

template <class TreeT>
EscapeEstimate estimate_mdrw_escape(const TreeT& t, const CookieConfig& cfg, int target_depth,
                                    std::size_t trials, std::uint64_t seed,
                                    std::uint64_t budget = 100'000'000) {
    if (trials < 1) throw std::invalid_argument("estimate_mdrw_escape: need >= 1 trial");
    std::size_t escaped = 0;
    for (std::size_t k = 0; k < trials; ++k) {
        // depth-free keys couple nested depths on the same trajectories
        auto s = rng::stream(seed, rng::Domain::walk_trial, {static_cast<std::uint64_t>(k)});
        escaped += run_mdrw_trial(t, cfg, target_depth, s, budget).outcome == Outcome::escaped;
    }
    EscapeEstimate e;
    e.trials = trials;
    e.estimate = static_cast<double>(escaped) / static_cast<double>(trials);
    e.ci95 = stats::wilson_ci(escaped, trials);
    return e;
}

} // namespace arborwalk::mdrw
