#include "arborwalk/cutset.hpp"

#include "arborwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace arborwalk::cutset {

using tree::LevelTree;
using tree::RootedTree;

double min_cutset_value(const RootedTree& t, const tree::EdgeWeighting& w) {
    if (t.max_depth() < 1) throw std::invalid_argument("min_cutset_value: tree has no edges");
    std::vector<double> f(t.vertex_count(), 0.0);
    const auto& order = t.by_depth();
    // Children precede parents when scanning generations deepest-first.
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint32_t v = *it;
        const int cc = t.child_count(v);
        if (v == 0) break; // root carries no edge
        double sum_children = 0.0;
        for (int k = 0; k < cc; ++k) sum_children += f[t.child_at(v, k)];
        f[v] = (cc == 0) ? w[v] : std::min(w[v], sum_children);
    }
    double total = 0.0;
    for (int k = 0; k < t.child_count(0); ++k) total += f[t.child_at(0, k)];
    return total;
}

namespace {

double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

} // namespace

double log_min_cutset(const RootedTree& t, std::span<const double> log_w, int depth) {
    if (depth < 1 || depth > t.max_depth()) throw std::invalid_argument("log_min_cutset: bad depth");
    std::vector<double> f(t.vertex_count(), 0.0);
    const auto& order = t.by_depth();
    std::vector<double> buf;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint32_t v = *it;
        if (v == 0) break;
        const int dv = t.depth_of(v);
        if (dv > depth) continue;
        if (dv == depth || t.child_count(v) == 0) {
            f[v] = log_w[v];
            continue;
        }
        buf.clear();
        for (int k = 0; k < t.child_count(v); ++k) buf.push_back(f[t.child_at(v, k)]);
        f[v] = std::min(log_w[v], log_sum_exp(buf));
    }
    std::vector<double> roots;
    for (int k = 0; k < t.child_count(0); ++k) roots.push_back(f[t.child_at(0, k)]);
    return log_sum_exp(roots);
}

namespace {

double log_edge_weight(WeightKind kind, int edge_depth, double gamma) {
    return kind == WeightKind::polynomial ? -gamma * std::log(static_cast<double>(edge_depth))
                                          : -static_cast<double>(edge_depth) * std::log(gamma);
}

Probe sphere_min_probe(const LevelTree& lt, int depth,
                       const std::function<double(int)>& log_w_at) {
    Probe p;
    p.log_value = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= depth; ++k) {
        const double sphere = lt.log_level_size(k) + log_w_at(k);
        p.log_value = std::min(p.log_value, sphere);
        if (k == depth) p.log_deepest_sphere = sphere;
    }
    return p;
}

} // namespace

ProbeFn profile_probe(const LevelTree& lt, WeightKind kind) {
    return [&lt, kind](int depth, double gamma) {
        return sphere_min_probe(lt, depth,
                                [&](int k) { return log_edge_weight(kind, k, gamma); });
    };
}

ProbeFn profile_psi_probe(const LevelTree& lt, std::vector<double> log_big_psi) {
    return [&lt, lp = std::move(log_big_psi)](int depth, double gamma) {
        if (depth >= static_cast<int>(lp.size()))
            throw std::invalid_argument("profile_psi_probe: depth beyond psi profile");
        return sphere_min_probe(lt, depth, [&](int k) { return gamma * lp[k]; });
    };
}

namespace {

Probe tree_probe_impl(const RootedTree& t, int depth,
                      const std::function<double(std::uint32_t)>& log_w_edge) {
    std::vector<double> lw(t.vertex_count(), 0.0);
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v)
        if (t.depth_of(v) <= depth) lw[v] = log_w_edge(v);
    Probe p;
    p.log_value = log_min_cutset(t, lw, depth);
    // log-sum over the depth-`depth` sphere
    double m = -std::numeric_limits<double>::infinity();
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v)
        if (t.depth_of(v) == depth) m = std::max(m, lw[v]);
    double s = 0.0;
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v)
        if (t.depth_of(v) == depth) s += std::exp(lw[v] - m);
    p.log_deepest_sphere = std::isfinite(m) ? m + std::log(s) : m;
    return p;
}

} // namespace

ProbeFn tree_probe(const RootedTree& t, WeightKind kind) {
    return [&t, kind](int depth, double gamma) {
        return tree_probe_impl(t, depth, [&](std::uint32_t v) {
            return log_edge_weight(kind, t.depth_of(v), gamma);
        });
    };
}

ProbeFn tree_psi_probe(const RootedTree& t, std::vector<double> log_big_psi_edge) {
    return [&t, lp = std::move(log_big_psi_edge)](int depth, double gamma) {
        return tree_probe_impl(t, depth, [&](std::uint32_t v) { return gamma * lp[v]; });
    };
}

SequenceClass classify_sequence(std::span<const int> depths, std::span<const double> log_values,
                                std::span<const double> log_spheres, const EstimatorOptions& opt) {
    std::vector<double> ln_n(depths.size()), lv(log_values.begin(), log_values.end());
    for (std::size_t i = 0; i < depths.size(); ++i) ln_n[i] = std::log(static_cast<double>(depths[i]));
    const double slope = stats::lsq_slope(ln_n, lv);
    if (slope < -opt.slope_threshold) return SequenceClass::decaying;
    if (log_values.back() >= std::log(opt.value_floor)) return SequenceClass::nondecaying;
    // Flat but tiny: bounded away only if the minimum froze strictly below a
    // sphere that keeps growing (the exponential-growth signature).
    if (log_spheres.back() - log_values.back() > opt.divergence_log_factor)
        return SequenceClass::nondecaying;
    return SequenceClass::inconclusive;
}

BranchingEstimate estimate_exponent(const ProbeFn& probe, std::span<const int> depths,
                                    const EstimatorOptions& opt, double lower_clamp) {
    if (depths.size() < 3) throw std::invalid_argument("estimate_exponent: need at least 3 depths");
    for (std::size_t i = 1; i < depths.size(); ++i)
        if (depths[i] <= depths[i - 1]) throw std::invalid_argument("estimate_exponent: depths must increase");
    if (opt.tolerance <= 0.0) throw std::invalid_argument("estimate_exponent: tolerance must be > 0");

    auto classify = [&](double gamma) {
        std::vector<double> lv, ls;
        for (int n : depths) {
            const Probe p = probe(n, gamma);
            lv.push_back(p.log_value);
            ls.push_back(p.log_deepest_sphere);
        }
        return classify_sequence(depths, lv, ls, opt);
    };

    BranchingEstimate est;
    const double gmin = std::max(opt.gamma_min, lower_clamp > 0.0 ? lower_clamp : opt.gamma_min);

    switch (classify(opt.gamma_max)) {
        case SequenceClass::nondecaying:
            est.status = BranchingEstimate::Status::divergent;
            est.lo = opt.gamma_max;
            est.hi = std::numeric_limits<double>::infinity();
            return est;
        case SequenceClass::inconclusive:
            est.status = BranchingEstimate::Status::inconclusive;
            return est;
        case SequenceClass::decaying: break;
    }
    switch (classify(gmin)) {
        case SequenceClass::decaying:
            est.lo = lower_clamp;
            est.hi = std::max(lower_clamp, gmin);
            return est;
        case SequenceClass::inconclusive:
            est.status = BranchingEstimate::Status::inconclusive;
            return est;
        case SequenceClass::nondecaying: break;
    }

    double lo = gmin, hi = opt.gamma_max;
    while (hi - lo > opt.tolerance) {
        const double mid = 0.5 * (lo + hi);
        switch (classify(mid)) {
            case SequenceClass::decaying: hi = mid; break;
            case SequenceClass::nondecaying: lo = mid; break;
            case SequenceClass::inconclusive:
                est.status = BranchingEstimate::Status::inconclusive;
                return est;
        }
    }
    est.lo = std::max(lower_clamp, lo);
    est.hi = std::max(lower_clamp, hi);
    return est;
}

BranchingEstimate estimate_branching_ruin(const LevelTree& lt, std::span<const int> depths,
                                          const EstimatorOptions& opt) {
    return estimate_exponent(profile_probe(lt, WeightKind::polynomial), depths, opt, 0.0);
}

BranchingEstimate estimate_branching(const LevelTree& lt, std::span<const int> depths,
                                     const EstimatorOptions& opt) {
    return estimate_exponent(profile_probe(lt, WeightKind::exponential), depths, opt, 1.0);
}

BranchingEstimate estimate_branching_ruin(const RootedTree& t, std::span<const int> depths,
                                          const EstimatorOptions& opt) {
    return estimate_exponent(tree_probe(t, WeightKind::polynomial), depths, opt, 0.0);
}

BranchingEstimate estimate_branching(const RootedTree& t, std::span<const int> depths,
                                     const EstimatorOptions& opt) {
    return estimate_exponent(tree_probe(t, WeightKind::exponential), depths, opt, 1.0);
}

std::vector<int> default_depths(int max_depth) {
    std::vector<int> d{max_depth / 8, max_depth / 4, max_depth / 2, max_depth};
    for (int& n : d) n = std::max(2, n);
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    while (d.size() < 3 && d.front() > 2) d.insert(d.begin(), d.front() - 1);
    if (d.size() < 3) throw std::invalid_argument("default_depths: tree too shallow for estimation");
    return d;
}

} // namespace arborwalk::cutset
