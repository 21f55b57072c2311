#include "arborwalk/flows.hpp"

#include "arborwalk/cutset.hpp"
#include "arborwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace arborwalk::flows {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double adapted_conductance_value(double psi_e, double big_psi_e, int edge_depth, bool* shorted) {
    if (shorted) *shorted = false;
    if (edge_depth < 1) throw std::invalid_argument("adapted conductance: not an edge");
    if (edge_depth == 1) return 1.0;
    if (psi_e >= 1.0) {
        if (shorted) *shorted = true;
        return kInf;
    }
    return big_psi_e / (1.0 - psi_e);
}

AdaptedNetwork adapted_conductances(const RootedTree& t, const percolation::PsiFunction& psi) {
    AdaptedNetwork net;
    net.c.value.assign(t.vertex_count(), 0.0);
    std::vector<double> big(t.vertex_count(), 1.0);
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0) continue;
        const double pv = psi.value(t, v);
        big[v] = big[t.parent_of(v)] * pv;
        bool sh = false;
        net.c[v] = adapted_conductance_value(pv, big[v], t.depth_of(v), &sh);
        net.shorted += sh ? 1 : 0;
    }
    return net;
}

namespace {

// (1/c + 1/s)^-1 with shorts and dead ends: s = 0 blocks, infinities pass.
double series(double c, double s) {
    if (s <= 0.0) return 0.0;
    if (std::isinf(c)) return s;
    if (std::isinf(s)) return c;
    return 1.0 / (1.0 / c + 1.0 / s);
}

} // namespace

double effective_conductance(const RootedTree& t, const EdgeWeighting& c, int max_depth) {
    if (max_depth < 1 || max_depth > t.max_depth())
        throw std::invalid_argument("effective_conductance: depth out of range");
    // onward conductance below each vertex; grounded at the target sphere
    std::vector<double> s(t.vertex_count(), 0.0);
    const auto& order = t.by_depth();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint32_t v = *it;
        const int dv = t.depth_of(v);
        if (dv > max_depth) continue;
        double acc = 0.0;
        if (dv < max_depth)
            for (int k = 0; k < t.child_count(v); ++k) {
                const auto ch = static_cast<std::uint32_t>(t.child_at(v, k));
                acc += series(c[ch], s[ch]);
            }
        s[v] = dv == max_depth ? kInf : acc;
    }
    return s[0];
}

double effective_conductance_profile(std::span<const double> arity, std::span<const double> cond) {
    if (arity.empty() || arity.size() != cond.size())
        throw std::invalid_argument("effective_conductance_profile: need matching arity/conductance");
    const int n = static_cast<int>(arity.size());
    double onward = kInf; // grounded boundary below depth n
    for (int d = n - 1; d >= 0; --d)
        onward = arity[d] * series(cond[d], onward);
    return onward;
}

FlowAssignment build_unit_flow(const RootedTree& t, const percolation::PsiFunction& psi,
                               double gamma, int max_depth) {
    if (!(gamma > 1.0)) throw std::invalid_argument("build_unit_flow: gamma must exceed 1");
    if (max_depth < 1 || max_depth > t.max_depth())
        throw std::invalid_argument("build_unit_flow: depth out of range");

    const std::uint32_t n = t.vertex_count();
    std::vector<double> psi_e(n, 1.0), big(n, 1.0), u(n, 0.0), cap(n, 0.0);
    FlowAssignment out;
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0 || t.depth_of(v) > max_depth) continue;
        psi_e[v] = psi.value(t, v);
        big[v] = big[t.parent_of(v)] * psi_e[v];
        const int dv = t.depth_of(v);
        if (dv == 1) {
            u[v] = 1.0;
        } else {
            if (psi_e[v] >= 1.0) ++out.shorted;
            u[v] = (1.0 - psi_e[v]) * std::pow(big[v], gamma - 1.0);
        }
        cap[v] = std::pow(big[v], gamma); // u_e c(e) collapses to Psi^gamma
    }

    // max-flow value through each edge, leaves carrying their capacity
    std::vector<double> f(n, 0.0);
    const auto& order = t.by_depth();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::uint32_t v = *it;
        if (v == 0) break;
        const int dv = t.depth_of(v);
        if (dv > max_depth) continue;
        if (dv == max_depth || t.child_count(v) == 0) {
            f[v] = cap[v];
            continue;
        }
        double acc = 0.0;
        for (int k = 0; k < t.child_count(v); ++k) acc += f[t.child_at(v, k)];
        f[v] = std::min(cap[v], acc);
    }
    double total = 0.0;
    for (int k = 0; k < t.child_count(0); ++k) total += f[t.child_at(0, k)];
    if (total <= 0.0) throw ZeroFlow("capacity cut collapsed: max-flow is zero");
    out.strength_raw = total;

    // top-down consistent assignment scaled to unit strength
    out.theta.value.assign(n, 0.0);
    for (int k = 0; k < t.child_count(0); ++k) {
        const auto ch = static_cast<std::uint32_t>(t.child_at(0, k));
        out.theta[ch] = f[ch] / total;
    }
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0 || t.depth_of(v) >= max_depth) continue;
        const double in_flow = out.theta[v];
        if (t.depth_of(v) >= 1 && in_flow > 0.0) {
            double acc = 0.0;
            for (int k = 0; k < t.child_count(v); ++k) acc += f[t.child_at(v, k)];
            if (acc > 0.0)
                for (int k = 0; k < t.child_count(v); ++k) {
                    const auto ch = static_cast<std::uint32_t>(t.child_at(v, k));
                    out.theta[ch] = in_flow * f[ch] / acc;
                }
        }
    }

    // energy sum theta^2/c and the largest root-path sum of u
    std::vector<double> acc_u(n, 0.0);
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0 || t.depth_of(v) > max_depth) continue;
        acc_u[v] = acc_u[t.parent_of(v)] + u[v];
        if (t.depth_of(v) == max_depth) out.path_sum_bound = std::max(out.path_sum_bound, acc_u[v]);
        if (out.theta[v] > 0.0) {
            bool sh = false;
            const double c = adapted_conductance_value(psi_e[v], big[v], t.depth_of(v), &sh);
            if (!sh && c > 0.0) out.energy += out.theta[v] * out.theta[v] / c;
        }
    }
    return out;
}

SurvivalBounds survival_bounds(const RootedTree& t, const percolation::PsiFunction& psi,
                               int max_depth, double c_q) {
    if (!(c_q >= 1.0)) throw std::invalid_argument("survival_bounds: C_Q must be >= 1");
    SurvivalBounds b;

    bool all_one = true;
    std::vector<double> log_big(t.vertex_count(), 0.0);
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0 || t.depth_of(v) > max_depth) continue;
        const double pv = psi.value(t, v);
        if (t.depth_of(v) > 1 && pv < 1.0) all_one = false;
        log_big[v] = log_big[t.parent_of(v)] + std::log(pv);
    }
    if (all_one) {
        // deterministic percolation: everything is open
        b.degenerate = true;
        b.lower = b.upper = 1.0;
        b.c_eff = std::numeric_limits<double>::infinity();
        return b;
    }

    const auto net = adapted_conductances(t, psi);
    b.shorted = net.shorted;
    b.c_eff = effective_conductance(t, net.c, max_depth);
    b.lower = std::isinf(b.c_eff) ? 1.0 / c_q : (1.0 / c_q) * b.c_eff / (1.0 + b.c_eff);
    b.upper = std::min(1.0, std::exp(cutset::log_min_cutset(t, log_big, max_depth)));
    b.lower = std::clamp(b.lower, 0.0, 1.0);
    return b;
}

double kirchhoff_residual(const RootedTree& t, const EdgeWeighting& theta, int max_depth) {
    double worst = 0.0;
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v) {
        const int dv = t.depth_of(v);
        if (dv >= max_depth || t.child_count(v) == 0) continue; // boundary and leaves exempt
        double acc = 0.0;
        for (int k = 0; k < t.child_count(v); ++k) acc += theta[t.child_at(v, k)];
        worst = std::max(worst, std::abs(theta[v] - acc));
    }
    return worst;
}

} // namespace arborwalk::flows
