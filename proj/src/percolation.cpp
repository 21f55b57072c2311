#include "arborwalk/percolation.hpp"

#include "arborwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace arborwalk::percolation {

PsiFunction PsiFunction::constant(double c) {
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("constant psi must lie in (0,1]");
    PsiFunction p;
    p.kind_ = Kind::constant;
    p.c_ = c;
    p.label_ = "constant";
    return p;
}

PsiFunction PsiFunction::delta(double d, int n0) {
    if (!(d > 0.0)) throw std::invalid_argument("delta must be positive");
    if (n0 < 1) throw std::invalid_argument("n0 must be >= 1");
    if (d >= n0 + 1.0)
        throw std::invalid_argument("delta percolation needs delta < n0 + 1 to keep psi positive");
    PsiFunction p;
    p.kind_ = Kind::delta;
    p.delta_ = d;
    p.n0_ = n0;
    p.label_ = "delta";
    return p;
}

PsiFunction PsiFunction::mdrw_homogeneous(double lambda, int m) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (m < 0) throw std::invalid_argument("cookie count must be >= 0");
    PsiFunction p;
    p.kind_ = Kind::mdrw;
    p.lambda_ = lambda;
    p.m_ = m;
    p.label_ = "mdrw";
    return p;
}

PsiFunction PsiFunction::rc(const conductance::ConductanceField& field) {
    PsiFunction p;
    p.kind_ = Kind::rc;
    p.field_ = &field;
    p.label_ = "rc";
    return p;
}

PsiFunction PsiFunction::custom(std::function<double(const RootedTree&, std::uint64_t)> fn,
                                std::string label) {
    PsiFunction p;
    p.kind_ = Kind::custom;
    p.fn_ = std::move(fn);
    p.label_ = std::move(label);
    return p;
}

double PsiFunction::value_at_depth(int edge_depth) const {
    if (edge_depth < 1) throw std::invalid_argument("psi: not an edge");
    switch (kind_) {
        case Kind::constant: return c_;
        case Kind::delta: return edge_depth > n0_ ? 1.0 - delta_ / edge_depth : 1.0;
        case Kind::mdrw: return mdrw::psi_m_lambda(edge_depth, m_, lambda_);
        default: throw std::invalid_argument("psi kind is not depth-only");
    }
}

double PsiFunction::value(const RootedTree& t, std::uint64_t edge_child) const {
    switch (kind_) {
        case Kind::rc: return conductance::psi_rc(t, *field_, edge_child);
        case Kind::custom: return fn_(t, edge_child);
        default: return value_at_depth(t.depth_of(edge_child));
    }
}

std::vector<double> PsiFunction::log_big_psi_edges(const RootedTree& t) const {
    std::vector<double> lp(t.vertex_count(), 0.0);
    for (const std::uint32_t v : t.by_depth()) {
        if (v == 0) continue;
        lp[v] = lp[t.parent_of(v)] + std::log(value(t, v));
    }
    return lp;
}

std::vector<double> PsiFunction::log_big_psi_profile(int max_depth) const {
    if (!depth_only()) throw std::invalid_argument("psi profile requires a depth-only kind");
    std::vector<double> lp(static_cast<std::size_t>(max_depth) + 1, 0.0);
    for (int n = 1; n <= max_depth; ++n) lp[n] = lp[n - 1] + std::log(value_at_depth(n));
    return lp;
}

bool Cluster::contains(std::uint32_t child_vertex) const {
    return std::binary_search(open.begin(), open.end(), child_vertex);
}

Cluster independent_percolation(const RootedTree& t, const PsiFunction& psi, rng::Stream& s,
                                int max_depth) {
    if (max_depth < 1 || max_depth > t.max_depth())
        throw std::invalid_argument("independent_percolation: depth out of range");
    Cluster cl;
    std::vector<std::uint32_t> frontier;
    for (int k = 0; k < t.child_count(0); ++k)
        frontier.push_back(static_cast<std::uint32_t>(t.child_at(0, k)));
    int depth = 1;
    while (!frontier.empty() && depth <= max_depth) {
        std::vector<std::uint32_t> next;
        for (const std::uint32_t v : frontier) {
            ++cl.tested;
            const double p = psi.value(t, v);
            if (!(s.next_unit() < p)) continue;
            cl.open.push_back(v);
            cl.survival_depth = depth;
            if (depth < max_depth)
                for (int k = 0; k < t.child_count(v); ++k)
                    next.push_back(static_cast<std::uint32_t>(t.child_at(v, k)));
        }
        frontier = std::move(next);
        ++depth;
    }
    std::sort(cl.open.begin(), cl.open.end());
    return cl;
}

SurvivalEstimate survival_estimate(const RootedTree& t, const PsiFunction& psi, int max_depth,
                                   std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("survival_estimate: need >= 1 trial");
    SurvivalEstimate est;
    est.trials = trials;
    for (std::size_t k = 0; k < trials; ++k) {
        auto s = rng::stream(seed, rng::Domain::percolation, {k});
        const auto cl = independent_percolation(t, psi, s, max_depth);
        est.survived += cl.survival_depth >= max_depth ? 1 : 0;
    }
    est.estimate = static_cast<double>(est.survived) / static_cast<double>(trials);
    est.ci95 = stats::wilson_ci(est.survived, trials);
    return est;
}

RootedTree cluster_to_tree(const RootedTree& t, const Cluster& c) {
    // cluster vertices are the root plus open child endpoints, already downward
    // closed; renumber by generation order
    std::vector<std::uint32_t> ids{0};
    ids.insert(ids.end(), c.open.begin(), c.open.end());
    std::vector<std::uint32_t> rank(t.vertex_count(), 0);
    std::vector<std::pair<int, std::uint32_t>> by_depth;
    by_depth.reserve(ids.size());
    for (const auto v : ids) by_depth.emplace_back(t.depth_of(v), v);
    std::sort(by_depth.begin(), by_depth.end());
    for (std::size_t i = 0; i < by_depth.size(); ++i) rank[by_depth[i].second] = static_cast<std::uint32_t>(i);
    std::vector<std::uint32_t> parents(by_depth.size() > 0 ? by_depth.size() - 1 : 0);
    for (std::size_t i = 1; i < by_depth.size(); ++i)
        parents[i - 1] = rank[t.parent_of(by_depth[i].second)];
    return RootedTree::from_parents(parents);
}

RtResult rt_value(const RootedTree& t, const PsiFunction& psi, std::span<const int> depths,
                  const cutset::EstimatorOptions& opt, double boundary_margin) {
    const auto probe = cutset::tree_psi_probe(t, psi.log_big_psi_edges(t));
    RtResult r;
    r.estimate = cutset::estimate_exponent(probe, depths, opt, 0.0);
    switch (r.estimate.status) {
        case cutset::BranchingEstimate::Status::divergent: r.verdict = RtClass::gt1; return r;
        case cutset::BranchingEstimate::Status::inconclusive: r.verdict = RtClass::inconclusive; return r;
        case cutset::BranchingEstimate::Status::ok: break;
    }
    if (r.estimate.lo > 1.0 + boundary_margin) r.verdict = RtClass::gt1;
    else if (r.estimate.hi < 1.0 - boundary_margin) r.verdict = RtClass::lt1;
    else r.verdict = RtClass::undecided;
    return r;
}

RtResult rt_value(const tree::LevelTree& lt, const PsiFunction& psi, std::span<const int> depths,
                  const cutset::EstimatorOptions& opt, double boundary_margin) {
    const auto probe = cutset::profile_psi_probe(lt, psi.log_big_psi_profile(lt.max_depth()));
    RtResult r;
    r.estimate = cutset::estimate_exponent(probe, depths, opt, 0.0);
    switch (r.estimate.status) {
        case cutset::BranchingEstimate::Status::divergent: r.verdict = RtClass::gt1; return r;
        case cutset::BranchingEstimate::Status::inconclusive: r.verdict = RtClass::inconclusive; return r;
        case cutset::BranchingEstimate::Status::ok: break;
    }
    if (r.estimate.lo > 1.0 + boundary_margin) r.verdict = RtClass::gt1;
    else if (r.estimate.hi < 1.0 - boundary_margin) r.verdict = RtClass::lt1;
    else r.verdict = RtClass::undecided;
    return r;
}

std::vector<DeltaSuiteRow> delta_percolation_suite(const RootedTree& t,
                                                   std::span<const double> deltas, int n0,
                                                   int max_depth, std::size_t trials,
                                                   std::uint64_t seed) {
    std::vector<DeltaSuiteRow> rows;
    for (std::size_t gi = 0; gi < deltas.size(); ++gi) {
        const double d = deltas[gi];
        DeltaSuiteRow row;
        row.delta = d;
        // lift n0 so that 1 - d/(n0+1) stays positive
        row.n0 = n0;
        while (d >= row.n0 + 1.0) ++row.n0;
        const auto psi = PsiFunction::delta(d, row.n0);
        row.survival = survival_estimate(t, psi, max_depth, trials, rng::mix(seed, gi));

        // branching-ruin of the first surviving clusters, when any survive
        std::vector<double> los, his;
        for (std::size_t k = 0; k < trials && los.size() < 3; ++k) {
            auto s = rng::stream(rng::mix(seed, gi), rng::Domain::percolation, {k});
            const auto cl = independent_percolation(t, psi, s, max_depth);
            if (cl.survival_depth < max_depth) continue;
            const auto sub = cluster_to_tree(t, cl);
            const auto est = cutset::estimate_branching_ruin(sub, cutset::default_depths(max_depth));
            if (est.is(cutset::BranchingEstimate::Status::ok)) {
                los.push_back(est.lo);
                his.push_back(est.hi);
            }
        }
        if (!los.empty()) {
            row.cluster_brr_valid = true;
            row.cluster_brr.lo = stats::mean(los);
            row.cluster_brr.hi = stats::mean(his);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void validate_barrier_epsilon(double m, double b, double eps) {
    if (!(eps > 0.0) || eps >= std::min(1.0, b))
        throw ConstraintViolation("epsilon must lie in (0, min(1, b))");
    bool applicable = false;
    if (b * m > 1.0) {
        applicable = true;
        if ((1.0 + eps) * (1.0 + (m + 3.0) * eps) / m > b - 2.0 * eps)
            throw ConstraintViolation("epsilon violates the heavy-tail regime constraint");
    }
    if (b > 1.0) {
        applicable = true;
        if ((1.0 + 4.0 * eps) * (1.0 + eps) > b - 2.0 * eps)
            throw ConstraintViolation("epsilon violates the b > 1 regime constraint");
    }
    if (!applicable)
        throw ConstraintViolation("barrier percolation requires bm > 1 or b > 1");
}

Cluster barrier_percolation(const RootedTree& t, const conductance::ConductanceField& field,
                            double b_declared, double eps, int max_depth) {
    const double m = field.law().m;
    validate_barrier_epsilon(m, b_declared, eps);
    if (max_depth < 1 || max_depth > t.max_depth())
        throw std::invalid_argument("barrier_percolation: depth out of range");

    const double own_exp = (1.0 + eps) / m;
    const double sum_exp = std::max(1.0, 1.0 / m) + (m + 3.0) / m * eps;

    Cluster cl;
    // prefix sums of reciprocal conductances along open paths
    std::vector<std::pair<std::uint32_t, double>> frontier;
    for (int k = 0; k < t.child_count(0); ++k) {
        const auto v = static_cast<std::uint32_t>(t.child_at(0, k));
        frontier.emplace_back(v, 1.0 / field.value(t.edge_key(v)));
    }
    int depth = 1;
    while (!frontier.empty() && depth <= max_depth) {
        std::vector<std::pair<std::uint32_t, double>> next;
        for (const auto& [v, path_sum] : frontier) {
            ++cl.tested;
            if (depth > 1) {
                const double inv = 1.0 / field.value(t.edge_key(v));
                const double nd = static_cast<double>(depth);
                if (inv > std::pow(nd, own_exp)) continue;
                if (path_sum > std::pow(nd, sum_exp)) continue;
            }
            cl.open.push_back(v);
            cl.survival_depth = depth;
            if (depth < max_depth)
                for (int k = 0; k < t.child_count(v); ++k) {
                    const auto c = static_cast<std::uint32_t>(t.child_at(v, k));
                    next.emplace_back(c, path_sum + 1.0 / field.value(t.edge_key(c)));
                }
        }
        frontier = std::move(next);
        ++depth;
    }
    std::sort(cl.open.begin(), cl.open.end());
    return cl;
}

} // namespace arborwalk::percolation
