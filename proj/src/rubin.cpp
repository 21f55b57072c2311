#include "arborwalk/rubin.hpp"

#include "arborwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace arborwalk::rubin {

namespace {

bool are_adjacent(const RootedTree& t, std::uint64_t a, std::uint64_t b) {
    if (a == b) return false;
    if (b != t.root() && t.parent_of(b) == a) return true;
    if (a != t.root() && t.parent_of(a) == b) return true;
    return false;
}

// Compensated accumulator: deep-path races compare sums of many clock values.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace

double ClockBank::clock(std::uint64_t from, std::uint64_t to, int k) const {
    if (!are_adjacent(tree_, from, to))
        throw NonAdjacent("clock requested for non-adjacent vertices");
    if (k < 0) throw std::invalid_argument("clock index must be >= 0");
    const std::uint64_t key =
        rng::key_of(seed_, rng::Domain::clock, {from, to, static_cast<std::uint64_t>(k)});
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const bool first_downward = (to != tree_.root() && tree_.parent_of(to) == from && k == 0);
    auto s = rng::Stream(key);
    const int m_to = cfg_.cookies(to, tree_.depth_of(to));
    const double value = first_downward ? s.next_gamma_int(m_to + 1) : s.next_exp();
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key, value).first->second;
}

double ClockBank::rate(std::uint64_t from, std::uint64_t to) const {
    const int d = std::max(tree_.depth_of(from), tree_.depth_of(to));
    return std::pow(cfg_.lambda(), -d + 1);
}

Subtree Subtree::root_path(const RootedTree& t, std::uint64_t endpoint) {
    const auto path = t.path_from_root(endpoint);
    std::vector<std::uint32_t> edges(path.begin() + 1, path.end());
    return from_edges(t, edges);
}

Subtree Subtree::whole(const RootedTree& t) {
    std::vector<std::uint32_t> edges;
    edges.reserve(t.edge_count());
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v) edges.push_back(v);
    return from_edges(t, edges);
}

Subtree Subtree::from_edges(const RootedTree& t, const std::vector<std::uint32_t>& child_vertices) {
    Subtree sub;
    sub.root_ = t.root();
    sub.adjacency_[t.root()];
    for (const std::uint32_t v : child_vertices) {
        if (v == 0 || v >= t.vertex_count()) throw std::invalid_argument("bad edge child");
        const std::uint32_t p = t.parent_of(v);
        sub.adjacency_[v].push_back(p);
        sub.adjacency_[p].push_back(v);
    }
    for (auto& [v, nb] : sub.adjacency_) std::sort(nb.begin(), nb.end());
    for (const std::uint32_t v : child_vertices)
        if (sub.adjacency_.find(t.parent_of(v)) == sub.adjacency_.end())
            throw std::invalid_argument("subtree edges must be downward closed to the root");
    return sub;
}

bool Subtree::has_edge(std::uint64_t a, std::uint64_t b) const {
    auto it = adjacency_.find(a);
    if (it == adjacency_.end()) return false;
    return std::binary_search(it->second.begin(), it->second.end(), b);
}

ExtensionResult run_extension(const ClockBank& bank, const Subtree& sub,
                              const std::vector<std::uint64_t>& hit_set, std::uint64_t max_steps,
                              std::uint64_t budget) {
    struct EdgeState {
        KahanSum total;
        int uses = 0;
        bool init = false;
    };
    std::map<std::pair<std::uint64_t, std::uint64_t>, EdgeState> state;

    ExtensionResult out;
    std::uint64_t pos = sub.root();
    out.trajectory.push_back(pos);
    for (std::uint64_t step = 0; step < max_steps; ++step) {
        if (step >= budget) throw BudgetExceeded("extension exceeded its step budget");
        const auto& nbs = sub.neighbors(pos);
        if (nbs.empty()) throw std::invalid_argument("extension reached an isolated vertex");
        double best = 0.0;
        std::uint64_t next = 0;
        bool have = false;
        for (const std::uint64_t nb : nbs) {
            auto& es = state[{pos, nb}];
            if (!es.init) {
                es.total.add(bank.clock(pos, nb, 0) / bank.rate(pos, nb));
                es.init = true;
            }
            if (!have || es.total.s < best) {
                best = es.total.s;
                next = nb;
                have = true;
            }
        }
        auto& used = state[{pos, next}];
        used.uses += 1;
        used.total.add(bank.clock(pos, next, used.uses) / bank.rate(pos, next));
        pos = next;
        out.trajectory.push_back(pos);
        for (const std::uint64_t h : hit_set) {
            if (pos == h) {
                out.hit = true;
                return out;
            }
        }
    }
    return out;
}

bool path_extension_event(const ClockBank& bank, std::uint64_t edge_child) {
    const auto& t = bank.tree();
    const auto sub = Subtree::root_path(t, edge_child);
    const auto res = run_extension(bank, sub, {edge_child, t.root()},
                                   std::numeric_limits<std::uint64_t>::max());
    return res.trajectory.back() == edge_child;
}

std::vector<std::uint32_t> explore_ccp(const ClockBank& bank, int max_depth) {
    const auto& t = bank.tree();
    if (max_depth > t.max_depth()) throw std::invalid_argument("explore_ccp: depth beyond truncation");
    std::vector<std::uint32_t> open;
    std::vector<std::uint32_t> frontier;
    for (int k = 0; k < t.child_count(0); ++k)
        frontier.push_back(static_cast<std::uint32_t>(t.child_at(0, k)));
    // depth-1 edges are open by the psi = 1 convention
    while (!frontier.empty()) {
        std::vector<std::uint32_t> next;
        for (const std::uint32_t v : frontier) {
            open.push_back(v);
            if (t.depth_of(v) >= max_depth) continue;
            for (int k = 0; k < t.child_count(v); ++k) {
                const auto c = static_cast<std::uint32_t>(t.child_at(v, k));
                if (path_extension_event(bank, c)) next.push_back(c);
            }
        }
        frontier = std::move(next);
    }
    std::sort(open.begin(), open.end());
    return open;
}

namespace {

// First `prefix_len` subtree-edge steps of a trajectory, encoded as local
// neighbor indices within the subtree's sorted adjacency.
std::vector<std::uint8_t> trace_prefix(const Subtree& sub, std::span<const std::uint64_t> traj,
                                       int prefix_len) {
    std::vector<std::uint8_t> code;
    std::uint64_t prev_in_sub = 0;
    bool have_prev = false;
    for (const std::uint64_t v : traj) {
        if (!sub.contains(v)) continue;
        if (have_prev && v != prev_in_sub && sub.has_edge(prev_in_sub, v)) {
            const auto& nbs = sub.neighbors(prev_in_sub);
            const auto it = std::lower_bound(nbs.begin(), nbs.end(), v);
            code.push_back(static_cast<std::uint8_t>(it - nbs.begin()));
            if (static_cast<int>(code.size()) >= prefix_len) break;
        }
        prev_in_sub = v;
        have_prev = true;
    }
    return code;
}

} // namespace

RestrictionReport check_restriction_property(const RootedTree& t, const mdrw::CookieConfig& cfg,
                                             const Subtree& sub, std::size_t banks, int prefix_len,
                                             std::uint64_t seed) {
    if (sub.root() != t.root())
        throw std::invalid_argument("restriction check requires a root-anchored subtree");
    std::map<std::vector<std::uint8_t>, std::size_t> counts_walk, counts_ext;

    for (std::size_t i = 0; i < banks; ++i) {
        // sampler A: the raw digging walk, embedded online, traced on the subtree
        mdrw::Walk walk(t, cfg);
        auto ws = rng::stream(seed, rng::Domain::walk_trial, {static_cast<std::uint64_t>(i)});
        std::vector<std::uint64_t> embedded{walk.position()};
        std::vector<std::uint8_t> code;
        for (std::uint64_t guard = 0; guard < 4'000'000; ++guard) {
            if (walk.step(ws)) {
                embedded.push_back(walk.position());
                code = trace_prefix(sub, embedded, prefix_len);
                if (static_cast<int>(code.size()) >= prefix_len) break;
            }
        }
        ++counts_walk[code];

        // sampler B: the coupled extension under an independent bank
        ClockBank bank(t, cfg, rng::key_of(seed, rng::Domain::clock, {0xB, i}));
        const auto ext = run_extension(bank, sub, {}, static_cast<std::uint64_t>(4 * prefix_len + 64));
        ++counts_ext[trace_prefix(sub, ext.trajectory, prefix_len)];
    }

    // align categories; pool sparse ones
    std::vector<std::size_t> a, b;
    std::size_t rare_a = 0, rare_b = 0;
    for (const auto& [code, ca] : counts_walk) {
        const auto itb = counts_ext.find(code);
        const std::size_t cb = itb == counts_ext.end() ? 0 : itb->second;
        if (ca + cb < 10) {
            rare_a += ca;
            rare_b += cb;
            continue;
        }
        a.push_back(ca);
        b.push_back(cb);
    }
    for (const auto& [code, cb] : counts_ext)
        if (counts_walk.find(code) == counts_walk.end()) rare_b += cb;
    if (rare_a + rare_b > 0) {
        a.push_back(rare_a);
        b.push_back(rare_b);
    }

    RestrictionReport rep;
    rep.samples = banks;
    rep.cells = a.size();
    rep.chi2 = stats::chi2_two_sample(a, b);
    rep.pass = rep.chi2.p_value > 0.01;
    return rep;
}

std::uint64_t meet_vertex(const RootedTree& t, std::uint64_t e1_child, std::uint64_t e2_child) {
    auto p1 = t.path_from_root(e1_child);
    auto p2 = t.path_from_root(e2_child);
    std::uint64_t meet = t.root();
    for (std::size_t i = 1; i < std::min(p1.size(), p2.size()); ++i) {
        if (p1[i] != p2[i]) break;
        meet = p1[i];
    }
    return meet;
}

QuasiIndependenceReport estimate_quasi_independence(const RootedTree& t,
                                                    const mdrw::CookieConfig& cfg,
                                                    std::uint64_t e1_child, std::uint64_t e2_child,
                                                    std::size_t banks, std::uint64_t seed) {
    const std::uint64_t meet = meet_vertex(t, e1_child, e2_child);
    const bool meet_is_root = meet == t.root();

    // per-bank categories: 0 outside C, else 1 + A + 2B inside C
    std::size_t n_c = 0, n_a = 0, n_b = 0, n_ab = 0;
    std::vector<std::uint8_t> cats;
    cats.reserve(banks);
    for (std::size_t i = 0; i < banks; ++i) {
        ClockBank bank(t, cfg, rng::key_of(seed, rng::Domain::clock, {0xC0, i}));
        const bool c_event = meet_is_root ? true : path_extension_event(bank, meet);
        if (!c_event) {
            cats.push_back(0);
            continue;
        }
        const bool a_event = path_extension_event(bank, e1_child);
        const bool b_event = path_extension_event(bank, e2_child);
        ++n_c;
        n_a += a_event ? 1 : 0;
        n_b += b_event ? 1 : 0;
        n_ab += (a_event && b_event) ? 1 : 0;
        cats.push_back(static_cast<std::uint8_t>(1 + (a_event ? 1 : 0) + (b_event ? 2 : 0)));
    }
    if (n_c < 100 || n_a == 0 || n_b == 0)
        throw InsufficientSamples("quasi-independence: too few conditioning events");

    QuasiIndependenceReport rep;
    rep.conditioning = n_c;
    rep.joint = n_ab;
    const auto ratio_of = [](double c, double a_ct, double b_ct, double ab) {
        if (a_ct == 0.0 || b_ct == 0.0) return 0.0;
        return ab * c / (a_ct * b_ct);
    };
    rep.ratio = ratio_of(static_cast<double>(n_c), static_cast<double>(n_a),
                         static_cast<double>(n_b), static_cast<double>(n_ab));

    // bootstrap percentile interval over bank outcomes
    const int reps = 400;
    std::vector<double> boots;
    boots.reserve(reps);
    auto bs = rng::stream(seed, rng::Domain::bootstrap, {banks});
    std::vector<std::size_t> tally(5, 0);
    for (int r = 0; r < reps; ++r) {
        std::fill(tally.begin(), tally.end(), 0);
        for (std::size_t i = 0; i < cats.size(); ++i)
            ++tally[cats[bs.next_u64() % cats.size()]];
        const double c = static_cast<double>(tally[1] + tally[2] + tally[3] + tally[4]);
        if (c == 0) continue;
        boots.push_back(ratio_of(c, static_cast<double>(tally[2] + tally[4]),
                                 static_cast<double>(tally[3] + tally[4]),
                                 static_cast<double>(tally[4])));
    }
    std::sort(boots.begin(), boots.end());
    if (!boots.empty()) {
        rep.ci95 = {boots[static_cast<std::size_t>(0.025 * boots.size())],
                    boots[std::min(boots.size() - 1, static_cast<std::size_t>(0.975 * boots.size()))]};
        rep.se = stats::sample_stddev(boots);
    }
    const int cap = cfg.cap().value_or(0);
    rep.bound = std::exp(cap + 1.0);
    rep.pass = rep.ci95.lo <= rep.bound;
    return rep;
}

} // namespace arborwalk::rubin
