// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include "arborwalk/cli.hpp"
#include "arborwalk/conductance.hpp"
#include "arborwalk/cutset.hpp"
#include "arborwalk/flows.hpp"
#include "arborwalk/mdrw.hpp"
#include "arborwalk/percolation.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/rubin.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace arborwalk;
using tree::LevelTree;
using tree::RootedTree;

namespace {

constexpr std::uint64_t kSeed = 20240817;

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// --------------------------------------------------------------- criterion 1

bool gamblers_ruin_oracle(std::string& detail) {
    auto s = rng::stream(kSeed, rng::Domain::generic, {1});
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int n = 2 + static_cast<int>(s.next_u64() % 49);
        const auto t = RootedTree::path(n);
        conductance::ConductanceField field(
            conductance::HeavyTailLaw(0.3 + 2.2 * s.next_unit(), 0.6 * s.next_unit()),
            s.next_u64());
        std::vector<double> cs;
        for (std::uint32_t v = 1; v <= static_cast<std::uint32_t>(n); ++v)
            cs.push_back(field.value(t.edge_key(v)));
        const double prod = conductance::psi_rc_product(t, field, static_cast<std::uint64_t>(n));
        const double oracle = oracles::path_hitting_probability(cs);
        worst = std::max(worst, std::abs(prod - oracle));
    }
    detail = "worst |product - solve| = " + fmt(worst);
    return worst < 1e-10;
}

// --------------------------------------------------------------- criterion 2

bool hitting_identity(std::string& detail) {
    auto s = rng::stream(kSeed, rng::Domain::generic, {2});
    double worst = 0.0;
    bool ok = true;
    const std::size_t trials = 100000;
    // the pinned case first: lambda=1, n=4, M=1 has Psi = 0.0625
    {
        const auto rep = mdrw::verify_hitting_identity(4, 1.0, 1, trials, rng::mix(kSeed, 999));
        ok = ok && rep.pass && std::abs(rep.expected - 0.0625) < 1e-15;
        worst = std::max(worst, std::abs(rep.z));
    }
    for (int c = 0; c < 19; ++c) {
        const int n = 2 + static_cast<int>(s.next_u64() % 5);
        const double lambda = 0.5 + 1.5 * s.next_unit();
        const int m = static_cast<int>(s.next_u64() % 4);
        const auto rep = mdrw::verify_hitting_identity(n, lambda, m, trials, rng::mix(kSeed, c));
        worst = std::max(worst, std::abs(rep.z));
        ok = ok && rep.pass;
    }
    detail = "20 cases at 1e5 trials, worst |z| = " + fmt(worst);
    return ok;
}

// --------------------------------------------------------------- criterion 3

bool cutset_dp_vs_bruteforce(std::string& detail) {
    auto s = rng::stream(kSeed, rng::Domain::generic, {3});
    int agreements = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const int edges = 1 + static_cast<int>(s.next_u64() % 12);
        const auto t = oracles::random_tree(edges, s);
        const auto w = oracles::random_dyadic_weights(t, s);
        if (cutset::min_cutset_value(t, w) == oracles::brute_force_min_cutset(t, w)) ++agreements;
    }
    detail = std::to_string(agreements) + "/500 exact agreements";
    return agreements == 500;
}

// --------------------------------------------------------------- criterion 4

bool branching_estimators(std::string& detail) {
    using Status = cutset::BranchingEstimate::Status;
    const std::vector<int> depths{250, 500, 1000, 2000};

    const auto path = cutset::estimate_branching_ruin(LevelTree::path(2000), depths);
    const bool path_ok = path.is(Status::ok) && path.hi <= 0.2;

    const auto sphere = cutset::estimate_branching_ruin(LevelTree::sphere(2.0, 2000), depths);
    const bool sphere_ok = sphere.is(Status::ok) && sphere.lo <= 2.3 && sphere.hi >= 1.7;

    const auto br3 = cutset::estimate_branching(LevelTree::regular(3, 2000), depths);
    const bool br3_ok = br3.is(Status::ok) && br3.lo <= 3.1 && br3.hi >= 2.9;

    const auto brr3 = cutset::estimate_branching_ruin(LevelTree::regular(3, 2000), depths);
    const bool div_ok = brr3.is(Status::divergent);

    detail = "path=[" + fmt(path.lo) + "," + fmt(path.hi) + "] sphere=[" + fmt(sphere.lo) + "," +
             fmt(sphere.hi) + "] d3-br=[" + fmt(br3.lo) + "," + fmt(br3.hi) +
             "] d3-brr=" + (div_ok ? "DIVERGENT" : "not divergent");
    return path_ok && sphere_ok && br3_ok && div_ok;
}

// --------------------------------------------------------------- criterion 5

bool effective_conductance(std::string& detail) {
    std::vector<double> arity(30, 2.0), cond(30, 1.0);
    const double c30 = flows::effective_conductance_profile(arity, cond);
    const bool fixed_point_ok = std::abs(c30 - 1.0) < 1e-6;

    auto s = rng::stream(kSeed, rng::Domain::generic, {5});
    double worst = 0.0;
    for (int rep = 0; rep < 30; ++rep) {
        const auto t = oracles::random_tree(8 + static_cast<int>(s.next_u64() % 190), s);
        tree::EdgeWeighting c{std::vector<double>(t.vertex_count(), 0.0)};
        for (std::uint32_t v = 1; v < t.vertex_count(); ++v) c[v] = 0.05 + 3.0 * s.next_unit();
        for (int n : {1, std::max(1, t.max_depth() / 2), t.max_depth()}) {
            const double mine = flows::effective_conductance(t, c, n);
            const double oracle = oracles::dirichlet_effective_conductance(t, c, n);
            worst = std::max(worst, std::abs(mine - oracle) / std::max(1.0, std::abs(oracle)));
        }
    }
    detail = "binary depth 30 gap = " + fmt(std::abs(c30 - 1.0)) +
             ", worst solve deviation = " + fmt(worst);
    return fixed_point_ok && worst < 1e-10;
}

// --------------------------------------------------------------- criterion 6

bool rubin_coupling(std::string& detail) {
    const auto t = RootedTree::regular(2, 4);
    const auto cfg = mdrw::CookieConfig::homogeneous(1.0, 1);
    const std::uint64_t v1 = t.child_at(0, 0);

    // clock marginals at 1e5 samples across banks
    const int n = 100000;
    std::vector<double> gam, expo, upward;
    gam.reserve(n);
    expo.reserve(n);
    upward.reserve(n);
    for (int i = 0; i < n; ++i) {
        rubin::ClockBank bank(t, cfg, rng::key_of(kSeed, rng::Domain::clock, {6, static_cast<std::uint64_t>(i)}));
        gam.push_back(bank.clock(0, v1, 0));
        expo.push_back(bank.clock(0, v1, 1));
        upward.push_back(bank.clock(v1, 0, 0));
    }
    auto exp_cdf = [](double x) { return x <= 0 ? 0.0 : 1.0 - std::exp(-x); };
    const double p_gamma =
        stats::ks_test(gam, [](double x) { return stats::gamma_cdf(2.0, x); }).p_value;
    const double p_exp = stats::ks_test(expo, exp_cdf).p_value;
    const double p_up = stats::ks_test(upward, exp_cdf).p_value;
    const bool ks_ok = p_gamma > 0.01 && p_exp > 0.01 && p_up > 0.01;

    // membership frequency against Psi on 10 edges spread over depths 1..4
    std::vector<std::uint64_t> edges;
    for (int depth = 1; depth <= 4 && edges.size() < 10; ++depth)
        for (std::uint32_t v = 1; v < t.vertex_count() && edges.size() < 10; ++v)
            if (t.depth_of(v) == depth && (v % 2 == 0 || depth <= 2)) edges.push_back(v);
    bool membership_ok = true;
    double worst_gap = 0.0;
    const int banks = 10000;
    for (const auto e : edges) {
        int hits = 0;
        for (int i = 0; i < banks; ++i) {
            rubin::ClockBank bank(t, cfg,
                                  rng::key_of(kSeed, rng::Domain::clock, {7, e, static_cast<std::uint64_t>(i)}));
            hits += rubin::path_extension_event(bank, e) ? 1 : 0;
        }
        const double psi = mdrw::big_psi_homogeneous(t.depth_of(e), 1.0, 1);
        const double se = std::sqrt(std::max(psi * (1 - psi), 1e-9) / banks);
        const double gap = std::abs(hits / static_cast<double>(banks) - psi);
        worst_gap = std::max(worst_gap, gap / se);
        membership_ok = membership_ok && gap <= 3.0 * se;
    }

    // restriction property: embedded trace vs extension on a root path
    std::uint64_t deep = 0;
    for (std::uint32_t v = 1; v < t.vertex_count(); ++v)
        if (t.depth_of(v) == 4) { deep = v; break; }
    const auto rep = rubin::check_restriction_property(t, cfg, rubin::Subtree::root_path(t, deep),
                                                       4000, 4, rng::mix(kSeed, 8));

    detail = "KS p = {" + fmt(p_gamma) + ", " + fmt(p_exp) + ", " + fmt(p_up) +
             "}, worst membership z = " + fmt(worst_gap) + ", chi2 p = " + fmt(rep.chi2.p_value);
    return ks_ok && membership_ok && rep.pass;
}

// --------------------------------------------------------------- criterion 7

bool quasi_independence(std::string& detail) {
    const auto t = RootedTree::regular(2, 2);
    const std::uint64_t v1 = t.child_at(0, 0);
    const std::uint64_t e1 = t.child_at(v1, 0), e2 = t.child_at(v1, 1);
    bool ok = true;
    std::string parts;
    for (int m : {0, 1, 2}) {
        const auto rep = rubin::estimate_quasi_independence(
            t, mdrw::CookieConfig::homogeneous(1.0, m), e1, e2, 30000, rng::mix(kSeed, m));
        const double bound = std::exp(m + 1.0);
        ok = ok && rep.ci95.hi <= bound + 3.0 * rep.se;
        parts += (parts.empty() ? "" : ", ") + std::string("M=") + std::to_string(m) + ": " +
                 fmt(rep.ci95.hi) + " vs " + fmt(bound);
    }
    detail = "ci upper vs exp(M+1): " + parts;
    return ok;
}

// --------------------------------------------------------------- criterion 8

bool phase_signatures(std::string& detail) {
    // (a) conductance walk on the b=2 tree at depth 100
    const auto b2 = LevelTree::sphere(2.0, 100);
    const auto hot = conductance::estimate_escape_probability(
        b2, conductance::HeavyTailLaw(2.0, 0.5), 100, 50, 200, rng::mix(kSeed, 81), 1'000'000,
        conductance::BudgetPolicy::resolve);
    const auto cold = conductance::estimate_escape_probability(
        b2, conductance::HeavyTailLaw(0.25, 0.5), 100, 50, 200, rng::mix(kSeed, 82), 1'000'000,
        conductance::BudgetPolicy::resolve);
    const double se_a = std::max((hot.ci95.hi - hot.ci95.lo) / 3.92, 1e-5);
    const double se_b = std::max((cold.ci95.hi - cold.ci95.lo) / 3.92, 1e-5);
    const double z_a = (hot.estimate - cold.estimate) / std::hypot(se_a, se_b);
    const bool a_ok = z_a > 5.0;

    // (b) digging walk on the b=3 tree: M=1 transient vs M=4 recurrent
    const auto b3 = LevelTree::sphere(3.0, 100);
    const auto m1 = mdrw::estimate_mdrw_escape(b3, mdrw::CookieConfig::homogeneous(1.0, 1), 100,
                                               10000, rng::mix(kSeed, 83));
    const auto m4 = mdrw::estimate_mdrw_escape(b3, mdrw::CookieConfig::homogeneous(1.0, 4), 100,
                                               10000, rng::mix(kSeed, 84));
    const double se_1 = std::max((m1.ci95.hi - m1.ci95.lo) / 3.92, 1e-5);
    const double se_4 = std::max((m4.ci95.hi - m4.ci95.lo) / 3.92, 1e-5);
    const double z_b = (m1.estimate - m4.estimate) / std::hypot(se_1, se_4);
    const bool b_ok = z_b > 5.0;

    // (c) lambda < 1 is transient for any cookie budget
    const auto sub = mdrw::estimate_mdrw_escape(b2, mdrw::CookieConfig::homogeneous(0.8, 2), 100,
                                                10000, rng::mix(kSeed, 85));
    const bool c_ok = sub.ci95.lo > 0.0;

    detail = "(a) z = " + fmt(z_a) + ", (b) z = " + fmt(z_b) + ", (c) ci_lo = " + fmt(sub.ci95.lo);
    return a_ok && b_ok && c_ok;
}

// --------------------------------------------------------------- criterion 9

bool sandwich(std::string& detail) {
    const auto t = RootedTree::spherically_symmetric(2.0, 100);
    const auto psi = percolation::PsiFunction::delta(0.5, 1);
    const auto bounds = flows::survival_bounds(t, psi, 100, 1.0);
    const auto mc = percolation::survival_estimate(t, psi, 100, 1500, rng::mix(kSeed, 9));
    const bool ok = bounds.lower <= bounds.upper && mc.ci95.hi >= bounds.lower &&
                    mc.ci95.lo <= bounds.upper;
    detail = "lower = " + fmt(bounds.lower) + ", mc = " + fmt(mc.estimate) +
             ", upper = " + fmt(bounds.upper);
    return ok;
}

// -------------------------------------------------------------- criterion 10

bool rt_grid(std::string& detail) {
    using percolation::PsiFunction;
    using percolation::RtClass;
    const std::vector<int> depths{250, 500, 1000, 2000};
    int checked = 0, agreed = 0;
    std::string mismatches;

    // lambda = 1: the branching-ruin number against M+1
    for (int m = 0; m <= 3; ++m) {
        for (double b : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            if (std::abs(b - (m + 1.0)) < 1e-12) continue; // on-boundary
            const auto lt = LevelTree::sphere(b, 2000);
            const auto r = percolation::rt_value(lt, PsiFunction::mdrw_homogeneous(1.0, m), depths);
            const RtClass expect = b > m + 1.0 ? RtClass::gt1 : RtClass::lt1;
            ++checked;
            if (r.verdict == expect) ++agreed;
            else mismatches += " (l=1,M=" + std::to_string(m) + ",b=" + fmt(b) + ")";
        }
    }
    // lambda > 1: the branching number against lambda^(M+1)
    for (double lambda : {1.5, 2.0}) {
        for (int m = 0; m <= 1; ++m) {
            for (int d : {2, 3, 4}) {
                const double threshold = std::pow(lambda, m + 1.0);
                if (std::abs(d - threshold) < 1e-9) continue; // on-boundary
                const auto lt = LevelTree::regular(d, 2000);
                const auto r =
                    percolation::rt_value(lt, PsiFunction::mdrw_homogeneous(lambda, m), depths);
                const RtClass expect = d > threshold ? RtClass::gt1 : RtClass::lt1;
                ++checked;
                if (r.verdict == expect) ++agreed;
                else
                    mismatches += " (l=" + fmt(lambda) + ",M=" + std::to_string(m) +
                                  ",d=" + std::to_string(d) + ")";
            }
        }
    }
    detail = std::to_string(agreed) + "/" + std::to_string(checked) + " off-boundary agreements" +
             (mismatches.empty() ? "" : ";" + mismatches);
    return agreed == checked;
}

// -------------------------------------------------------------- criterion 11

bool reproducibility(std::string& detail) {
    struct Cmd {
        std::string name;
        std::string cfg;
    };
    const std::vector<Cmd> cmds{
        {"tree-info", "tree.kind = sphere\ntree.b = 2\ntree.depth = 400\nseed = 5\n"},
        {"phase-rwrc",
         "tree.kind = sphere\ntree.b = 2\ntree.depth = 30\nsweep.m = 0.25, 1.0, 2.0\n"
         "sweep.depth = 15, 30\ntrials.env = 5\ntrials.per_env = 30\ntrials.resolve = exact\n"
         "trials.budget = 100000\nseed = 5\n"},
        {"phase-mdrw",
         "tree.kind = sphere\ntree.b = 3\ntree.depth = 40\nsweep.M = 1, 4\n"
         "sweep.depth = 20, 40\ntrials.count = 400\nseed = 5\n"},
        {"percolate",
         "tree.kind = sphere\ntree.b = 2\ntree.depth = 50\npercolate.kind = delta\n"
         "sweep.delta = 0.5, 3.0\nsweep.depth = 50\ntrials.count = 100\nseed = 5\n"},
        {"flows",
         "tree.kind = regular\ntree.d = 4\ntree.depth = 8\nflows.psi = constant\nflows.c = 0.5\n"
         "sweep.gamma = 1.5\nsweep.depth = 4, 8\nseed = 5\n"},
        {"verify",
         "seed = 5\nverify.trials = 1500\nverify.banks = 40\nverify.qi_banks = 1200\n"
         "verify.cases = 3\nverify.depth = 8\n"},
    };
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        const std::string path = "/tmp/arborwalk_accept_" + std::to_string(i) + ".cfg";
        std::ofstream f(path, std::ios::binary);
        f << cmds[i].cfg;
        f.close();
        std::ostringstream out1, out2, err;
        const int c1 = cli::run({cmds[i].name, "--config", path}, out1, err);
        const int c2 = cli::run({cmds[i].name, "--config", path}, out2, err);
        if (c1 != c2 || out1.str() != out2.str() || out1.str().empty()) {
            detail = cmds[i].name + " re-run differed";
            return false;
        }
    }
    detail = "6 commands byte-identical across re-runs";
    return true;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<bool(std::string&)> fn;
    };
    const std::vector<Criterion> criteria{
        {1, "gamblers-ruin oracle", gamblers_ruin_oracle},
        {2, "closed-form hitting probabilities", hitting_identity},
        {3, "cutset DP vs brute force", cutset_dp_vs_bruteforce},
        {4, "branching estimators", branching_estimators},
        {5, "effective conductance", effective_conductance},
        {6, "Rubin coupling", rubin_coupling},
        {7, "quasi-independence", quasi_independence},
        {8, "phase-transition signatures", phase_signatures},
        {9, "survival sandwich", sandwich},
        {10, "RT classification grid", rt_grid},
        {11, "byte-identical reproducibility", reproducibility},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("CRITERION %2d %-36s %s (%s) [%.1fs]\n", c.id, c.name,
                    pass ? "PASS" : "FAIL", detail.c_str(), secs);
        std::fflush(stdout);
        failures += pass ? 0 : 1;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
