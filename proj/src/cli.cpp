#include "arborwalk/cli.hpp"

#include "arborwalk/config.hpp"
#include "arborwalk/conductance.hpp"
#include "arborwalk/cutset.hpp"
#include "arborwalk/errors.hpp"
#include "arborwalk/flows.hpp"
#include "arborwalk/mdrw.hpp"
#include "arborwalk/percolation.hpp"
#include "arborwalk/rubin.hpp"
#include "arborwalk/stats.hpp"
#include "arborwalk/tree.hpp"
#include "arborwalk/util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <variant>

namespace arborwalk::cli {

using config::Config;

namespace {

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}


struct TreeSpec {
    std::string kind;
    double b = 2.0;
    int d = 2;
    int depth = 100;
    std::string file;

    static TreeSpec from(const Config& cfg) {
        TreeSpec ts;
        ts.kind = cfg.get("tree.kind");
        if (ts.kind == "file") {
            ts.file = cfg.get("tree.file");
            return ts;
        }
        ts.depth = static_cast<int>(cfg.get_int("tree.depth"));
        if (ts.kind == "sphere") ts.b = cfg.get_double("tree.b");
        else if (ts.kind == "regular") ts.d = static_cast<int>(cfg.get_int("tree.d"));
        else if (ts.kind != "path") throw std::invalid_argument("tree.kind must be path, sphere, regular or file");
        return ts;
    }

    double b_or_d() const {
        if (kind == "sphere") return b;
        if (kind == "regular") return d;
        return 0.0;
    }
};

using AnyTree = std::variant<tree::LevelTree, tree::RootedTree>;

// Walks run on lazy level trees for generated kinds; regular trees small
// enough to materialize become dense so the exact escape resolver works.
AnyTree walk_tree(const TreeSpec& ts) {
    if (ts.kind == "file") return tree::load_tree_file(ts.file);
    if (ts.kind == "path") return tree::LevelTree::path(ts.depth);
    if (ts.kind == "sphere") return tree::LevelTree::sphere(ts.b, ts.depth);
    double count = 0.0, level = 1.0;
    for (int n = 0; n <= ts.depth && count < 5e6; ++n) {
        count += level;
        level *= ts.d;
    }
    if (count <= 4e6) return tree::RootedTree::regular(ts.d, ts.depth);
    return tree::LevelTree::regular(ts.d, ts.depth);
}

tree::RootedTree materialized_tree(const TreeSpec& ts) {
    if (ts.kind == "file") return tree::load_tree_file(ts.file);
    if (ts.kind == "path") return tree::RootedTree::path(ts.depth);
    if (ts.kind == "sphere") return tree::RootedTree::spherically_symmetric(ts.b, ts.depth);
    return tree::RootedTree::regular(ts.d, ts.depth);
}

int tree_max_depth(const AnyTree& tv) {
    return std::visit([](const auto& t) { return t.max_depth(); }, tv);
}

std::vector<int> depth_grid(const Config& cfg, int fallback_max) {
    std::vector<double> raw = cfg.get_list_or(
        "sweep.depth", {fallback_max / 4.0, fallback_max / 2.0, static_cast<double>(fallback_max)});
    std::vector<int> depths;
    for (double x : raw) depths.push_back(std::max(1, static_cast<int>(std::llround(x))));
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    return depths;
}

std::ostream& resolve_output(const Config& cfg, const std::string& cli_out, std::ostream& fallback,
                             std::optional<std::ofstream>& file_holder) {
    const std::string path = !cli_out.empty() ? cli_out : cfg.get_or("out", "");
    if (path.empty()) return fallback;
    file_holder.emplace(path, std::ios::binary);
    if (!*file_holder) throw std::runtime_error("cannot open output file: " + path);
    return *file_holder;
}

conductance::BudgetPolicy budget_policy(const Config& cfg) {
    const std::string v = cfg.get_or("trials.resolve", "error");
    if (v == "exact") return conductance::BudgetPolicy::resolve;
    if (v == "error") return conductance::BudgetPolicy::raise;
    throw std::invalid_argument("trials.resolve must be `error` or `exact`");
}

VerdictRule verdict_rule(const Config& cfg) {
    VerdictRule r;
    r.escape_threshold = cfg.get_double_or("verdict.escape_threshold", 0.02);
    r.slope_threshold = cfg.get_double_or("verdict.slope_threshold", -0.001);
    return r;
}

std::string estimate_text(const cutset::BranchingEstimate& e) {
    using Status = cutset::BranchingEstimate::Status;
    if (e.is(Status::divergent)) return "DIVERGENT";
    if (e.is(Status::inconclusive)) return "INCONCLUSIVE";
    return "[" + fmt(e.lo) + ", " + fmt(e.hi) + "]";
}

// ---------------------------------------------------------------- tree-info

int cmd_tree_info(const Config& cfg, std::ostream& out) {
    const auto ts = TreeSpec::from(cfg);
    cutset::EstimatorOptions opt;
    opt.tolerance = cfg.get_double_or("est.tolerance", 0.05);

    out << "tree-info kind=" << ts.kind;
    if (ts.kind == "sphere") out << " b=" << fmt(ts.b);
    if (ts.kind == "regular") out << " d=" << ts.d;
    if (ts.kind == "file") out << " file=" << ts.file;

    cutset::BranchingEstimate br, brr;
    std::vector<std::uint64_t> sizes;
    if (ts.kind == "file") {
        const auto t = tree::load_tree_file(ts.file);
        out << " depth=" << t.max_depth() << " vertices=" << t.vertex_count() << "\n";
        sizes = t.level_sizes();
        const auto depths = cutset::default_depths(t.max_depth());
        br = cutset::estimate_branching(t, depths, opt);
        brr = cutset::estimate_branching_ruin(t, depths, opt);
    } else {
        out << " depth=" << ts.depth << "\n";
        AnyTree tv = ts.kind == "path" ? AnyTree(tree::LevelTree::path(ts.depth))
                     : ts.kind == "sphere" ? AnyTree(tree::LevelTree::sphere(ts.b, ts.depth))
                                           : AnyTree(tree::LevelTree::regular(ts.d, ts.depth));
        const auto depths = cutset::default_depths(ts.depth);
        if (const auto* lt = std::get_if<tree::LevelTree>(&tv)) {
            if (lt->kind() != tree::LevelKind::regular) sizes = lt->level_sizes();
            br = cutset::estimate_branching(*lt, depths, opt);
            brr = cutset::estimate_branching_ruin(*lt, depths, opt);
        }
    }

    out << "levels:";
    if (sizes.empty()) {
        out << " (geometric)";
    } else {
        for (std::size_t n = 0; n < sizes.size() && n <= 12; ++n) out << ' ' << sizes[n];
        if (sizes.size() > 13) out << " ...";
    }
    out << "\n";
    out << "br = " << estimate_text(br) << "\n";
    out << "br_r = " << estimate_text(brr) << "\n";
    out << "config_hash=" << cfg.hash() << " seed=" << cfg.seed() << "\n";
    return 0;
}

// ---------------------------------------------------------------- phase-rwrc

int cmd_phase_rwrc(const Config& cfg, std::ostream& out) {
    const auto ts = TreeSpec::from(cfg);
    auto ms = cfg.get_list("sweep.m");
    std::sort(ms.begin(), ms.end());
    if (ms.size() < 3) throw std::invalid_argument("phase-rwrc wants a sweep.m grid of >= 3 points");
    const double p1 = cfg.get_double_or("law.p1", 0.5);
    const int k_env = static_cast<int>(cfg.get_int_or("trials.env", 40));
    const int k_tr = static_cast<int>(cfg.get_int_or("trials.per_env", 250));
    const auto budget = static_cast<std::uint64_t>(cfg.get_int_or("trials.budget", 100'000'000));
    const auto policy = budget_policy(cfg);
    const auto rule = verdict_rule(cfg);
    const std::uint64_t seed = cfg.seed();

    const AnyTree tv = walk_tree(ts);
    const auto depths = depth_grid(cfg, tree_max_depth(tv));

    struct Point {
        conductance::EscapeEstimate est;
    };
    std::vector<Point> grid(ms.size() * depths.size());
    util::parallel_for(grid.size(), [&](std::size_t i) {
        const std::size_t mi = i / depths.size(), di = i % depths.size();
        const conductance::HeavyTailLaw law(ms[mi], p1);
        const std::uint64_t point_seed = rng::mix(seed, mi); // depths share environments
        grid[i].est = std::visit(
            [&](const auto& t) {
                return conductance::estimate_escape_probability(t, law, depths[di], k_env, k_tr,
                                                                point_seed, budget, policy);
            },
            tv);
    });

    out << "tree_kind,b_or_d,depth,m,p1,K_env,K_tr,estimate,ci_lo,ci_hi,seed,verdict,config_hash\n";
    const std::string hash = cfg.hash();
    for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        std::vector<double> est, lo;
        for (std::size_t di = 0; di < depths.size(); ++di) {
            est.push_back(grid[mi * depths.size() + di].est.estimate);
            lo.push_back(grid[mi * depths.size() + di].est.ci95.lo);
        }
        const Verdict v = classify_escape_profile(depths, est, lo, rule);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto& e = grid[mi * depths.size() + di].est;
            out << ts.kind << ',' << fmt(ts.b_or_d()) << ',' << depths[di] << ',' << fmt(ms[mi])
                << ',' << fmt(p1) << ',' << k_env << ',' << k_tr << ',' << fmt(e.estimate) << ','
                << fmt(e.ci95.lo) << ',' << fmt(e.ci95.hi) << ',' << seed << ','
                << verdict_name(v) << ',' << hash << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- phase-mdrw

int cmd_phase_mdrw(const Config& cfg, std::ostream& out) {
    const auto ts = TreeSpec::from(cfg);
    const bool sweep_m = cfg.has("sweep.M");
    const bool sweep_l = cfg.has("sweep.lambda");
    if (sweep_m == sweep_l)
        throw std::invalid_argument("phase-mdrw sweeps exactly one of sweep.M or sweep.lambda");

    std::vector<double> params = sweep_m ? cfg.get_list("sweep.M") : cfg.get_list("sweep.lambda");
    std::sort(params.begin(), params.end());
    const double fixed_lambda = cfg.get_double_or("walk.lambda", 1.0);
    const int fixed_m = static_cast<int>(cfg.get_int_or("walk.M", 0));
    const auto trials = static_cast<std::size_t>(cfg.get_int_or("trials.count", 4000));
    const auto budget = static_cast<std::uint64_t>(cfg.get_int_or("trials.budget", 100'000'000));
    const auto rule = verdict_rule(cfg);
    const std::uint64_t seed = cfg.seed();

    const AnyTree tv = walk_tree(ts);
    const auto depths = depth_grid(cfg, tree_max_depth(tv));

    std::vector<mdrw::EscapeEstimate> grid(params.size() * depths.size());
    util::parallel_for(grid.size(), [&](std::size_t i) {
        const std::size_t pi = i / depths.size(), di = i % depths.size();
        const double lambda = sweep_m ? fixed_lambda : params[pi];
        const int m = sweep_m ? static_cast<int>(std::llround(params[pi])) : fixed_m;
        const auto wcfg = mdrw::CookieConfig::homogeneous(lambda, m);
        grid[i] = std::visit(
            [&](const auto& t) {
                return mdrw::estimate_mdrw_escape(t, wcfg, depths[di], trials, rng::mix(seed, pi),
                                                  budget);
            },
            tv);
    });

    out << "tree_kind,b_or_d,depth,lambda,M,trials,estimate,ci_lo,ci_hi,seed,verdict,config_hash\n";
    const std::string hash = cfg.hash();
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const double lambda = sweep_m ? fixed_lambda : params[pi];
        const int m = sweep_m ? static_cast<int>(std::llround(params[pi])) : fixed_m;
        std::vector<double> est, lo;
        for (std::size_t di = 0; di < depths.size(); ++di) {
            est.push_back(grid[pi * depths.size() + di].estimate);
            lo.push_back(grid[pi * depths.size() + di].ci95.lo);
        }
        const Verdict v = classify_escape_profile(depths, est, lo, rule, true);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto& e = grid[pi * depths.size() + di];
            out << ts.kind << ',' << fmt(ts.b_or_d()) << ',' << depths[di] << ',' << fmt(lambda)
                << ',' << m << ',' << e.trials << ',' << fmt(e.estimate) << ',' << fmt(e.ci95.lo)
                << ',' << fmt(e.ci95.hi) << ',' << seed << ',' << verdict_name(v) << ',' << hash
                << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- percolate

int cmd_percolate(const Config& cfg, std::ostream& out) {
    const auto ts = TreeSpec::from(cfg);
    const std::string kind = cfg.get("percolate.kind");
    const auto trials = static_cast<std::size_t>(cfg.get_int_or("trials.count", 1000));
    const std::uint64_t seed = cfg.seed();
    const auto t = materialized_tree(ts);
    const auto depths = depth_grid(cfg, t.max_depth());
    const std::string hash = cfg.hash();

    out << "psi_kind,param,delta_or_eps,n0,depth,K,survival,ci_lo,ci_hi,seed,config_hash\n";
    std::vector<std::string> footers;

    auto emit = [&](const std::string& param, const std::string& dore, int n0, int depth,
                    const stats::Interval& ci, double estimate, std::size_t k) {
        out << kind << ',' << param << ',' << dore << ',' << n0 << ',' << depth << ',' << k << ','
            << fmt(estimate) << ',' << fmt(ci.lo) << ',' << fmt(ci.hi) << ',' << seed << ',' << hash
            << "\n";
    };

    if (kind == "delta") {
        const auto deltas = cfg.get_list("sweep.delta");
        const int n0 = static_cast<int>(cfg.get_int_or("percolate.n0", 1));
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto rows = percolation::delta_percolation_suite(t, deltas, n0, depths[di], trials,
                                                                   rng::mix(seed, di));
            for (const auto& row : rows) {
                emit("", fmt(row.delta), row.n0, depths[di], row.survival.ci95,
                     row.survival.estimate, trials);
                if (row.cluster_brr_valid)
                    footers.push_back("# cluster_brr delta=" + fmt(row.delta) +
                                      " depth=" + std::to_string(depths[di]) + " lo=" +
                                      fmt(row.cluster_brr.lo) + " hi=" + fmt(row.cluster_brr.hi));
            }
        }
    } else if (kind == "constant") {
        const double c = cfg.get_double("percolate.c");
        const auto psi = percolation::PsiFunction::constant(c);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto est = percolation::survival_estimate(t, psi, depths[di], trials,
                                                            rng::mix(seed, di));
            emit(fmt(c), "", 0, depths[di], est.ci95, est.estimate, trials);
        }
    } else if (kind == "mdrw") {
        const double lambda = cfg.get_double_or("walk.lambda", 1.0);
        const int m = static_cast<int>(cfg.get_int_or("walk.M", 0));
        const auto psi = percolation::PsiFunction::mdrw_homogeneous(lambda, m);
        for (std::size_t di = 0; di < depths.size(); ++di) {
            const auto est = percolation::survival_estimate(t, psi, depths[di], trials,
                                                            rng::mix(seed, di));
            emit(fmt(lambda) + "/" + std::to_string(m), "", 0, depths[di], est.ci95, est.estimate,
                 trials);
        }
    } else if (kind == "rc") {
        const conductance::HeavyTailLaw law(cfg.get_double("law.m"), cfg.get_double_or("law.p1", 0.5));
        for (std::size_t di = 0; di < depths.size(); ++di) {
            std::size_t survived = 0;
            for (std::size_t k = 0; k < trials; ++k) {
                conductance::ConductanceField field(
                    law, rng::key_of(seed, rng::Domain::conductance, {di, k}));
                const auto psi = percolation::PsiFunction::rc(field);
                auto s = rng::stream(seed, rng::Domain::percolation, {di, k});
                const auto cl = percolation::independent_percolation(t, psi, s, depths[di]);
                survived += cl.survival_depth >= depths[di] ? 1 : 0;
            }
            emit(fmt(law.m) + "/" + fmt(law.p1), "", 0, depths[di],
                 stats::wilson_ci(survived, trials),
                 static_cast<double>(survived) / static_cast<double>(trials), trials);
        }
    } else if (kind == "barrier") {
        const conductance::HeavyTailLaw law(cfg.get_double("law.m"), cfg.get_double_or("law.p1", 0.5));
        const double b_declared = cfg.get_double("tree.b");
        const auto epss = cfg.get_list("sweep.eps");
        for (const double eps : epss) {
            percolation::validate_barrier_epsilon(law.m, b_declared, eps);
            for (std::size_t di = 0; di < depths.size(); ++di) {
                std::size_t survived = 0;
                for (std::size_t k = 0; k < trials; ++k) {
                    conductance::ConductanceField field(
                        law, rng::key_of(seed, rng::Domain::conductance, {di, k}));
                    const auto cl = percolation::barrier_percolation(t, field, b_declared, eps,
                                                                     depths[di]);
                    survived += cl.survival_depth >= depths[di] ? 1 : 0;
                }
                emit(fmt(law.m) + "/" + fmt(law.p1), fmt(eps), 0, depths[di],
                     stats::wilson_ci(survived, trials),
                     static_cast<double>(survived) / static_cast<double>(trials), trials);
            }
        }
    } else {
        throw std::invalid_argument("percolate.kind must be delta, constant, mdrw, rc or barrier");
    }
    for (const auto& f : footers) out << f << "\n";
    return 0;
}

// ---------------------------------------------------------------- flows

percolation::PsiFunction psi_from_config(const Config& cfg, const std::string& prefix) {
    const std::string kind = cfg.get(prefix + ".psi");
    if (kind == "constant") return percolation::PsiFunction::constant(cfg.get_double(prefix + ".c"));
    if (kind == "delta")
        return percolation::PsiFunction::delta(cfg.get_double(prefix + ".delta"),
                                               static_cast<int>(cfg.get_int_or(prefix + ".n0", 1)));
    if (kind == "mdrw")
        return percolation::PsiFunction::mdrw_homogeneous(
            cfg.get_double_or("walk.lambda", 1.0), static_cast<int>(cfg.get_int_or("walk.M", 0)));
    throw std::invalid_argument(prefix + ".psi must be constant, delta or mdrw");
}

int cmd_flows(const Config& cfg, std::ostream& out) {
    const auto ts = TreeSpec::from(cfg);
    const auto t = materialized_tree(ts);
    const auto psi = psi_from_config(cfg, "flows");
    const auto gammas = cfg.get_list_or("sweep.gamma", {1.5});
    const auto depths = depth_grid(cfg, t.max_depth());
    const double c_q = cfg.get_double_or("flows.c_q", 1.0);
    const std::uint64_t seed = cfg.seed();
    const std::string hash = cfg.hash();

    std::string param;
    switch (psi.kind()) {
        case percolation::PsiFunction::Kind::constant: param = fmt(psi.param_c()); break;
        case percolation::PsiFunction::Kind::delta:
            param = fmt(psi.param_delta()) + "/" + std::to_string(psi.param_n0());
            break;
        default: param = fmt(psi.param_lambda()) + "/" + std::to_string(psi.param_m()); break;
    }

    out << "psi_kind,param,gamma,depth,c_eff,energy,path_sum_bound,lower,upper,seed,config_hash\n";
    for (const int depth : depths) {
        const auto bounds = flows::survival_bounds(t, psi, depth, c_q);
        for (const double gamma : gammas) {
            double energy = std::nan(""), path_bound = std::nan("");
            try {
                const auto flow = flows::build_unit_flow(t, psi, gamma, depth);
                energy = flow.energy;
                path_bound = flow.path_sum_bound;
            } catch (const ZeroFlow&) {
                // capacities collapsed; report the bounds anyway
            }
            out << psi.label() << ',' << param << ',' << fmt(gamma) << ',' << depth << ','
                << fmt(bounds.c_eff) << ',' << fmt(energy) << ',' << fmt(path_bound) << ','
                << fmt(bounds.lower) << ',' << fmt(bounds.upper) << ',' << seed << ',' << hash
                << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------- verify

struct CheckOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

int cmd_verify(const Config& cfg, std::ostream& out) {
    const std::uint64_t seed = cfg.seed();
    const auto trials = static_cast<std::size_t>(cfg.get_int_or("verify.trials", 20000));
    const auto banks = static_cast<std::size_t>(cfg.get_int_or("verify.banks", 200));
    const auto qi_banks = static_cast<std::size_t>(cfg.get_int_or("verify.qi_banks", 20000));
    const int cases = static_cast<int>(cfg.get_int_or("verify.cases", 20));
    std::vector<CheckOutcome> checks;

    { // closed forms of the per-edge survival factor
        const bool ok = std::abs(mdrw::psi_m_lambda(2, 1, 1.0) - 0.25) < 1e-12 &&
                        std::abs(mdrw::psi_m_lambda(2, 0, 2.0) - 1.0 / 3.0) < 1e-12 &&
                        std::abs(mdrw::big_psi_homogeneous(4, 1.0, 1) - 0.0625) < 1e-12 &&
                        std::abs(mdrw::big_psi_homogeneous(5, 2.0, 0) - 1.0 / 31.0) < 1e-12;
        checks.push_back({"psi-closed-form", ok, "spot values"});
    }

    { // adapted conductances
        const bool ok = std::abs(flows::adapted_conductance_value(0.9, 0.9, 1) - 1.0) < 1e-12 &&
                        std::abs(flows::adapted_conductance_value(0.5, 0.5, 2) - 1.0) < 1e-12 &&
                        std::abs(flows::adapted_conductance_value(0.25, 0.25, 2) - 1.0 / 3.0) < 1e-12;
        checks.push_back({"adapted-conductance", ok, "spot values"});
    }

    { // hitting identity battery over random (n, lambda, M)
        auto s = rng::stream(seed, rng::Domain::generic, {1});
        double worst = 0.0;
        bool ok = true;
        for (int c = 0; c < cases; ++c) {
            const int n = 2 + static_cast<int>(s.next_u64() % 5);
            const double lambda = 0.5 + 1.5 * s.next_unit();
            const int m = static_cast<int>(s.next_u64() % 4);
            const auto rep = mdrw::verify_hitting_identity(n, lambda, m, trials, rng::mix(seed, c));
            worst = std::max(worst, std::abs(rep.z));
            ok = ok && rep.pass;
        }
        checks.push_back({"hitting-identity", ok,
                          std::to_string(cases) + " cases, worst |z|=" + fmt(worst)});
    }

    { // escape probability against cluster survival
        const int depth = static_cast<int>(cfg.get_int_or("verify.depth", 12));
        const auto t = tree::RootedTree::spherically_symmetric(3.0, depth);
        const auto wcfg = mdrw::CookieConfig::homogeneous(1.0, 1);
        const auto esc = mdrw::estimate_mdrw_escape(t, wcfg, depth, trials, rng::mix(seed, 11));
        std::size_t reached = 0;
        for (std::size_t i = 0; i < banks; ++i) {
            rubin::ClockBank bank(t, wcfg, rng::key_of(seed, rng::Domain::clock, {0xE, i}));
            const auto open = rubin::explore_ccp(bank, depth);
            bool deep = false;
            for (const auto v : open) deep = deep || t.depth_of(v) >= depth;
            reached += deep ? 1 : 0;
        }
        const double ccp = static_cast<double>(reached) / static_cast<double>(banks);
        const double se = std::sqrt(stats::proportion_se(reached, banks) *
                                        stats::proportion_se(reached, banks) +
                                    stats::proportion_se(
                                        static_cast<std::size_t>(esc.estimate * trials), trials) *
                                        stats::proportion_se(
                                            static_cast<std::size_t>(esc.estimate * trials), trials));
        const bool ok = std::abs(ccp - esc.estimate) < 3.0 * se + 0.05;
        checks.push_back({"return-vs-cluster", ok,
                          "escape=" + fmt(esc.estimate) + " ccp=" + fmt(ccp)});
    }

    { // pair correlations stay under exp(M+1)
        const auto t = tree::RootedTree::regular(2, 2);
        const std::uint64_t v1 = t.child_at(0, 0);
        const auto rep = rubin::estimate_quasi_independence(
            t, mdrw::CookieConfig::homogeneous(1.0, 1), t.child_at(v1, 0), t.child_at(v1, 1),
            qi_banks, rng::mix(seed, 13));
        checks.push_back({"quasi-independence", rep.pass,
                          "ratio=" + fmt(rep.ratio) + " bound=" + fmt(rep.bound)});
    }

    { // survival sandwich
        const auto t = tree::RootedTree::spherically_symmetric(2.0, 60);
        const auto psi = percolation::PsiFunction::delta(0.5, 1);
        const auto bounds = flows::survival_bounds(t, psi, 60, 1.0);
        const auto mc = percolation::survival_estimate(t, psi, 60, 400, rng::mix(seed, 17));
        const bool ok = mc.ci95.hi >= bounds.lower && mc.ci95.lo <= bounds.upper &&
                        bounds.lower <= bounds.upper;
        checks.push_back({"sandwich", ok,
                          "lower=" + fmt(bounds.lower) + " mc=" + fmt(mc.estimate) +
                              " upper=" + fmt(bounds.upper)});
    }

    bool all = true;
    for (const auto& c : checks) {
        all = all && c.pass;
        out << "CHECK " << c.name << ": " << (c.pass ? "PASS" : "FAIL") << " (" << c.detail
            << ")\n";
    }
    out << (all ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT") << " config_hash=" << cfg.hash()
        << "\n";
    return all ? 0 : 2;
}

} // namespace

Verdict classify_escape_profile(std::span<const int> depths, std::span<const double> estimates,
                                std::span<const double> ci_lo, const VerdictRule& rule,
                                bool cap_known) {
    if (depths.size() != estimates.size() || depths.size() < 2)
        throw std::invalid_argument("verdicts need >= 2 depths");
    std::vector<double> xs(depths.size());
    for (std::size_t i = 0; i < depths.size(); ++i) xs[i] = static_cast<double>(depths[i]);
    const double slope = stats::lsq_slope(xs, estimates);
    const double deepest = estimates.back();
    if (ci_lo.back() > rule.escape_threshold && slope > rule.slope_threshold)
        return cap_known ? Verdict::transient_like : Verdict::undecided;
    if (deepest < rule.escape_threshold && slope <= 0.0) return Verdict::recurrent_like;
    return Verdict::undecided;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::transient_like: return "TRANSIENT-LIKE";
        case Verdict::recurrent_like: return "RECURRENT-LIKE";
        case Verdict::undecided: return "UNDECIDED";
    }
    return "UNDECIDED";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"simulation and analysis of random processes on rooted trees"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    const std::vector<std::pair<std::string, std::string>> subs{
        {"tree-info", "level sizes and branching estimates"},
        {"phase-rwrc", "escape sweep for the conductance walk"},
        {"phase-mdrw", "escape sweep for the digging walk"},
        {"percolate", "survival sweeps for psi-driven percolations"},
        {"flows", "adapted conductance, flow energy and survival bounds"},
        {"verify", "statistical check battery"},
    };
    for (const auto& [name, desc] : subs) {
        auto* s = app.add_subcommand(name, desc);
        s->add_option("--config", config_path, "experiment config file")->required();
        s->add_option("--out", out_path, "output path (defaults to the config `out` or stdout)");
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream msg;
        const int code = app.exit(e, msg, msg);
        err << msg.str();
        return code == 0 ? 0 : 1;
    }

    try {
        const Config cfg = Config::parse_file(config_path);
        std::optional<std::ofstream> file;
        std::ostream& sink = resolve_output(cfg, out_path, out, file);
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "tree-info") return cmd_tree_info(cfg, sink);
        if (sub == "phase-rwrc") return cmd_phase_rwrc(cfg, sink);
        if (sub == "phase-mdrw") return cmd_phase_mdrw(cfg, sink);
        if (sub == "percolate") return cmd_percolate(cfg, sink);
        if (sub == "flows") return cmd_flows(cfg, sink);
        if (sub == "verify") return cmd_verify(cfg, sink);
        err << "unknown subcommand: " << sub << "\n";
        return 1;
    } catch (const BudgetExceeded& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace arborwalk::cli
