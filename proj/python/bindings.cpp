#include "arborwalk/cli.hpp"
#include "arborwalk/conductance.hpp"
#include "arborwalk/cutset.hpp"
#include "arborwalk/flows.hpp"
#include "arborwalk/mdrw.hpp"
#include "arborwalk/percolation.hpp"
#include "arborwalk/rng.hpp"
#include "arborwalk/rubin.hpp"
#include "arborwalk/tree.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <variant>

namespace py = pybind11;
using namespace arborwalk;
using tree::LevelTree;
using tree::RootedTree;

namespace {

using AnyTree = std::variant<LevelTree, RootedTree>;

AnyTree make_tree(const std::string& kind, double b_or_d, int depth) {
    if (kind == "path") return LevelTree::path(depth);
    if (kind == "sphere") return LevelTree::sphere(b_or_d, depth);
    if (kind == "regular") {
        const int d = static_cast<int>(b_or_d);
        double count = 1.0, level = 1.0;
        for (int n = 1; n <= depth && count < 5e6; ++n) {
            level *= d;
            count += level;
        }
        if (count <= 4e6) return RootedTree::regular(d, depth);
        return LevelTree::regular(d, depth);
    }
    throw std::invalid_argument("kind must be path, sphere or regular");
}

py::dict estimate_dict(const cutset::BranchingEstimate& e) {
    using Status = cutset::BranchingEstimate::Status;
    py::dict d;
    d["status"] = e.is(Status::ok) ? "ok" : e.is(Status::divergent) ? "divergent" : "inconclusive";
    d["lo"] = e.lo;
    d["hi"] = e.hi;
    return d;
}

percolation::PsiFunction make_psi(const std::string& kind, double c, double delta, int n0,
                                  double lam, int m) {
    if (kind == "constant") return percolation::PsiFunction::constant(c);
    if (kind == "delta") return percolation::PsiFunction::delta(delta, n0);
    if (kind == "mdrw") return percolation::PsiFunction::mdrw_homogeneous(lam, m);
    throw std::invalid_argument("psi kind must be constant, delta or mdrw");
}

std::vector<int> depth_grid_for(int depth) {
    return cutset::default_depths(depth);
}

} // namespace

PYBIND11_MODULE(_arborwalk, mod) {
    mod.doc() = "random walks, digging walks and percolation on rooted trees";

    py::class_<RootedTree>(mod, "RootedTree")
        .def_static("spherically_symmetric", &RootedTree::spherically_symmetric, py::arg("b"),
                    py::arg("depth"), py::arg("vertex_budget") = RootedTree::kDefaultVertexBudget)
        .def_static("regular", &RootedTree::regular, py::arg("arity"), py::arg("depth"),
                    py::arg("vertex_budget") = RootedTree::kDefaultVertexBudget)
        .def_static("path", &RootedTree::path, py::arg("depth"))
        .def_static("load", [](const std::string& text) { return tree::load_tree_string(text); },
                    py::arg("text"))
        .def_static("load_file", [](const std::string& p) { return tree::load_tree_file(p); },
                    py::arg("path"))
        .def_property_readonly("vertex_count", &RootedTree::vertex_count)
        .def_property_readonly("edge_count", &RootedTree::edge_count)
        .def_property_readonly("max_depth", &RootedTree::max_depth)
        .def("level_sizes", &RootedTree::level_sizes)
        .def("parent_of", [](const RootedTree& t, std::uint64_t v) { return t.parent_of(v); })
        .def("depth_of", [](const RootedTree& t, std::uint64_t v) { return t.depth_of(v); })
        .def("serialize", [](const RootedTree& t) { return tree::serialize(t); });

    mod.def(
        "min_cutset_value",
        [](const RootedTree& t, const std::vector<double>& weights) {
            if (weights.size() != t.vertex_count())
                throw std::invalid_argument("weights must have one entry per vertex (index 0 unused)");
            return cutset::min_cutset_value(t, tree::EdgeWeighting{weights});
        },
        py::arg("tree"), py::arg("edge_weights"),
        "exact minimum over cutsets; edge weights are indexed by child vertex");

    mod.def(
        "estimate_branching",
        [](const std::string& kind, double b_or_d, int depth, double tolerance) {
            cutset::EstimatorOptions opt;
            opt.tolerance = tolerance;
            const auto tv = make_tree(kind, b_or_d, depth);
            const auto depths = depth_grid_for(depth);
            return estimate_dict(std::visit(
                [&](const auto& t) { return cutset::estimate_branching(t, depths, opt); }, tv));
        },
        py::arg("kind"), py::arg("b_or_d"), py::arg("depth") = 2000, py::arg("tolerance") = 0.05);

    mod.def(
        "estimate_branching_ruin",
        [](const std::string& kind, double b_or_d, int depth, double tolerance) {
            cutset::EstimatorOptions opt;
            opt.tolerance = tolerance;
            const auto tv = make_tree(kind, b_or_d, depth);
            const auto depths = depth_grid_for(depth);
            return estimate_dict(std::visit(
                [&](const auto& t) { return cutset::estimate_branching_ruin(t, depths, opt); },
                tv));
        },
        py::arg("kind"), py::arg("b_or_d"), py::arg("depth") = 2000, py::arg("tolerance") = 0.05);

    mod.def(
        "sample_conductances",
        [](double m, double p1, std::uint64_t seed, std::size_t count) {
            conductance::HeavyTailLaw law(m, p1);
            auto s = rng::stream(seed, rng::Domain::conductance, {0});
            std::vector<double> xs(count);
            for (auto& x : xs) x = law.sample(s);
            return xs;
        },
        py::arg("m"), py::arg("p1"), py::arg("seed"), py::arg("count"));

    mod.def(
        "psi_rc_product",
        [](const RootedTree& t, double m, double p1, std::uint64_t field_seed,
           std::uint64_t edge_child) {
            conductance::ConductanceField f(conductance::HeavyTailLaw(m, p1), field_seed);
            return conductance::psi_rc_product(t, f, edge_child);
        },
        py::arg("tree"), py::arg("m"), py::arg("p1"), py::arg("field_seed"), py::arg("edge_child"),
        "product of psi_RC along the root path of the given edge");

    mod.def(
        "rwrc_escape",
        [](const std::string& kind, double b_or_d, int depth, double m, double p1, int n_env,
           int trials_per_env, std::uint64_t seed, std::uint64_t budget, bool resolve) {
            const auto tv = make_tree(kind, b_or_d, depth);
            const conductance::HeavyTailLaw law(m, p1);
            const auto policy =
                resolve ? conductance::BudgetPolicy::resolve : conductance::BudgetPolicy::raise;
            const auto est = std::visit(
                [&](const auto& t) {
                    return conductance::estimate_escape_probability(t, law, depth, n_env,
                                                                    trials_per_env, seed, budget,
                                                                    policy);
                },
                tv);
            py::dict d;
            d["estimate"] = est.estimate;
            d["ci_lo"] = est.ci95.lo;
            d["ci_hi"] = est.ci95.hi;
            d["env_spread"] = est.env_spread;
            d["resolved_trials"] = est.resolved_trials;
            return d;
        },
        py::arg("kind"), py::arg("b_or_d"), py::arg("depth"), py::arg("m"), py::arg("p1") = 0.5,
        py::arg("n_env") = 40, py::arg("trials_per_env") = 250, py::arg("seed") = 1,
        py::arg("budget") = 1'000'000, py::arg("resolve") = true);

    mod.def("psi_m_lambda", &mdrw::psi_m_lambda, py::arg("edge_depth"), py::arg("m"),
            py::arg("lam"));
    mod.def("big_psi", &mdrw::big_psi_homogeneous, py::arg("edge_depth"), py::arg("lam"),
            py::arg("m"), "Psi for the homogeneous cookie configuration");

    mod.def(
        "mdrw_escape",
        [](const std::string& kind, double b_or_d, int depth, double lam, int m,
           std::size_t trials, std::uint64_t seed, std::uint64_t budget) {
            const auto tv = make_tree(kind, b_or_d, depth);
            const auto cfg = mdrw::CookieConfig::homogeneous(lam, m);
            const auto est = std::visit(
                [&](const auto& t) {
                    return mdrw::estimate_mdrw_escape(t, cfg, depth, trials, seed, budget);
                },
                tv);
            py::dict d;
            d["estimate"] = est.estimate;
            d["ci_lo"] = est.ci95.lo;
            d["ci_hi"] = est.ci95.hi;
            return d;
        },
        py::arg("kind"), py::arg("b_or_d"), py::arg("depth"), py::arg("lam"), py::arg("m"),
        py::arg("trials") = 4000, py::arg("seed") = 1, py::arg("budget") = 100'000'000);

    mod.def(
        "verify_hitting_identity",
        [](int path_length, double lam, int m, std::size_t trials, std::uint64_t seed) {
            const auto rep = mdrw::verify_hitting_identity(path_length, lam, m, trials, seed);
            py::dict d;
            d["estimate"] = rep.estimate;
            d["expected"] = rep.expected;
            d["z"] = rep.z;
            d["pass"] = rep.pass;
            return d;
        },
        py::arg("path_length"), py::arg("lam"), py::arg("m"), py::arg("trials") = 100000,
        py::arg("seed") = 1);

    mod.def(
        "ccp_membership_frequency",
        [](const RootedTree& t, std::uint64_t edge_child, double lam, int m, std::size_t banks,
           std::uint64_t seed) {
            const auto cfg = mdrw::CookieConfig::homogeneous(lam, m);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < banks; ++i) {
                rubin::ClockBank bank(t, cfg, rng::mix(seed, i));
                hits += rubin::path_extension_event(bank, edge_child) ? 1 : 0;
            }
            return static_cast<double>(hits) / static_cast<double>(banks);
        },
        py::arg("tree"), py::arg("edge_child"), py::arg("lam"), py::arg("m"),
        py::arg("banks") = 10000, py::arg("seed") = 1,
        "frequency of the path-extension event defining the correlated cluster");

    mod.def(
        "quasi_independence",
        [](const RootedTree& t, std::uint64_t e1, std::uint64_t e2, double lam, int m,
           std::size_t banks, std::uint64_t seed) {
            const auto rep = rubin::estimate_quasi_independence(
                t, mdrw::CookieConfig::homogeneous(lam, m), e1, e2, banks, seed);
            py::dict d;
            d["ratio"] = rep.ratio;
            d["ci_lo"] = rep.ci95.lo;
            d["ci_hi"] = rep.ci95.hi;
            d["bound"] = rep.bound;
            d["pass"] = rep.pass;
            return d;
        },
        py::arg("tree"), py::arg("e1_child"), py::arg("e2_child"), py::arg("lam") = 1.0,
        py::arg("m") = 0, py::arg("banks") = 20000, py::arg("seed") = 1);

    mod.def(
        "survival_estimate",
        [](const RootedTree& t, const std::string& psi_kind, int depth, std::size_t trials,
           std::uint64_t seed, double c, double delta, int n0, double lam, int m) {
            const auto psi = make_psi(psi_kind, c, delta, n0, lam, m);
            const auto est = percolation::survival_estimate(t, psi, depth, trials, seed);
            py::dict d;
            d["estimate"] = est.estimate;
            d["ci_lo"] = est.ci95.lo;
            d["ci_hi"] = est.ci95.hi;
            return d;
        },
        py::arg("tree"), py::arg("psi_kind"), py::arg("depth"), py::arg("trials") = 1000,
        py::arg("seed") = 1, py::arg("c") = 0.5, py::arg("delta") = 0.5, py::arg("n0") = 1,
        py::arg("lam") = 1.0, py::arg("m") = 0);

    mod.def(
        "rt_classify",
        [](const std::string& kind, double b_or_d, int depth, const std::string& psi_kind,
           double c, double delta, int n0, double lam, int m, double tolerance) {
            const auto psi = make_psi(psi_kind, c, delta, n0, lam, m);
            cutset::EstimatorOptions opt;
            opt.tolerance = tolerance;
            const auto tv = make_tree(kind, b_or_d, depth);
            const auto depths = depth_grid_for(depth);
            const auto r = std::visit(
                [&](const auto& t) { return percolation::rt_value(t, psi, depths, opt); }, tv);
            py::dict d;
            const char* names[] = {"RT<1", "RT>1", "UNDECIDED", "INCONCLUSIVE"};
            d["classification"] = names[static_cast<int>(r.verdict)];
            d["lo"] = r.estimate.lo;
            d["hi"] = r.estimate.hi;
            return d;
        },
        py::arg("kind"), py::arg("b_or_d"), py::arg("depth"), py::arg("psi_kind"),
        py::arg("c") = 0.5, py::arg("delta") = 0.5, py::arg("n0") = 1, py::arg("lam") = 1.0,
        py::arg("m") = 0, py::arg("tolerance") = 0.05);

    mod.def(
        "effective_conductance",
        [](const RootedTree& t, const std::vector<double>& conductances, int depth) {
            if (conductances.size() != t.vertex_count())
                throw std::invalid_argument("conductances must have one entry per vertex");
            return flows::effective_conductance(t, tree::EdgeWeighting{conductances}, depth);
        },
        py::arg("tree"), py::arg("conductances"), py::arg("depth"));

    mod.def(
        "survival_bounds",
        [](const RootedTree& t, const std::string& psi_kind, int depth, double c_q, double c,
           double delta, int n0, double lam, int m) {
            const auto b =
                flows::survival_bounds(t, make_psi(psi_kind, c, delta, n0, lam, m), depth, c_q);
            py::dict d;
            d["lower"] = b.lower;
            d["upper"] = b.upper;
            d["c_eff"] = b.c_eff;
            d["degenerate"] = b.degenerate;
            return d;
        },
        py::arg("tree"), py::arg("psi_kind"), py::arg("depth"), py::arg("c_q") = 1.0,
        py::arg("c") = 0.5, py::arg("delta") = 0.5, py::arg("n0") = 1, py::arg("lam") = 1.0,
        py::arg("m") = 0);

    mod.def(
        "unit_flow",
        [](const RootedTree& t, const std::string& psi_kind, double gamma, int depth, double c,
           double delta, int n0, double lam, int m) {
            const auto flow =
                flows::build_unit_flow(t, make_psi(psi_kind, c, delta, n0, lam, m), gamma, depth);
            py::dict d;
            d["energy"] = flow.energy;
            d["path_sum_bound"] = flow.path_sum_bound;
            d["strength_raw"] = flow.strength_raw;
            return d;
        },
        py::arg("tree"), py::arg("psi_kind"), py::arg("gamma"), py::arg("depth"),
        py::arg("c") = 0.5, py::arg("delta") = 0.5, py::arg("n0") = 1, py::arg("lam") = 1.0,
        py::arg("m") = 0);

    mod.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "run a CLI subcommand in-process; returns (exit_code, stdout, stderr)");
}
