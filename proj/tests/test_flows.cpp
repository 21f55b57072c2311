#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "arborwalk/flows.hpp"
#include "arborwalk/percolation.hpp"
#include "arborwalk/tree.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace arborwalk;
using percolation::PsiFunction;
using tree::EdgeWeighting;
using tree::RootedTree;

TEST_CASE("adapted conductances") {
    CHECK(flows::adapted_conductance_value(0.3, 0.3, 1) == doctest::Approx(1.0));
    // homogeneous digging psi at depth 2: M=0 gives c=1, M=1 gives c=1/3
    CHECK(flows::adapted_conductance_value(0.5, 0.5, 2) == doctest::Approx(1.0));
    CHECK(flows::adapted_conductance_value(0.25, 0.25, 2) == doctest::Approx(1.0 / 3.0));
    bool shorted = false;
    CHECK(std::isinf(flows::adapted_conductance_value(1.0, 1.0, 2, &shorted)));
    CHECK(shorted);

    const auto t = RootedTree::path(4);
    const auto net0 = flows::adapted_conductances(t, PsiFunction::mdrw_homogeneous(1.0, 0));
    CHECK(net0.c[1] == doctest::Approx(1.0));
    CHECK(net0.c[2] == doctest::Approx(1.0));
    const auto net1 = flows::adapted_conductances(t, PsiFunction::mdrw_homogeneous(1.0, 1));
    CHECK(net1.c[2] == doctest::Approx(1.0 / 3.0));
    CHECK(net1.shorted == 0);
}

TEST_CASE("effective conductance: series law, fixed point, scaling, monotonicity") {
    // path of N unit conductances -> 1/N
    for (int n : {1, 4, 9}) {
        const auto t = RootedTree::path(n);
        CHECK(flows::effective_conductance(t, EdgeWeighting::uniform(t, 1.0), n) ==
              doctest::Approx(1.0 / n).epsilon(1e-12));
    }

    // binary tree with unit conductances: profile recursion reaches 1 at depth 30
    std::vector<double> arity(30, 2.0), cond(30, 1.0);
    const double c30 = flows::effective_conductance_profile(arity, cond);
    CHECK(std::abs(c30 - 1.0) < 1e-6);

    // the profile matches the materialized reduction
    const auto bin = RootedTree::regular(2, 12);
    std::vector<double> a12(12, 2.0), c12(12, 1.0);
    CHECK(flows::effective_conductance(bin, EdgeWeighting::uniform(bin, 1.0), 12) ==
          doctest::Approx(flows::effective_conductance_profile(a12, c12)).epsilon(1e-12));

    // homogeneity and monotonicity on random trees
    auto s = rng::stream(3, rng::Domain::generic, {0});
    for (int rep = 0; rep < 20; ++rep) {
        const auto t = oracles::random_tree(10 + static_cast<int>(s.next_u64() % 50), s);
        EdgeWeighting c{std::vector<double>(t.vertex_count(), 0.0)};
        for (std::uint32_t v = 1; v < t.vertex_count(); ++v) c[v] = 0.1 + 2.0 * s.next_unit();
        const int nmax = t.max_depth();
        const double base = flows::effective_conductance(t, c, nmax);
        EdgeWeighting scaled = c;
        for (auto& x : scaled.value) x *= 3.5;
        CHECK(flows::effective_conductance(t, scaled, nmax) ==
              doctest::Approx(3.5 * base).epsilon(1e-12));
        double prev = std::numeric_limits<double>::infinity();
        for (int n = 1; n <= nmax; ++n) {
            const double cur = flows::effective_conductance(t, c, n);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("effective conductance agrees with the dense Dirichlet oracle") {
    auto s = rng::stream(5, rng::Domain::generic, {1});
    for (int rep = 0; rep < 25; ++rep) {
        const auto t = oracles::random_tree(8 + static_cast<int>(s.next_u64() % 120), s);
        EdgeWeighting c{std::vector<double>(t.vertex_count(), 0.0)};
        for (std::uint32_t v = 1; v < t.vertex_count(); ++v) c[v] = 0.05 + 3.0 * s.next_unit();
        for (int n : {1, std::max(1, t.max_depth() / 2), t.max_depth()}) {
            const double mine = flows::effective_conductance(t, c, n);
            const double oracle = oracles::dirichlet_effective_conductance(t, c, n);
            CHECK(mine == doctest::Approx(oracle).epsilon(1e-10));
        }
    }
}

TEST_CASE("unit flow on the path: telescoped u, flat flow, finite path sum") {
    const int n = 40;
    const auto t = RootedTree::path(n);
    const auto psi = PsiFunction::mdrw_homogeneous(1.0, 0); // psi = (k-1)/k
    const auto flow = flows::build_unit_flow(t, psi, 2.0, n);

    // max-flow under caps Psi^2 = k^-2 is the deepest capacity
    CHECK(flow.strength_raw == doctest::Approx(1.0 / (n * n)).epsilon(1e-9));
    for (std::uint32_t v = 1; v <= n; ++v) CHECK(flow.theta[v] == doctest::Approx(1.0));

    // sum of u along the path: 1 + sum_{k>=2} k^-2, under pi^2/6
    double expect = 1.0;
    for (int k = 2; k <= n; ++k) expect += 1.0 / (static_cast<double>(k) * k);
    CHECK(flow.path_sum_bound == doctest::Approx(expect).epsilon(1e-12));
    CHECK(flow.path_sum_bound < 1.6449340668482264);
}

TEST_CASE("unit flow obeys Kirchhoff and the supercritical energy bound") {
    struct Case { int d; double c; double gamma; };
    for (const auto& cs : {Case{4, 0.5, 1.2}, Case{4, 0.5, 1.5}, Case{3, 0.6, 1.5}}) {
        REQUIRE(cs.d * std::pow(cs.c, cs.gamma) > 1.0);
        const auto t = RootedTree::regular(cs.d, 9);
        const auto psi = PsiFunction::constant(cs.c);
        const auto flow = flows::build_unit_flow(t, psi, cs.gamma, 9);
        CHECK(flows::kirchhoff_residual(t, flow.theta, 9) < 1e-12);
        CHECK(flow.energy <= flow.path_sum_bound + 1e-12);

        // energy is stable as the horizon deepens
        const auto deeper = flows::build_unit_flow(RootedTree::regular(cs.d, 11), psi, cs.gamma, 11);
        CHECK(deeper.energy == doctest::Approx(flow.energy).epsilon(0.2));
    }

    // digging psi on a sphere tree in its supercritical range
    const auto sphere = RootedTree::spherically_symmetric(3.0, 40);
    const auto flow = flows::build_unit_flow(sphere, PsiFunction::mdrw_homogeneous(1.0, 1), 1.3, 40);
    CHECK(flows::kirchhoff_residual(sphere, flow.theta, 40) < 1e-12);
    CHECK(flow.energy <= flow.path_sum_bound + 1e-12);
}

TEST_CASE("unit flow rejects collapsed capacities and bad gamma") {
    const auto t = RootedTree::path(300);
    CHECK_THROWS_AS(flows::build_unit_flow(t, PsiFunction::constant(0.01), 2.0, 300), ZeroFlow);
    CHECK_THROWS_AS(flows::build_unit_flow(t, PsiFunction::constant(0.5), 1.0, 10),
                    std::invalid_argument);
}

TEST_CASE("survival bounds: vanishing upper bound in the subcritical regime") {
    // psi_{2,1} on a b=1 sphere tree: upper bound decays like N^-2
    double prev = 1.0;
    for (int n : {10, 20, 40, 80}) {
        const auto t = RootedTree::spherically_symmetric(1.0, n);
        const auto b = flows::survival_bounds(t, PsiFunction::mdrw_homogeneous(1.0, 2), n, 1.0);
        CHECK(b.upper <= prev + 1e-12);
        prev = b.upper;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("survival bounds: degenerate all-open percolation reports 1") {
    const auto t = RootedTree::spherically_symmetric(2.0, 6);
    const auto b = flows::survival_bounds(t, PsiFunction::constant(1.0), 6, 1.0);
    CHECK(b.degenerate);
    CHECK(b.lower == doctest::Approx(1.0));
    CHECK(b.upper == doctest::Approx(1.0));
}

TEST_CASE("survival bounds sandwich Monte Carlo survival in supercritical regimes") {
    const auto t = RootedTree::spherically_symmetric(2.0, 60);
    const auto psi = PsiFunction::delta(0.5, 1);
    const auto b = flows::survival_bounds(t, psi, 60, 1.0);
    CHECK(b.lower <= b.upper);
    const auto mc = percolation::survival_estimate(t, psi, 60, 600, 17);
    CHECK(mc.ci95.hi >= b.lower);
    CHECK(mc.ci95.lo <= b.upper);

    // bound ordering across a small supercritical grid
    const auto t4 = RootedTree::regular(4, 9);
    const auto bc = flows::survival_bounds(t4, PsiFunction::constant(0.5), 9, 1.0);
    CHECK(bc.lower <= bc.upper);
    const auto bm = flows::survival_bounds(t, PsiFunction::mdrw_homogeneous(1.0, 0), 60, 1.0);
    CHECK(bm.lower <= bm.upper);
}
