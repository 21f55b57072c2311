import math

import pytest

import arborwalk as aw


def test_tree_builders_and_serialization():
    t = aw.RootedTree.spherically_symmetric(2.0, 3)
    assert t.level_sizes() == [1, 1, 4, 9]
    assert t.vertex_count == 15
    assert t.max_depth == 3

    path = aw.RootedTree.path(5)
    assert path.edge_count == 5

    # one load canonicalizes the numbering; after that the round trip is exact
    canon = aw.RootedTree.load(t.serialize()).serialize()
    assert aw.RootedTree.load(canon).serialize() == canon


def test_load_rejects_malformed_input():
    with pytest.raises(Exception, match="duplicate child"):
        aw.RootedTree.load("root 0\n1 0\n1 0\n")


def test_min_cutset_on_the_path():
    t = aw.RootedTree.path(6)
    weights = [0.0] + [2.0 ** -(k + 1) for k in range(6)]
    assert aw.min_cutset_value(t, weights) == pytest.approx(2.0 ** -6)


def test_branching_estimates():
    brr = aw.estimate_branching_ruin("sphere", 2.0, depth=2000)
    assert brr["status"] == "ok"
    assert brr["lo"] <= 2.3 and brr["hi"] >= 1.7

    assert aw.estimate_branching_ruin("regular", 2, depth=2000)["status"] == "divergent"

    br = aw.estimate_branching("regular", 3, depth=2000)
    assert br["lo"] <= 3.1 and br["hi"] >= 2.9


def test_psi_formulas():
    assert aw.psi_m_lambda(2, 1, 1.0) == pytest.approx(0.25)
    assert aw.big_psi(4, 1.0, 1) == pytest.approx(0.0625)
    assert aw.big_psi(5, 2.0, 0) == pytest.approx(1.0 / 31.0)


def test_conductance_sampling_is_deterministic():
    a = aw.sample_conductances(0.5, 0.4, seed=7, count=32)
    b = aw.sample_conductances(0.5, 0.4, seed=7, count=32)
    assert a == b
    assert all(0.0 < x <= 1.0 for x in a)


def test_escape_estimates():
    ruin = aw.rwrc_escape("path", 0, depth=10, m=1.0, p1=0.5, n_env=20,
                          trials_per_env=200, seed=3)
    assert 0.0 <= ruin["estimate"] <= 1.0

    sub = aw.mdrw_escape("sphere", 2.0, depth=30, lam=0.5, m=3, trials=500, seed=4)
    assert sub["ci_lo"] > 0.0  # outward bias escapes

    rep = aw.verify_hitting_identity(4, 1.0, 1, trials=20000, seed=5)
    assert rep["expected"] == pytest.approx(0.0625)
    assert rep["pass"]


def test_percolation_and_bounds():
    t = aw.RootedTree.spherically_symmetric(2.0, 40)
    est = aw.survival_estimate(t, "delta", depth=40, trials=300, seed=6, delta=0.5, n0=1)
    bounds = aw.survival_bounds(t, "delta", depth=40, c_q=1.0, delta=0.5, n0=1)
    assert bounds["lower"] <= bounds["upper"]
    assert est["ci_hi"] >= bounds["lower"]

    rt = aw.rt_classify("regular", 4, depth=2000, psi_kind="constant", c=0.5)
    assert rt["classification"] == "RT>1"
    assert abs(0.5 * (rt["lo"] + rt["hi"]) - 2.0) < 0.1


def test_unit_flow_energy():
    t = aw.RootedTree.regular(4, 8)
    flow = aw.unit_flow(t, "constant", gamma=1.5, depth=8, c=0.5)
    assert flow["energy"] <= flow["path_sum_bound"] + 1e-12


def test_quasi_independence_bound():
    t = aw.RootedTree.regular(2, 2)
    rep = aw.quasi_independence(t, 3, 4, lam=1.0, m=0, banks=4000, seed=8)
    assert rep["pass"]
    assert rep["bound"] == pytest.approx(math.e)


def test_cli_roundtrip(tmp_path):
    cfg = tmp_path / "cfg.txt"
    cfg.write_text("tree.kind = sphere\ntree.b = 2\ntree.depth = 400\nseed = 9\n")
    code, out, err = aw.run_cli(["tree-info", "--config", str(cfg)])
    assert code == 0, err
    assert "br_r = [" in out

    code2, out2, _ = aw.run_cli(["tree-info", "--config", str(cfg)])
    assert (code2, out2) == (code, out)
