"""Random walks, digging walks and percolation on rooted trees."""

from ._arborwalk import (
    RootedTree,
    big_psi,
    ccp_membership_frequency,
    effective_conductance,
    estimate_branching,
    estimate_branching_ruin,
    mdrw_escape,
    min_cutset_value,
    psi_m_lambda,
    psi_rc_product,
    quasi_independence,
    rt_classify,
    run_cli,
    rwrc_escape,
    sample_conductances,
    survival_bounds,
    survival_estimate,
    unit_flow,
    verify_hitting_identity,
)

__all__ = [
    "RootedTree",
    "big_psi",
    "ccp_membership_frequency",
    "effective_conductance",
    "estimate_branching",
    "estimate_branching_ruin",
    "mdrw_escape",
    "min_cutset_value",
    "psi_m_lambda",
    "psi_rc_product",
    "quasi_independence",
    "rt_classify",
    "run_cli",
    "rwrc_escape",
    "sample_conductances",
    "survival_bounds",
    "survival_estimate",
    "unit_flow",
    "verify_hitting_identity",
]
