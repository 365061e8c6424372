import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fluxq import (
    GeometricMode,
    GeometricPolicy,
    Representation,
    augment_geometric,
    build_spanning_tree,
    extended_node_lagrangian,
    fundamental_loops,
    legendre_transform,
    loop_lagrangian,
    node_lagrangian,
    normal_modes,
    parse_netlist,
    reduce_circuit,
    topology_report,
)
from fluxq.topology import inductor_participation

from conftest import random_active_circuit

MINIMAL = GeometricPolicy(cap_mode=GeometricMode.MINIMAL)
ALL_PAIRS = GeometricPolicy(cap_mode=GeometricMode.ALL_PAIRS)


def test_node_matrices_passive(passive_lc):
    lag = node_lagrangian(passive_lc, build_spanning_tree(passive_lc))
    assert lag.labels == ("phi_2", "phi_3")
    assert np.allclose(lag.M, [[6e-12, 0.0], [0.0, 0.0]])
    third = 1e9 / 3.0
    assert np.allclose(lag.K, [[1e9, -1e9], [-1e9, 1e9 + third]])
    assert lag.flux_assignment["L3"] == {"phi_2": 1.0, "phi_3": -1.0}
    assert lag.flux_assignment["L4"] == {"phi_3": 1.0}


def test_node_matrices_reduced(reduced_lc):
    lag = node_lagrangian(reduced_lc, build_spanning_tree(reduced_lc))
    assert np.allclose(lag.M, [[6e-12]])
    assert np.allclose(lag.K, [[2.5e8]])


def test_node_no_capacitors_zero_mass():
    circuit = parse_netlist("L1 1 0 1nH\nL2 1 0 2nH")
    lag = node_lagrangian(circuit, build_spanning_tree(circuit))
    assert np.all(lag.M == 0.0)


def test_loop_matrices_passive(passive_lc):
    tree = build_spanning_tree(passive_lc)
    loops = fundamental_loops(passive_lc, tree)
    lag = loop_lagrangian(passive_lc, loops)
    assert lag.labels == ("Q_1", "Q_2")
    assert np.allclose(lag.M, [[0.0, 0.0], [0.0, 4e-9]])
    # diagonal and coupling magnitudes; the off-diagonal sign depends on
    # the chord orientation convention
    assert lag.K[0, 0] == pytest.approx(7.5e11)
    assert lag.K[1, 1] == pytest.approx(5e11)
    assert abs(lag.K[0, 1]) == pytest.approx(5e11)
    assert lag.flux_assignment["C2"] in ({"Q_1": 1.0}, {"Q_1": -1.0})


def test_loop_matrices_reduced(reduced_lc):
    tree = build_spanning_tree(reduced_lc)
    loops = fundamental_loops(reduced_lc, tree)
    lag = loop_lagrangian(reduced_lc, loops)
    assert np.allclose(lag.M, [[4e-9]])
    assert np.allclose(lag.K, [[1.0 / 6e-12]])


def test_loop_mass_rank_wheel(wheel):
    tree = build_spanning_tree(wheel)
    loops = fundamental_loops(wheel, tree)
    lag = loop_lagrangian(wheel, loops)
    assert lag.M.shape == (3, 3)
    assert np.linalg.matrix_rank(lag.M, tol=1e-12 * np.abs(lag.M).max()) == 2
    # direct construction of B diag(L) B^T as an independent check
    B, inductors = inductor_participation(wheel, loops)
    values = np.diag([wheel.component(cid).value for cid in inductors])
    assert np.allclose(lag.M, B @ values @ B.T)


def test_augment_minimal_passive(passive_lc):
    report = topology_report(passive_lc)
    augmented, record = augment_geometric(passive_lc, report, MINIMAL)
    assert len(record.added_capacitors) == 1
    cg = record.added_capacitors[0]
    assert cg.terminals == ("3", "2")
    assert cg.value == pytest.approx(8.9e-20)
    assert cg.geometric
    assert len(augmented.components) == 5
    # one self-inductance on the capacitor-only loop
    chord_index = record.loop_labels.index("C2")
    expected = np.zeros((2, 2))
    expected[chord_index, chord_index] = 1e-15
    assert np.allclose(record.loop_inductance, expected)


def test_augment_minimal_noop(reduced_lc):
    report = topology_report(reduced_lc)
    augmented, record = augment_geometric(reduced_lc, report, MINIMAL)
    assert augmented == reduced_lc
    assert record.added_capacitors == ()
    assert np.all(record.loop_inductance == 0.0)


def test_augment_all_pairs(passive_lc):
    report = topology_report(passive_lc)
    augmented, record = augment_geometric(passive_lc, report, ALL_PAIRS)
    pairs = {frozenset(c.terminals) for c in record.added_capacitors}
    assert pairs == {
        frozenset(("2", "0")),
        frozenset(("3", "0")),
        frozenset(("3", "2")),
    }
    assert np.allclose(record.loop_inductance, 1e-15 * np.eye(2))


def test_augment_off_identity(passive_lc):
    report = topology_report(passive_lc)
    augmented, record = augment_geometric(
        passive_lc, report, GeometricPolicy(cap_mode=GeometricMode.OFF)
    )
    assert augmented == passive_lc
    assert record.loop_inductance is None


def test_policy_validation():
    with pytest.raises(ValueError):
        GeometricPolicy(cap_mode=GeometricMode.MINIMAL, default_cg=0.0)


def test_extended_momenta_pattern(passive_lc):
    """Coefficient pattern of the augmented kinetic matrix: the loop-1
    geometric flux couples only through C2, with coefficient -C2."""
    tree = build_spanning_tree(passive_lc)
    lag = extended_node_lagrangian(passive_lc, tree, ALL_PAIRS)
    assert lag.labels == ("phi_2", "phi_3", "Phi_1", "Phi_2")
    i2 = lag.labels.index("phi_2")
    ip1 = lag.labels.index("Phi_1")
    assert lag.M[i2, ip1] == pytest.approx(-4e-12)
    row = lag.M[ip1]
    expected = np.zeros(4)
    expected[i2], expected[ip1] = -4e-12, 4e-12
    assert np.allclose(row, expected)
    # the chord of each dynamic loop carries its loop flux
    assert lag.flux_assignment["C2"] == {"phi_2": 1.0, "Phi_1": -1.0}
    assert lag.flux_assignment["L4"] == {"phi_3": 1.0, "Phi_2": -1.0}


def test_extended_geometric_caps_follow_design_paths(passive_lc):
    tree = build_spanning_tree(passive_lc)
    lag = extended_node_lagrangian(passive_lc, tree, ALL_PAIRS)
    # across (3,2): shadows L3; across (3,0): shadows L4 including its loop
    # flux; across (2,0): shadows C1
    assert lag.flux_assignment["Cg32"] == {"phi_2": -1.0, "phi_3": 1.0}
    assert lag.flux_assignment["Cg30"] == {"phi_3": 1.0, "Phi_2": -1.0}
    assert lag.flux_assignment["Cg20"] == {"phi_2": 1.0}


def test_extended_phi_block_restriction_matches_node(passive_lc):
    """With loop fluxes frozen at zero the extended Lagrangian restricted
    to the node block is the node Lagrangian of the augmented circuit."""
    tree = build_spanning_tree(passive_lc)
    report = topology_report(passive_lc)
    lag_ext = extended_node_lagrangian(passive_lc, tree, ALL_PAIRS)
    augmented, _ = augment_geometric(passive_lc, report, ALL_PAIRS)
    lag_node = node_lagrangian(augmented, build_spanning_tree(augmented))
    n = len(lag_node.labels)
    assert np.allclose(lag_ext.M[:n, :n], lag_node.M)
    assert np.allclose(lag_ext.K[:n, :n], lag_node.K)


def test_extended_reduces_to_node_when_inactive(reduced_lc):
    tree = build_spanning_tree(reduced_lc)
    lag_ext = extended_node_lagrangian(reduced_lc, tree, MINIMAL)
    lag_node = node_lagrangian(reduced_lc, tree)
    assert lag_ext.labels == lag_node.labels
    assert np.allclose(lag_ext.M, lag_node.M)
    assert np.allclose(lag_ext.K, lag_node.K)


def test_extended_low_mode_converges_to_reduced(passive_lc, reduced_lc):
    red = node_lagrangian(reduced_lc, build_spanning_tree(reduced_lc))
    f_red = normal_modes(legendre_transform(red)).omegas[0] / (2 * np.pi)
    tree = build_spanning_tree(passive_lc)
    errors = []
    for cg, lg in ((8.9e-19, 1e-14), (8.9e-20, 1e-15), (8.9e-21, 1e-16)):
        policy = GeometricPolicy(
            cap_mode=GeometricMode.MINIMAL, default_cg=cg, default_lg=lg
        )
        lag = extended_node_lagrangian(passive_lc, tree, policy)
        f_low = normal_modes(legendre_transform(lag)).omegas[0] / (2 * np.pi)
        errors.append(abs(f_low - f_red) / f_red)
    assert errors[0] > errors[-1]
    assert errors[-1] < 1e-6


def test_gauge_shift_changes_only_grounded_branches(passive_lc):
    lag = node_lagrangian(passive_lc, build_spanning_tree(passive_lc))
    shift = np.ones(lag.dim)
    for comp in passive_lc.components:
        row = lag.assignment_row(comp.id)
        touches_ground = "0" in comp.terminals
        if touches_ground:
            assert row @ shift != 0.0
        else:
            assert row @ shift == 0.0


@given(st.integers(0, 10_000))
def test_matrices_symmetric_psd_random(seed):
    rng = np.random.default_rng(seed)
    circuit = random_active_circuit(rng)
    tree = build_spanning_tree(circuit)
    loops = fundamental_loops(circuit, tree)
    for lag in (node_lagrangian(circuit, tree), loop_lagrangian(circuit, loops)):
        for mat in (lag.M, lag.K):
            assert np.allclose(mat, mat.T)
            evals = np.linalg.eigvalsh(mat)
            floor = -1e-12 * max(evals.max(), 0.0)
            assert evals.min() >= floor


def test_node_mass_singularity_matches_structure(passive_lc, wheel, active_lc):
    # M singular exactly when some node lacks a capacitive path to ground
    for circuit, singular in ((passive_lc, True), (wheel, True), (active_lc, False)):
        lag = node_lagrangian(circuit, build_spanning_tree(circuit))
        svals = np.linalg.svd(lag.M, compute_uv=False)
        numeric = svals.min() < 1e-12 * svals.max()
        assert numeric == singular


def test_reduction_preserves_nonzero_node_spectrum(passive_lc):
    """Eliminated coordinates are passive, so the finite generalized
    eigenvalues survive reduction; the singular pencil is solved by the
    QZ algorithm as an independent oracle."""
    import scipy.linalg

    lag_full = node_lagrangian(passive_lc, build_spanning_tree(passive_lc))
    evals = scipy.linalg.eig(lag_full.K, lag_full.M, right=False)
    finite = np.sort(np.real(evals[np.isfinite(evals)]))
    reduced = reduce_circuit(passive_lc)
    lag_red = node_lagrangian(reduced, build_spanning_tree(reduced))
    modes = normal_modes(legendre_transform(lag_red))
    assert finite.size == 1
    assert np.sqrt(finite[0]) == pytest.approx(modes.omegas[0], rel=1e-9)


def test_lagrangian_json_round(passive_lc):
    import json

    lag = node_lagrangian(passive_lc, build_spanning_tree(passive_lc))
    payload = json.loads(json.dumps(lag.to_json_dict()))
    assert payload["representation"] == "node"
    assert payload["labels"] == ["phi_2", "phi_3"]
    assert payload["M"][0][0] == pytest.approx(6e-12)
    assert payload["flux_assignment"]["L3"] == {"phi_2": 1.0, "phi_3": -1.0}
