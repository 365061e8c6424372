"""Quadratic Lagrangian assembly for LC circuits.

Three coordinate systems are supported:

* node flux: one flux coordinate per non-ground node; kinetic energy from
  capacitors, potential from inductors; every branch flux is the node-flux
  difference across the branch (loop fluxes held constant at zero).
* loop charge: one charge coordinate per fundamental loop; kinetic energy
  from inductors, potential from capacitors; every branch charge is the
  signed sum of the loop charges through the branch.
* extended node flux: node fluxes plus one dynamical loop-flux coordinate
  per loop that carries a geometric self-inductance.  A chord of dynamic
  loop l carries branch flux (phi_a - phi_b - Phi_l); each geometric
  capacitor inherits the branch flux of the shortest design-component path
  between its terminals, so the tiny loop it forms with that path threads
  no flux.

All quantities are SI.  Matrices are dense; circuits are small.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .netlist import GROUND, Circuit, Component, ComponentKind
from .topology import (
    FundamentalLoop,
    SpanningTree,
    TopologyReport,
    build_spanning_tree,
    capacitor_only_cycles,
    fundamental_loops,
    passive_nodes,
    topology_report,
)

_SYM_TOL = 1e-14


class Representation(enum.Enum):
    NODE_FLUX = "node"
    LOOP_CHARGE = "loop"
    EXTENDED_NODE_FLUX = "extended"


class GeometricMode(enum.Enum):
    OFF = "off"
    MINIMAL = "minimal"
    ALL_PAIRS = "allpairs"


@dataclass(frozen=True)
class GeometricPolicy:
    """How to introduce geometric (parasitic) components.

    cap_mode selects the augmentation: OFF adds nothing; MINIMAL adds one
    geometric capacitor per passive node (toward its tree parent) and one
    self-inductance per deficient loop direction; ALL_PAIRS adds a
    geometric capacitor between every unordered node pair and a
    self-inductance on every loop.  Overrides replace the defaults for
    specific node pairs / loop chords.
    """

    cap_mode: GeometricMode = GeometricMode.MINIMAL
    default_cg: float = 8.9e-20
    default_lg: float = 1e-15
    cap_overrides: dict[frozenset, float] = field(default_factory=dict)
    loop_overrides: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.cap_mode is not GeometricMode.OFF:
            if not self.default_cg > 0.0:
                raise ValueError("default_cg must be positive when augmenting")
            if not self.default_lg > 0.0:
                raise ValueError("default_lg must be positive when augmenting")


@dataclass(frozen=True)
class AugmentationRecord:
    added_capacitors: tuple[Component, ...]
    loop_inductance: np.ndarray | None  # (l x l) PSD matrix, None when OFF
    loop_labels: tuple[str, ...]  # chord id per fundamental loop
    # exact loop-space support of the self-inductance form, for the
    # structural quantizability analysis
    loop_kinetic_rows: tuple[tuple[float, ...], ...] = ()


@dataclass
class QuadraticLagrangian:
    """L = 1/2 xdot^T M xdot - 1/2 x^T K x over the named coordinates.

    flux_assignment maps each component id to its branch flux (or branch
    charge, in the loop representation) as a signed combination of
    coordinates.  kinetic_components lists the ids whose assignment vectors
    build M; kinetic_forms holds additional exact support rows (geometric
    loop self-inductances).  Their joint span determines quantizability.
    """

    representation: Representation
    labels: tuple[str, ...]
    M: np.ndarray
    K: np.ndarray
    flux_assignment: dict[str, dict[str, float]]
    kinetic_components: tuple[str, ...]
    kinetic_forms: tuple[dict[str, float], ...] = ()

    def __post_init__(self):
        for name, mat in (("M", self.M), ("K", self.K)):
            scale = np.abs(mat).max() if mat.size else 0.0
            if scale and np.abs(mat - mat.T).max() > _SYM_TOL * scale:
                raise ValueError(f"{name} is not symmetric")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def assignment_row(self, cid: str) -> np.ndarray:
        row = np.zeros(self.dim)
        index = {lbl: i for i, lbl in enumerate(self.labels)}
        for lbl, coeff in self.flux_assignment[cid].items():
            row[index[lbl]] = coeff
        return row

    def assignment_matrix(self, cids) -> np.ndarray:
        ids = list(cids)
        return np.array([self.assignment_row(cid) for cid in ids]).reshape(
            len(ids), self.dim
        )

    def to_json_dict(self) -> dict:
        return {
            "representation": self.representation.value,
            "labels": list(self.labels),
            "M": self.M.tolist(),
            "K": self.K.tolist(),
            "flux_assignment": {
                cid: dict(combo) for cid, combo in self.flux_assignment.items()
            },
        }


def _node_labels(circuit: Circuit) -> tuple[str, ...]:
    return tuple(f"phi_{n}" for n in circuit.nodes if n != GROUND)


def _difference_vector(a: str, b: str) -> dict[str, float]:
    combo: dict[str, float] = {}
    if a != GROUND:
        combo[f"phi_{a}"] = combo.get(f"phi_{a}", 0.0) + 1.0
    if b != GROUND:
        combo[f"phi_{b}"] = combo.get(f"phi_{b}", 0.0) - 1.0
    return {k: v for k, v in combo.items() if v != 0.0}


def _accumulate(mat: np.ndarray, row: np.ndarray, weight: float) -> None:
    mat += weight * np.outer(row, row)


def node_lagrangian(circuit: Circuit, tree: SpanningTree) -> QuadraticLagrangian:
    """Node-flux Lagrangian: M is the capacitance matrix, K the inverse
    inductance matrix, both over node-flux differences; loop fluxes are
    held constant (zero), so the assignment ignores the tree."""
    labels = _node_labels(circuit)
    index = {lbl: i for i, lbl in enumerate(labels)}
    dim = len(labels)
    M = np.zeros((dim, dim))
    K = np.zeros((dim, dim))
    assignment: dict[str, dict[str, float]] = {}
    kinetic = []
    for c in circuit.components:
        combo = _difference_vector(c.a, c.b)
        assignment[c.id] = combo
        row = np.zeros(dim)
        for lbl, coeff in combo.items():
            row[index[lbl]] = coeff
        if c.kind is ComponentKind.CAPACITOR:
            _accumulate(M, row, c.value)
            kinetic.append(c.id)
        else:
            _accumulate(K, row, 1.0 / c.value)
    return QuadraticLagrangian(
        Representation.NODE_FLUX, labels, M, K, assignment, tuple(kinetic)
    )


def loop_labels(loops: tuple[FundamentalLoop, ...]) -> tuple[str, ...]:
    return tuple(f"Q_{i + 1}" for i in range(len(loops)))


def loop_lagrangian(
    circuit: Circuit,
    loops: tuple[FundamentalLoop, ...],
    loop_inductance: np.ndarray | None = None,
    loop_kinetic_rows: tuple[tuple[float, ...], ...] = (),
) -> QuadraticLagrangian:
    """Loop-charge Lagrangian: M from inductors shared between loops, K
    from capacitors; each branch charge is the signed sum of the loop
    charges through it.  An optional geometric self-inductance matrix is
    added to M (it never enters as a series branch); loop_kinetic_rows
    carries its exact loop-space support for the structural diagnosis."""
    labels = loop_labels(loops)
    dim = len(labels)
    participation: dict[str, np.ndarray] = {}
    for i, loop in enumerate(loops):
        for cid, sign in loop.path:
            row = participation.setdefault(cid, np.zeros(dim))
            row[i] += sign
    M = np.zeros((dim, dim))
    K = np.zeros((dim, dim))
    assignment: dict[str, dict[str, float]] = {}
    kinetic = []
    for c in circuit.components:
        row = participation.get(c.id, np.zeros(dim))
        assignment[c.id] = {
            labels[i]: float(row[i]) for i in range(dim) if row[i] != 0.0
        }
        if c.kind is ComponentKind.INDUCTOR:
            _accumulate(M, row, c.value)
            kinetic.append(c.id)
        else:
            _accumulate(K, row, 1.0 / c.value)
    if loop_inductance is not None:
        extra = np.asarray(loop_inductance, dtype=float)
        if extra.shape != (dim, dim):
            raise ValueError("loop inductance matrix has wrong shape")
        M = M + extra
    forms = tuple(
        {labels[i]: float(row[i]) for i in range(dim) if row[i] != 0.0}
        for row in loop_kinetic_rows
    )
    return QuadraticLagrangian(
        Representation.LOOP_CHARGE, labels, M, K, assignment, tuple(kinetic), forms
    )


def _geometric_id(existing: set[str], a: str, b: str) -> str:
    base = f"Cg{a}{b}"
    cid = base
    k = 2
    while cid in existing:
        cid = f"{base}_{k}"
        k += 1
    return cid


def augment_geometric(
    circuit: Circuit, report: TopologyReport, policy: GeometricPolicy
) -> tuple[Circuit, AugmentationRecord]:
    """Add geometric components per the policy.

    Geometric capacitors become real circuit components (flagged).  The
    geometric loop self-inductances are returned as a loop-space matrix to
    be added to the loop-representation kinetic matrix; inserting them as
    series branches would create nodes the model does not contain.
    """
    tree = build_spanning_tree(circuit)
    loops = fundamental_loops(circuit, tree)
    loop_lbls = tuple(loop.chord for loop in loops)
    l = len(loops)

    if policy.cap_mode is GeometricMode.OFF:
        return circuit, AugmentationRecord((), None, loop_lbls)

    existing = {c.id for c in circuit.components}
    added: list[Component] = []

    def cg_value(a: str, b: str) -> float:
        return policy.cap_overrides.get(frozenset((a, b)), policy.default_cg)

    if policy.cap_mode is GeometricMode.MINIMAL:
        for node in sorted(passive_nodes(circuit)):
            neighbor = tree.parent_node.get(node)
            if neighbor is None:
                neighbors = sorted(
                    {t for c in circuit.incident(node) for t in c.terminals} - {node}
                )
                neighbor = GROUND if GROUND in neighbors else neighbors[0]
            cid = _geometric_id(existing, node, neighbor)
            existing.add(cid)
            added.append(
                Component(
                    cid,
                    ComponentKind.CAPACITOR,
                    cg_value(node, neighbor),
                    (node, neighbor),
                    geometric=True,
                )
            )
        loop_matrix = np.zeros((l, l))
        kinetic_rows = []
        for w in capacitor_only_cycles(circuit, loops):
            wv = np.asarray(w, dtype=float)
            wv = wv / np.linalg.norm(wv)
            lg = policy.default_lg
            support = np.flatnonzero(wv)
            if support.size == 1:
                lg = policy.loop_overrides.get(loop_lbls[support[0]], policy.default_lg)
            loop_matrix += lg * np.outer(wv, wv)
            kinetic_rows.append(tuple(float(x) for x in w))
    else:  # ALL_PAIRS
        for i, a in enumerate(circuit.nodes):
            for b in circuit.nodes[i + 1 :]:
                cid = _geometric_id(existing, b, a)
                existing.add(cid)
                added.append(
                    Component(
                        cid,
                        ComponentKind.CAPACITOR,
                        cg_value(a, b),
                        (b, a),
                        geometric=True,
                    )
                )
        loop_matrix = np.zeros((l, l))
        kinetic_rows = []
        for i, lbl in enumerate(loop_lbls):
            loop_matrix[i, i] = policy.loop_overrides.get(lbl, policy.default_lg)
            row = [0.0] * l
            row[i] = 1.0
            kinetic_rows.append(tuple(row))

    augmented = Circuit(
        circuit.nodes, circuit.components + tuple(added), dict(circuit.ics)
    )
    return augmented, AugmentationRecord(
        tuple(added), loop_matrix, loop_lbls, tuple(kinetic_rows)
    )


def _shortest_design_path(
    circuit: Circuit, u: str, v: str
) -> list[tuple[Component, int]]:
    """BFS through design (non-geometric) components from u to v; neighbors
    expanded in declaration order so ties are deterministic.  Returns the
    steps as (component, direction) with direction +1 when traversed from
    its first to its second terminal."""
    design = [c for c in circuit.components if not c.geometric]
    prev: dict[str, tuple[str, Component, int]] = {}
    seen = {u}
    frontier = [u]
    while frontier and v not in seen:
        node = frontier.pop(0)
        for c in design:
            if node not in c.terminals:
                continue
            other = c.b if c.a == node else c.a
            if other in seen:
                continue
            seen.add(other)
            prev[other] = (node, c, +1 if c.a == node else -1)
            frontier.append(other)
    if v not in seen:
        raise ValueError(f"no design path between nodes {u!r} and {v!r}")
    steps: list[tuple[Component, int]] = []
    node = v
    while node != u:
        parent, comp, direction = prev[node]
        steps.append((comp, direction))
        node = parent
    steps.reverse()
    return steps


def extended_node_lagrangian(
    circuit: Circuit, tree: SpanningTree, policy: GeometricPolicy
) -> QuadraticLagrangian:
    """Node fluxes plus dynamical loop fluxes for every loop carrying a
    geometric self-inductance.

    Tree components keep phi_a - phi_b.  The chord of dynamic loop l
    carries phi_a - phi_b - Phi_l, which makes the signed flux sum around
    that loop equal -Phi_l.  Geometric capacitors copy the flux of the
    shortest design path between their terminals.  The potential gains
    1/2 Phi^T Lg^{-1} Phi from the loop self-inductances."""
    report = topology_report(circuit)
    augmented, record = augment_geometric(circuit, report, policy)
    loops = fundamental_loops(circuit, tree)

    if record.loop_inductance is None:
        dynamic: list[int] = []
    else:
        dynamic = [
            i
            for i in range(len(loops))
            if np.any(record.loop_inductance[i] != 0.0)
        ]
    phi_labels = _node_labels(circuit)
    ext_labels = phi_labels + tuple(f"Phi_{i + 1}" for i in dynamic)
    index = {lbl: i for i, lbl in enumerate(ext_labels)}
    dim = len(ext_labels)

    chord_loop = {loop.chord: i for i, loop in enumerate(loops)}
    assignment: dict[str, dict[str, float]] = {}
    for c in circuit.components:
        combo = dict(_difference_vector(c.a, c.b))
        li = chord_loop.get(c.id)
        if li is not None and li in dynamic:
            combo[f"Phi_{li + 1}"] = combo.get(f"Phi_{li + 1}", 0.0) - 1.0
        assignment[c.id] = {k: v for k, v in combo.items() if v != 0.0}

    for c in record.added_capacitors:
        combo: dict[str, float] = {}
        for comp, direction in _shortest_design_path(augmented, c.a, c.b):
            for lbl, coeff in assignment[comp.id].items():
                combo[lbl] = combo.get(lbl, 0.0) + direction * coeff
        assignment[c.id] = {k: v for k, v in combo.items() if v != 0.0}

    M = np.zeros((dim, dim))
    K = np.zeros((dim, dim))
    kinetic = []
    for c in augmented.components:
        row = np.zeros(dim)
        for lbl, coeff in assignment[c.id].items():
            row[index[lbl]] = coeff
        if c.kind is ComponentKind.CAPACITOR:
            _accumulate(M, row, c.value)
            kinetic.append(c.id)
        else:
            _accumulate(K, row, 1.0 / c.value)
    if dynamic:
        block = record.loop_inductance[np.ix_(dynamic, dynamic)]
        inv_block = np.linalg.inv(block)
        offset = len(phi_labels)
        for a in range(len(dynamic)):
            for b in range(len(dynamic)):
                K[offset + a, offset + b] += inv_block[a, b]
    return QuadraticLagrangian(
        Representation.EXTENDED_NODE_FLUX, ext_labels, M, K, assignment, tuple(kinetic)
    )


def flux_law_residual(circuit: Circuit, tree: SpanningTree, trajectory) -> np.ndarray:
    """Signed sum of branch fluxes around each fundamental loop, one row
    per loop over the trajectory grid.  Identically zero in the node
    representation; equals -Phi_l(t) for dynamic loops of the extended
    representation."""
    lag = _trajectory_lagrangian(trajectory)
    if lag.representation is Representation.LOOP_CHARGE:
        raise ValueError("flux law applies to flux-type trajectories")
    loops = fundamental_loops(circuit, tree)
    residual = np.zeros((len(loops), len(trajectory.times)))
    for i, loop in enumerate(loops):
        # combine the small-integer coefficients first so the telescoping
        # sum of node-flux differences cancels exactly
        combined = np.zeros(lag.dim)
        for cid, sign in loop.path:
            if cid not in lag.flux_assignment:
                raise ValueError(f"trajectory does not cover component {cid!r}")
            combined += sign * lag.assignment_row(cid)
        residual[i] = combined @ trajectory.coords
    return residual


def charge_law_residual(
    circuit: Circuit, loops: tuple[FundamentalLoop, ...], trajectory
) -> np.ndarray:
    """Signed sum of branch charges at each non-ground node, one row per
    node.  Each loop charge enters and leaves every node it visits, so the
    residual vanishes identically under the fundamental-loop construction."""
    lag = _trajectory_lagrangian(trajectory)
    if lag.representation is not Representation.LOOP_CHARGE:
        raise ValueError("charge law applies to loop-charge trajectories")
    nodes = [n for n in circuit.nodes if n != GROUND]
    residual = np.zeros((len(nodes), len(trajectory.times)))
    for i, node in enumerate(nodes):
        combined = np.zeros(lag.dim)
        for c in circuit.incident(node):
            if c.id not in lag.flux_assignment:
                raise ValueError(f"trajectory does not cover component {c.id!r}")
            sign = +1 if c.a == node else -1
            combined += sign * lag.assignment_row(c.id)
        residual[i] = combined @ trajectory.coords
    return residual


def _trajectory_lagrangian(trajectory) -> QuadraticLagrangian:
    lag = getattr(trajectory, "lagrangian", None)
    if lag is None:
        raise ValueError("trajectory carries no coordinate assignment")
    return lag
