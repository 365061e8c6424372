#!/usr/bin/env python3
"""Print solution-parameter tables for the bundled example circuits.

For each circuit and representation: the per-coordinate attributed mode
frequencies (GHz) and the ground-state spreads.  The passive circuit is
augmented with the default geometric values; the loop high mode is also
shown at Lg = 1e-14 H for comparison.
"""
import math
import sys
from pathlib import Path

import numpy as np

from fluxq import (
    GeometricMode,
    GeometricPolicy,
    augment_geometric,
    build_spanning_tree,
    fundamental_loops,
    ground_state,
    legendre_transform,
    loop_lagrangian,
    mode_attribution,
    node_lagrangian,
    normal_modes,
    parse_netlist,
    topology_report,
)

NETLISTS = Path(__file__).resolve().parent.parent / "netlists"


def show(title, lag):
    h = legendre_transform(lag)
    modes = normal_modes(h)
    state = ground_state(modes, h)
    attribution = mode_attribution(modes, h)
    print(f"\n{title}  [{lag.representation.value}]")
    print(f"  {'variable':<10} {'freq (GHz)':>12} {'delta_x':>12} {'delta_p':>12}")
    dx = np.sqrt(np.diag(state.cov)[: lag.dim])
    dp = np.sqrt(np.diag(state.cov)[lag.dim :])
    for i, label in enumerate(lag.labels):
        f_ghz = attribution[label] / (2 * math.pi) / 1e9
        print(f"  {label:<10} {f_ghz:>12.4g} {dx[i]:>12.3e} {dp[i]:>12.3e}")


def node_rep(circuit, policy):
    report = topology_report(circuit)
    augmented, _ = augment_geometric(circuit, report, policy)
    return node_lagrangian(augmented, build_spanning_tree(augmented))


def loop_rep(circuit, policy):
    report = topology_report(circuit)
    _, record = augment_geometric(circuit, report, policy)
    loops = fundamental_loops(circuit, build_spanning_tree(circuit))
    return loop_lagrangian(
        circuit, loops, record.loop_inductance, record.loop_kinetic_rows
    )


def main():
    off = GeometricPolicy(cap_mode=GeometricMode.OFF)
    minimal = GeometricPolicy(cap_mode=GeometricMode.MINIMAL)
    loop_minimal = GeometricPolicy(cap_mode=GeometricMode.MINIMAL, default_lg=1e-14)

    active = parse_netlist((NETLISTS / "active_lc.cir").read_text())
    show("active variant", node_rep(active, off))
    show("active variant", loop_rep(active, off))

    reduced = parse_netlist((NETLISTS / "reduced_lc.cir").read_text())
    show("reduced tank", node_rep(reduced, off))

    passive = parse_netlist((NETLISTS / "passive_lc.cir").read_text())
    show("passive circuit, Cg = 8.9e-20 F", node_rep(passive, minimal))
    show("passive circuit, Lg = 1e-14 H", loop_rep(passive, loop_minimal))
    return 0


if __name__ == "__main__":
    sys.exit(main())
