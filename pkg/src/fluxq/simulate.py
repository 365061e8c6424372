"""Classical and Gaussian-quantum time evolution of quadratic circuits.

The analytic normal-mode solution is the primary engine: augmented circuits
are stiff (mode ratios around 1e4), which fixed-step integrators either
alias or crawl through.  A kick-drift-kick leapfrog is provided purely as
an independent cross-validation oracle.  Expectation values of a Gaussian
state follow the classical trajectories exactly, and the covariance rotates
mode by mode, so nothing beyond the mode solution is ever needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lagrangian import QuadraticLagrangian, Representation
from .netlist import Circuit, ComponentKind
from .quantize import GaussianState, HamiltonianSystem, ModeDecomposition, normal_modes

_IC_RESIDUAL_TOL = 1e-9


class InconsistentInitialConditions(ValueError):
    """The declared initial conditions violate the flux/charge laws."""


class StepTooLarge(ValueError):
    """Leapfrog step exceeds the stability/accuracy budget."""


@dataclass(frozen=True)
class ComponentSeries:
    voltage: np.ndarray
    current: np.ndarray


@dataclass(frozen=True)
class ModeSolution:
    """Per-mode cosine parameters x_k(t) = A_k cos(omega_k t + theta_k);
    zero modes carry linear drift (offset + rate * t) instead."""

    omegas: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    drift_offset: np.ndarray
    drift_rate: np.ndarray


@dataclass
class Trajectory:
    times: np.ndarray
    labels: tuple[str, ...]
    coords: np.ndarray  # (dim, nt)
    velocities: np.ndarray
    accelerations: np.ndarray
    momenta: np.ndarray
    energy: np.ndarray
    lagrangian: QuadraticLagrangian | None = None
    mode_solution: ModeSolution | None = None
    observables: dict[str, ComponentSeries] = field(default_factory=dict)


def _is_flux_type(rep: Representation) -> bool:
    return rep in (Representation.NODE_FLUX, Representation.EXTENDED_NODE_FLUX)


def _lstsq_with_check(rows: np.ndarray, rhs: np.ndarray, dim: int, what: str):
    if rows.size == 0:
        return np.zeros(dim)
    solution, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    residual = rows @ solution - rhs
    scale = np.linalg.norm(rhs)
    rel = np.linalg.norm(residual) / scale if scale > 0 else np.linalg.norm(residual)
    if rel > _IC_RESIDUAL_TOL:
        raise InconsistentInitialConditions(
            f"{what} initial conditions are inconsistent (relative residual {rel:.3e})"
        )
    return solution


def initial_state(
    circuit: Circuit,
    lagrangian: QuadraticLagrangian,
    ics: dict[str, float] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Map component initial conditions to canonical coordinates (x0, p0).

    Node-flux type: inductor currents pin branch fluxes (phi = L i) and so
    x0; capacitor voltages pin branch flux rates, giving xdot0 and
    p0 = M xdot0.  Loop-charge: the dual (capacitor charges pin x0,
    inductor currents pin xdot0).  Design components missing from `ics`
    default to zero; geometric components are constrained only when
    explicitly given, and any remaining freedom is resolved minimum-norm.
    """
    declared = dict(circuit.ics)
    if ics:
        declared.update(ics)
    for cid in declared:
        circuit.component(cid)  # KeyError on unknown ids

    def constraint(kinds: tuple[ComponentKind, ...], target):
        rows, rhs = [], []
        for c in circuit.components:
            if c.kind not in kinds:
                continue
            if c.geometric and c.id not in declared:
                continue
            rows.append(lagrangian.assignment_row(c.id))
            rhs.append(target(c, declared.get(c.id, 0.0)))
        return np.array(rows).reshape(len(rows), lagrangian.dim), np.array(rhs)

    if _is_flux_type(lagrangian.representation):
        rows_x, rhs_x = constraint(
            (ComponentKind.INDUCTOR,), lambda c, ic: c.value * ic
        )
        rows_v, rhs_v = constraint((ComponentKind.CAPACITOR,), lambda c, ic: ic)
    else:
        rows_x, rhs_x = constraint(
            (ComponentKind.CAPACITOR,), lambda c, ic: c.value * ic
        )
        rows_v, rhs_v = constraint((ComponentKind.INDUCTOR,), lambda c, ic: ic)

    x0 = _lstsq_with_check(rows_x, rhs_x, lagrangian.dim, "coordinate")
    xdot0 = _lstsq_with_check(rows_v, rhs_v, lagrangian.dim, "velocity")
    p0 = lagrangian.M @ xdot0
    return x0, p0


def _mode_coordinates(modes: ModeDecomposition, x0, p0):
    xt0 = np.linalg.solve(modes.modes, x0)
    pt0 = modes.modes.T @ p0
    return xt0, pt0


def evolve_modes(
    h: HamiltonianSystem,
    modes: ModeDecomposition,
    x0: np.ndarray,
    p0: np.ndarray,
    times: np.ndarray,
    lagrangian: QuadraticLagrangian | None = None,
) -> Trajectory:
    """Exact per-mode evolution on the given time grid.

    Means of a Gaussian state follow these trajectories identically; the
    covariance rotates with the same per-mode angles (see
    propagate_covariance).  Velocities and accelerations come from the
    analytic derivatives of the mode cosines, never finite differences.
    """
    xt0, pt0 = _mode_coordinates(modes, x0, p0)
    t = np.asarray(times, dtype=float)
    w = modes.omegas
    osc = w > 0.0

    xt = np.empty((modes.dim, t.size))
    vt = np.empty_like(xt)
    at = np.empty_like(xt)
    pt = np.empty_like(xt)

    phase = np.outer(w[osc], t)
    cos, sin = np.cos(phase), np.sin(phase)
    wk = w[osc][:, None]
    xt[osc] = xt0[osc][:, None] * cos + (pt0[osc] / w[osc])[:, None] * sin
    pt[osc] = -wk * xt0[osc][:, None] * sin + pt0[osc][:, None] * cos
    vt[osc] = pt[osc]
    at[osc] = -(wk**2) * xt[osc]

    free = ~osc
    xt[free] = xt0[free][:, None] + pt0[free][:, None] * t
    pt[free] = np.repeat(pt0[free][:, None], t.size, axis=1)
    vt[free] = pt[free]
    at[free] = 0.0

    v = modes.modes
    u = modes.momentum_modes()
    coords = v @ xt
    velocities = v @ vt
    accelerations = v @ at
    momenta = u @ pt
    energy = 0.5 * np.sum(pt**2 + (w[:, None] * xt) ** 2, axis=0)

    amplitude = np.where(osc, np.hypot(xt0, np.divide(pt0, w, out=np.zeros_like(w), where=osc)), 0.0)
    theta = np.where(
        osc,
        np.arctan2(-np.divide(pt0, w, out=np.zeros_like(w), where=osc), xt0),
        0.0,
    )
    solution = ModeSolution(
        omegas=w.copy(),
        amplitudes=amplitude,
        phases=theta,
        drift_offset=np.where(free, xt0, 0.0),
        drift_rate=np.where(free, pt0, 0.0),
    )
    return Trajectory(
        times=t,
        labels=h.labels,
        coords=coords,
        velocities=velocities,
        accelerations=accelerations,
        momenta=momenta,
        energy=energy,
        lagrangian=lagrangian,
        mode_solution=solution,
    )


def max_frequency(h: HamiltonianSystem) -> float:
    modes = normal_modes(h)
    return float(modes.omegas.max()) if modes.dim else 0.0


def evolve_leapfrog(
    h: HamiltonianSystem,
    x0: np.ndarray,
    p0: np.ndarray,
    dt: float,
    steps: int,
    lagrangian: QuadraticLagrangian | None = None,
    stride: int = 1,
) -> Trajectory:
    """Kick-drift-kick stepping of H, recorded every `stride` steps.  Used
    as a cross-validation oracle against evolve_modes."""
    wmax = max_frequency(h)
    if wmax > 0.0 and dt > 2.0 * np.pi / (20.0 * wmax):
        raise StepTooLarge(
            f"dt={dt:.3e} exceeds 2*pi/(20*omega_max)={2.0 * np.pi / (20.0 * wmax):.3e}"
        )
    dim = h.dim
    n_rec = steps // stride + 1
    coords = np.empty((dim, n_rec))
    momenta = np.empty((dim, n_rec))
    times = np.empty(n_rec)

    if dim == 1:
        k = float(h.k[0, 0])
        minv = float(h.minv[0, 0])
        x = float(x0[0])
        p = float(p0[0])
        half = 0.5 * dt
        coords[0, 0], momenta[0, 0], times[0] = x, p, 0.0
        rec = 1
        for step in range(1, steps + 1):
            p -= half * k * x
            x += dt * minv * p
            p -= half * k * x
            if step % stride == 0:
                coords[0, rec] = x
                momenta[0, rec] = p
                times[rec] = step * dt
                rec += 1
    else:
        x = np.array(x0, dtype=float)
        p = np.array(p0, dtype=float)
        half = 0.5 * dt
        coords[:, 0], momenta[:, 0], times[0] = x, p, 0.0
        rec = 1
        for step in range(1, steps + 1):
            p -= half * (h.k @ x)
            x += dt * (h.minv @ p)
            p -= half * (h.k @ x)
            if step % stride == 0:
                coords[:, rec] = x
                momenta[:, rec] = p
                times[rec] = step * dt
                rec += 1

    velocities = h.minv @ momenta
    accelerations = -(h.minv @ (h.k @ coords))
    energy = 0.5 * (
        np.sum(momenta * (h.minv @ momenta), axis=0)
        + np.sum(coords * (h.k @ coords), axis=0)
    )
    return Trajectory(
        times=times,
        labels=h.labels,
        coords=coords,
        velocities=velocities,
        accelerations=accelerations,
        momenta=momenta,
        energy=energy,
        lagrangian=lagrangian,
    )


def observables(
    circuit: Circuit, lagrangian: QuadraticLagrangian, trajectory: Trajectory
) -> dict[str, ComponentSeries]:
    """Per-component voltage (V) and current (A) series from the branch
    assignments and the analytic trajectory derivatives."""
    if trajectory.lagrangian is not None and trajectory.lagrangian is not lagrangian:
        if trajectory.lagrangian.labels != lagrangian.labels:
            raise ValueError("trajectory does not match this coordinate system")
    out: dict[str, ComponentSeries] = {}
    flux_type = _is_flux_type(lagrangian.representation)
    for c in circuit.components:
        if c.id not in lagrangian.flux_assignment:
            raise ValueError(f"component {c.id!r} missing from the assignment")
        row = lagrangian.assignment_row(c.id)
        value = row @ trajectory.coords
        rate = row @ trajectory.velocities
        accel = row @ trajectory.accelerations
        if flux_type:
            voltage = rate
            current = value / c.value if c.kind is ComponentKind.INDUCTOR else c.value * accel
        else:
            current = rate
            voltage = value / c.value if c.kind is ComponentKind.CAPACITOR else c.value * accel
        out[c.id] = ComponentSeries(voltage=voltage, current=current)
    trajectory.observables.update(out)
    return out


def evolution_matrix(
    modes: ModeDecomposition, h: HamiltonianSystem, t: float
) -> np.ndarray:
    """Analytic phase-space map Phi(t) over stacked (x..., p...); it is
    symplectic: Phi^T J Phi = J."""
    dim = modes.dim
    v = modes.modes
    u = modes.momentum_modes()
    blocks = np.zeros((2 * dim, 2 * dim))
    for k in range(dim):
        w = modes.omegas[k]
        if w > 0.0:
            c, s = np.cos(w * t), np.sin(w * t)
            rot = np.array([[c, s / w], [-w * s, c]])
        else:
            rot = np.array([[1.0, t], [0.0, 1.0]])
        blocks[k, k] = rot[0, 0]
        blocks[k, dim + k] = rot[0, 1]
        blocks[dim + k, k] = rot[1, 0]
        blocks[dim + k, dim + k] = rot[1, 1]
    basis = np.zeros((2 * dim, 2 * dim))
    basis[:dim, :dim] = v
    basis[dim:, dim:] = u
    basis_inv = np.zeros_like(basis)
    basis_inv[:dim, :dim] = u.T
    basis_inv[dim:, dim:] = v.T
    return basis @ blocks @ basis_inv


def propagate_covariance(
    modes: ModeDecomposition,
    h: HamiltonianSystem,
    state: GaussianState,
    times: np.ndarray,
) -> np.ndarray:
    """Covariance matrices cov(t) = Phi(t) cov Phi(t)^T, shape (nt, 2n, 2n)."""
    t = np.asarray(times, dtype=float)
    out = np.empty((t.size, *state.cov.shape))
    for i, ti in enumerate(t):
        phi = evolution_matrix(modes, h, float(ti))
        out[i] = phi @ state.cov @ phi.T
    return out
