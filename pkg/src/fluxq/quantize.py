"""Legendre transform, quantizability diagnosis, normal modes and Gaussian
ground states for quadratic circuit Lagrangians.

A representation is quantizable exactly when its kinetic matrix M is
nonsingular: every coordinate then owns a conjugate momentum p = M xdot.
M is a positively weighted Gram matrix of the kinetic components' branch
assignment vectors, so its null space is the exact (rational) null space
of those vectors; the numeric singular values only confirm it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg
import scipy.optimize

from .lagrangian import QuadraticLagrangian, Representation

HBAR = 1.054571817e-34  # J s

_NUMERIC_TOL = 1e-12


class SingularKineticMatrix(ValueError):
    """Legendre transform attempted on a representation with passive
    coordinates; carries the diagnosis."""

    def __init__(self, diagnosis: "QuantizabilityDiagnosis"):
        super().__init__(
            "kinetic matrix is singular: " + "; ".join(diagnosis.attributions)
        )
        self.diagnosis = diagnosis


@dataclass(frozen=True)
class QuantizabilityDiagnosis:
    quantizable: bool
    null_space: tuple[np.ndarray, ...]
    attributions: tuple[str, ...]
    representation: Representation


@dataclass
class HamiltonianSystem:
    """H(x, p) = 1/2 p^T Minv p + 1/2 x^T K x."""

    labels: tuple[str, ...]
    minv: np.ndarray
    k: np.ndarray
    hbar: float = HBAR
    _chol_m: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    def mass_factor(self) -> np.ndarray:
        """A matrix F with M = F F^T (not necessarily triangular-lower)."""
        if self._chol_m is not None:
            return self._chol_m
        r = np.linalg.cholesky(self.minv)
        # minv = r r^T  =>  M = r^{-T} r^{-1}, so F = r^{-T}
        return scipy.linalg.solve_triangular(r, np.eye(self.dim), lower=True).T

    def mass_matrix(self) -> np.ndarray:
        f = self.mass_factor()
        return f @ f.T

    def energy(self, x: np.ndarray, p: np.ndarray) -> float:
        return 0.5 * float(p @ self.minv @ p) + 0.5 * float(x @ self.k @ x)


@dataclass(frozen=True)
class ModeDecomposition:
    """K V = M V diag(omega^2) with V^T M V = I; omegas ascending."""

    omegas: np.ndarray
    modes: np.ndarray
    zero_mode_count: int

    @property
    def dim(self) -> int:
        return len(self.omegas)

    def momentum_modes(self) -> np.ndarray:
        """Columns M v_k, i.e. V^{-T}; maps mode momenta to coordinates."""
        return np.linalg.solve(self.modes.T, np.eye(self.dim))


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state over stacked (x..., p...) with mean and covariance."""

    mean: np.ndarray
    cov: np.ndarray


def _exact_nullspace(rows: list[list[Fraction]], dim: int) -> list[list[Fraction]]:
    """Null-space basis of a rational matrix by Gauss-Jordan elimination."""
    matrix = [list(r) for r in rows]
    pivots: list[int] = []
    rank = 0
    for col in range(dim):
        pivot_row = None
        for r in range(rank, len(matrix)):
            if matrix[r][col] != 0:
                pivot_row = r
                break
        if pivot_row is None:
            continue
        matrix[rank], matrix[pivot_row] = matrix[pivot_row], matrix[rank]
        pv = matrix[rank][col]
        matrix[rank] = [x / pv for x in matrix[rank]]
        for r in range(len(matrix)):
            if r != rank and matrix[r][col] != 0:
                factor = matrix[r][col]
                matrix[r] = [a - factor * b for a, b in zip(matrix[r], matrix[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(dim) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * dim
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -matrix[r][fc]
        basis.append(vec)
    return basis


def _describe_null_vector(
    vec: np.ndarray, labels: tuple[str, ...], rep: Representation
) -> str:
    support = [labels[i] for i in np.flatnonzero(vec)]
    if rep is Representation.NODE_FLUX and all(s.startswith("phi_") for s in support):
        nodes = ", ".join(s[len("phi_") :] for s in support)
        if len(support) == 1:
            return f"node {nodes}: no attached capacitance"
        return f"nodes {nodes}: no capacitive path to ground"
    if rep is Representation.LOOP_CHARGE and all(s.startswith("Q_") for s in support):
        loops = ", ".join(s[len("Q_") :] for s in support)
        if len(support) == 1:
            return f"loop {loops}: no inductance around the loop"
        return f"loops {loops}: no net inductance around the combination"
    return "coordinates " + ", ".join(support) + ": no kinetic support"


def diagnose_quantizability(lagrangian: QuadraticLagrangian) -> QuantizabilityDiagnosis:
    """Null space of M, computed exactly from the kinetic components'
    assignment vectors and confirmed against the singular values of M."""
    dim = lagrangian.dim
    index = {lbl: i for i, lbl in enumerate(lagrangian.labels)}
    rows: list[list[Fraction]] = []
    for cid in lagrangian.kinetic_components:
        row = [Fraction(0)] * dim
        for lbl, coeff in lagrangian.flux_assignment[cid].items():
            row[index[lbl]] = Fraction(coeff).limit_denominator(10**9)
        rows.append(row)
    for form in lagrangian.kinetic_forms:
        row = [Fraction(0)] * dim
        for lbl, coeff in form.items():
            row[index[lbl]] = Fraction(coeff).limit_denominator(10**9)
        rows.append(row)
    basis = _exact_nullspace(rows, dim)

    null_vectors = []
    for vec in basis:
        arr = np.array([float(x) for x in vec])
        arr = arr / np.linalg.norm(arr)
        lead = np.flatnonzero(arr)[0]
        if arr[lead] < 0:
            arr = -arr
        null_vectors.append(arr)

    svals = np.linalg.svd(lagrangian.M, compute_uv=False) if dim else np.zeros(0)
    smax = svals.max() if svals.size else 0.0
    numeric_null = (
        int(np.sum(svals < _NUMERIC_TOL * smax)) if smax > 0 else dim
    )
    if numeric_null != len(null_vectors):
        raise RuntimeError(
            f"structural null space dimension {len(null_vectors)} disagrees with "
            f"numeric estimate {numeric_null}"
        )

    attributions = tuple(
        _describe_null_vector(v, lagrangian.labels, lagrangian.representation)
        for v in null_vectors
    )
    return QuantizabilityDiagnosis(
        quantizable=not null_vectors,
        null_space=tuple(null_vectors),
        attributions=attributions,
        representation=lagrangian.representation,
    )


def legendre_transform(lagrangian: QuadraticLagrangian) -> HamiltonianSystem:
    """H = 1/2 p^T M^{-1} p + 1/2 x^T K x with p = M xdot.  The inverse is
    taken through a symmetric (Cholesky) factorization."""
    diagnosis = diagnose_quantizability(lagrangian)
    if not diagnosis.quantizable:
        raise SingularKineticMatrix(diagnosis)
    chol = np.linalg.cholesky(lagrangian.M)
    inv_factor = scipy.linalg.solve_triangular(
        chol, np.eye(lagrangian.dim), lower=True
    )
    minv = inv_factor.T @ inv_factor
    minv = 0.5 * (minv + minv.T)
    return HamiltonianSystem(
        labels=lagrangian.labels,
        minv=minv,
        k=lagrangian.K.copy(),
        _chol_m=chol,
    )


def _potential_rank(k: np.ndarray) -> int:
    """Numeric rank of the PSD potential matrix, robust to stiff scales.

    Symmetric equilibration to unit diagonal keeps structurally zero
    directions at machine-zero singular values, while physically tiny but
    nonzero stiffnesses stay O(1); a plain threshold against the largest
    eigenvalue of K would swallow them in stiff augmented circuits."""
    dim = k.shape[0]
    if dim == 0:
        return 0
    diag = np.diag(k)
    # PSD: a zero diagonal entry forces a zero row, so scaling it by 1 is safe
    scale = np.where(diag > 0.0, 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0)), 1.0)
    ks = k * np.outer(scale, scale)
    svals = np.linalg.svd(ks, compute_uv=False)
    smax = svals.max() if svals.size else 0.0
    if smax == 0.0:
        return 0
    return int(np.sum(svals > 1e-10 * smax))


def normal_modes(h: HamiltonianSystem) -> ModeDecomposition:
    """Solve K v = omega^2 M v by symmetric reduction: factor M = F F^T,
    eigendecompose F^{-1} K F^{-T}, back-transform.  Zero eigenvalues of K
    are legal zero modes, not errors; their count is the corank of K
    (M is positive definite here, so nonzero modes = rank K)."""
    f = h.mass_factor()
    kt = scipy.linalg.solve_triangular(f, h.k, lower=True) if _is_lower(f) else (
        np.linalg.solve(f, h.k)
    )
    kt = (
        scipy.linalg.solve_triangular(f, kt.T, lower=True).T
        if _is_lower(f)
        else np.linalg.solve(f, kt.T).T
    )
    kt = 0.5 * (kt + kt.T)
    evals, u = np.linalg.eigh(kt)
    v = (
        scipy.linalg.solve_triangular(f.T, u, lower=False)
        if _is_lower(f)
        else np.linalg.solve(f.T, u)
    )
    zero_count = h.dim - _potential_rank(h.k)
    clipped = np.clip(evals, 0.0, None)
    clipped[:zero_count] = 0.0
    omegas = np.sqrt(clipped)
    return ModeDecomposition(omegas=omegas, modes=v, zero_mode_count=zero_count)


def _is_lower(f: np.ndarray) -> bool:
    return bool(np.allclose(f, np.tril(f)))


def ground_state(modes: ModeDecomposition, h: HamiltonianSystem) -> GaussianState:
    """Vacuum of the oscillating modes: in mass-normalized coordinates each
    mode k has <x^2> = hbar / (2 omega_k) and <p^2> = hbar omega_k / 2.
    Zero modes have no normalizable ground state and are skipped with a
    warning; the state is then restricted to the oscillating subspace."""
    if modes.zero_mode_count:
        warnings.warn(
            f"{modes.zero_mode_count} zero mode(s); ground state restricted to the "
            "oscillating subspace",
            stacklevel=2,
        )
    dim = modes.dim
    u = modes.momentum_modes()
    cov_x = np.zeros((dim, dim))
    cov_p = np.zeros((dim, dim))
    for k in range(dim):
        w = modes.omegas[k]
        if w == 0.0:
            continue
        vk = modes.modes[:, k]
        uk = u[:, k]
        cov_x += (h.hbar / (2.0 * w)) * np.outer(vk, vk)
        cov_p += (h.hbar * w / 2.0) * np.outer(uk, uk)
    cov = np.zeros((2 * dim, 2 * dim))
    cov[:dim, :dim] = cov_x
    cov[dim:, dim:] = cov_p
    return GaussianState(mean=np.zeros(2 * dim), cov=cov)


def mode_uncertainty_products(state: GaussianState) -> np.ndarray:
    """Per-coordinate uncertainty products delta_x_i * delta_p_i."""
    dim = state.cov.shape[0] // 2
    dx = np.sqrt(np.diag(state.cov)[:dim])
    dp = np.sqrt(np.diag(state.cov)[dim:])
    return dx * dp


def mode_attribution(
    modes: ModeDecomposition, h: HamiltonianSystem
) -> dict[str, float]:
    """Assign each coordinate the angular frequency (rad/s) of the mode it
    dominates in mass-weighted magnitude.  Greedy argmax over |M^{1/2} V|,
    ties to the lower index; conflicts resolved by optimal assignment."""
    m = h.mass_matrix()
    evals, q = np.linalg.eigh(m)
    msqrt = q @ np.diag(np.sqrt(np.clip(evals, 0.0, None))) @ q.T
    w = np.abs(msqrt @ modes.modes)

    picks = [int(np.argmax(w[:, k])) for k in range(modes.dim)]
    if len(set(picks)) != modes.dim:
        rows, cols = scipy.optimize.linear_sum_assignment(-w.T)
        picks = [int(c) for _, c in sorted(zip(rows, cols))]
    return {h.labels[coord]: float(modes.omegas[k]) for k, coord in enumerate(picks)}
