"""Exact 2x2 transfer-matrix algebra for point-interaction systems.

Boundary vectors are plain length-2 arrays holding the right limits
``(psi(x_n+), psi'(x_n+))``.  Matrices are 2x2 ndarrays: real for free
propagation and jumps, complex on the diagonalized path.  Propagation here is
exact and unrenormalized; explosive growth belongs to the log-domain code in
``growth`` and an overflowing step raises instead of silently saturating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .lattice import DELTA, DELTA_PRIME, KINDS, SystemSpec

DIRICHLET_START = (0.0, 1.0)  # psi(0) = 0 normalization


def _check_lambda(lam: float):
    if not lam > 0:
        raise ValueError(f"energy must be positive, got {lam}")


def fundamental_matrix(lam: float, d: float) -> np.ndarray:
    """Propagator of (psi, psi') across a free interval of length d."""
    _check_lambda(lam)
    rt = math.sqrt(lam)
    c = math.cos(d * rt)
    s = math.sin(d * rt)
    return np.array([[c, s / rt], [-rt * s, c]])


def jump_matrix(kind: str, alpha: float) -> np.ndarray:
    """Interface matrix across one point interaction."""
    if kind == DELTA:
        return np.array([[1.0, 0.0], [alpha, 1.0]])
    if kind == DELTA_PRIME:
        return np.array([[1.0, alpha], [0.0, 1.0]])
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def step_matrix(system: SystemSpec, lam: float, n: int) -> np.ndarray:
    """One-cell transfer matrix: jump at x_n times free propagation over gap n-1."""
    _check_lambda(lam)
    if n < 1:
        raise IndexError("step index must be >= 1")
    g = system.lattice.gap(n - 1)
    if not math.isfinite(g):
        raise OverflowError(
            f"gap {n - 1} is not representable in double precision; "
            "use the log-domain growth routines instead")
    alpha = system.strengths.alpha(n)
    return jump_matrix(system.kind, alpha) @ fundamental_matrix(lam, g)


def propagate(system: SystemSpec, lam: float, xi0=DIRICHLET_START,
              n_max: int = 0) -> np.ndarray:
    """Boundary vectors xi_0 .. xi_{n_max}, shape (n_max+1, 2).

    No per-step renormalization is applied; an overflowing entry raises
    OverflowError naming the first failing step.
    """
    _check_lambda(lam)
    xi0 = np.asarray(xi0)
    if xi0.shape != (2,):
        raise ValueError("initial boundary vector must have two components")
    if not np.any(xi0 != 0):
        raise ValueError("initial boundary vector must be nonzero")
    out = np.zeros((n_max + 1, 2), dtype=np.result_type(xi0, float))
    out[0] = xi0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            out[n] = step_matrix(system, lam, n) @ out[n - 1]
            if not np.all(np.isfinite(out[n])):
                raise OverflowError(f"propagation overflowed at step n={n}")
    return out


def diagonalizer(lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Basis change (U, U_inv) that diagonalizes free propagation.

    In the new coordinates the free step becomes diag(e^{i d sqrt(lam)},
    e^{-i d sqrt(lam)}).
    """
    _check_lambda(lam)
    rt = math.sqrt(lam)
    u = np.array([[1.0, 1.0], [1j * rt, -1j * rt]])
    u_inv = np.array([[0.5, -0.5j / rt], [0.5, 0.5j / rt]])
    return u, u_inv


def inverse_step_diagonalized(kind: str, lam: float, dx: float,
                              alpha: float) -> np.ndarray:
    """Closed-form inverse of one step matrix in diagonalized coordinates."""
    _check_lambda(lam)
    rt = math.sqrt(lam)
    phase = np.array([[np.exp(-1j * rt * dx), 0.0], [0.0, np.exp(1j * rt * dx)]])
    if kind == DELTA:
        nil = np.array([[1.0, 1.0], [-1.0, -1.0]])
        coupling = np.eye(2) + (1j * alpha / (2.0 * rt)) * nil
    elif kind == DELTA_PRIME:
        nil = np.array([[-1.0, 1.0], [-1.0, 1.0]])
        coupling = np.eye(2) + (1j * alpha * rt / 2.0) * nil
    else:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return phase @ coupling


def operator_norm(m: np.ndarray) -> float:
    """Spectral norm of a 2x2 matrix, closed form from the Gram invariants.

    Uses the exact rearrangements of trace(m* m) +- 2|det m| into sums of
    squared moduli, which stay accurate when both singular values coincide
    (the naive discriminant loses half the digits there).
    """
    m = np.asarray(m, dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det != 0:
        m = m * np.exp(-0.5j * np.angle(det))
    a, b = m[0]
    c, d = m[1]
    plus = math.sqrt(abs(a + np.conj(d)) ** 2 + abs(b - np.conj(c)) ** 2)
    minus = math.sqrt(abs(a - np.conj(d)) ** 2 + abs(b + np.conj(c)) ** 2)
    return (plus + minus) / 2.0


def fundamental_norm_bound(lam: float) -> float:
    """sup over d of the free-propagator spectral norm.

    Maximized numerically over one period of d (grid scan plus bounded
    refinement); the closed-form candidate max(sqrt(lam), 1/sqrt(lam)) is not
    assumed.
    """
    _check_lambda(lam)
    period = 2.0 * math.pi / math.sqrt(lam)
    ds = np.linspace(0.0, period, 2049)
    norms = [operator_norm(fundamental_matrix(lam, d)) for d in ds]
    k = int(np.argmax(norms))
    lo = ds[max(k - 1, 0)]
    hi = ds[min(k + 1, len(ds) - 1)]
    res = minimize_scalar(lambda d: -operator_norm(fundamental_matrix(lam, d)),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return max(float(-res.fun), float(norms[k]))


@dataclass(frozen=True)
class SolutionSample:
    """(x, psi(x), psi'(x)) sampled on a grid; right limits at lattice points."""

    x: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray


def sample_solution(system: SystemSpec, lam: float, xi0=DIRICHLET_START,
                    grid=None) -> SolutionSample:
    """Evaluate the solution on a grid inside [0, x_N].

    Within each open cell the pair (psi, psi') is the free flow applied to
    the boundary vector at the cell's left endpoint, so samples inherit the
    interface conditions of the system's kind exactly.
    """
    _check_lambda(lam)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("grid must be a nonempty 1-d array of positions")
    if np.any(grid < 0):
        raise ValueError("grid positions must be nonnegative")
    x_max = float(np.max(grid))
    lat = system.lattice
    xs = [0.0]
    while xs[-1] < x_max and len(xs) - 1 < lat.max_index:
        nxt = lat.position(len(xs))
        if not math.isfinite(nxt):
            raise OverflowError("lattice position overflow inside sampling range")
        if nxt > x_max:
            break
        xs.append(nxt)
    xs = np.asarray(xs)
    vecs = propagate(system, lam, xi0, len(xs) - 1)
    cell = np.searchsorted(xs, grid, side="right") - 1
    psi = np.empty(len(grid), dtype=vecs.dtype)
    dpsi = np.empty(len(grid), dtype=vecs.dtype)
    for i, (x, n) in enumerate(zip(grid, cell)):
        v = fundamental_matrix(lam, x - xs[n]) @ vecs[n]
        psi[i], dpsi[i] = v
    return SolutionSample(x=grid, psi=psi, dpsi=dpsi)
