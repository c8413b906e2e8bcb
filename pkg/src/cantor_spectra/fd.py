"""Finite-difference engine: assembly, Sturm counts, bisection, inverse iteration.

The Hamiltonian is the standard 3-point stencil on the uniform interior
grid, H = (1/mu^2) K + V with K the Dirichlet Laplacian, stored as a
symmetric tridiagonal (diagonal array + constant off-diagonal).
Eigenvalues come from bisection on the Sturm inertia count; eigenvectors
from shifted inverse iteration with banded LU solves.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels
from .model import ConvergenceError, Grid, ModelParams, Spectrum, Wavefunction
from .potential import mean_potential

__all__ = [
    "TridiagonalHamiltonian",
    "default_grid",
    "assemble_hamiltonian",
    "sturm_count",
    "eigenvalues_in_range",
    "eigenvector",
    "eigenvectors",
    "probability_density",
]

# fixed seed for inverse-iteration start vectors: outputs must be
# reproducible byte for byte across runs
_START_SEED = 0x5EED5


@dataclass(frozen=True)
class TridiagonalHamiltonian:
    """Symmetric tridiagonal operator: constant off-diagonal ``offdiag``
    (= -1/(mu^2 h^2)) and per-node diagonal ``diag``."""

    diag: np.ndarray
    offdiag: float
    grid: Grid
    params: ModelParams

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        if d.ndim != 1 or d.size != self.grid.n:
            raise ValueError("diagonal length must equal the grid size")
        d.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", float(self.offdiag))

    @property
    def n(self):
        return self.diag.size

    def eigenvalue_bounds(self):
        """Gershgorin interval containing every eigenvalue."""
        lo = float(self.diag.min()) + 2.0 * self.offdiag
        hi = float(self.diag.max()) - 2.0 * self.offdiag
        return lo, hi

    def apply(self, vec):
        out = self.diag * vec
        out[:-1] += self.offdiag * vec[1:]
        out[1:] += self.offdiag * vec[:-1]
        return out

    def to_dense(self):
        m = np.diag(self.diag)
        idx = np.arange(self.n - 1)
        m[idx, idx + 1] = self.offdiag
        m[idx + 1, idx] = self.offdiag
        return m


def default_grid(p, params):
    """Grid fine enough for the narrowest segment (>= 30 nodes) and for
    oscillations at the largest local wavenumber: n = max(2000,
    round(30/w_min) * ceil(mu/100)).  For the canonical Cantor family
    this is 30 * 3^N * ceil(mu/100)."""
    w_min = float(np.min(p.segment_widths))
    n = max(2000, int(round(30.0 / w_min)) * math.ceil(params.mu / 100.0))
    return Grid(n)


def assemble_hamiltonian(p, params, grid):
    """Assemble H on `grid`: diag_i = 2/(mu^2 h^2) + mean of v over the
    node's cell [x_i - h/2, x_i + h/2], offdiag = -1/(mu^2 h^2).

    The exact cell mean (rather than the point sample) keeps the jump
    positions of the step potential exact on any grid, so eigenvalues
    converge cleanly at second order under grid refinement.
    """
    h = grid.h
    k = 1.0 / (params.mu * params.mu * h * h)
    x = grid.nodes
    vbar = mean_potential(p, x - 0.5 * h, x + 0.5 * h)
    return TridiagonalHamiltonian(2.0 * k + vbar, -k, grid, params)


def sturm_count(hamiltonian, eps):
    """Number of eigenvalues strictly below `eps` (inertia count)."""
    if not np.isfinite(eps):
        raise ValueError(f"eps must be finite, got {eps}")
    shifts = np.array([float(eps)])
    return int(_kernels.sturm_counts(hamiltonian.diag, hamiltonian.offdiag, shifts)[0])


def _counts(hamiltonian, shifts):
    return _kernels.sturm_counts(
        hamiltonian.diag, hamiltonian.offdiag, np.ascontiguousarray(shifts, dtype=float)
    )


def _count_leq(hamiltonian, x):
    # eigenvalues <= x, via a strict count just above x
    return int(_counts(hamiltonian, np.array([np.nextafter(x, np.inf)]))[0])


def eigenvalues_in_range(hamiltonian, lo, hi, tol=1e-10):
    """All eigenvalues in the half-open window (lo, hi], each bracketed
    by bisection on the Sturm count to width <= tol.

    The returned count always equals the inertia difference across the
    window; levels closer than float resolution come out as ties with
    the right multiplicity.
    """
    lo = float(lo)
    hi = float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("window endpoints must be finite")
    if lo >= hi:
        raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    n_lo = _count_leq(hamiltonian, lo)
    n_hi = _count_leq(hamiltonian, hi)
    m = n_hi - n_lo
    if m == 0:
        return Spectrum(np.empty(0), (lo, hi), tol, "fd")

    targets = np.arange(n_lo, n_hi)
    a = np.full(m, lo)
    b = np.full(m, np.nextafter(hi, np.inf))
    # invariant: count(a_t) <= target_t < count(b_t)
    live = np.ones(m, dtype=bool)
    while True:
        live &= (b - a) > tol
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        mid = 0.5 * (a[idx] + b[idx])
        stuck = (mid <= a[idx]) | (mid >= b[idx])
        if np.any(stuck):
            live[idx[stuck]] = False
            idx = idx[~stuck]
            mid = mid[~stuck]
            if idx.size == 0:
                continue
        counts = _counts(hamiltonian, mid)
        go_right = counts <= targets[idx]
        a[idx[go_right]] = mid[go_right]
        b[idx[~go_right]] = mid[~go_right]

    return Spectrum(np.sort(0.5 * (a + b)), (lo, hi), tol, "fd")


def _banded(hamiltonian, shift):
    n = hamiltonian.n
    ab = np.zeros((3, n))
    ab[0, 1:] = hamiltonian.offdiag
    ab[1, :] = hamiltonian.diag - shift
    ab[2, :-1] = hamiltonian.offdiag
    return ab


def eigenvector(hamiltonian, eps, tol=1e-10):
    """Eigenvector for the eigenvalue nearest `eps` by inverse iteration.

    Iterates shifted banded solves from a fixed-seed start vector until
    the 2-norm residual ||H psi - eps psi|| <= max(1e-10, 10*tol);
    raises ConvergenceError (with the final residual) after 50
    iterations.  The result is grid-normalized, h * sum(psi^2) = 1,
    with the first non-negligible component positive.
    """
    psi, resid = _inverse_iteration(hamiltonian, float(eps), float(tol), ())
    return _as_wavefunction(hamiltonian, psi, float(eps), resid)


def eigenvectors(hamiltonian, energies, tol=1e-10):
    """Eigenvectors for several eigenvalues (sorted input), orthogonalizing
    within near-degenerate groups so clustered states come out as an
    orthonormal set instead of 50 copies of the same vector."""
    energies = [float(e) for e in energies]
    group_gap = max(1e-8, 100.0 * tol)
    out = []
    basis = []  # (energy, l2-normalized vector) of the current cluster
    for eps in energies:
        if basis and abs(eps - basis[-1][0]) > group_gap:
            basis = []
        prior = tuple(vec for _, vec in basis)
        psi, resid = _inverse_iteration(hamiltonian, eps, tol, prior)
        basis.append((eps, psi.copy()))
        out.append(_as_wavefunction(hamiltonian, psi, eps, resid))
    return out


def _inverse_iteration(hamiltonian, eps, tol, ortho):
    target = max(1e-10, 10.0 * tol)
    shift = eps
    ab = _banded(hamiltonian, shift)
    rng = np.random.default_rng(_START_SEED)
    vec = rng.standard_normal(hamiltonian.n)
    vec /= np.linalg.norm(vec)
    resid = np.inf
    for _ in range(50):
        try:
            y = solve_banded((1, 1), ab, vec)
        except np.linalg.LinAlgError:
            # exactly singular shift: nudge it as a tie-breaker
            shift = shift + 10.0 * tol
            ab = _banded(hamiltonian, shift)
            continue
        for q in ortho:
            y -= (q @ y) * q
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            # deflation annihilated the iterate; restart orthogonally
            y = rng.standard_normal(hamiltonian.n)
            for q in ortho:
                y -= (q @ y) * q
            norm = np.linalg.norm(y)
        vec = y / norm
        resid = float(np.linalg.norm(hamiltonian.apply(vec) - eps * vec))
        if resid <= target:
            break
    else:
        raise ConvergenceError(
            f"inverse iteration stalled at residual {resid:.3e} "
            f"(target {target:.3e}) after 50 iterations",
            residual=resid,
        )
    # one final re-orthogonalization pass keeps clustered vectors
    # mutually orthogonal to working precision
    for q in ortho:
        vec -= (q @ vec) * q
    vec /= np.linalg.norm(vec)
    return vec, resid


def _as_wavefunction(hamiltonian, unit_vec, eps, resid):
    h = hamiltonian.grid.h
    psi = unit_vec / math.sqrt(h)
    big = np.flatnonzero(np.abs(psi) > 1e-8 * np.abs(psi).max())
    if psi[big[0]] < 0:
        psi = -psi
    return Wavefunction(psi, eps, h, residual=resid)


def probability_density(psi):
    """|psi|^2 on the grid; Riemann-sums to 1 for a normalized state."""
    return psi.values * psi.values
