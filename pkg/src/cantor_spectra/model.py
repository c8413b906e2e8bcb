"""Shared value types: model parameters, grids, spectra, wavefunctions."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ModelParams", "Grid", "Spectrum", "Wavefunction", "ConvergenceError"]


class ConvergenceError(RuntimeError):
    """An iterative solve failed to reach its residual target."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


@dataclass(frozen=True)
class ModelParams:
    """The single dimensionless knob mu = sqrt(2 m lambda^2 V0) / hbar.

    Large mu is the semiclassical regime; energies are measured in units
    of the potential scale, so the spectrum of interest lies in (-1, 0].
    """

    mu: float

    def __post_init__(self):
        mu = float(self.mu)
        if not np.isfinite(mu) or mu <= 0:
            raise ValueError(f"mu must be positive and finite, got {self.mu!r}")
        object.__setattr__(self, "mu", mu)


@dataclass(frozen=True)
class Grid:
    """Uniform interior grid on (0, 1): x_i = i*h, i = 1..n, h = 1/(n+1).

    The walls x = 0 and x = 1 are not stored; Dirichlet conditions are
    implicit in the 3-point stencil.
    """

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n < 1:
            raise ValueError(f"need at least one interior node, got n={self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self):
        return 1.0 / (self.n + 1)

    @property
    def nodes(self):
        return np.arange(1, self.n + 1) * self.h


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues found in a half-open window (lo, hi].

    ``eigenvalues`` is nondecreasing; genuinely distinct levels can tie
    at float resolution when tunneling splittings drop below 1 ulp, in
    which case the multiplicity (count) is still exact.  ``method`` is
    "fd" (finite difference) or "tm" (transfer matrix).
    """

    eigenvalues: np.ndarray
    window: tuple
    tol: float
    method: str

    def __post_init__(self):
        ev = np.ascontiguousarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1:
            raise ValueError("eigenvalues must be 1-D")
        if ev.size and not np.all(np.diff(ev) >= 0):
            raise ValueError("eigenvalues must be nondecreasing")
        if not np.all(np.isfinite(ev)):
            raise ValueError("eigenvalues must be finite")
        lo, hi = (float(x) for x in self.window)
        if not lo < hi:
            raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.method not in ("fd", "tm"):
            raise ValueError(f"method must be 'fd' or 'tm', got {self.method!r}")
        ev.flags.writeable = False
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "window", (lo, hi))
        object.__setattr__(self, "tol", float(self.tol))

    def __len__(self):
        return self.eigenvalues.size

    def __iter__(self):
        return iter(self.eigenvalues)


@dataclass(frozen=True)
class Wavefunction:
    """Eigenfunction samples on the uniform interior grid.

    ``values[i]`` is psi at x = (i+1)*h.  Normalized so that the
    Riemann sum h * sum(psi^2) equals 1 within 1e-12, with the first
    non-negligible component positive (sign convention).
    """

    values: np.ndarray
    energy: float
    h: float
    residual: float = field(default=0.0)

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("values must be a nonempty 1-D array")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")
        norm = self.h * float(np.sum(v * v))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"wavefunction not normalized: h*sum(psi^2) = {norm!r}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "energy", float(self.energy))
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "residual", float(self.residual))

    @property
    def x(self):
        return np.arange(1, self.values.size + 1) * self.h
