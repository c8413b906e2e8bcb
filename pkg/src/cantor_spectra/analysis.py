"""Spectral observables built on top of the two solver engines.

Integrated density of states (the staircase), gap-threshold clustering,
localization measures (participation ratio, per-segment mass), and
parameter sweeps over the dimensionless measure mu.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fd import assemble_hamiltonian, default_grid, eigenvalues_in_range, eigenvectors
from .model import ModelParams, Wavefunction

__all__ = [
    "StaircaseData",
    "ClusterReport",
    "SweepRecord",
    "staircase",
    "detect_clusters",
    "participation_ratio",
    "segment_masses",
    "well_mass_fraction",
    "mu_sweep",
]


@dataclass(frozen=True)
class StaircaseData:
    """Integrated density of states sampled on a uniform energy grid.

    counts[i] is the number of eigenvalues at or below energies[i]; the
    counts are raw integers (any normalization is a plotting choice).
    """

    energies: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        energies = np.asarray(self.energies, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if energies.ndim != 1 or counts.shape != energies.shape:
            raise ValueError("energies and counts must be 1-D and the same length")
        if energies.size and not np.all(np.diff(energies) > 0):
            raise ValueError("energies must be strictly increasing")
        if counts.size and (counts[0] < 0 or np.any(np.diff(counts) < 0)):
            raise ValueError("counts must be nonnegative and nondecreasing")
        energies.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.energies.size


def staircase(counter, lo, hi, resolution):
    """Evaluate an eigenvalue-counting function on resolution+1 uniform
    energies in [lo, hi].

    `counter` maps a single energy to the number of eigenvalues strictly
    below it (a bound sturm_count or node_count); each grid energy is
    nudged one ulp up before counting so that counts[i] includes
    eigenvalues equal to energies[i].
    """
    lo = float(lo)
    hi = float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
        raise ValueError(f"need finite lo < hi, got ({lo}, {hi})")
    if not isinstance(resolution, (int, np.integer)) or resolution < 1:
        raise ValueError(f"resolution must be a positive integer, got {resolution!r}")
    energies = np.linspace(lo, hi, resolution + 1)
    counts = np.fromiter(
        (counter(np.nextafter(e, np.inf)) for e in energies), dtype=np.int64, count=energies.size
    )
    return StaircaseData(energies, counts)


@dataclass(frozen=True)
class ClusterReport:
    """Partition of a sorted spectrum into gap-threshold clusters.

    ranges holds half-open index pairs (start, stop) that are contiguous,
    disjoint and cover the spectrum in order; consecutive eigenvalues in
    one cluster differ by <= gap_threshold, across a boundary by more.
    """

    ranges: tuple
    gap_threshold: float

    def __post_init__(self):
        if not self.gap_threshold >= 0 or not np.isfinite(self.gap_threshold):
            raise ValueError(f"gap_threshold must be finite and >= 0, got {self.gap_threshold}")
        ranges = tuple((int(a), int(b)) for a, b in self.ranges)
        pos = 0
        for a, b in ranges:
            if a != pos or b <= a:
                raise ValueError(f"ranges must be contiguous nonempty index pairs, got {ranges}")
            pos = b
        object.__setattr__(self, "ranges", ranges)

    def __len__(self):
        return len(self.ranges)

    @property
    def sizes(self):
        return tuple(b - a for a, b in self.ranges)

    @property
    def multi_member(self):
        """Ranges holding more than one eigenvalue."""
        return tuple(r for r in self.ranges if r[1] - r[0] > 1)


def detect_clusters(s, gap_threshold):
    """Greedy single-pass clustering of a sorted spectrum: a new cluster
    starts wherever the gap to the previous eigenvalue exceeds
    gap_threshold.  Accepts a Spectrum or a sorted array; an empty
    spectrum gives an empty report."""
    values = np.asarray(getattr(s, "eigenvalues", s), dtype=float)
    gap_threshold = float(gap_threshold)
    if values.size == 0:
        return ClusterReport((), gap_threshold)
    if np.any(np.diff(values) < 0):
        raise ValueError("eigenvalues must be sorted")
    breaks = np.flatnonzero(np.diff(values) > gap_threshold) + 1
    edges = np.concatenate(([0], breaks, [values.size]))
    return ClusterReport(tuple(zip(edges[:-1], edges[1:])), gap_threshold)


def _values_and_h(psi, h):
    if isinstance(psi, Wavefunction):
        return psi.values, psi.h
    if h is None:
        raise ValueError("h is required when psi is a bare array")
    return np.asarray(psi, dtype=float), float(h)


def participation_ratio(psi, h=None):
    """PR = 1 / (h * sum(psi**4)): the effective fraction of the domain a
    normalized state occupies (h for a spike, ~1 for a flat state)."""
    values, h = _values_and_h(psi, h)
    nrm = h * float(np.sum(values * values))
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"psi is not normalized: h*sum(psi^2) = {nrm!r}")
    return 1.0 / (h * float(np.sum(values**4)))


def segment_masses(p, psi, h=None):
    """Probability mass h*sum(psi_i^2) per potential segment, assigning
    node x_i to the half-open segment [b_j, b_{j+1}) containing it."""
    values, h = _values_and_h(psi, h)
    x = np.arange(1, values.size + 1) * h
    idx = np.searchsorted(p.breakpoints, x, side="right") - 1
    idx = np.minimum(idx, p.num_segments - 1)
    return np.bincount(idx, weights=h * values * values, minlength=p.num_segments)


def well_mass_fraction(p, psi, h=None):
    """Fraction of the total probability mass inside the well segments
    (segments at the potential minimum)."""
    masses = segment_masses(p, psi, h)
    wells = p.values == p.min_value
    return float(masses[wells].sum() / masses.sum())


@dataclass(frozen=True)
class SweepRecord:
    """Spectrum summary for one value of mu: the count of eigenvalues
    below zero, the extreme eigenvalues found in the window (nan when
    empty), and the per-state participation ratios in energy order."""

    mu: float
    count_below_zero: int
    e_min: float
    e_max: float
    prs: np.ndarray

    def __post_init__(self):
        prs = np.asarray(self.prs, dtype=float)
        prs.setflags(write=False)
        object.__setattr__(self, "prs", prs)


def _worker_count():
    raw = os.environ.get("CANTOR_SPECTRA_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CANTOR_SPECTRA_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"CANTOR_SPECTRA_THREADS must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def mu_sweep(p, mus, window=(-1.0, 0.0), tol=1e-10):
    """Solve the same potential at each mu and summarize the spectra.

    One SweepRecord per mu, in input order.  Each mu is an independent
    work item; they run on a thread pool sized by CANTOR_SPECTRA_THREADS
    (0 or unset picks the cpu count).  The Sturm kernel and the banded
    solves drop the GIL, so the items genuinely overlap.
    """
    mus = [float(m) for m in mus]
    if not mus:
        raise ValueError("mus must be nonempty")
    if any(not math.isfinite(m) or m <= 0 for m in mus):
        raise ValueError(f"every mu must be positive and finite, got {mus}")
    lo, hi = window

    def solve_one(mu):
        params = ModelParams(mu=mu)
        grid = default_grid(p, params)
        ham = assemble_hamiltonian(p, params, grid)
        spect = eigenvalues_in_range(ham, lo, hi, tol)
        vals = spect.eigenvalues
        if vals.size == 0:
            return SweepRecord(mu, 0, math.nan, math.nan, np.empty(0))
        vecs = eigenvectors(ham, vals, tol)
        prs = np.array([participation_ratio(v) for v in vecs])
        below = int(np.count_nonzero(vals < 0.0))
        return SweepRecord(mu, below, float(vals[0]), float(vals[-1]), prs)

    workers = min(_worker_count(), len(mus))
    if workers == 1:
        return [solve_one(m) for m in mus]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(solve_one, mus))
