"""Bound states of a quantum particle in a box threaded by a Cantor-like
piecewise-constant potential.

Two independent solver routes cross-check each other: a finite-difference
Hamiltonian solved by Sturm bisection plus inverse iteration (`fd`), and
an exact transfer-matrix shooting method (`tm`).  `analysis` turns the
spectra into observables (integrated density of states, gap clusters,
participation ratios, mu sweeps) and `cli` drives everything from the
command line.
"""

from .analysis import (
    ClusterReport,
    StaircaseData,
    SweepRecord,
    detect_clusters,
    mu_sweep,
    participation_ratio,
    segment_masses,
    staircase,
    well_mass_fraction,
)
from .fd import (
    TridiagonalHamiltonian,
    assemble_hamiltonian,
    default_grid,
    eigenvalues_in_range,
    eigenvector,
    eigenvectors,
    probability_density,
    sturm_count,
)
from .model import ConvergenceError, Grid, ModelParams, Spectrum, Wavefunction
from .potential import (
    CantorSpec,
    ParseError,
    PiecewisePotential,
    build_cantor_potential,
    mean_potential,
    parse_potential,
    sample_potential,
    serialize_potential,
)
from .tm import (
    ShootingState,
    StaleEigenvalueError,
    node_count,
    tm_eigenfunction,
    tm_eigenvalues,
    tm_mismatch,
)

__version__ = "0.1.0"

__all__ = [
    "CantorSpec",
    "ClusterReport",
    "ConvergenceError",
    "Grid",
    "ModelParams",
    "ParseError",
    "PiecewisePotential",
    "ShootingState",
    "Spectrum",
    "StaircaseData",
    "StaleEigenvalueError",
    "SweepRecord",
    "TridiagonalHamiltonian",
    "Wavefunction",
    "assemble_hamiltonian",
    "build_cantor_potential",
    "default_grid",
    "detect_clusters",
    "eigenvalues_in_range",
    "eigenvector",
    "eigenvectors",
    "mean_potential",
    "mu_sweep",
    "node_count",
    "parse_potential",
    "participation_ratio",
    "probability_density",
    "sample_potential",
    "segment_masses",
    "serialize_potential",
    "staircase",
    "sturm_count",
    "tm_eigenfunction",
    "tm_eigenvalues",
    "tm_mismatch",
    "well_mass_fraction",
]
