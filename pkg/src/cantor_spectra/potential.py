"""Piecewise-constant potentials on [0, 1] and the Cantor-like family.

The potential is a step function given by strictly increasing breakpoints
``0 = b_0 < b_1 < ... < b_m = 1`` and one value per segment, with the
half-open convention: segment j owns ``[b_j, b_{j+1})`` and the last
segment also owns x = 1.  The Cantor-like family is built by repeatedly
removing the (open) middle fraction of every well and filling it with
barrier material.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "CantorSpec",
    "PiecewisePotential",
    "ParseError",
    "build_cantor_potential",
    "sample_potential",
    "mean_potential",
    "serialize_potential",
    "parse_potential",
]


class ParseError(ValueError):
    """Raised when a potential text table is malformed.  Carries the
    1-based line number of the offending line in ``lineno``."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class CantorSpec:
    """Construction parameters for the Cantor-like potential.

    Parameters
    ----------
    order : int
        Number of removal generations N >= 0.  Order 0 is a single well.
    well_value, barrier_value : float
        Potential values on retained (well) and removed (barrier)
        segments.  Must satisfy well_value < barrier_value and both must
        lie in [-1, 1].
    removal_fraction : Fraction or float or str
        Fraction of each well removed from its middle at every
        generation, in (0, 1).  Stored exactly as a Fraction; the
        default is exactly 1/3.
    """

    order: int
    well_value: float = -1.0
    barrier_value: float = 1.0
    removal_fraction: Fraction = field(default=Fraction(1, 3))

    def __post_init__(self):
        if not isinstance(self.order, (int, np.integer)) or isinstance(self.order, bool):
            raise ValueError(f"order must be an integer, got {self.order!r}")
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        object.__setattr__(self, "order", int(self.order))
        for name in ("well_value", "barrier_value"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} must be finite and in [-1, 1], got {v}")
            object.__setattr__(self, name, v)
        if not self.well_value < self.barrier_value:
            raise ValueError(
                "well_value must be strictly below barrier_value, got "
                f"{self.well_value} >= {self.barrier_value}"
            )
        # Exact conversion: Fraction(float) is the float's binary rational.
        f = Fraction(self.removal_fraction)
        if not 0 < f < 1:
            raise ValueError(f"removal_fraction must lie in (0, 1), got {f}")
        object.__setattr__(self, "removal_fraction", f)


@dataclass(frozen=True, eq=False)
class PiecewisePotential:
    """Immutable step potential on [0, 1].

    ``breakpoints`` has m+1 strictly increasing entries starting at 0.0
    and ending at 1.0; ``values`` has m entries in [-1, 1].  Both are
    stored as read-only float arrays.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(self.breakpoints, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        if b.ndim != 1 or v.ndim != 1:
            raise ValueError("breakpoints and values must be 1-D")
        if b.size < 2:
            raise ValueError("need at least two breakpoints")
        if v.size != b.size - 1:
            raise ValueError(
                f"need exactly len(breakpoints)-1 values, got {v.size} for {b.size} breakpoints"
            )
        if b[0] != 0.0 or b[-1] != 1.0:
            raise ValueError(f"breakpoints must start at 0 and end at 1, got [{b[0]}, {b[-1]}]")
        if not np.all(np.diff(b) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v < -1.0) or np.any(v > 1.0):
            raise ValueError("segment values must be finite and lie in [-1, 1]")
        b.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    def __eq__(self, other):
        if not isinstance(other, PiecewisePotential):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    @property
    def num_segments(self):
        return self.values.size

    @property
    def segment_widths(self):
        return np.diff(self.breakpoints)

    @property
    def min_value(self):
        return float(self.values.min())

    @property
    def max_value(self):
        return float(self.values.max())


def build_cantor_potential(spec):
    """Build the order-N Cantor-like potential for `spec`.

    All interval arithmetic is exact (Fractions); each breakpoint is
    rounded to float exactly once.  Order 0 is a single segment at
    ``well_value``; every generation replaces the open middle
    ``removal_fraction`` of each well with barrier material, leaving
    2^N wells at order N.
    """
    flank = (1 - spec.removal_fraction) / 2
    wells = [(Fraction(0), Fraction(1))]
    for _ in range(spec.order):
        nxt = []
        for a, b in wells:
            w = b - a
            nxt.append((a, a + flank * w))
            nxt.append((b - flank * w, b))
        wells = nxt

    breakpoints = [Fraction(0)]
    values = []
    for a, b in wells:
        if a != breakpoints[-1]:
            values.append(spec.barrier_value)
            breakpoints.append(a)
        values.append(spec.well_value)
        breakpoints.append(b)
    # wells always touch both walls, so no trailing barrier is possible
    return PiecewisePotential(
        np.array([float(x) for x in breakpoints]), np.array(values)
    )


def sample_potential(p, x):
    """Evaluate the step potential at x (scalar or array).

    Segment j owns [b_j, b_{j+1}); x = 1.0 belongs to the last segment.
    Points outside [0, 1] raise ValueError.
    """
    x_arr = np.asarray(x, dtype=float)
    ok = (x_arr >= 0.0) & (x_arr <= 1.0)  # also rejects nan
    if not np.all(ok):
        bad = x_arr[~ok].flat[0]
        raise ValueError(f"sample point {bad} outside the domain [0, 1]")
    idx = np.searchsorted(p.breakpoints, x_arr, side="right") - 1
    idx = np.minimum(idx, p.num_segments - 1)  # fold x = 1.0 into the last segment
    out = p.values[idx]
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def mean_potential(p, a, b):
    """Exact mean of the step potential over [a, b] (elementwise on arrays).

    Uses the piecewise-linear antiderivative evaluated at both ends, so
    jump positions enter exactly; needs a < b inside [0, 1].
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    ok = (a_arr >= 0.0) & (b_arr <= 1.0) & (a_arr < b_arr)  # also rejects nan
    if not np.all(ok):
        raise ValueError("need 0 <= a < b <= 1 for interval means")
    # antiderivative F with F(0)=0, linear on each segment
    widths = np.diff(p.breakpoints)
    cum = np.concatenate(([0.0], np.cumsum(widths * p.values)))

    def anti(x):
        j = np.minimum(
            np.searchsorted(p.breakpoints, x, side="right") - 1, p.num_segments - 1
        )
        return cum[j] + (x - p.breakpoints[j]) * p.values[j]

    out = (anti(b_arr) - anti(a_arr)) / (b_arr - a_arr)
    if np.isscalar(a) and np.isscalar(b):
        return float(out)
    return out


def serialize_potential(p):
    """Render the segment table as text, one line per segment:
    ``b_j b_{j+1} v_j`` with 17 significant digits (round-trip exact)."""
    lines = []
    b = p.breakpoints
    for j, v in enumerate(p.values):
        lines.append(f"{b[j]:.17g} {b[j + 1]:.17g} {v:.17g}")
    return "\n".join(lines) + "\n"


def parse_potential(text):
    """Parse the text form produced by :func:`serialize_potential`.

    Accepts blank lines and ``#`` comment lines.  Raises
    :class:`ParseError` naming the offending line for malformed rows,
    non-contiguous segments, or out-of-range values.
    """
    starts = []
    ends = []
    vals = []
    linenos = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(lineno, f"expected 3 fields, got {len(parts)}")
        try:
            lo, hi, v = (float(s) for s in parts)
        except ValueError:
            raise ParseError(lineno, f"non-numeric field in {line!r}") from None
        starts.append(lo)
        ends.append(hi)
        vals.append(v)
        linenos.append(lineno)

    if not vals:
        raise ParseError(1, "no segments found")
    if starts[0] != 0.0:
        raise ParseError(linenos[0], f"first segment must start at 0, got {starts[0]}")
    for i in range(1, len(vals)):
        if starts[i] != ends[i - 1]:
            raise ParseError(
                linenos[i],
                f"segment start {starts[i]!r} does not continue previous end {ends[i - 1]!r}",
            )
    for i in range(len(vals)):
        if not ends[i] > starts[i]:
            raise ParseError(linenos[i], f"empty or reversed segment [{starts[i]}, {ends[i]}]")
        if not -1.0 <= vals[i] <= 1.0:
            raise ParseError(linenos[i], f"value {vals[i]} outside [-1, 1]")
    if ends[-1] != 1.0:
        raise ParseError(linenos[-1], f"last segment must end at 1, got {ends[-1]}")

    return PiecewisePotential(np.array(starts + [ends[-1]]), np.array(vals))
