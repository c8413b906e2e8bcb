"""Transfer-matrix (shooting) engine: the grid-free second route.

Propagates (psi, psi') exactly across each constant segment with the
closed-form solution, rescaling after every step so barrier growth
never overflows.  Eigenvalues are the zeros of the boundary mismatch
psi(1); interior sign changes give an exact level count, so the two
engines can be cross-checked integer for integer against the Sturm
counts of the finite-difference route.
"""

import math
from dataclasses import dataclass

import numpy as np

from .model import Spectrum, Wavefunction

__all__ = [
    "ShootingState",
    "StaleEigenvalueError",
    "tm_mismatch",
    "node_count",
    "tm_eigenvalues",
    "tm_eigenfunction",
]

# switch to the series forms of cos(kw)/sin(kw)/k once |k|*w < 1e-6,
# i.e. |s|*w^2 below this; keeps the k -> 0 branch seam continuous
_SERIES_Z = 1e-12

# split a segment into chunks when kappa*width could exceed this, so
# cosh stays representable even deep under a wide barrier
_MAX_ARG = 350.0


class StaleEigenvalueError(ValueError):
    """The requested energy does not solve the current potential/params
    (boundary mismatch too large to be an eigenvalue)."""


@dataclass(frozen=True)
class ShootingState:
    """Shooting pair at the right edge of a propagation, plus the
    accumulated interior sign-change count."""

    psi: float
    dpsi: float
    node_count: int

    def __post_init__(self):
        if self.psi == 0.0 and self.dpsi == 0.0:
            raise ValueError("degenerate shooting state: psi and dpsi both zero")
        if self.node_count < 0:
            raise ValueError(f"node_count must be nonnegative, got {self.node_count}")


def _coeffs(s, w):
    """Closed-form segment propagator entries C, S for psi'' = -s psi
    over width w: psi(w) = psi0*C + dpsi0*S, psi'(w) = -s*psi0*S + dpsi0*C.

    Elementwise in s; w may be a scalar or an array of matching shape.
    """
    s = np.asarray(s, dtype=float)
    w = np.broadcast_to(np.asarray(w, dtype=float), s.shape)
    z = s * w * w
    C = np.empty_like(s)
    S = np.empty_like(s)
    osc = z >= _SERIES_Z
    if np.any(osc):
        k = np.sqrt(s[osc])
        kw = k * w[osc]
        C[osc] = np.cos(kw)
        S[osc] = np.sin(kw) / k
    evan = z <= -_SERIES_Z
    if np.any(evan):
        ka = np.sqrt(-s[evan])
        kw = ka * w[evan]
        C[evan] = np.cosh(kw)
        S[evan] = np.sinh(kw) / ka
    rest = ~(osc | evan)
    if np.any(rest):
        zr = z[rest]
        C[rest] = 1.0 - zr / 2.0 + zr * zr / 24.0
        S[rest] = w[rest] * (1.0 - zr / 6.0 + zr * zr / 120.0)
    return C, S


def _interior_zeros(psi, dpsi, s, w):
    """Zeros of the oscillatory solution strictly inside (0, w),
    counted from the phase: psi(x) = R cos(kx - phi)."""
    k = np.sqrt(s)
    phi = np.arctan2(dpsi / k, psi)
    upper = (k * w - phi - 0.5 * math.pi) / math.pi
    lower = -(phi + 0.5 * math.pi) / math.pi
    cnt = np.ceil(upper) - np.floor(lower) - 1.0
    return np.maximum(cnt, 0.0).astype(np.int64)


def _steps(p, mu, eps_min):
    """Chunked walk over segments: yields (width, value) with widths cut
    so the evanescent argument kappa*width stays below _MAX_ARG."""
    widths = p.segment_widths
    for j in range(p.num_segments):
        w = float(widths[j])
        v = float(p.values[j])
        arg = mu * math.sqrt(max(v - eps_min, 0.0)) * w
        parts = max(1, int(math.ceil(arg / _MAX_ARG)))
        for _ in range(parts):
            yield w / parts, v


def _sweep(p, params, eps, rescale=True):
    """Propagate (0, 1) from x=0 to x=1 for a batch of energies.

    Returns (psi(1), psi'(1), interior node counts), with (psi, psi')
    rescaled to unit max-magnitude after every chunk (signs, zeros and
    counts are invariant under positive rescaling; rescale=False is for
    verifying exactly that, on cases small enough not to overflow).
    """
    eps = np.ascontiguousarray(eps, dtype=float)
    mu = params.mu
    psi = np.zeros_like(eps)
    dpsi = np.ones_like(eps)
    nodes = np.zeros(eps.shape, dtype=np.int64)
    first = True
    for w, v in _steps(p, mu, float(eps.min())):
        s = (mu * mu) * (eps - v)
        if not first:
            nodes += psi == 0.0  # zero exactly on a chunk boundary
        C, S = _coeffs(s, w)
        psi_new = psi * C + dpsi * S
        dpsi_new = -s * psi * S + dpsi * C
        osc = s * (w * w) >= _SERIES_Z
        if np.any(osc):
            nodes[osc] += _interior_zeros(psi[osc], dpsi[osc], s[osc], w)
        rest = ~osc
        if np.any(rest):
            nodes[rest] += (psi[rest] * psi_new[rest] < 0.0).astype(np.int64)
        if rescale:
            scale = np.maximum(np.abs(psi_new), np.abs(dpsi_new))
            psi = psi_new / scale
            dpsi = dpsi_new / scale
        else:
            psi = psi_new
            dpsi = dpsi_new
        first = False
    return psi, dpsi, nodes


def tm_mismatch(p, params, eps, rescale=True):
    """Boundary mismatch psi(1) (rescaled) and the interior node count
    for a single trial energy.  Mismatch zeros are the eigenvalues."""
    if not np.isfinite(eps):
        raise ValueError(f"eps must be finite, got {eps}")
    psi, dpsi, nodes = _sweep(p, params, np.array([float(eps)]), rescale=rescale)
    end = ShootingState(float(psi[0]), float(dpsi[0]), int(nodes[0]))
    return end.psi, end.node_count


def node_count(p, params, eps):
    """Number of eigenvalues strictly below `eps` (oscillation theorem)."""
    return tm_mismatch(p, params, eps)[1]


def tm_eigenvalues(p, params, lo, hi, tol=1e-10):
    """All eigenvalues in (lo, hi]: bisection on the node count isolates
    each level, then bisection on the sign of the mismatch sharpens the
    bracket to width <= tol."""
    lo = float(lo)
    hi = float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("window endpoints must be finite")
    if lo >= hi:
        raise ValueError(f"window must satisfy lo < hi, got ({lo}, {hi})")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    hi_plus = np.nextafter(hi, np.inf)
    f_ends, _, c_ends = _sweep(p, params, np.array([lo, np.nextafter(lo, np.inf), hi_plus]))
    n_lo = int(c_ends[1])
    n_hi = int(c_ends[2])
    m = n_hi - n_lo
    if m == 0:
        return Spectrum(np.empty(0), (lo, hi), tol, "tm")

    targets = np.arange(n_lo, n_hi)
    a = np.full(m, lo)
    b = np.full(m, hi_plus)
    fa = np.full(m, f_ends[0])
    fb = np.full(m, f_ends[2])
    ca = np.full(m, int(c_ends[0]))
    cb = np.full(m, n_hi)
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
        fm, _, cm = _sweep(p, params, mid)

        exact = fm == 0.0
        isolated = (cb[idx] - ca[idx] == 1) & (fa[idx] != 0.0) & ~exact
        # sign rule inside an isolated bracket, count rule otherwise
        go_right = np.where(isolated, (fm > 0.0) == (fa[idx] > 0.0), cm <= targets[idx])

        right = idx[go_right & ~exact]
        sel = go_right & ~exact
        a[right] = mid[sel]
        fa[right] = fm[sel]
        ca[right] = cm[sel]
        left = idx[~go_right & ~exact]
        sel = ~go_right & ~exact
        b[left] = mid[sel]
        fb[left] = fm[sel]
        cb[left] = cm[sel]
        hit = idx[exact]
        a[hit] = mid[exact]
        b[hit] = mid[exact]

    return Spectrum(np.sort(0.5 * (a + b)), (lo, hi), tol, "tm")


@dataclass(frozen=True)
class _Pass:
    """One shooting pass: states at every chunk boundary.

    xs increase; psis/dpsis are psi and dpsi/dx in the common frame,
    each record rescaled with the cumulative log magnitude in logs.
    vals[i] is the potential value on [xs[i], xs[i+1]).
    """

    xs: np.ndarray
    psis: np.ndarray
    dpsis: np.ndarray
    logs: np.ndarray
    vals: np.ndarray


def _record_pass(p, params, eps, reverse):
    mu = params.mu
    steps = list(_steps(p, mu, eps))
    segvals = [v for _, v in steps]
    if reverse:
        steps = steps[::-1]
    xs = [0.0]
    psis = [0.0]
    dpsis = [1.0]
    logs = [0.0]
    ps, dp, L = 0.0, 1.0, 0.0
    pos = 0.0
    one = np.ones(1)
    for w, v in steps:
        s = (mu * mu) * (eps - v)
        C, S = _coeffs(s * one, w)
        ps, dp = ps * C[0] + dp * S[0], -s * ps * S[0] + dp * C[0]
        r = max(abs(ps), abs(dp))
        ps /= r
        dp /= r
        L += math.log(r)
        pos += w
        xs.append(pos)
        psis.append(ps)
        dpsis.append(dp)
        logs.append(L)
    xs = np.array(xs)
    psis = np.array(psis)
    dpsis = np.array(dpsis)
    logs = np.array(logs)
    if reverse:
        # map t = 1 - x back to the common frame: d/dx = -d/dt
        xs = 1.0 - xs[::-1]
        psis = psis[::-1]
        dpsis = -dpsis[::-1]
        logs = logs[::-1]
    return _Pass(xs, psis, dpsis, logs, np.array(segvals))


def tm_eigenfunction(p, params, eps, sample_count):
    """Eigenfunction at `eps` on the uniform grid x_i = i/(sample_count+1).

    Shoots from both walls and joins at the chunk boundary where both
    log envelopes are largest, which is the only numerically stable way
    to build localized states (a single pass is destroyed by the
    exponentially growing admixture past the localization region).
    Raises StaleEigenvalueError if the rescaled boundary mismatch at
    `eps` exceeds 1e-6, i.e. `eps` is not an eigenvalue of this
    potential to working accuracy.
    """
    if not isinstance(sample_count, (int, np.integer)) or sample_count < 1:
        raise ValueError(f"sample_count must be a positive integer, got {sample_count!r}")
    eps = float(eps)
    mismatch, _ = tm_mismatch(p, params, eps)
    if abs(mismatch) > 1e-6:
        raise StaleEigenvalueError(
            f"boundary mismatch {mismatch:.3e} at eps={eps!r}: not an eigenvalue "
            "of this potential/mu (recompute the spectrum first)"
        )

    fwd = _record_pass(p, params, eps, reverse=False)
    bwd = _record_pass(p, params, eps, reverse=True)
    mu = params.mu

    join = int(np.argmax(np.minimum(fwd.logs, bwd.logs)))
    x_join = fwd.xs[join]
    # match on whichever component is larger at the join, in units where
    # psi and psi'/k are comparable
    k_loc = mu * math.sqrt(abs(eps - float(fwd.vals[min(join, fwd.vals.size - 1)]))) + 1.0
    if abs(fwd.psis[join]) * k_loc >= abs(fwd.dpsis[join]):
        lc, rc = fwd.psis[join], bwd.psis[join]
    else:
        lc, rc = fwd.dpsis[join], bwd.dpsis[join]
    ratio_log = fwd.logs[join] + math.log(abs(lc)) - (bwd.logs[join] + math.log(abs(rc)))
    ratio_sign = 1.0 if (lc > 0) == (rc > 0) else -1.0

    h = 1.0 / (sample_count + 1)
    x = np.arange(1, sample_count + 1) * h
    left = x <= x_join

    rec = np.minimum(np.searchsorted(fwd.xs, x, side="right") - 1, fwd.vals.size - 1)
    s_all = (mu * mu) * (eps - fwd.vals[rec])

    C, S = _coeffs(s_all, x - fwd.xs[rec])
    raw_f = fwd.psis[rec] * C + fwd.dpsis[rec] * S

    recb = np.searchsorted(bwd.xs, x, side="left")
    Cb, Sb = _coeffs(s_all, bwd.xs[recb] - x)
    # reversed frame: phi' = -dpsi/dx
    raw_b = bwd.psis[recb] * Cb - bwd.dpsis[recb] * Sb

    raw = np.where(left, raw_f, raw_b * ratio_sign)
    amp = np.where(left, fwd.logs[rec], bwd.logs[recb] + ratio_log)

    with np.errstate(divide="ignore"):
        logamp = amp + np.log(np.abs(raw))
    peak = logamp.max()
    vals = np.sign(raw) * np.exp(logamp - peak)
    vals /= math.sqrt(h) * np.linalg.norm(vals)
    big = np.flatnonzero(np.abs(vals) > 1e-8 * np.abs(vals).max())
    if vals[big[0]] < 0:
        vals = -vals
    return Wavefunction(vals, eps, h, residual=abs(mismatch))
