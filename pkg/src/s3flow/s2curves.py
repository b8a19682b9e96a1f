"""Closed curves on the 2-sphere: geodesic curvature, curve shortening,
and the zero-total-curvature / subinterval conditions for Gauss images of
flat tori.

Discrete geodesic curvature is the turning angle between consecutive
geodesic segments divided by the local arclength, signed by the outward
orientation of S2.  Turning angles make the discrete Gauss-Bonnet theorem
exact on geodesic polygons: the angles of a simple positively oriented
polygon sum to 2 pi minus the enclosed spherical area.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .s3core import geodesic_distance, log_map, normalize


class S2Curve:
    """A closed polyline on S2 (cyclic samples, piecewise-geodesic).

    Samples must be unit 3-vectors with consecutive geodesic gaps between
    1e-8 and 0.5 radians; at least 8 samples.
    """

    def __init__(self, samples):
        s = np.ascontiguousarray(samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 3:
            raise ValueError("samples must be an (n, 3) array")
        if len(s) < 8:
            raise ValueError(f"need at least 8 samples, got {len(s)}")
        dev = np.max(np.abs(np.linalg.norm(s, axis=1) - 1.0))
        if dev > 1e-10:
            raise ValueError(f"sample off S2 by {dev:.3e}")
        gaps = geodesic_distance(s, np.roll(s, -1, axis=0))
        if gaps.min() < 1e-8:
            raise ValueError(f"degenerate segment of length {gaps.min():.3e}")
        if gaps.max() > 0.5:
            raise ValueError(f"segment too long ({gaps.max():.3f} rad > 0.5)")
        self.samples = s

    def __len__(self):
        return len(self.samples)

    def length(self):
        return float(np.sum(geodesic_distance(self.samples, np.roll(self.samples, -1, axis=0))))


def save_curve_csv(curve: S2Curve, path):
    """Write the samples as CSV, one unit 3-vector per row (17 digits)."""
    with open(path, "w") as fh:
        for p in curve.samples:
            fh.write("%.17g,%.17g,%.17g\n" % tuple(p))


def load_curve_csv(path) -> S2Curve:
    """Read a curve written by :func:`save_curve_csv` (or any 3-column CSV)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(t) for t in line.split(",")])
    return S2Curve(np.array(rows))


def make_latitude_circle(theta, n):
    """Uniformly sampled circle at colatitude theta from the pole (0, 0, 1)."""
    if not (0.0 < theta < np.pi):
        raise ValueError("colatitude must lie in (0, pi)")
    if n < 8:
        raise ValueError("need n >= 8")
    phi = 2.0 * np.pi * np.arange(n) / n
    st, ct = np.sin(theta), np.cos(theta)
    return S2Curve(np.stack([st * np.cos(phi), st * np.sin(phi), np.full(n, ct)], axis=-1))


def make_great_circle(axis=(0.0, 0.0, 1.0), n=128):
    """Uniformly sampled great circle in the plane orthogonal to ``axis``."""
    if n < 8:
        raise ValueError("need n >= 8")
    a = normalize(np.asarray(axis, dtype=float))
    seed = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = normalize(seed - np.dot(seed, a) * a)
    e2 = np.cross(a, e1)
    phi = 2.0 * np.pi * np.arange(n) / n
    return S2Curve(np.outer(np.cos(phi), e1) + np.outer(np.sin(phi), e2))


def geodesic_curvature(curve: S2Curve):
    """Signed discrete geodesic curvature and arclength weights.

    Returns (kappa_g, ds): the turning angle at each sample between the
    incoming and outgoing geodesic segments (positive for a curve turning
    left as seen from outside the sphere) divided by the mean of the two
    adjacent segment lengths, and that mean itself.  The total turning
    sum(kappa_g * ds) is exactly the polygon angle defect.
    """
    p = curve.samples
    nxt = np.roll(p, -1, axis=0)
    prv = np.roll(p, 1, axis=0)
    log_n = log_map(p, nxt)
    log_p = log_map(p, prv)
    l_n = np.linalg.norm(log_n, axis=1)
    l_p = np.linalg.norm(log_p, axis=1)
    if l_n.min() < 1e-12 or l_p.min() < 1e-12:
        raise ValueError("degenerate segment in curve")
    t_out = log_n / l_n[:, None]
    t_in = -log_p / l_p[:, None]
    cross = np.cross(t_in, t_out)
    psi = np.arctan2(np.einsum("ij,ij->i", p, cross), np.einsum("ij,ij->i", t_in, t_out))
    ds = 0.5 * (l_n + l_p)
    return psi / ds, ds


def _curvature_normals(curve: S2Curve):
    """Unit in-plane normals n with kappa_g * n the discrete curvature vector."""
    p = curve.samples
    nxt = np.roll(p, -1, axis=0)
    prv = np.roll(p, 1, axis=0)
    log_n = log_map(p, nxt)
    log_p = log_map(p, prv)
    t_out = normalize(log_n)
    t_in = -normalize(log_p)
    t_mid = t_in + t_out
    small = np.linalg.norm(t_mid, axis=1) < 1e-12
    t_mid[small] = t_out[small]
    t_mid = normalize(t_mid)
    return np.cross(p, t_mid)


def resample_uniform(curve: S2Curve, n=None) -> S2Curve:
    """Resample to n points uniformly spaced in arclength (spherical lerp)."""
    p = curve.samples
    if n is None:
        n = len(p)
    seg = geodesic_distance(p, np.roll(p, -1, axis=0))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = total * np.arange(n) / n
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(p) - 1)
    frac = (targets - cum[idx]) / np.maximum(seg[idx], 1e-300)
    a = p[idx]
    b = p[(idx + 1) % len(p)]
    omega = np.arccos(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))[:, None]
    small = omega[:, 0] < 1e-9
    w1 = np.where(small[:, None], 1.0 - frac[:, None], np.sin((1.0 - frac[:, None]) * omega) / np.where(small[:, None], 1.0, np.sin(omega)))
    w2 = np.where(small[:, None], frac[:, None], np.sin(frac[:, None] * omega) / np.where(small[:, None], 1.0, np.sin(omega)))
    return S2Curve(normalize(w1 * a + w2 * b))


def csf_step(curve: S2Curve, dt, resample=True) -> S2Curve:
    """One curve-shortening step: each sample moves along the curvature
    vector direction by arclength kappa_g * dt."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    kappa, _ = geodesic_curvature(curve)
    n_hat = _curvature_normals(curve)
    s = (kappa * dt)[:, None]
    moved = normalize(np.cos(s) * curve.samples + np.sin(s) * n_hat)
    out = S2Curve(moved)
    return resample_uniform(out) if resample else out


@dataclass
class CsfResult:
    times: np.ndarray
    lengths: np.ndarray
    curves: list           # sampled at the cadence, plus the final curve
    curve_times: np.ndarray
    final: S2Curve
    status: str            # TimeExhausted | Extinct


def run_csf(curve: S2Curve, t_end, dt=None, sigma=0.25, resample=True,
            cadence=10, length_tol=0.05, max_steps=500_000) -> CsfResult:
    """Run curve shortening until t_end or until the curve nearly vanishes.

    The step obeys the parabolic bound dt <= sigma * (min ds)^2 and is
    recomputed each step; arclength resampling is on by default.
    """
    t = 0.0
    cur = curve
    times = [0.0]
    lengths = [cur.length()]
    curves = [cur]
    curve_times = [0.0]
    status = "TimeExhausted"
    step = 0
    while t < t_end - 1e-14 and step < max_steps:
        if cur.length() < length_tol:
            status = "Extinct"
            break
        seg = geodesic_distance(cur.samples, np.roll(cur.samples, -1, axis=0))
        bound = sigma * float(seg.min()) ** 2
        step_dt = min(bound if dt is None else min(dt, bound), t_end - t)
        try:
            cur = csf_step(cur, step_dt, resample=resample)
        except ValueError:
            status = "Extinct"
            break
        t += step_dt
        step += 1
        times.append(t)
        lengths.append(cur.length())
        if step % cadence == 0:
            curves.append(cur)
            curve_times.append(t)
    if curve_times[-1] != t:
        curves.append(cur)
        curve_times.append(t)
    return CsfResult(
        times=np.array(times),
        lengths=np.array(lengths),
        curves=curves,
        curve_times=np.array(curve_times),
        final=cur,
        status=status,
    )


# ---------------------------------------------------------------------------
# Weiner conditions
# ---------------------------------------------------------------------------


def sup_subinterval_cyclic(values):
    """sup over contiguous cyclic subintervals of |sum of values|.

    Computed as the prefix-sum span (max prefix - min prefix) of the
    cyclic sequence, maximized over all cyclic starting offsets; equals
    the brute-force maximum over all O(n^2) subintervals exactly.
    """
    a = np.asarray(values, dtype=float)
    n = len(a)
    best = 0.0
    doubled = np.concatenate([a, a])
    for off in range(n):
        pref = np.concatenate([[0.0], np.cumsum(doubled[off:off + n])])
        best = max(best, float(pref.max() - pref.min()))
    return best


@dataclass
class WeinerReport:
    """Zero-total-curvature and subinterval verdict for a curve pair.

    A pair (gamma1, gamma2) can only arise as the two Gauss images of a
    flat torus if both total curvatures vanish and the subinterval sums
    obey sup |int_I1 kappa ds| + sup |int_I2 kappa ds| < pi.  The 0.05
    tolerance on the totals absorbs discretization of the turning angles.
    """

    total_curvature: tuple
    sup1: float
    sup2: float
    sup_pair: float
    verdict: bool
    total_tol: float = 0.05


def weiner_check(gamma1: S2Curve, gamma2: S2Curve, total_tol=0.05) -> WeinerReport:
    k1, ds1 = geodesic_curvature(gamma1)
    k2, ds2 = geodesic_curvature(gamma2)
    tot1 = float(np.sum(k1 * ds1))
    tot2 = float(np.sum(k2 * ds2))
    sup1 = sup_subinterval_cyclic(k1 * ds1)
    sup2 = sup_subinterval_cyclic(k2 * ds2)
    verdict = (abs(tot1) <= total_tol and abs(tot2) <= total_tol
               and sup1 + sup2 < np.pi)
    return WeinerReport(
        total_curvature=(tot1, tot2),
        sup1=sup1,
        sup2=sup2,
        sup_pair=sup1 + sup2,
        verdict=bool(verdict),
        total_tol=total_tol,
    )


def hausdorff_distance(c1: S2Curve, c2: S2Curve, n_resample=512):
    """Symmetric geodesic Hausdorff distance between two closed curves,
    measured after uniform arclength resampling of both."""
    a = resample_uniform(c1, n_resample).samples
    b = resample_uniform(c2, n_resample).samples
    d = np.arccos(np.clip(a @ b.T, -1.0, 1.0))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
