"""Quaternion algebra and Riemannian primitives of the unit 3-sphere.

Points of S3 are unit quaternions stored as length-4 float arrays in
(w, x, y, z) order; S2 points are unit 3-vectors identified with the
imaginary quaternions (i, j, k).  All functions broadcast over leading
axes, so an (n, 4) array is "n points".

Conventions, fixed once and used everywhere:

* Hamilton product with i*j = k.
* The Hopf projection is q -> Im(conj(q) * i * q), whose fibers are the
  left translates {(cos t + i sin t) * q}.
* Renormalisations are explicit; no function silently rescales its input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QUAT_ONE = np.array([1.0, 0.0, 0.0, 0.0])
QUAT_I = np.array([0.0, 1.0, 0.0, 0.0])
QUAT_J = np.array([0.0, 0.0, 1.0, 0.0])
QUAT_K = np.array([0.0, 0.0, 0.0, 1.0])


def quat_mul(a, b):
    """Hamilton product of quaternions (broadcasts over leading axes)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def normalize(v, axis=-1):
    """Explicitly rescale to unit Euclidean norm along ``axis``."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=axis, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize a zero vector")
    return v / n


def unit_deviation(v, axis=-1):
    """Largest deviation of the norms from 1 (used by invariant checks)."""
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(np.linalg.norm(v, axis=axis) - 1.0)))


def tangent_project(x, w):
    """Project a 4-vector w onto the tangent space of S3 at x.

    Returns w - <w, x> x, which is orthogonal to x up to round-off.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    return w - np.sum(w * x, axis=-1, keepdims=True) * x


def geodesic_step(x, d, s):
    """Move from x along the great circle with initial unit direction d.

    Parameters
    ----------
    x : array (..., 4)
        Starting points on S3.
    d : array (..., 4)
        Unit tangent directions at x (rejected if not unit to 1e-8).
    s : float or array (...)
        Signed arclength in radians.

    Returns the arrival point cos(s) x + sin(s) d, explicitly renormalized.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    dn = np.linalg.norm(d, axis=-1)
    if np.any(np.abs(dn - 1.0) > 1e-8):
        raise ValueError(
            "geodesic_step requires unit directions; worst |d| deviation "
            f"{np.max(np.abs(dn - 1.0)):.3e}"
        )
    s = np.asarray(s, dtype=float)[..., None]
    out = np.cos(s) * x + np.sin(s) * d
    return normalize(out)


def geodesic_transport(x, d, s):
    """Parallel transport of d along its own great circle through arclength s.

    The transported direction is -sin(s) x + cos(s) d.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    s = np.asarray(s, dtype=float)[..., None]
    return -np.sin(s) * x + np.cos(s) * d


def geodesic_distance(a, b):
    """Geodesic distance on the unit sphere (any dimension, well-conditioned)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    chord = np.linalg.norm(a - b, axis=-1)
    return 2.0 * np.arcsin(np.clip(0.5 * chord, -1.0, 1.0))


def log_map(x, y):
    """Inverse exponential on S3 (or S2): tangent vectors at x pointing to y.

    Returns theta * unit(y - cos(theta) x) with theta the geodesic distance;
    zero vector where y coincides with x.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.clip(np.sum(x * y, axis=-1, keepdims=True), -1.0, 1.0)
    theta = np.arccos(c)
    d = y - c * x
    dn = np.linalg.norm(d, axis=-1, keepdims=True)
    small = dn < 1e-300
    safe = np.where(small, 1.0, dn)
    return np.where(small, 0.0, theta * d / safe)


def hopf_project(q):
    """Hopf projection S3 -> S2, q -> Im(conj(q) * i * q).

    Constant on the fibers {(cos t + i sin t) * q : t in [0, 2 pi)}; the
    image of a unit quaternion is a unit 3-vector.
    """
    q = np.asarray(q, dtype=float)
    p = quat_mul(quat_mul(quat_conj(q), QUAT_I), q)
    return p[..., 1:].copy()


def cross4(a, b, c):
    """Generalized cross product in R4.

    The unique vector d with <d, w> = det[rows a, b, c, w] for every w;
    d is orthogonal to a, b, c.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    a0, a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    b0, b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    c0, c1, c2, c3 = c[..., 0], c[..., 1], c[..., 2], c[..., 3]
    # 2x2 minors of the (b, c) rows
    m01 = b0 * c1 - b1 * c0
    m02 = b0 * c2 - b2 * c0
    m03 = b0 * c3 - b3 * c0
    m12 = b1 * c2 - b2 * c1
    m13 = b1 * c3 - b3 * c1
    m23 = b2 * c3 - b3 * c2
    d0 = -(a1 * m23 - a2 * m13 + a3 * m12)
    d1 = a0 * m23 - a2 * m03 + a3 * m02
    d2 = -(a0 * m13 - a1 * m03 + a3 * m01)
    d3 = a0 * m12 - a1 * m02 + a2 * m01
    return np.stack([d0, d1, d2, d3], axis=-1)


def orthonormal_tangent_basis(c):
    """Deterministic orthonormal basis (e1, e2, e3) of the tangent space at c."""
    c = np.asarray(c, dtype=float)
    basis = []
    for k in range(4):
        seed = np.zeros(4)
        seed[k] = 1.0
        v = seed - np.dot(seed, c) * c
        for e in basis:
            v = v - np.dot(v, e) * e
        n = np.linalg.norm(v)
        if n > 1e-8:
            basis.append(v / n)
        if len(basis) == 3:
            break
    return np.array(basis)


def check_s3point(q, tol=1e-12):
    """Raise if q is not a unit 4-vector within tol."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise ValueError("S3 points are 4-vectors")
    dev = unit_deviation(q)
    if dev > tol:
        raise ValueError(f"not on S3: |norm - 1| = {dev:.3e} > {tol:.1e}")
    return q


def check_s2point(p, tol=1e-12):
    """Raise if p is not a unit 3-vector within tol."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError("S2 points are 3-vectors")
    dev = unit_deviation(p)
    if dev > tol:
        raise ValueError(f"not on S2: |norm - 1| = {dev:.3e} > {tol:.1e}")
    return p


@dataclass(frozen=True)
class TangentVector:
    """A 4-vector attached to a base point of S3, orthogonal to it.

    ``dir`` need not be unit (normals are, general tangents are not);
    orthogonality to the base point is enforced to 1e-10.
    """

    base: np.ndarray
    dir: np.ndarray

    def __post_init__(self):
        base = check_s3point(self.base, tol=1e-10)
        d = np.asarray(self.dir, dtype=float)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "dir", d)
        if abs(float(np.dot(d, base))) > 1e-10:
            raise ValueError(
                f"tangent not orthogonal to base: <dir, base> = {np.dot(d, base):.3e}"
            )

    def normalized(self):
        return TangentVector(self.base, normalize(self.dir))


def geodesic_step_tv(v: TangentVector, s: float):
    """``geodesic_step`` for a bundled (base, dir) pair with unit dir."""
    return geodesic_step(v.base, v.dir, s)
