"""Immersed triangle meshes in S3 and discrete curvature estimation.

A :class:`SurfaceMesh` is a closed orientable triangle mesh whose vertices
lie on the unit 3-sphere and whose per-vertex unit normals are tangent to
S3.  Connectivity is immutable; flows replace vertex positions through
:meth:`SurfaceMesh.with_vertices`, which shares the cached topology.

Curvature is estimated per vertex by mapping the two-ring neighbourhood
into the tangent space T_x S3 with the spherical log map and fitting the
height along the normal as a quadratic form; the negated Hessian of that
fit is the shape operator.  With this sign convention a geodesic sphere of
radius r carries kappa = cot(r) with respect to its outward normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .s3core import (
    cross4,
    geodesic_distance,
    log_map,
    normalize,
    orthonormal_tangent_basis,
    quat_conj,
    quat_mul,
    unit_deviation,
    QUAT_I,
    QUAT_ONE,
)


class MeshError(ValueError):
    """Raised when mesh data violates a structural invariant."""


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------


def validate_topology(triangles, n_vertices):
    """Check that triangles form a closed orientable 2-manifold.

    Every undirected edge must be shared by exactly two triangles with
    opposite orientations.  Raises :class:`MeshError` with a diagnostic
    naming an offending edge.
    """
    tris = np.asarray(triangles, dtype=np.int64)
    if tris.ndim != 2 or tris.shape[1] != 3:
        raise MeshError("triangles must be an (m, 3) index array")
    if tris.size and (tris.min() < 0 or tris.max() >= n_vertices):
        raise MeshError("triangle index out of range")
    directed = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    keys = directed[:, 0] * np.int64(n_vertices) + directed[:, 1]
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        k = uniq[np.argmax(counts > 1)]
        raise MeshError(
            f"inconsistent winding: directed edge ({k // n_vertices}, {k % n_vertices}) "
            "appears in more than one triangle"
        )
    rev = directed[:, 1] * np.int64(n_vertices) + directed[:, 0]
    missing = np.setdiff1d(keys, rev, assume_unique=False)
    if missing.size:
        k = missing[0]
        raise MeshError(
            f"boundary edge ({k // n_vertices}, {k % n_vertices}): "
            "every edge must be shared by exactly 2 triangles"
        )


class _Topology:
    """Connectivity caches shared between meshes with identical triangles."""

    def __init__(self, triangles, n_vertices):
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        self.n_vertices = int(n_vertices)
        validate_topology(self.triangles, self.n_vertices)
        tri = self.triangles
        e = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        und = np.sort(e, axis=1)
        self.edges = np.unique(und, axis=0)

        ring = [[] for _ in range(self.n_vertices)]
        for a, b in e:
            ring[a].append(b)
        self.one_ring = [np.array(sorted(set(r)), dtype=np.int64) for r in ring]

        two = []
        for v, r1 in enumerate(self.one_ring):
            s = set(r1.tolist())
            for u in r1:
                s.update(self.one_ring[u].tolist())
            s.discard(v)
            two.append(np.array(sorted(s), dtype=np.int64))
        self.two_ring = two

        self.ring_counts = np.array([len(r) for r in two], dtype=np.int64)
        kmax = int(self.ring_counts.max()) if two else 0
        # padding with the vertex's own index yields zero log vectors, which
        # contribute nothing to the normal equations of the quadric fit
        pad = np.repeat(np.arange(self.n_vertices, dtype=np.int64)[:, None], kmax, axis=1)
        for v, r in enumerate(two):
            pad[v, : len(r)] = r
        self.two_ring_padded = pad

        self.one_ring_counts = np.array([len(r) for r in self.one_ring], dtype=np.int64)
        k1 = int(self.one_ring_counts.max()) if self.one_ring else 0
        pad1 = np.repeat(np.arange(self.n_vertices, dtype=np.int64)[:, None], k1, axis=1)
        for v, r in enumerate(self.one_ring):
            pad1[v, : len(r)] = r
        self.one_ring_padded = pad1

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.triangles)


# ---------------------------------------------------------------------------
# the mesh
# ---------------------------------------------------------------------------


class SurfaceMesh:
    """Closed orientable triangle mesh immersed in S3 with unit normals.

    Parameters
    ----------
    vertices : (n, 4) array
        Unit quaternions (norm 1 within 1e-10).
    triangles : (m, 3) int array
        Consistently wound, each edge shared by exactly two triangles.
    normals : (n, 4) array, optional
        Unit vectors orthogonal to their vertices within 1e-8.  Computed
        from the winding if omitted.
    grid_shape : tuple, optional
        (rows, cols) layout for grid-generated tori; row-major vertex order.
    """

    def __init__(self, vertices, triangles, normals=None, validate=True,
                 grid_shape=None, _topology=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 4:
            raise MeshError("vertices must be an (n, 4) array")
        if _topology is not None:
            self.topology = _topology
        else:
            self.topology = _Topology(triangles, len(self.vertices))
        self.grid_shape = grid_shape
        if normals is None:
            self.normals = self._geometric_normals()
        else:
            self.normals = np.ascontiguousarray(normals, dtype=float)
        self._edge_lengths = None
        self._triangle_angles = None
        if validate:
            self.validate()

    @property
    def triangles(self):
        return self.topology.triangles

    @property
    def n_vertices(self):
        return len(self.vertices)

    def _geometric_normals(self):
        x = self.vertices
        tri = self.triangles
        a, b, c = x[tri[:, 0]], x[tri[:, 1]], x[tri[:, 2]]
        acc = np.zeros_like(x)
        # corner-wise face normals are exactly orthogonal to their corner
        for k, corner in enumerate((tri[:, 0], tri[:, 1], tri[:, 2])):
            base = (a, b, c)[k]
            u = (b, c, a)[k] - base
            v = (c, a, b)[k] - base
            np.add.at(acc, corner, cross4(base, u, v))
        acc = acc - np.sum(acc * x, axis=1, keepdims=True) * x
        return normalize(acc)

    def with_vertices(self, vertices, normals=None):
        """New mesh with the same topology (caches shared) and new geometry."""
        return SurfaceMesh(vertices, None, normals=normals, validate=False,
                           grid_shape=self.grid_shape, _topology=self.topology)

    def validate(self):
        dev = unit_deviation(self.vertices)
        if dev > 1e-10:
            raise MeshError(f"vertex off S3 by {dev:.3e}")
        ndev = unit_deviation(self.normals)
        if ndev > 1e-8:
            raise MeshError(f"normal not unit by {ndev:.3e}")
        ortho = np.max(np.abs(np.sum(self.normals * self.vertices, axis=1)))
        if ortho > 1e-8:
            raise MeshError(f"normal not tangent to S3 by {ortho:.3e}")
        e = self.topology.edges
        dots = np.sum(self.normals[e[:, 0]] * self.normals[e[:, 1]], axis=1)
        if np.any(dots <= 0.0):
            raise MeshError("normal field flips across an edge")

    # -- aggregates ---------------------------------------------------------

    def edge_lengths(self):
        """Geodesic edge lengths in radians (cached; geometry is immutable)."""
        if self._edge_lengths is None:
            e = self.topology.edges
            self._edge_lengths = geodesic_distance(
                self.vertices[e[:, 0]], self.vertices[e[:, 1]]
            )
        return self._edge_lengths

    def triangle_angles(self):
        """Euclidean corner angles (radians) of each triangle in R4 (cached)."""
        if self._triangle_angles is None:
            tri = self.triangles
            x = self.vertices
            out = np.empty((len(tri), 3))
            for k in range(3):
                p = x[tri[:, k]]
                u = x[tri[:, (k + 1) % 3]] - p
                v = x[tri[:, (k + 2) % 3]] - p
                cu = u / np.linalg.norm(u, axis=1, keepdims=True)
                cv = v / np.linalg.norm(v, axis=1, keepdims=True)
                out[:, k] = np.arccos(np.clip(np.sum(cu * cv, axis=1), -1.0, 1.0))
            self._triangle_angles = out
        return self._triangle_angles

    def area(self):
        """Total area as a sum of spherical triangle areas (l'Huilier)."""
        tri = self.triangles
        x = self.vertices
        a = geodesic_distance(x[tri[:, 1]], x[tri[:, 2]])
        b = geodesic_distance(x[tri[:, 0]], x[tri[:, 2]])
        c = geodesic_distance(x[tri[:, 0]], x[tri[:, 1]])
        s = 0.5 * (a + b + c)
        t = (
            np.tan(0.5 * s)
            * np.tan(0.5 * (s - a))
            * np.tan(0.5 * (s - b))
            * np.tan(0.5 * (s - c))
        )
        return float(np.sum(4.0 * np.arctan(np.sqrt(np.maximum(t, 0.0)))))

    def diameter_proxy(self, n_samples=64):
        """Max pairwise geodesic distance among up to n_samples vertices."""
        n = self.n_vertices
        idx = np.linspace(0, n - 1, min(n_samples, n)).astype(np.int64)
        pts = self.vertices[idx]
        g = np.clip(pts @ pts.T, -1.0, 1.0)
        return float(np.max(np.arccos(g)))


@dataclass
class MeshQualityReport:
    n_vertices: int
    n_triangles: int
    euler_characteristic: int
    min_edge: float
    max_edge: float
    min_angle_deg: float


def mesh_quality(mesh: SurfaceMesh) -> MeshQualityReport:
    el = mesh.edge_lengths()
    ang = mesh.triangle_angles()
    return MeshQualityReport(
        n_vertices=mesh.n_vertices,
        n_triangles=len(mesh.triangles),
        euler_characteristic=mesh.topology.euler_characteristic(),
        min_edge=float(el.min()),
        max_edge=float(el.max()),
        min_angle_deg=float(np.degrees(ang.min())),
    )


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _icosphere(level):
    """Subdivided icosahedron projected to the unit 2-sphere.

    Returns (dirs, tris) with 10 * 4**level + 2 vertices.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts = normalize(verts)
    tris = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(level):
        vlist = [v for v in verts]
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = vlist[i] + vlist[j]
                m = m / np.linalg.norm(m)
                cache[key] = len(vlist)
                vlist.append(m)
            return cache[key]

        new_tris = []
        for i, j, k in tris:
            a = midpoint(i, j)
            b = midpoint(j, k)
            c = midpoint(k, i)
            new_tris += [[i, a, c], [j, b, a], [k, c, b], [a, b, c]]
        verts = np.array(vlist)
        tris = np.array(new_tris, dtype=np.int64)
    return normalize(verts), tris


def _oriented(vertices, triangles, normals):
    """Flip the winding if it disagrees with the given normal field."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    s = np.sum(cross4(a, b - a, c - a) * normals[triangles[:, 0]], axis=1)
    if np.all(s < 0):
        return triangles[:, [0, 2, 1]]
    if np.all(s > 0):
        return triangles
    raise MeshError("generator produced mixed triangle orientations")


def make_geodesic_sphere(r, level, center=None):
    """Geodesic sphere of radius r (0 < r < pi) about ``center`` in S3.

    Icosahedral subdivision at the given level; normals point outward,
    away from the center along great circles.  r = pi/2 gives a great
    (totally geodesic) sphere.
    """
    if not (0.0 < r < np.pi):
        raise ValueError(f"geodesic radius must lie in (0, pi), got {r}")
    if level < 0:
        raise ValueError("subdivision level must be >= 0")
    if center is None:
        center = QUAT_ONE
    center = normalize(np.asarray(center, dtype=float))
    dirs, tris = _icosphere(level)
    basis = orthonormal_tangent_basis(center)  # (3, 4)
    u = dirs @ basis  # (n, 4) unit tangents at center
    verts = normalize(np.cos(r) * center + np.sin(r) * u)
    nrm = -np.sin(r) * center + np.cos(r) * u
    nrm = normalize(nrm - np.sum(nrm * verts, axis=1, keepdims=True) * verts)
    tris = _oriented(verts, tris, nrm)
    return SurfaceMesh(verts, tris, normals=nrm)


def make_perturbed_sphere(r, level, amplitude, seed, center=None):
    """Geodesic sphere with a smooth seeded radial perturbation.

    The radius field is r + amplitude * g(u) where g is a random low-order
    polynomial (linear plus quadratic form) in the unit direction u,
    normalized to max |g| = 1.  Normals are recomputed from the winding.
    Deterministic for a given seed.
    """
    if not (0.0 < r < np.pi):
        raise ValueError(f"geodesic radius must lie in (0, pi), got {r}")
    if amplitude < 0.0:
        raise ValueError("amplitude must be non-negative")
    if center is None:
        center = QUAT_ONE
    center = normalize(np.asarray(center, dtype=float))
    dirs, tris = _icosphere(level)
    rng = np.random.default_rng(seed)
    quad = rng.standard_normal((3, 3))
    quad = 0.5 * (quad + quad.T)
    lin = rng.standard_normal(3)
    g = np.einsum("ni,ij,nj->n", dirs, quad, dirs) + dirs @ lin
    peak = np.max(np.abs(g))
    if peak > 0.0:
        g = g / peak
    radii = r + amplitude * g
    if radii.min() <= 0.0 or radii.max() >= np.pi:
        raise ValueError("perturbation pushes the radius outside (0, pi)")
    basis = orthonormal_tangent_basis(center)
    u = dirs @ basis
    verts = normalize(np.cos(radii)[:, None] * center + np.sin(radii)[:, None] * u)
    approx_nrm = -np.sin(radii)[:, None] * center + np.cos(radii)[:, None] * u
    tris = _oriented(verts, tris, approx_nrm)
    return SurfaceMesh(verts, tris, normals=None)


def _grid_torus_triangles(nu, nv):
    idx = np.arange(nu * nv, dtype=np.int64).reshape(nu, nv)
    right = np.roll(idx, -1, axis=0)
    down = np.roll(idx, -1, axis=1)
    diag = np.roll(right, -1, axis=1)
    t1 = np.stack([idx, right, diag], axis=-1).reshape(-1, 3)
    t2 = np.stack([idx, diag, down], axis=-1).reshape(-1, 3)
    return np.concatenate([t1, t2])


def make_clifford_torus(nu, nv):
    """The minimal Clifford torus {(cos u, sin u, cos v, sin v)/sqrt(2)}.

    Flat (G = 0) with principal curvatures +1 and -1; Euler characteristic 0.
    """
    if nu < 8 or nv < 8:
        raise ValueError("need nu, nv >= 8")
    uu = 2.0 * np.pi * np.arange(nu) / nu
    vv = 2.0 * np.pi * np.arange(nv) / nv
    U, V = np.meshgrid(uu, vv, indexing="ij")
    r = 1.0 / np.sqrt(2.0)
    verts = np.stack(
        [r * np.cos(U), r * np.sin(U), r * np.cos(V), r * np.sin(V)], axis=-1
    ).reshape(-1, 4)
    nrm = np.stack(
        [-r * np.cos(U), -r * np.sin(U), r * np.cos(V), r * np.sin(V)], axis=-1
    ).reshape(-1, 4)
    tris = _oriented(verts, _grid_torus_triangles(nu, nv), nrm)
    return SurfaceMesh(verts, tris, normals=nrm, grid_shape=(nu, nv))


def _lift_to_fiber(c):
    """One quaternion q with hopf_project(q) = c (c a unit 3-vector)."""
    c = np.asarray(c, dtype=float)
    i_axis = np.array([1.0, 0.0, 0.0])
    d = float(np.dot(i_axis, c))
    if d > 1.0 - 1e-14:
        return QUAT_ONE.copy()
    if d < -1.0 + 1e-14:
        return np.array([0.0, 0.0, 1.0, 0.0])  # rotate about j by pi
    axis = np.cross(i_axis, c)
    axis = axis / np.linalg.norm(axis)
    t = np.arccos(np.clip(d, -1.0, 1.0))
    a = np.concatenate([[np.cos(0.5 * t)], np.sin(0.5 * t) * axis])
    return quat_conj(a)


def make_hopf_torus(curve, n_fiber):
    """Hopf-fiber torus over a closed curve on S2.

    For each curve sample the full Hopf fiber circle is sampled ``n_fiber``
    times; the lift is chosen continuously along the curve and the fiber
    phase is sheared to absorb the lift holonomy so the seam closes.  The
    holonomy angle is stored on the returned mesh as ``hopf_holonomy``.
    The preimage of any curve is intrinsically flat (G = 0).
    """
    samples = np.asarray(getattr(curve, "samples", curve), dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 3 or len(samples) < 8:
        raise ValueError("curve must provide >= 8 unit 3-vector samples")
    if n_fiber < 8:
        raise ValueError("need n_fiber >= 8")
    n_curve = len(samples)

    lifts = np.empty((n_curve + 1, 4))
    lifts[0] = _lift_to_fiber(samples[0])
    for k in range(n_curve):
        c0 = samples[k]
        c1 = samples[(k + 1) % n_curve]
        axis = np.cross(c0, c1)
        an = np.linalg.norm(axis)
        t = np.arccos(np.clip(float(np.dot(c0, c1)), -1.0, 1.0))
        if an < 1e-15 or t < 1e-15:
            step = QUAT_ONE
        else:
            axis = axis / an
            a = np.concatenate([[np.cos(0.5 * t)], np.sin(0.5 * t) * axis])
            step = quat_conj(a)
        lifts[k + 1] = quat_mul(lifts[k], step)

    h = quat_mul(lifts[n_curve], quat_conj(lifts[0]))
    off_fiber = float(np.hypot(h[2], h[3]))
    if off_fiber > 1e-6:
        raise MeshError(
            f"continuous Hopf lift failed to close: holonomy defect {off_fiber:.3e} "
            "off the fiber direction"
        )
    holonomy = float(np.arctan2(h[1], h[0]))

    seg = geodesic_distance(samples, np.roll(samples, -1, axis=0))
    frac = np.concatenate([[0.0], np.cumsum(seg)]) / np.sum(seg)
    phase = -holonomy * frac[:n_curve]
    tw = np.stack(
        [np.cos(phase), np.sin(phase), np.zeros(n_curve), np.zeros(n_curve)], axis=-1
    )
    q = quat_mul(tw, lifts[:n_curve])  # (n_curve, 4), seam now closes

    theta = 2.0 * np.pi * np.arange(n_fiber) / n_fiber
    rot = np.stack(
        [np.cos(theta), np.sin(theta), np.zeros(n_fiber), np.zeros(n_fiber)], axis=-1
    )
    verts = quat_mul(rot[None, :, :], q[:, None, :]).reshape(-1, 4)
    verts = normalize(verts)

    grid = verts.reshape(n_curve, n_fiber, 4)
    t_fib = quat_mul(QUAT_I, grid)
    t_base = np.roll(grid, -1, axis=0) - np.roll(grid, 1, axis=0)
    t_base = t_base - np.sum(t_base * grid, axis=-1, keepdims=True) * grid
    t_base = t_base - np.sum(t_base * t_fib, axis=-1, keepdims=True) * t_fib
    t_base = normalize(t_base)
    nrm = normalize(cross4(grid, t_fib, t_base)).reshape(-1, 4)

    tris = _oriented(verts, _grid_torus_triangles(n_curve, n_fiber), nrm)
    m = SurfaceMesh(verts, tris, normals=nrm, grid_shape=(n_curve, n_fiber))
    m.hopf_holonomy = holonomy
    return m


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------


@dataclass
class CurvatureData:
    """Per-vertex shape operators and curvature scalars.

    kappa1 >= kappa2 are the principal curvatures (units 1/radian);
    H = kappa1 + kappa2, normA2 = kappa1**2 + kappa2**2 and
    G = 1 + kappa1 * kappa2 is the intrinsic curvature from the Gauss
    equation, identically equal to 1 + H**2/2 - normA2/2.
    ``flagged`` marks vertices whose fit was ill-conditioned or starved of
    neighbours; their scalars are inherited from one-ring averages.
    """

    shape_ops: np.ndarray       # (n, 2, 2) in the (e1, e2) frame
    frames: np.ndarray          # (n, 2, 4): e1, e2
    kappa1: np.ndarray
    kappa2: np.ndarray
    H: np.ndarray = field(init=False)
    normA2: np.ndarray = field(init=False)
    G: np.ndarray = field(init=False)
    principal_dirs: np.ndarray = None  # (n, 2, 4)
    flagged: np.ndarray = None

    def __post_init__(self):
        self.H = self.kappa1 + self.kappa2
        self.normA2 = self.kappa1 ** 2 + self.kappa2 ** 2
        self.G = 1.0 + self.kappa1 * self.kappa2
        if self.flagged is None:
            self.flagged = np.zeros(len(self.kappa1), dtype=bool)

    @property
    def n_flagged(self):
        return int(np.count_nonzero(self.flagged))


def _cholesky_solve_batched(M, rhs):
    """Solve SPD systems M x = rhs for a batch of small matrices.

    Vectorized over the batch axis (LAPACK per-matrix call overhead
    dominates at these sizes).  Returns (x, cond_proxy, bad) where
    cond_proxy is the squared ratio of extreme Cholesky pivots (an
    adequate stand-in for the condition number when flagging fits) and
    ``bad`` marks batches that were not positive definite.
    """
    n, k, _ = M.shape
    L = np.zeros_like(M)
    bad = np.zeros(n, dtype=bool)
    for j in range(k):
        s = M[:, j, j] - np.einsum("np,np->n", L[:, j, :j], L[:, j, :j])
        bad |= s <= 0.0
        d = np.sqrt(np.maximum(s, 1e-300))
        L[:, j, j] = d
        for i in range(j + 1, k):
            L[:, i, j] = (
                M[:, i, j] - np.einsum("np,np->n", L[:, i, :j], L[:, j, :j])
            ) / d
    y = np.zeros_like(rhs)
    for i in range(k):
        y[:, i] = (rhs[:, i] - np.einsum("np,np->n", L[:, i, :i], y[:, :i])) / L[:, i, i]
    x = np.zeros_like(rhs)
    for i in range(k - 1, -1, -1):
        x[:, i] = (y[:, i] - np.einsum("np,np->n", L[:, i + 1:, i], x[:, i + 1:])) / L[:, i, i]
    diag = np.einsum("nii->ni", L)
    cond = (diag.max(axis=1) / np.maximum(diag.min(axis=1), 1e-300)) ** 2
    return x, cond, bad


def _design_columns(us, vs, order):
    n, k = us.shape
    m = 14 if order >= 4 else 5
    cols = np.empty((n, k, m))
    u2 = us * us
    v2 = vs * vs
    uv = us * vs
    cols[..., 0] = 0.5 * u2
    cols[..., 1] = uv
    cols[..., 2] = 0.5 * v2
    cols[..., 3] = us
    cols[..., 4] = vs
    if order >= 4:
        cols[..., 5] = u2 * us
        cols[..., 6] = u2 * vs
        cols[..., 7] = us * v2
        cols[..., 8] = v2 * vs
        cols[..., 9] = u2 * u2
        cols[..., 10] = u2 * uv
        cols[..., 11] = u2 * v2
        cols[..., 12] = uv * v2
        cols[..., 13] = v2 * v2
    return cols


def estimate_curvature(mesh: SurfaceMesh, cond_limit=1e8, order=4) -> CurvatureData:
    """Estimate the shape operator at every vertex by local quadric fitting.

    One- and two-ring neighbours are mapped into T_x S3 by the spherical
    log map and the height w along the normal is fitted by least squares
    in an orthonormal tangent frame (e1, e2); the shape operator is the
    negated Hessian -[[a, b], [b, c]] of the fitted w, with eigenvalues
    sorted kappa1 >= kappa2.  By default the fit carries cubic and quartic
    correction columns (order=4), which remove the aliasing of higher
    height terms into the Hessian; vertices whose two-ring is too small
    for that fall back to the plain quadric.  Vertices with fewer than 5
    usable neighbours or condition proxy above ``cond_limit`` are flagged
    and inherit the average curvature of their unflagged one-ring
    neighbours.
    """
    x = mesh.vertices
    nu = mesh.normals
    n = mesh.n_vertices
    topo = mesh.topology
    nbr = topo.two_ring_padded  # (n, K), self-padded
    counts = topo.ring_counts

    y = x[nbr]  # (n, K, 4)
    logs = log_map(x[:, None, :], y)  # zero rows at padding

    # deterministic tangent frame: seed from the first two-ring neighbour
    seed = logs[:, 0, :]
    seed = seed - np.sum(seed * nu, axis=1, keepdims=True) * nu
    sn = np.linalg.norm(seed, axis=1, keepdims=True)
    bad_seed = sn[:, 0] < 1e-14
    if np.any(bad_seed):
        # fall back to an arbitrary coordinate direction in the tangent plane
        alt = np.zeros((n, 4))
        alt[:, 0] = 1.0
        alt = alt - np.sum(alt * x, axis=1, keepdims=True) * x
        alt = alt - np.sum(alt * nu, axis=1, keepdims=True) * nu
        seed = np.where(bad_seed[:, None], alt, seed)
        sn = np.linalg.norm(seed, axis=1, keepdims=True)
    e1 = seed / sn
    e2 = normalize(cross4(x, nu, e1))

    u = np.einsum("nkd,nd->nk", logs, e1)
    v = np.einsum("nkd,nd->nk", logs, e2)
    w = np.einsum("nkd,nd->nk", logs, nu)

    rho2 = u * u + v * v
    denom = np.maximum(counts.astype(float), 1.0)
    scale = np.sqrt(np.sum(rho2, axis=1) / denom)
    scale = np.maximum(scale, 1e-300)
    us = u / scale[:, None]
    vs = v / scale[:, None]
    ws = w / scale[:, None]

    n_cols_hi = 14
    cols = _design_columns(us, vs, 4 if order >= 4 else 2)
    low = np.zeros(n, dtype=bool)
    if order >= 4:
        # rings too small for the high-order fit fall back to the quadric:
        # zero those columns and pad the unused block with an identity
        low = counts < n_cols_hi + 1
        if np.any(low):
            cols[low, :, 5:] = 0.0
    colsT = np.swapaxes(cols, 1, 2)
    M = colsT @ cols
    rhs = (colsT @ ws[:, :, None])[:, :, 0]
    if order >= 4 and np.any(low):
        idx = np.flatnonzero(low)
        for j in range(5, n_cols_hi):
            M[idx, j, j] = 1.0

    coef, cond, notspd = _cholesky_solve_batched(M, rhs)
    flagged = (counts < 5) | notspd | ~np.isfinite(cond) | (cond > cond_limit)
    flagged |= ~np.all(np.isfinite(coef), axis=1)
    a = coef[:, 0] / scale
    b = coef[:, 1] / scale
    c = coef[:, 2] / scale

    s11, s12, s22 = -a, -b, -c
    mean = 0.5 * (s11 + s22)
    delta = np.hypot(0.5 * (s11 - s22), s12)
    kappa1 = mean + delta
    kappa2 = mean - delta

    # principal directions: eigenvectors of the 2x2 operator, mapped to R4
    w1 = np.stack([s12, kappa1 - s11], axis=-1)
    w2 = np.stack([kappa1 - s22, s12], axis=-1)
    pick = np.einsum("ni,ni->n", w1, w1) >= np.einsum("ni,ni->n", w2, w2)
    vec = np.where(pick[:, None], w1, w2)
    vn = np.linalg.norm(vec, axis=1)
    umb = vn < 1e-14
    vec = np.where(umb[:, None], np.array([1.0, 0.0]), vec / np.maximum(vn, 1e-300)[:, None])
    d1 = vec[:, 0:1] * e1 + vec[:, 1:2] * e2
    d2 = -vec[:, 1:2] * e1 + vec[:, 0:1] * e2

    if np.any(flagged):
        k1f = kappa1.copy()
        k2f = kappa2.copy()
        good = ~flagged
        for i in np.flatnonzero(flagged):
            ring = topo.one_ring[i]
            ok = ring[good[ring]]
            if len(ok):
                k1f[i] = float(np.mean(kappa1[ok]))
                k2f[i] = float(np.mean(kappa2[ok]))
            else:
                k1f[i] = 0.0
                k2f[i] = 0.0
        kappa1, kappa2 = k1f, k2f

    shape_ops = np.empty((n, 2, 2))
    shape_ops[:, 0, 0] = s11
    shape_ops[:, 0, 1] = s12
    shape_ops[:, 1, 0] = s12
    shape_ops[:, 1, 1] = s22
    frames = np.stack([e1, e2], axis=1)
    dirs = np.stack([d1, d2], axis=1)
    return CurvatureData(
        shape_ops=shape_ops,
        frames=frames,
        kappa1=kappa1,
        kappa2=kappa2,
        principal_dirs=dirs,
        flagged=flagged,
    )
