"""Time integration of the normal-speed flow dx/dt = -F nu on meshes in S3.

Sign convention: nu is the outward normal, so positive F contracts
geodesic spheres of radius below pi/2.  Stepping is explicit (forward
Euler in time, great-circle steps in space) under a parabolic CFL bound;
the speeds are fully nonlinear, the meshes are desk-scale, and explicit
stepping keeps the scheme honest.

The pinching monitor tracks the preserved curvature regions

    Omega_eps = {|k1 - k2| <= (1 + k1 k2)/eps, k1 k2 <= 1}
                union {|k1 - k2| <= 2/eps, k1 k2 >= 1}

through the largest eps for which every vertex still lies inside.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .mesh import CurvatureData, SurfaceMesh, estimate_curvature
from .s3core import geodesic_step, log_map, normalize
from .speeds import SpeedFunction, speed_huisken_monitor


class MeshDegenerateError(RuntimeError):
    """The evolving mesh collapsed below the quality thresholds."""


class StopReason(enum.Enum):
    CONVERGED = "Converged"
    EXTINCT = "Extinct"
    CONDITION_BREACHED = "ConditionBreached"
    TIME_EXHAUSTED = "TimeExhausted"
    MESH_DEGENERATE = "MeshDegenerate"


HEALTHY_STOPS = (StopReason.CONVERGED, StopReason.EXTINCT, StopReason.TIME_EXHAUSTED)


@dataclass
class FlowConfig:
    """Run parameters; ``dt`` fixes the step, otherwise CFL with factor sigma."""

    speed: SpeedFunction
    t_end: float
    dt: float = None
    sigma: float = 0.25
    dt_max: float = 1e-2
    speed_tol: float = 1e-6
    width_tol: float = 0.05
    g_floor: float = 0.05
    cadence: int = 1
    snapshot_every: int = 0
    smoothing: float = 0.0
    fit_order: int = 2
    max_steps: int = 500_000

    def __post_init__(self):
        if not (0.0 < self.sigma <= 1.0):
            raise ValueError("sigma must lie in (0, 1]")
        for name in ("speed_tol", "width_tol", "g_floor"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("fixed dt must be positive")


@dataclass
class FlowState:
    t: float
    mesh: SurfaceMesh
    curvature: CurvatureData
    step_index: int


@dataclass
class PinchingReport:
    min_G: float
    max_G: float
    max_normA2: float
    max_abs_speed: float
    area: float
    epsilon_star: float
    frac_simons: float
    frac_huisken2d: float
    frac_okumura: float

    @property
    def max_abs_G(self):
        return max(abs(self.min_G), abs(self.max_G))


@dataclass
class FlowResult:
    times: np.ndarray
    reports: list
    snapshots: list
    final: FlowState
    reason: StopReason

    def column(self, name):
        return np.array([getattr(r, name) for r in self.reports])


def omega_epsilon_member(k1, k2, eps):
    """Membership in the preserved curvature region Omega_eps (eps > 0)."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    lam = np.abs(k1 - k2)
    prod = k1 * k2
    return ((prod <= 1.0) & (lam <= (1.0 + prod) / eps)) | (
        (prod >= 1.0) & (lam <= 2.0 / eps)
    )


def epsilon_star(k1, k2):
    """Largest eps with every (k1, k2) inside Omega_eps, clamped at 0.

    Per point: (1 + k1 k2)/|k1 - k2| on the product <= 1 side and
    2/|k1 - k2| on the product >= 1 side (the two agree on the seam);
    umbilic points impose no constraint (infinity).
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    lam = np.abs(k1 - k2)
    prod = k1 * k2
    with np.errstate(divide="ignore"):
        low = np.where(lam > 0.0, (1.0 + prod) / np.maximum(lam, 1e-300), np.inf)
        high = np.where(lam > 0.0, 2.0 / np.maximum(lam, 1e-300), np.inf)
    per_vertex = np.where(prod <= 1.0, low, high)
    return float(max(np.min(per_vertex), 0.0))


def pinching_report(curvature: CurvatureData, mesh: SurfaceMesh,
                    speed: SpeedFunction = None) -> PinchingReport:
    flags = speed_huisken_monitor(curvature.kappa1, curvature.kappa2)
    if speed is not None:
        max_speed = float(np.max(np.abs(speed.eval(curvature.kappa1, curvature.kappa2))))
    else:
        max_speed = float("nan")
    return PinchingReport(
        min_G=float(np.min(curvature.G)),
        max_G=float(np.max(curvature.G)),
        max_normA2=float(np.max(curvature.normA2)),
        max_abs_speed=max_speed,
        area=mesh.area(),
        epsilon_star=epsilon_star(curvature.kappa1, curvature.kappa2),
        frac_simons=float(np.mean(flags.simons)),
        frac_huisken2d=float(np.mean(flags.huisken2d)),
        frac_okumura=float(np.mean(flags.okumura)),
    )


def cfl_dt(mesh: SurfaceMesh, curvature: CurvatureData, speed: SpeedFunction,
           sigma, dt_max=1e-2, floor=1e-8):
    """Parabolic step bound sigma * h_min^2 / lambda_max, capped at dt_max."""
    if not (0.0 < sigma <= 1.0):
        raise ValueError("sigma must lie in (0, 1]")
    h_min = float(np.min(mesh.edge_lengths()))
    d1, d2 = speed.partials(curvature.kappa1, curvature.kappa2)
    lam = float(np.max(np.abs(d1) + np.abs(d2)))
    return min(sigma * h_min * h_min / max(lam, floor), dt_max)


def _check_degeneracy(mesh: SurfaceMesh):
    el = mesh.edge_lengths()
    if float(el.min()) < 1e-6:
        raise MeshDegenerateError(f"edge collapsed to {el.min():.3e} rad")
    ang = mesh.triangle_angles()
    worst = float(np.degrees(ang.min()))
    if worst < 1.0:
        raise MeshDegenerateError(f"minimum triangle angle {worst:.3f} deg < 1 deg")


def flow_step(state: FlowState, speed: SpeedFunction, dt,
              smoothing=0.0, fit_order=2) -> FlowState:
    """One explicit step: every vertex moves along the great circle through
    its outward normal by arclength -F dt; normals and curvature are then
    recomputed from the new geometry."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    mesh = state.mesh
    curv = state.curvature
    f = np.asarray(speed.eval(curv.kappa1, curv.kappa2), dtype=float)
    verts = geodesic_step(mesh.vertices, mesh.normals, -f * dt)
    new_mesh = mesh.with_vertices(verts)

    if smoothing > 0.0:
        new_mesh = mesh.with_vertices(_tangential_smooth(new_mesh, smoothing))

    _check_degeneracy(new_mesh)
    return FlowState(
        t=state.t + dt,
        mesh=new_mesh,
        curvature=estimate_curvature(new_mesh, order=fit_order),
        step_index=state.step_index + 1,
    )


def _tangential_smooth(mesh: SurfaceMesh, strength):
    """Move each vertex toward its one-ring log-mean, within the surface
    tangent plane only (parametrisation changes, geometry does not)."""
    topo = mesh.topology
    x = mesh.vertices
    nrm = mesh.normals
    nbr = topo.one_ring_padded  # self-padded: zero log contributions
    logs = log_map(x[:, None, :], x[nbr])
    mean = logs.sum(axis=1) / topo.one_ring_counts[:, None]
    tang = mean - np.sum(mean * nrm, axis=1, keepdims=True) * nrm
    tang = tang - np.sum(tang * x, axis=1, keepdims=True) * x
    s = strength * np.linalg.norm(tang, axis=1)
    move = s > 1e-14
    if not np.any(move):
        return x
    d = np.where(move[:, None], tang, np.array([1.0, 0.0, 0.0, 0.0]))
    d = d / np.linalg.norm(d, axis=1, keepdims=True)
    s = np.where(move, s, 0.0)
    return normalize(np.cos(s)[:, None] * x + np.sin(s)[:, None] * d)


def run_flow(mesh0: SurfaceMesh, config: FlowConfig) -> FlowResult:
    """Drive the flow until a stop condition fires.

    Deterministic for a given config.  The trajectory samples one
    :class:`PinchingReport` every ``cadence`` steps (plus the final state);
    full mesh snapshots are kept every ``snapshot_every`` steps when that
    is positive.

    Normals are re-derived from the triangle geometry at t = 0 so that the
    whole trajectory, including its first report, uses the same discrete
    pipeline as every later step (generator-supplied analytic normals
    would make the t = 0 diagnostics incomparably sharper than the rest).
    """
    mesh0 = mesh0.with_vertices(mesh0.vertices)
    state = FlowState(0.0, mesh0, estimate_curvature(mesh0, order=config.fit_order), 0)
    times = []
    reports = []
    snapshots = []

    def record(st, force=False):
        if force or st.step_index % config.cadence == 0:
            times.append(st.t)
            reports.append(pinching_report(st.curvature, st.mesh, config.speed))
        if config.snapshot_every > 0 and (force or st.step_index % config.snapshot_every == 0):
            snapshots.append(st)

    reason = None
    while True:
        record(state)
        rep_minG = float(np.min(state.curvature.G))
        if rep_minG < -config.g_floor:
            reason = StopReason.CONDITION_BREACHED
            break
        if state.mesh.diameter_proxy() < config.width_tol:
            reason = StopReason.EXTINCT
            break
        max_speed = float(
            np.max(np.abs(config.speed.eval(state.curvature.kappa1, state.curvature.kappa2)))
        )
        if max_speed < config.speed_tol:
            reason = StopReason.CONVERGED
            break
        if state.t >= config.t_end - 1e-14:
            reason = StopReason.TIME_EXHAUSTED
            break
        if state.step_index >= config.max_steps:
            reason = StopReason.TIME_EXHAUSTED
            break
        if config.dt is not None:
            dt = config.dt
        else:
            dt = cfl_dt(state.mesh, state.curvature, config.speed,
                        config.sigma, config.dt_max)
        dt = min(dt, config.t_end - state.t)
        try:
            state = flow_step(state, config.speed, dt, smoothing=config.smoothing,
                              fit_order=config.fit_order)
        except MeshDegenerateError:
            reason = StopReason.MESH_DEGENERATE
            break

    if not times or times[-1] != state.t:
        record(state, force=True)
    return FlowResult(
        times=np.array(times),
        reports=reports,
        snapshots=snapshots,
        final=state,
        reason=reason,
    )


@dataclass
class SphereOdeResult:
    t: np.ndarray
    r: np.ndarray
    extinction_time: float = None  # None if never reached r_min


def sphere_ode_oracle(speed: SpeedFunction, r0, t_end, dt=1e-5,
                      r_min=1e-3) -> SphereOdeResult:
    """Independent RK4 oracle for the radius of a flowing geodesic sphere.

    Geodesic spheres are umbilic with kappa = cot(r), so the exact radius
    obeys dr/dt = -F(cot r, cot r).  Integration stops when r < r_min
    (extinction at the center) or r > pi - r_min (extinction at the
    antipode after expanding over the equator).
    """
    if not (0.0 < r0 < np.pi):
        raise ValueError("r0 must lie in (0, pi)")

    def rhs(r):
        r = min(max(r, 1e-9), np.pi - 1e-9)
        c = np.cos(r) / np.sin(r)
        return -float(speed.eval(c, c))

    ts = [0.0]
    rs = [float(r0)]
    t, r = 0.0, float(r0)
    extinction = None
    n_steps = int(np.ceil(t_end / dt))
    for _ in range(n_steps):
        k1 = rhs(r)
        k2 = rhs(r + 0.5 * dt * k1)
        k3 = rhs(r + 0.5 * dt * k2)
        k4 = rhs(r + dt * k3)
        r = r + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        t += dt
        ts.append(t)
        rs.append(r)
        if r < r_min or r > np.pi - r_min:
            extinction = t
            break
    return SphereOdeResult(t=np.array(ts), r=np.array(rs), extinction_time=extinction)
