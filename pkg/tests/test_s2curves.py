import numpy as np
import pytest

from s3flow.s2curves import (
    S2Curve,
    csf_step,
    geodesic_curvature,
    hausdorff_distance,
    make_great_circle,
    make_latitude_circle,
    resample_uniform,
    run_csf,
    sup_subinterval_cyclic,
    weiner_check,
)


def cap_area(theta):
    return 2.0 * np.pi * (1.0 - np.cos(theta))


def colatitude(curve):
    return float(np.mean(np.arccos(np.clip(curve.samples[:, 2], -1, 1))))


# -- fixtures -------------------------------------------------------------


def test_latitude_circle_construction():
    c = make_latitude_circle(np.pi / 4, 64)
    pole = np.array([0.0, 0.0, 1.0])
    d = np.arccos(np.clip(c.samples @ pole, -1, 1))
    np.testing.assert_allclose(d, np.pi / 4, atol=1e-12)


def test_latitude_at_pi_over_2_is_great_circle():
    c = make_latitude_circle(np.pi / 2, 64)
    assert np.max(np.abs(c.samples[:, 2])) < 1e-12


def test_sample_count_minimum():
    # 8 samples are accepted wherever the 0.5 rad segment cap allows
    make_latitude_circle(0.5, 8)
    with pytest.raises(ValueError):
        make_latitude_circle(0.5, 7)
    with pytest.raises(ValueError):
        make_great_circle(n=7)


def test_curve_validation():
    with pytest.raises(ValueError, match="off S2"):
        S2Curve(np.ones((16, 3)))
    pts = make_great_circle(n=16).samples.copy()
    pts[3] = pts[2]  # degenerate gap
    with pytest.raises(ValueError, match="degenerate"):
        S2Curve(pts)
    # 8 samples around a full great circle exceed the segment cap
    with pytest.raises(ValueError, match="too long"):
        make_great_circle(n=8)


# -- geodesic curvature ----------------------------------------------------


def test_great_circle_zero_curvature():
    k, _ = geodesic_curvature(make_great_circle(n=128))
    assert np.max(np.abs(k)) <= 1e-3


def test_latitude_curvature_closed_form():
    k, _ = geodesic_curvature(make_latitude_circle(np.pi / 4, 256))
    np.testing.assert_allclose(k, 1.0, atol=1e-2)  # cot(pi/4)


def test_total_turning_gauss_bonnet():
    for theta in (0.4, np.pi / 4, 1.2):
        k, ds = geodesic_curvature(make_latitude_circle(theta, 256))
        np.testing.assert_allclose(
            np.sum(k * ds), 2.0 * np.pi - cap_area(theta), atol=2e-2
        )


def test_curvature_sign_flips_with_orientation():
    c = make_latitude_circle(np.pi / 3, 64)
    rev = S2Curve(c.samples[::-1].copy())
    k1, _ = geodesic_curvature(c)
    k2, _ = geodesic_curvature(rev)
    np.testing.assert_allclose(k1, -k2[::-1], atol=1e-12)


# -- curve shortening ------------------------------------------------------


def test_great_circle_csf_stationary():
    g = make_great_circle(n=128)
    res = run_csf(g, 1.0, sigma=0.25)
    disp = np.max(np.linalg.norm(res.final.samples - g.samples, axis=1))
    assert disp <= 1e-6


def test_latitude_matches_ode_oracle():
    # latitude circles stay latitude circles; colatitude obeys
    # dtheta/dt = -cot(theta)
    res = run_csf(make_latitude_circle(np.pi / 3, 256), 0.6, sigma=0.25,
                  cadence=25, length_tol=0.05)

    def rk4(th0, t_end, dt=1e-5):
        ts, ths = [0.0], [th0]
        th, t = th0, 0.0
        while t < t_end - 1e-12 and th > 0.02:
            f = lambda x: -np.cos(x) / np.sin(x)
            k1 = f(th)
            k2 = f(th + 0.5 * dt * k1)
            k3 = f(th + 0.5 * dt * k2)
            k4 = f(th + dt * k3)
            th += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            t += dt
            ts.append(t)
            ths.append(th)
        return np.array(ts), np.array(ths)

    ts, ths = rk4(np.pi / 3, 0.6)
    for t, cur in zip(res.curve_times, res.curves):
        th_o = float(np.interp(t, ts, ths))
        if th_o > 0.15:
            assert abs(colatitude(cur) - th_o) < 2e-2


def test_csf_shrinks_toward_nearer_pole():
    res = run_csf(make_latitude_circle(np.pi / 2 + 0.2, 128), 0.1, sigma=0.25)
    assert colatitude(res.final) > np.pi / 2 + 0.2  # moves toward theta = pi


def test_csf_length_monotone():
    res = run_csf(make_latitude_circle(1.1, 128), 0.3, sigma=0.25)
    assert np.all(np.diff(res.lengths) <= 1e-9)


def test_csf_extinction_in_finite_time():
    res = run_csf(make_latitude_circle(np.pi / 3, 128), 2.0, sigma=0.25)
    assert res.status == "Extinct"
    assert res.times[-1] < 0.8  # exact circle extinction is ln 2 ~ 0.693


def test_csf_step_requires_positive_dt():
    with pytest.raises(ValueError):
        csf_step(make_great_circle(n=16), 0.0)


def test_resample_preserves_geometry():
    c = make_latitude_circle(0.8, 100)
    r = resample_uniform(c, 140)
    assert len(r) == 140
    # interpolation runs along geodesic chords, so points sit inside the
    # circle by at most the sagitta ~ gap^2 / 8
    np.testing.assert_allclose(
        np.arccos(np.clip(r.samples[:, 2], -1, 1)), 0.8, atol=1e-3
    )
    seg = np.linalg.norm(np.roll(r.samples, -1, axis=0) - r.samples, axis=1)
    assert seg.std() / seg.mean() < 1e-3


# -- Weiner conditions -----------------------------------------------------


def test_weiner_great_circle_pair_passes():
    rep = weiner_check(make_great_circle(n=256), make_great_circle(axis=(0, 1, 0), n=256))
    assert rep.verdict
    assert abs(rep.total_curvature[0]) < 1e-9
    assert rep.sup_pair < 1e-6


def test_weiner_latitude_pair_fails():
    c = make_latitude_circle(np.pi / 4, 256)
    rep = weiner_check(c, c)
    assert not rep.verdict
    np.testing.assert_allclose(
        rep.total_curvature[0], 2 * np.pi * np.cos(np.pi / 4), atol=2e-2
    )


def brute_force_sup(values):
    n = len(values)
    best = 0.0
    for start in range(n):
        acc = 0.0
        for length in range(1, n + 1):
            acc += values[(start + length - 1) % n]
            best = max(best, abs(acc))
    return best


def test_sup_subinterval_equals_brute_force():
    rng = np.random.default_rng(99)
    for trial in range(50):
        n = int(rng.integers(10, 200))
        vals = rng.standard_normal(n) * rng.uniform(0.01, 1.0)
        assert abs(sup_subinterval_cyclic(vals) - brute_force_sup(vals)) <= 1e-12


def test_hausdorff_distance_basics():
    a = make_great_circle(n=64)
    b = make_great_circle(n=97)
    assert hausdorff_distance(a, b) < 1e-3
    c = make_latitude_circle(np.pi / 2 - 0.3, 64)
    d = hausdorff_distance(a, c)
    np.testing.assert_allclose(d, 0.3, atol=1e-2)


def test_curve_csv_round_trip(tmp_path):
    from s3flow.s2curves import load_curve_csv, save_curve_csv

    c = make_latitude_circle(0.9, 48)
    path = tmp_path / "c.csv"
    save_curve_csv(c, str(path))
    back = load_curve_csv(str(path))
    assert np.array_equal(back.samples, c.samples)
