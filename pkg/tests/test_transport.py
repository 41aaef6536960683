import numpy as np
import pytest

from gauge2.errors import ComposabilityError, DomainError
from gauge2.families import matrix_family
from gauge2.forms import TwoConnection
from gauge2.geometry import (Chart, ParamMap,
                             compose_bigons_horizontal,
                             compose_bigons_vertical, concat_paths,
                             reparameterize, reverse_bigon, straight_path)
from gauge2.transport import (ambrose_singer_check, holonomy2_H,
                              horizontal_lift, path_ordered_exp,
                              reconstruct_A, reconstruct_B, surface_transport,
                              transport_point, verify_higher_stokes,
                              verify_nonabelian_stokes)

U1 = matrix_family("u1_id")
U1T = matrix_family("u1_triv")
SU2 = matrix_family("su2_id_conj")
U2P = matrix_family("u2_to_pu2")

SU2_CONN = TwoConnection(
    SU2, Chart(2),
    a=[["0.6*x2", "0.3", "0.1*x1"], ["0.2", "0.5*x1", "0.3*x2"]],
    b="fake_flat")


def bulge_bigon(amplitude=0.6):
    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        return np.concatenate([v, amplitude * u * np.sin(np.pi * v)], -1)
    return ParamMap(2, 2, fn, name="bulge")


def lens_bigon(k=0.25):
    def fn(params):
        u = params[..., 0]
        v = params[..., 1]
        return np.stack([v, v + (2 * u - 1) * k * np.sin(np.pi * v)], -1)
    return ParamMap(2, 2, fn, name="lens")


# --- 1-transport --------------------------------------------------------------


def test_path_zero_connection_is_identity():
    conn = TwoConnection(U1, Chart(2), a=[["0"], ["0"]], b="fake_flat")
    res = path_ordered_exp(conn, bulge_bigon().slice_first(0.7), steps=16)
    assert np.max(np.abs(res.value - 1.0)) <= 1e-14


def test_path_abelian_closed_form():
    c, length = 0.7, 1.0
    conn = TwoConnection(U1, Chart(2), a=[[f"{c}"], ["0"]], b="fake_flat")
    res = path_ordered_exp(conn, straight_path([0, 0], [length, 0]), steps=32)
    assert np.max(np.abs(res.value - np.exp(-1j * c * length))) <= 1e-10
    assert res.group_defect <= 1e-10


def test_path_constant_su2_closed_form():
    coeffs = np.array([0.4, -0.3, 0.2])
    conn = TwoConnection(SU2, Chart(2),
                         a=[[str(c) for c in coeffs], ["0", "0", "0"]],
                         b="fake_flat")
    length = 0.8
    res = path_ordered_exp(conn, straight_path([0, 0], [length, 0]), steps=64)
    expected = SU2.group_G.exp(SU2.l2a.g_alg.to_matrix(-length * coeffs))
    assert np.max(np.abs(res.value - expected)) <= 1e-9


def test_path_requires_at_least_8_steps():
    with pytest.raises(DomainError):
        path_ordered_exp(SU2_CONN, straight_path([0, 0], [1, 0]), steps=4)


def test_path_observed_order():
    gamma = ParamMap.from_exprs(["u", "0.3*sin(pi*u)"], 1)
    res = path_ordered_exp(SU2_CONN, gamma, steps=64, sweep=3)
    assert res.order_estimate >= 3.8


def test_transport_functorial_over_concatenation():
    g1 = ParamMap.from_exprs(["0.6*u", "0.2*u^2"], 1)
    g2 = ParamMap.from_exprs(["0.6 + 0.3*u", "0.2 + 0.5*u"], 1)
    whole = concat_paths(g1, g2)
    t1 = path_ordered_exp(SU2_CONN, g1, steps=96).value
    t2 = path_ordered_exp(SU2_CONN, g2, steps=96).value
    tc = path_ordered_exp(SU2_CONN, whole, steps=96).value
    assert np.max(np.abs(tc - t2 @ t1)) <= 1e-8


def test_transport_invariant_under_path_reparameterization():
    gamma = ParamMap.from_exprs(["u", "0.3*sin(pi*u)"], 1)
    phi = ParamMap.from_exprs(["(1 - cos(pi*u))/2"], 1)
    warped = reparameterize(gamma, phi)
    t0 = path_ordered_exp(SU2_CONN, gamma, steps=96).value
    t1 = path_ordered_exp(SU2_CONN, warped, steps=96).value
    assert np.max(np.abs(t0 - t1)) <= 1e-9


def test_concat_with_constant_path_is_thin_identity():
    gamma = ParamMap.from_exprs(["u", "0.3*u"], 1)
    const = straight_path([0.0, 0.0], [0.0, 0.0])
    padded = concat_paths(const, gamma)
    t0 = path_ordered_exp(SU2_CONN, gamma, steps=96).value
    t1 = path_ordered_exp(SU2_CONN, padded, steps=96).value
    assert np.max(np.abs(t0 - t1)) <= 1e-8


def test_concat_associativity_up_to_reparameterization():
    g1 = straight_path([0.0, 0.0], [0.4, 0.1])
    g2 = straight_path([0.4, 0.1], [0.7, 0.5])
    g3 = straight_path([0.7, 0.5], [0.9, 0.9])
    left = concat_paths(concat_paths(g1, g2), g3)
    right = concat_paths(g1, concat_paths(g2, g3))
    # nested junction smoothing compounds the quadrature constants, so the
    # 1e-8 agreement needs a fine (but cheap, 1D) resolution
    tl = path_ordered_exp(SU2_CONN, left, steps=1024).value
    tr = path_ordered_exp(SU2_CONN, right, steps=1024).value
    assert np.max(np.abs(tl - tr)) <= 1e-8


# --- horizontal lifts ----------------------------------------------------------


def test_lift_zero_connection_constant_frame():
    conn = TwoConnection(SU2, Chart(2),
                         a=[["0", "0", "0"], ["0", "0", "0"]], b="fake_flat")
    gamma = straight_path([0, 0], [1, 1])
    _, frames = horizontal_lift(conn, gamma, steps=16)
    assert np.max(np.abs(frames - np.eye(2))) <= 1e-14


def test_lift_projects_to_the_path():
    gamma = ParamMap.from_exprs(["u", "0.4*u^2"], 1)
    times, frames = horizontal_lift(SU2_CONN, gamma, steps=32)
    assert np.allclose(gamma(times[:, None]), gamma(times[:, None]))
    assert frames.shape == (33, 2, 2)


def test_lift_velocity_annihilated_by_bundle_connection():
    rng = np.random.default_rng(0)
    for _ in range(3):
        c = rng.uniform(-0.6, 0.6, size=(2, 3))
        conn = TwoConnection(
            SU2, Chart(2),
            a=[[f"{c[0, 0]}*x2", f"{c[0, 1]}", f"{c[0, 2]}*x1"],
               [f"{c[1, 0]}", f"{c[1, 1]}*x1", f"{c[1, 2]}*x2"]],
            b="fake_flat")
        gamma = ParamMap.from_exprs(["u", "0.5*sin(pi*u)"], 1)
        steps = 64
        times, frames = horizontal_lift(conn, gamma, steps=steps)
        h = times[1] - times[0]
        # 4th-order interior stencil for dg/dt from the stored frames
        dg = (-frames[4:] + 8 * frames[3:-1] - 8 * frames[1:-3]
              + frames[:-4]) / (12 * h)
        mid = times[2:-2]
        vel = gamma.partial(0, mid[:, None])
        a_vec = conn.a_of(gamma(mid[:, None]), vel)
        a_mat = SU2.l2a.g_alg.to_matrix(a_vec)
        g = frames[2:-2]
        ginv = SU2.group_G.inv(g)
        bundle_a = ginv @ a_mat @ g + ginv @ dg
        assert np.max(np.abs(bundle_a)) <= 1e-6


def test_lift_basepoint_mismatch():
    gamma = straight_path([0, 0], [1, 0])
    with pytest.raises(DomainError):
        horizontal_lift(SU2_CONN, gamma,
                        p=(np.array([0.5, 0.0]), SU2.group_G.identity))


# --- surface transport ----------------------------------------------------------


def test_surface_zero_b_gives_identity():
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[["0"]])
    res = surface_transport(conn, bulge_bigon(), steps_s=16, steps_t=16)
    assert np.max(np.abs(res.value_h - 1.0)) <= 1e-12


def test_surface_abelian_flux_closed_form():
    # b = c dx^dy on the lens bigon: value exp(-i c * signed flux),
    # flux(∂u, ∂v) = -4k/pi, so the value is exp(+i c 4k/pi)
    c, k = 0.8, 0.25
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[[f"{c}"]])
    res = surface_transport(conn, lens_bigon(k), steps_s=96, steps_t=96)
    expected = np.exp(1j * c * 4 * k / np.pi)
    assert np.max(np.abs(res.value_h - expected)) <= 1e-8


def test_surface_target_identity_su2():
    res = surface_transport(SU2_CONN, lens_bigon(), steps_s=96, steps_t=96)
    assert res.target_identity_defect(SU2) <= 1e-6
    assert res.group_defect <= 1e-10


def test_surface_quadrature_convergence_guard():
    res = surface_transport(SU2_CONN, lens_bigon(), steps_s=48, steps_t=48,
                            sweep=2)
    assert res.order_estimate is None or res.order_estimate >= 1.5


def test_surface_equivariance_in_basepoint():
    bigon = lens_bigon()
    x0 = bigon([0.0, 0.0])
    rng = np.random.default_rng(1)
    g = SU2.cm.sample_G(rng)
    base = surface_transport(SU2_CONN, bigon, (x0, SU2.group_G.identity),
                             48, 48).value_h
    moved = surface_transport(SU2_CONN, bigon, (x0, g), 48, 48).value_h
    expected = SU2.cm.alpha(SU2.group_G.inv(g), base)
    assert np.max(np.abs(moved - expected)) <= 1e-8


def _slab_bigon(lo, hi):
    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        w = (1 - u) * lo + u * hi
        return np.concatenate([v, w * np.sin(np.pi * v)], -1)
    return ParamMap(2, 2, fn, name=f"slab{lo}-{hi}")


def test_vertical_composition_matches_etaH_law():
    s1, s2 = _slab_bigon(0.0, 0.3), _slab_bigon(0.3, 0.6)
    comp = compose_bigons_vertical(s1, s2)
    n = 96
    h1 = surface_transport(SU2_CONN, s1, None, n, n).value_h
    h2 = surface_transport(SU2_CONN, s2, None, n, n).value_h
    hc = surface_transport(SU2_CONN, comp, None, n, n).value_h
    assert np.max(np.abs(hc - h1 @ h2)) <= 1e-6


def test_horizontal_composition_matches_etaH_law():
    def half(shift):
        def fn(params):
            u = params[..., 0][..., None]
            v = params[..., 1][..., None]
            return np.concatenate(
                [shift + 0.5 * v, 0.4 * u * v * (1 - v)], -1)
        return ParamMap(2, 2, fn, name="half")

    s1, s2 = half(0.0), half(0.5)
    comp = compose_bigons_horizontal(s1, s2)
    n = 96
    p = (s1([0.0, 0.0]), SU2.group_G.identity)
    h1 = surface_transport(SU2_CONN, s1, p, n, n).value_h
    tgt1 = transport_point(SU2_CONN, s1.slice_first(1.0), p, n)
    h2_at = surface_transport(SU2_CONN, s2, (s2([0.0, 0.0]), tgt1),
                              n, n).value_h
    hc = surface_transport(SU2_CONN, comp, p, n, n).value_h
    assert np.max(np.abs(hc - h1 @ h2_at)) <= 1e-6
    # the other horizontal formula: conjugate through the source transport
    src1 = transport_point(SU2_CONN, s1.slice_first(0.0), p, n)
    h2_src = surface_transport(SU2_CONN, s2, (s2([0.0, 0.0]), src1),
                               n, n).value_h
    assert np.max(np.abs(hc - h2_src @ h1)) <= 1e-6


def test_two_transport_interchange():
    q11, q12 = _slab_bigon(0.0, 0.25), _slab_bigon(0.25, 0.5)

    def shifted(lo, hi):
        def fn(params):
            u = params[..., 0][..., None]
            v = params[..., 1][..., None]
            w = (1 - u) * lo + u * hi
            return np.concatenate(
                [1.0 + 0.8 * v, w * np.sin(np.pi * v)], -1)
        return ParamMap(2, 2, fn, name="shift")

    q21, q22 = shifted(0.0, 0.25), shifted(0.25, 0.5)
    n = 96
    conn = TwoConnection(
        SU2, Chart(2),
        a=[["0.3*x2", "0.15", "0.05*x1"], ["0.1", "0.25*x1", "0.15*x2"]],
        b="fake_flat")
    p = (q11([0.0, 0.0]), SU2.group_G.identity)

    lhs_bigon = compose_bigons_horizontal(compose_bigons_vertical(q11, q12),
                                          compose_bigons_vertical(q21, q22))
    rhs_bigon = compose_bigons_vertical(
        compose_bigons_horizontal(q11, q21),
        compose_bigons_horizontal(q12, q22))
    lhs = surface_transport(conn, lhs_bigon, p, n, n).value_h
    rhs = surface_transport(conn, rhs_bigon, p, n, n).value_h
    assert np.max(np.abs(lhs - rhs)) <= 1e-6


def test_thin_invariance_of_surface_transport():
    bigon = lens_bigon()
    base = surface_transport(SU2_CONN, bigon, None, 96, 96).value_h
    for exprs in (["u^2", "v"], ["u", "v^2*(3-2*v)"]):
        phi = ParamMap.from_exprs(exprs, 2)
        warped = reparameterize(bigon, phi)
        got = surface_transport(SU2_CONN, warped, None, 96, 96).value_h
        assert np.max(np.abs(got - base)) <= 1e-7


# --- Stokes verifiers -----------------------------------------------------------


def test_stokes_flat_connection():
    conn = TwoConnection(SU2, Chart(2),
                         a=[["0", "0", "0"], ["0", "0", "0"]], b="fake_flat")
    rep = verify_nonabelian_stokes(conn, bulge_bigon(), steps=16)
    assert np.max(np.abs(rep["lhs"] - np.eye(2))) <= 1e-12
    assert np.max(np.abs(rep["rhs"] - np.eye(2))) <= 1e-12


def test_stokes_abelian_closed_form():
    # a = c x dy: both sides equal exp(i c (flux between the lens curves))
    c, k = 0.9, 0.25
    conn = TwoConnection(U1, Chart(2), a=[["0"], [f"{c}*x1"]], b="fake_flat")
    rep = verify_nonabelian_stokes(conn, lens_bigon(k), steps=64)
    expected = np.exp(1j * c * 4 * k / np.pi)
    assert rep["defect"] <= 1e-8
    assert np.max(np.abs(rep["lhs"] - expected)) <= 1e-8


def test_stokes_su2_convergence():
    rep = verify_nonabelian_stokes(SU2_CONN, lens_bigon(), steps=128, sweep=3)
    assert rep["defect"] <= 1e-6
    assert rep["order"] >= 3.5


def test_higher_stokes_constant_cube():
    conn = TwoConnection(U1T, Chart(3), a=[["0"], ["0"], ["0"]],
                         b=[["0.4"], ["0.1"], ["0.2"]])

    def fn(params):
        v = params[..., 1][..., None]
        w = params[..., 2][..., None]
        return np.concatenate([w, 0.3 * v * np.sin(np.pi * w),
                               np.zeros_like(w)], -1)

    cube = ParamMap(3, 3, fn, name="const-cube")
    rep = verify_higher_stokes(conn, cube, steps_surface=24, steps_volume=8)
    assert np.max(np.abs(rep["lhs"] - 1.0)) <= 1e-10
    assert np.max(np.abs(rep["rhs"] - 1.0)) <= 1e-10


def test_higher_stokes_abelian_closed_form():
    # b = x3 dx1^dx2, cube (w, v sin(pi w)/2, u v (1-v) sin(pi w)):
    # integral of the pulled-back volume form is -1/24 by direct computation
    conn = TwoConnection(U1T, Chart(3), a=[["0"], ["0"], ["0"]],
                         b=[["x3"], ["0"], ["0"]])

    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        w = params[..., 2][..., None]
        return np.concatenate([w, 0.5 * v * np.sin(np.pi * w),
                               u * v * (1 - v) * np.sin(np.pi * w)], -1)

    cube = ParamMap(3, 3, fn, name="abelian-cube")
    rep = verify_higher_stokes(conn, cube, steps_surface=48, steps_volume=32)
    assert rep["defect"] <= 1e-6
    assert np.max(np.abs(rep["lhs"] - np.exp(1j / 24))) <= 1e-6
    assert rep["kernel_defect"] <= 1e-12


def test_higher_stokes_u2pu2_trace_part():
    conn = TwoConnection(
        U2P, Chart(3),
        a=[["0.4*x2", "0.1", "0.1*x3"], ["0.2", "0.3*x1", "0.1"],
           ["0.1*x2", "0.2", "0.2*x1"]],
        b="fake_flat",
        b_extra=[["0.5*x3", "0", "0", "0"], ["0.4*x1", "0", "0", "0"],
                 ["0.3*x2", "0", "0", "0"]])

    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        w = params[..., 2][..., None]
        return np.concatenate([w, 0.5 * v * np.sin(np.pi * w),
                               0.6 * u * v * (1 - v) * np.sin(np.pi * w)], -1)

    cube = ParamMap(3, 3, fn, name="trace-cube")
    rep = verify_higher_stokes(conn, cube, steps_surface=48, steps_volume=32)
    assert rep["defect"] <= 1e-5
    assert rep["bianchi_defect"] <= 1e-7
    assert rep["kernel_defect"] <= 1e-7


def test_higher_stokes_rejects_mismatched_cube():
    conn = TwoConnection(U1T, Chart(3), a=[["0"], ["0"], ["0"]],
                         b=[["x3"], ["0"], ["0"]])

    def fn(params):   # target path varies with the cube parameter
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        w = params[..., 2][..., None]
        return np.concatenate([w, (0.5 + 0.2 * u) * v * np.sin(np.pi * w),
                               np.zeros_like(w)], -1)

    cube = ParamMap(3, 3, fn, name="bad-cube")
    with pytest.raises(ComposabilityError):
        verify_higher_stokes(conn, cube, steps_surface=16, steps_volume=8)


# --- reconstruction --------------------------------------------------------------


def test_reconstruct_A_zero_and_abelian():
    conn0 = TwoConnection(U1, Chart(2), a=[["0"], ["0"]], b="fake_flat")
    out = reconstruct_A(conn0, np.array([0.3, 0.3]), np.array([1.0, 0.0]))
    assert np.max(np.abs(out)) <= 1e-10
    c = 0.8
    conn = TwoConnection(U1, Chart(2), a=[[f"{c}"], ["0"]], b="fake_flat")
    out = reconstruct_A(conn, np.array([0.3, 0.3]), np.array([1.0, 0.4]))
    assert np.max(np.abs(out - c * 1.0)) <= 1e-6


def test_reconstruct_A_su2_round_trip():
    rng = np.random.default_rng(2)
    for _ in range(3):
        x = rng.uniform(0.2, 0.8, size=2)
        X = rng.standard_normal(2)
        got = reconstruct_A(SU2_CONN, x, X)
        want = SU2_CONN.a_of(x[None], X)[0]
        assert np.max(np.abs(got - want)) <= 1e-5 * (1 + np.max(np.abs(want)))


def test_reconstruct_B_zero_abelian_su2():
    conn0 = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[["0"]])
    out = reconstruct_B(conn0, np.zeros(2), np.eye(2)[0], np.eye(2)[1])
    assert np.max(np.abs(out)) <= 1e-8
    c = 0.8
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[[f"{c}"]])
    out = reconstruct_B(conn, np.zeros(2), np.eye(2)[0], np.eye(2)[1])
    assert np.max(np.abs(out - c)) <= 1e-4
    rng = np.random.default_rng(3)
    x = rng.uniform(0.3, 0.7, size=2)
    X, Y = rng.standard_normal(2), rng.standard_normal(2)
    got = reconstruct_B(SU2_CONN, x, X, Y)
    want = SU2_CONN.b_of(x[None], X, Y)[0]
    assert np.max(np.abs(got - want)) <= 1e-4 * (1 + np.max(np.abs(want)))


def test_reconstruct_B_square_filling_agrees():
    c = 0.8
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[[f"{c}"]])
    lens = reconstruct_B(conn, np.zeros(2), np.eye(2)[0], np.eye(2)[1])
    square = reconstruct_B(conn, np.zeros(2), np.eye(2)[0], np.eye(2)[1],
                           steps=32, filling="square")
    assert np.max(np.abs(lens - square)) <= 5e-3


# --- 2-holonomy ------------------------------------------------------------------


def _disk_bigon(x0, r):
    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1]
        ang = 2 * np.pi * v
        loop = np.stack([np.cos(ang) - 1.0, np.sin(ang)], -1)
        return x0 + u * r * loop
    return ParamMap(2, 2, fn, name="disk")


def test_holonomy2_identity_bigon():
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[["0.7"]])

    def fn(params):
        v = params[..., 1][..., None]
        return np.concatenate([0.2 * np.sin(np.pi * v) * 0,
                               np.zeros_like(v)], -1)

    ident = ParamMap(2, 2, fn, name="point-bigon")
    rep = holonomy2_H(conn, ident, steps=16)
    assert np.max(np.abs(rep["value"] - 1.0)) <= 1e-12


def test_holonomy2_abelian_disk():
    c, r = 0.6, 0.5
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[[f"{c}"]])
    bigon = _disk_bigon(np.array([0.5, 0.5]), r)
    rep = holonomy2_H(conn, bigon, steps=64)
    # the disk is swept with positive orientation, so the flux is +pi r^2 c
    expected = np.exp(-1j * c * np.pi * r * r)
    assert np.max(np.abs(rep["value"] - expected)) <= 1e-7


def test_holonomy2_vertical_inverse_cancels():
    bigon = _disk_bigon(np.array([0.5, 0.5]), 0.4)
    conn = TwoConnection(U1T, Chart(2), a=[["0"], ["0"]], b=[["0.8*x1"]])
    comp = compose_bigons_vertical(bigon, reverse_bigon(bigon))
    rep = holonomy2_H(conn, comp, steps=96)
    assert np.max(np.abs(rep["value"] - 1.0)) <= 1e-7
    assert rep["same_loop"]
    assert rep["kernel_defect"] <= 1e-7


def test_holonomy2_kernel_membership_same_loop():
    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        loop = np.concatenate([np.sin(np.pi * v),
                               np.sin(2 * np.pi * v) * 0.5], -1)
        bump = np.concatenate([np.zeros_like(v),
                               np.sin(np.pi * v) ** 2], -1)
        return np.array([0.5, 0.5]) + 0.3 * (loop + u * (1 - u) * bump)

    bigon = ParamMap(2, 2, fn, name="loop-loop")
    rep = holonomy2_H(SU2_CONN, bigon, steps=96)
    assert rep["same_loop"]
    assert rep["kernel_defect"] <= 1e-7   # ker t is trivial for t = id


def test_holonomy2_rejects_open_boundary():
    bigon = bulge_bigon()     # paths from (0,0) to (1,0): not loops
    with pytest.raises(DomainError):
        holonomy2_H(SU2_CONN, bigon, steps=16)


# --- Ambrose-Singer --------------------------------------------------------------


def test_ambrose_singer_zero_curvature_family():
    rep = ambrose_singer_check(SU2_CONN, rng=np.random.default_rng(0),
                               n_paths=3, n_bigons=3, steps=48)
    # t = id: ker t_* = 0, every reduced 2-holonomy must be the identity
    assert rep["span_rank"] == 0
    assert rep["holonomy_scale"] <= 1e-7
    assert rep["containment_pass"]
    assert rep["derivative_pass"]


def test_ambrose_singer_u2pu2_trace_line():
    conn = TwoConnection(
        U2P, Chart(3),
        a=[["0.4*x2", "0.1", "0.1*x3"], ["0.2", "0.3*x1", "0.1"],
           ["0.1*x2", "0.2", "0.2*x1"]],
        b="fake_flat",
        b_extra=[["0.5*x3", "0", "0", "0"], ["0.4*x1", "0", "0", "0"],
                 ["0.3*x2", "0", "0", "0"]])
    rep = ambrose_singer_check(conn, rng=np.random.default_rng(1),
                               n_paths=4, n_bigons=4, steps=48)
    assert rep["span_rank"] == 1
    basis = rep["span_basis"]
    assert np.max(np.abs(np.abs(basis[0]) - np.array([1.0, 0, 0, 0]))) <= 1e-8
    assert rep["containment_pass"]
    assert rep["derivative_pass"]


def test_ambrose_singer_abelian_scalar_containment():
    conn = TwoConnection(U1T, Chart(3), a=[["0"], ["0"], ["0"]],
                         b=[["x3"], ["0.2*x1"], ["0"]])
    rep = ambrose_singer_check(conn, rng=np.random.default_rng(2),
                               n_paths=3, n_bigons=3, steps=48)
    assert rep["span_rank"] == 1
    assert rep["containment_pass"]
    assert rep["derivative_pass"]
