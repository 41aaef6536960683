import numpy as np
import pytest

from gauge2.families import matrix_family
from gauge2.fields import CoefficientField, GroupValuedField, chart_grid
from gauge2.forms import (TransitionData, TwoConnection, bundle_form_B,
                          check_local_data, curvature_F,
                          fake_flatness_residual, three_curvature_K)
from gauge2.geometry import Chart
from gauge2.morphisms import OneMorphism, gauge_transform

EX, EY, EZ = np.eye(3)


@pytest.fixture(scope="module")
def u1():
    return matrix_family("u1_id")


@pytest.fixture(scope="module")
def u1t():
    return matrix_family("u1_triv")


@pytest.fixture(scope="module")
def su2():
    return matrix_family("su2_id_conj")


@pytest.fixture(scope="module")
def u2p():
    return matrix_family("u2_to_pu2")


def test_curvature_zero_connection(u1):
    conn = TwoConnection(u1, Chart(2), a=[["0"], ["0"]], b="fake_flat")
    F = curvature_F(conn, np.array([[0.3, 0.4]]), [1, 0], [0, 1])
    assert np.max(np.abs(F)) <= 1e-14


def test_curvature_abelian_x_dy(u1):
    conn = TwoConnection(u1, Chart(2), a=[["0"], ["x1"]], b="fake_flat")
    F = curvature_F(conn, np.array([[0.2, 0.7], [0.5, 0.1]]), [1, 0], [0, 1])
    assert np.max(np.abs(F - 1.0)) <= 1e-8


def test_curvature_su2_pure_commutator(su2):
    eps = 0.1
    conn = TwoConnection(su2, Chart(2),
                         a=[[f"{eps}", "0", "0"], ["0", f"{eps}", "0"]],
                         b="fake_flat")
    F = curvature_F(conn, np.array([[0.5, 0.5]]), [1, 0], [0, 1])
    expected = np.array([0.0, 0.0, eps * eps])   # eps^2 [e1, e2] = eps^2 e3
    assert np.max(np.abs(F[0] - expected)) <= 1e-8


def test_fake_flat_by_construction(su2):
    conn = TwoConnection(su2, Chart(2),
                         a=[["0.6*x2", "0.3", "0.1*x1"],
                            ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    rep = fake_flatness_residual(conn)
    assert rep["pass"]


def test_fake_flat_fails_when_t_kills_b(u1t):
    conn = TwoConnection(u1t, Chart(2), a=[["0"], ["x1"]], b=[["0"]])
    rep = fake_flatness_residual(conn)
    # t == e makes t_* b = 0, so the residual is max |F_a| = 1
    assert not rep["pass"]
    assert abs(rep["residual"] - 1.0) <= 1e-8


def test_fake_flat_with_kernel_part(u2p):
    conn = TwoConnection(
        u2p, Chart(2),
        a=[["0.5*x2", "0.2", "0.1*x1"], ["0.3", "0.4*x1", "0.2*x2"]],
        b="fake_flat",
        b_extra=[["0.4*x1 + 0.3*x2", "0", "0", "0"]])
    rep = fake_flatness_residual(conn)
    assert rep["pass"]   # the trace part lies in ker t_*


def test_three_curvature_constant_b(u1t):
    conn = TwoConnection(u1t, Chart(3),
                         a=[["0"], ["0"], ["0"]],
                         b=[["0.7"], ["0.2"], ["0.1"]])
    rep = three_curvature_K(conn, np.array([[0.3, 0.3, 0.3]]), EX, EY, EZ)
    assert np.max(np.abs(rep["value"])) <= 1e-10
    assert rep["bianchi_defect"] <= 1e-10


def test_three_curvature_abelian_volume_form(u1t):
    conn = TwoConnection(u1t, Chart(3),
                         a=[["0"], ["0"], ["0"]],
                         b=[["x3"], ["0"], ["0"]])
    rep = three_curvature_K(conn, np.array([[0.4, 0.2, 0.7]]), EX, EY, EZ)
    assert np.max(np.abs(rep["value"] - 1.0)) <= 1e-8
    assert np.max(np.abs(rep["projected"] - 1.0)) <= 1e-8


def test_three_curvature_u2pu2_trace_part(u2p):
    conn = TwoConnection(
        u2p, Chart(3),
        a=[["0.4*x2", "0.1", "0.1*x3"], ["0.2", "0.3*x1", "0.1"],
           ["0.1*x2", "0.2", "0.2*x1"]],
        b="fake_flat",
        b_extra=[["0.5*x3", "0", "0", "0"], ["0.4*x1", "0", "0", "0"],
                 ["0.3*x2", "0", "0", "0"]])
    pts = np.array([[0.3, 0.5, 0.4], [0.6, 0.2, 0.7]])
    rep = three_curvature_K(conn, pts, EX, EY, EZ)
    # K = d(beta) with beta = 0.5 x3 dx^dy + 0.4 x1 dx^dz + 0.3 x2 dy^dz:
    # K(ex, ey, ez) = d/dz(0.5 x3) - d/dy(0.4 x1) + d/dx(0.3 x2) = 0.5
    expected = np.array([0.5, 0.0, 0.0, 0.0])
    assert np.max(np.abs(rep["value"] - expected)) <= 1e-7
    assert rep["bianchi_defect"] <= 1e-7
    assert np.max(np.abs(rep["projected"] - expected)) <= 1e-7


def test_three_curvature_low_dimension_note(u1):
    conn = TwoConnection(u1, Chart(2), a=[["0"], ["x1"]], b="fake_flat")
    rep = three_curvature_K(conn, np.array([[0.3, 0.3]]), EX[:2], EY[:2],
                            EX[:2])
    assert "note" in rep
    assert np.max(np.abs(rep["value"])) == 0.0


def test_curvature_fd_convergence_order():
    su2 = matrix_family("su2_id_conj")
    conn_coarse = TwoConnection(su2, Chart(2),
                                a=[["sin(pi*x2)", "0.3", "0"],
                                   ["0", "cos(pi*x1)", "0"]],
                                b="fake_flat", fd_step=4e-3)
    conn_fine = TwoConnection(su2, Chart(2),
                              a=[["sin(pi*x2)", "0.3", "0"],
                                 ["0", "cos(pi*x1)", "0"]],
                              b="fake_flat", fd_step=2e-3)
    x = np.array([[0.3, 0.4]])
    # analytic: F = (d/dx sin(pi x2) keeps only the x2 derivative ...)
    exact = np.array([-np.pi * np.cos(np.pi * 0.4),
                      -np.pi * np.sin(np.pi * 0.3), 0.0])
    exact = exact + np.array([0.0, 0.0,
                              np.sin(np.pi * 0.4) * np.cos(np.pi * 0.3)
                              - 0.3 * 0.0])
    # bracket part: [a_x, a_y] with a_x = sin(pi x2) e1 + 0.3 e2,
    # a_y = cos(pi x1) e2: [e1,e2]=e3 -> sin*cos e3
    f_coarse = curvature_F(conn_coarse, x, [1, 0], [0, 1])[0]
    f_fine = curvature_F(conn_fine, x, [1, 0], [0, 1])[0]
    e1 = np.max(np.abs(f_coarse - exact))
    e2 = np.max(np.abs(f_fine - exact))
    assert e1 / e2 >= 12.0


def test_bundle_form_identity_and_equivariance(su2):
    conn = TwoConnection(su2, Chart(2),
                         a=[["0.6*x2", "0.3", "0.1*x1"],
                            ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    x = np.array([[0.3, 0.6]])
    X, Y = np.array([1.0, 0.2]), np.array([-0.3, 1.0])
    base = conn.b_of(x, X, Y)
    e = su2.group_G.identity
    assert np.max(np.abs(bundle_form_B(conn, x, e, X, Y) - base)) <= 1e-12
    rng = np.random.default_rng(0)
    g = su2.cm.sample_G(rng)
    g0 = su2.cm.sample_G(rng)
    lhs = bundle_form_B(conn, x, g @ g0, X, Y)
    rhs = su2.alpha_vec(su2.group_G.inv(g0), bundle_form_B(conn, x, g, X, Y))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10
    # explicit adjoint check at g = exp(e1)
    g1 = su2.group_G.exp(su2.l2a.g_alg.to_matrix([1.0, 0.0, 0.0]))
    got = bundle_form_B(conn, x, g1, X, Y)
    want = su2.alpha_vec(su2.group_G.inv(g1), base)
    assert np.max(np.abs(got - want)) <= 1e-10


def test_check_local_data_identity_transition(su2):
    chart = Chart(2)
    conn = TwoConnection(su2, chart,
                         a=[["0.6*x2", "0.3", "0.1*x1"],
                            ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    td = TransitionData(su2, chart, ["0", "0", "0"])
    rep = check_local_data(conn, conn, td)
    assert rep["pass"]


def test_check_local_data_abelian_gauge_term(u1):
    chart = Chart(2)
    conn_j = TwoConnection(u1, chart, a=[["0.3"], ["0.5*x1"]], b="fake_flat")
    # g = exp(i * 0.7 x1 x2): a_i = a_j + i d(0.7 x1 x2)
    conn_i = TwoConnection(u1, chart,
                           a=[["0.3 + 0.7*x2"], ["0.5*x1 + 0.7*x1"]],
                           b="fake_flat")
    td = TransitionData(u1, chart, ["0.7*x1*x2"])
    rep = check_local_data(conn_i, conn_j, td)
    assert rep["pass"], rep


def test_check_local_data_su2_pushforward(su2):
    chart = Chart(2)
    conn_j = TwoConnection(su2, chart,
                           a=[["0.6*x2", "0.3", "0.1*x1"],
                              ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    g_exprs = ["0.4*x1", "0.3*x1*x2", "0.2*x2"]
    # push the connection through the transition (a gauge move with phi = 0)
    m = OneMorphism(su2, chart, g_map=g_exprs,
                    phi=[["0", "0", "0"], ["0", "0", "0"]])
    conn_i = gauge_transform(conn_j, m)
    td = TransitionData(su2, chart, g_exprs)
    rep = check_local_data(conn_i, conn_j, td)
    assert rep["pass"], rep
    assert rep["transition_membership_defect"] <= 1e-10


def test_local_data_detects_mismatch(su2):
    chart = Chart(2)
    conn_j = TwoConnection(su2, chart,
                           a=[["0.6*x2", "0.3", "0.1*x1"],
                              ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    conn_i = TwoConnection(su2, chart,
                           a=[["0.6*x2 + 0.1", "0.3", "0.1*x1"],
                              ["0.2", "0.5*x1", "0.3*x2"]], b="fake_flat")
    td = TransitionData(su2, chart, ["0", "0", "0"])
    rep = check_local_data(conn_i, conn_j, td)
    assert not rep["pass"]


def test_coefficient_field_guards():
    with pytest.raises(Exception):
        CoefficientField([["x9"]], 2, (1, 1))
    f = CoefficientField([["x1 + x2"]], 2, (1, 1))
    out = f(np.array([[1.0, 2.0]]))
    assert out.shape == (1, 1, 1) and out[0, 0, 0] == 3.0


def test_group_valued_field_on_manifold(su2):
    field = GroupValuedField(
        su2.group_G, su2.l2a.g_alg,
        CoefficientField(["0.3*x1", "0.2*x2", "0.1"], 2, (3,)))
    grid = chart_grid(Chart(2), 4)
    assert su2.group_G.membership_defect(field(grid)) <= 1e-12


def test_richardson_refinement_tightens_curvature():
    su2 = matrix_family("su2_id_conj")
    kwargs = dict(a=[["sin(pi*x2)", "0.3", "0"], ["0", "cos(pi*x1)", "0"]],
                  b="fake_flat", fd_step=5e-3)
    plain = TwoConnection(su2, Chart(2), **kwargs)
    refined = TwoConnection(su2, Chart(2), fd_richardson=True, **kwargs)
    x = np.array([[0.3, 0.4]])
    exact = np.array([-np.pi * np.cos(np.pi * 0.4),
                      -np.pi * np.sin(np.pi * 0.3),
                      np.sin(np.pi * 0.4) * np.cos(np.pi * 0.3)])
    e_plain = np.max(np.abs(curvature_F(plain, x, [1, 0], [0, 1])[0] - exact))
    e_refined = np.max(np.abs(curvature_F(refined, x, [1, 0], [0, 1])[0]
                              - exact))
    assert e_refined < e_plain / 10.0
