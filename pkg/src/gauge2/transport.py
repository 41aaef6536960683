"""Path-ordered exponentials, surface transport and the Stokes verifiers.

1-transport solves g'(t) = -a(gamma'(t)) g(t) with a 4th-order
commutator-free Lie-group integrator: per step of size s two Gauss-node
evaluations A_i = s*W(t + c_i s) are combined into two exponentials,

    g_{k+1} = exp(b A_1 + a A_2) exp(a A_1 + b A_2) g_k,
    a = 1/4 + sqrt(3)/6,  b = 1/4 - sqrt(3)/6,

and the running product is re-projected onto the group manifold after
every step.  Surface transport solves the outer ordered integral

    h'(s) = sign * h(s) beta(s),
    beta(s) = integral_0^1 (alpha_{frame(s,t)^-1})_* b(d_s Gamma, d_t Gamma) dt,

where frame(s, t) is the horizontal lift of the slice Gamma(s, .) at the
basepoint and the inner integral is composite Simpson.  The outer ODE is
right-driven: the derivative-of-transport identity gives a left-driven
equation for the inverse quotient tra(source) : tra(Gamma_s), and
inverting it mirrors the equation.  The overall sign is a convention the
literature does not fix; it is pinned once by the abelian closed form and
the fake-flat target identity t(h) = tra(target path) : tra(source path),
and every downstream formula (higher Stokes, the connection
reconstructions) inherits it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ComposabilityError, DomainError, SamplingError
from .forms import TwoConnection
from .geometry import ParamMap, canonical_bigon, source_path, straight_path, target_path

__all__ = [
    "TransportResult", "SurfaceTransportResult",
    "path_ordered_exp", "transport_point", "horizontal_lift",
    "surface_transport", "verify_nonabelian_stokes", "verify_higher_stokes",
    "reconstruct_A", "reconstruct_B", "holonomy2_H", "ambrose_singer_check",
    "SURFACE_ODE_SIGN", "convergence_order",
]

# Pinned by the abelian closed form and the target identity; see the tests
# and the module docstring.  The higher-Stokes exponent and both
# reconstruction formulas all inherit this single choice.
SURFACE_ODE_SIGN = -1.0

_CF4_A = 0.25 + math.sqrt(3.0) / 6.0
_CF4_B = 0.25 - math.sqrt(3.0) / 6.0
_GAUSS_C1 = 0.5 - math.sqrt(3.0) / 6.0
_GAUSS_C2 = 0.5 + math.sqrt(3.0) / 6.0


@dataclass
class TransportResult:
    """Group element with integrator diagnostics."""

    value: np.ndarray
    steps: int
    group_defect: float
    order_estimate: float | None = None


@dataclass
class SurfaceTransportResult:
    """Surface transport: the H value plus the boundary 1-transports."""

    value_h: np.ndarray
    source_transport: np.ndarray
    target_transport: np.ndarray
    steps_s: int
    steps_t: int
    group_defect: float
    order_estimate: float | None = None

    def target_identity_defect(self, family) -> float:
        """|t(value_h) - target : source|, the fake-flat functoriality check."""
        G = family.group_G
        expected = G.mul(G.inv(self.source_transport), self.target_transport)
        return float(np.max(np.abs(family.cm.t(self.value_h) - expected)))


def _cf4_exponentials(group, w_eval, steps: int):
    """Batched CF4 exponential factors for the ODE g' = W(t) g on [0, 1]."""
    h = 1.0 / steps
    base = np.arange(steps) * h
    w1 = np.asarray(w_eval(base + _GAUSS_C1 * h))
    w2 = np.asarray(w_eval(base + _GAUSS_C2 * h))
    e_first = group.exp(h * (_CF4_A * w1 + _CF4_B * w2))
    e_second = group.exp(h * (_CF4_B * w1 + _CF4_A * w2))
    return e_first, e_second


def _ordered_exp(group, w_eval, steps: int, trajectory=False):
    """Solve g' = W(t) g, g(0) = id, with CF4 and per-step projection.

    ``w_eval`` maps a (k,) array of times to (k, n, n) algebra matrices.
    With ``trajectory`` the full list of step-boundary values is returned.
    """
    e_first, e_second = _cf4_exponentials(group, w_eval, steps)
    g = group.identity
    frames = [g]
    for k in range(steps):
        g = group.project(e_second[k] @ (e_first[k] @ g))
        if trajectory:
            frames.append(g)
    if trajectory:
        return np.stack(frames)
    return g


def _ordered_exp_right(group, w_eval, steps: int):
    """Solve g' = g W(t), g(0) = id (the mirrored CF4 scheme)."""
    e_first, e_second = _cf4_exponentials(group, w_eval, steps)
    g = group.identity
    for k in range(steps):
        g = group.project((g @ e_first[k]) @ e_second[k])
    return g


def convergence_order(defects):
    """log2 ratio of successive defects; noise floor clamps at zero defect."""
    orders = []
    for d0, d1 in zip(defects, defects[1:]):
        if d1 <= 1e-15 or d0 <= 1e-15:
            orders.append(float("nan"))
        else:
            orders.append(math.log2(d0 / d1))
    return orders


# --- 1-transport -----------------------------------------------------------------


def _path_generator(conn: TwoConnection, gamma: ParamMap):
    """W(t) = -a(gamma'(t)) as algebra matrices, batched over times."""
    alg = conn.family.l2a.g_alg

    def w_eval(times):
        params = times[:, None]
        points = gamma(params)
        vel = gamma.partial(0, params)
        vec = conn.a_of(points, vel)
        return alg.to_matrix(-vec)

    return w_eval


def path_ordered_exp(conn: TwoConnection, gamma: ParamMap, steps: int = 64,
                     sweep: int = 0) -> TransportResult:
    """Transport frame along gamma: solution at t=1 of g' = -a(gamma') g."""
    if steps < 8:
        raise DomainError("path transport needs at least 8 steps")
    group = conn.family.group_G
    w_eval = _path_generator(conn, gamma)
    value = _ordered_exp(group, w_eval, steps)
    order = None
    if sweep >= 2:
        values = [_ordered_exp(group, w_eval, steps // 2 ** k)
                  for k in range(sweep, 0, -1)]
        values.append(value)
        defects = [float(np.max(np.abs(v - value))) for v in values[:-1]]
        orders = convergence_order(defects)
        order = orders[-1] if orders else None
    return TransportResult(value=value, steps=steps,
                           group_defect=group.membership_defect(value),
                           order_estimate=order)


def transport_point(conn: TwoConnection, gamma: ParamMap, p=None,
                    steps: int = 64):
    """Image of the trivialized point p = (gamma(0), g0) under transport."""
    g0 = conn.family.group_G.identity if p is None else np.asarray(p[1])
    res = path_ordered_exp(conn, gamma, steps)
    return res.value @ g0


def horizontal_lift(conn: TwoConnection, gamma: ParamMap, p=None,
                    steps: int = 64):
    """Frames of the horizontal lift of gamma through p at step boundaries.

    Returns (times, frames) with frames[j] = g(t_j) g0, so the lifted curve
    is t_j -> (gamma(t_j), frames[j]).  The bundle connection form
    Ad_{g^-1} a + g^-1 dg annihilates the lift's velocity.
    """
    if p is not None:
        start_defect = float(np.max(np.abs(gamma([0.0]) - np.asarray(p[0]))))
        if start_defect > 1e-9:
            raise DomainError(
                f"lift basepoint is not over gamma(0) (defect {start_defect:.2e})")
    g0 = conn.family.group_G.identity if p is None else np.asarray(p[1])
    w_eval = _path_generator(conn, gamma)
    frames = _ordered_exp(conn.family.group_G, w_eval, steps, trajectory=True)
    return np.linspace(0.0, 1.0, steps + 1), frames @ g0


# --- surface transport -------------------------------------------------------------


def _simpson_weights(n: int):
    if n % 2 != 0:
        raise DomainError("Simpson quadrature needs an even step count")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * n)


def _surface_generator(conn: TwoConnection, bigon: ParamMap, g0,
                       steps_t: int, integrand: str):
    """Outer-ODE driver beta(s) for surface transport ('b') or the
    curvature double integral of the Stokes theorem ('F')."""
    fam = conn.family
    weights = _simpson_weights(steps_t)
    t_nodes = np.linspace(0.0, 1.0, steps_t + 1)
    if integrand == "b":
        alg = fam.l2a.h_alg
        form_of, conj = conn.b_of, fam.alpha_vec
    else:
        alg = fam.l2a.g_alg
        form_of, conj = conn.F_of, fam.ad_g_vec

    def beta(s_values):
        out = []
        for s in np.atleast_1d(s_values):
            slice_path = bigon.slice_first(float(s))
            _, frames = horizontal_lift(conn, slice_path, p=None, steps=steps_t)
            frames = frames @ g0
            params = np.stack([np.full_like(t_nodes, s), t_nodes], axis=-1)
            points = bigon(params)
            du = bigon.partial(0, params)
            dv = bigon.partial(1, params)
            vals = form_of(points, du, dv)
            vals = conj(fam.group_G.inv(frames), vals)
            out.append(weights @ vals)
        return alg.to_matrix(SURFACE_ODE_SIGN * np.stack(out))

    return beta


def surface_transport(conn: TwoConnection, bigon: ParamMap, p=None,
                      steps_s: int = 32, steps_t: int = 32,
                      sweep: int = 0) -> SurfaceTransportResult:
    """2-transport of a bigon: H-valued ordered double integral of b.

    Functorial guarantees need a fake-flat connection (callers may verify
    with :func:`gauge2.forms.fake_flatness_residual`).  With ``sweep`` >= 2
    the value is recomputed under step halving for an order estimate; an
    observed order below 1.5 raises AccuracyError.
    """
    fam = conn.family
    g0 = fam.group_G.identity if p is None else np.asarray(p[1])
    if p is not None:
        d = float(np.max(np.abs(bigon([0.0, 0.0]) - np.asarray(p[0]))))
        if d > 1e-9:
            raise DomainError(f"basepoint is not over the bigon corner ({d:.2e})")

    def run(ns, nt):
        beta = _surface_generator(conn, bigon, g0, nt, "b")
        return _ordered_exp_right(fam.group_H, beta, ns)

    value = run(steps_s, steps_t)
    order = None
    if sweep >= 2:
        vals = [run(max(steps_s // 2 ** k, 2), max(steps_t // 2 ** k, 2))
                for k in range(sweep, 0, -1)] + [value]
        defects = [float(np.max(np.abs(v - value))) for v in vals[:-1]]
        orders = [o for o in convergence_order(defects) if not math.isnan(o)]
        order = orders[-1] if orders else None
        if order is not None and order < 1.5:
            raise AccuracyError(
                f"surface quadrature did not converge (order {order:.2f})")

    src = transport_point(conn, source_path(bigon), p, steps_t)
    tgt = transport_point(conn, target_path(bigon), p, steps_t)
    return SurfaceTransportResult(
        value_h=value, source_transport=src, target_transport=tgt,
        steps_s=steps_s, steps_t=steps_t,
        group_defect=fam.group_H.membership_defect(value),
        order_estimate=order)


def verify_nonabelian_stokes(conn: TwoConnection, bigon: ParamMap, p=None,
                             steps: int = 64, sweep: int = 0) -> dict:
    """Compare tra(target) : tra(source) with the ordered double integral
    of the curvature over the bigon (horizontal lift per slice)."""
    fam = conn.family
    G = fam.group_G
    g0 = G.identity if p is None else np.asarray(p[1])

    def run(n):
        beta = _surface_generator(conn, bigon, g0, n, "F")
        rhs = _ordered_exp_right(G, beta, n)
        src = transport_point(conn, source_path(bigon), p, n)
        tgt = transport_point(conn, target_path(bigon), p, n)
        lhs = G.mul(G.inv(src), tgt)
        return float(np.max(np.abs(lhs - rhs))), lhs, rhs

    rows = []
    for k in range(sweep, 0, -1):
        n = max(steps // 2 ** k, 4)
        rows.append((n, run(n)[0]))
    defect, lhs, rhs = run(steps)
    rows.append((steps, defect))
    orders = convergence_order([r[1] for r in rows])
    return {
        "defect": defect,
        "rows": [{"steps": n, "defect": d} for n, d in rows],
        "orders": orders,
        "order": orders[-1] if orders else None,
        "lhs": lhs, "rhs": rhs,
    }


def _check_cube_boundaries(cube: ParamMap, tol=1e-9, samples=9):
    """Slices of the cube must be bigons between common boundary paths."""
    u = np.linspace(0.0, 1.0, samples)
    v = np.linspace(0.0, 1.0, samples)
    uu, vv = (m.reshape(-1) for m in np.meshgrid(u, v, indexing="ij"))
    for fixed_axis, label in ((1, "source/target paths"), (2, "path endpoints")):
        for value in (0.0, 1.0):
            params = np.zeros((uu.size, 3))
            params[:, 0] = uu
            params[:, fixed_axis] = value
            params[:, 3 - fixed_axis] = vv
            pts = cube(params)
            ref_params = params.copy()
            ref_params[:, 0] = 0.0
            d = float(np.max(np.abs(pts - cube(ref_params))))
            if d > tol:
                raise ComposabilityError(
                    f"cube slices disagree on {label} at face {value:g} "
                    f"(defect {d:.3e})", mismatch=d)


def verify_higher_stokes(conn: TwoConnection, cube: ParamMap, p=None,
                         steps_surface: int = 48, steps_volume: int = 32) -> dict:
    """Compare the quotient of the 2-transports of the two end bigons with
    the plain exponential of the 3-curvature integral over the cube.

    The quotient h0^-1 h1 lies in ker t (central), so the right-hand side is
    exp of an ordinary triple integral of the ker t_* projection of K.
    """
    _check_cube_boundaries(cube)
    fam = conn.family
    h0 = surface_transport(conn, cube.slice_first(0.0), p,
                           steps_surface, steps_surface).value_h
    h1 = surface_transport(conn, cube.slice_first(1.0), p,
                           steps_surface, steps_surface).value_h
    lhs = fam.group_H.mul(fam.group_H.inv(h0), h1)

    n = steps_volume
    w1 = _simpson_weights(n)
    nodes = np.linspace(0.0, 1.0, n + 1)
    mesh = np.stack(np.meshgrid(nodes, nodes, nodes, indexing="ij"),
                    axis=-1).reshape(-1, 3)
    weights = (w1[:, None, None] * w1[None, :, None]
               * w1[None, None, :]).reshape(-1)
    points = cube(mesh)
    du = cube.partial(0, mesh)
    dv = cube.partial(1, mesh)
    dw = cube.partial(2, mesh)
    kvals = conn.K_of(points, du, dv, dw)
    bianchi = float(np.max(np.abs(fam.l2a.apply_t_star(kvals))))
    kproj = fam.l2a.project_ker_t_star(kvals)
    integral = weights @ kproj
    rhs = fam.group_H.exp(
        fam.l2a.h_alg.to_matrix(SURFACE_ODE_SIGN * integral))
    defect = float(np.max(np.abs(lhs - rhs)))
    return {"defect": defect, "lhs": lhs, "rhs": rhs,
            "bianchi_defect": bianchi,
            "kernel_defect": float(np.max(np.abs(fam.cm.t(lhs)
                                                 - fam.group_G.identity)))}


# --- reconstruction -----------------------------------------------------------------


def reconstruct_A(conn: TwoConnection, x, X, steps: int = 16,
                  eps: float = 1e-3) -> np.ndarray:
    """Recover a_x(X) from 1-transport along shrinking straight rays.

    Central differences of log tra(gamma_t) with one Richardson level;
    by the transport ODE the derivative at 0 is -a_x(X), so the negated
    difference reproduces the connection coefficient vector.
    """
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    alg = conn.family.l2a.g_alg
    group = conn.family.group_G

    def logvalue(t):
        if abs(t) < 1e-14:
            return np.zeros_like(np.asarray(group.identity, dtype=complex))
        ray = straight_path(x, x + t * X)
        return group.log(path_ordered_exp(conn, ray, steps).value)

    def central(h):
        return (logvalue(h) - logvalue(-h)) / (2.0 * h)

    d = (4.0 * central(eps / 2.0) - central(eps)) / 3.0
    return alg.from_matrix(-d)


_LENS_AMPLITUDE = 0.25


def _lens_bigon():
    """Analytic bigon (v, v - k sin(pi v)) => (v, v + k sin(pi v)) in I^2.

    Unlike the corner filling it needs no smoothing step, so quadrature
    converges with tiny constants; its oriented flux in the (u, v)
    parameters is exactly -4k/pi times the unit-square area form.
    """
    k = _LENS_AMPLITUDE

    def fn(params):
        u = params[..., 0]
        v = params[..., 1]
        y = v + (2.0 * u - 1.0) * k * np.sin(np.pi * v)
        return np.stack([v, y], axis=-1)

    return ParamMap(2, 2, fn, name="lens")


def reconstruct_B(conn: TwoConnection, x, X, Y, steps: int = 16,
                  eps: float = 1e-3, filling: str = "lens") -> np.ndarray:
    """Recover b_x(X, Y) from 2-transport over shrinking bigon families.

    f(s, t) = log of the H part of the 2-transport over a bigon filling
    the parallelogram spanned by sX and tY at x; the mixed second
    derivative at the origin (central stencil plus one Richardson level)
    picks out the st coefficient, which is b_x(X, Y) times the analytic
    flux factor of the filling.  Any smooth filling family whose s = 0 and
    t = 0 members degenerate gives the same derivative; the default lens
    family is analytic and keeps quadrature error far below the stencil
    amplification, while "square" uses the canonical corner filling.
    """
    x = np.asarray(x, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    fam = conn.family
    alg = fam.l2a.h_alg
    if filling == "lens":
        base = _lens_bigon()
        flux_factor = 4.0 * _LENS_AMPLITUDE / math.pi
    elif filling == "square":
        base = canonical_bigon(1.0, 1.0)
        flux_factor = 1.0
    else:
        raise DomainError(f"unknown filling {filling!r}")

    def logvalue(s, t):
        bigon = base.affine_image(x, np.stack([s * X, t * Y]))
        value = surface_transport(conn, bigon, None, steps, steps).value_h
        return fam.group_H.log(value)

    def mixed(h):
        return (logvalue(h, h) - logvalue(h, -h)
                - logvalue(-h, h) + logvalue(-h, -h)) / (4.0 * h * h)

    d = (4.0 * mixed(eps / 2.0) - mixed(eps)) / 3.0
    return alg.from_matrix(d / flux_factor)


# --- 2-holonomy ---------------------------------------------------------------------


def holonomy2_H(conn: TwoConnection, bigon: ParamMap, p=None,
                steps: int = 48, kernel_tol=1e-7) -> dict:
    """H-valued 2-holonomy of a loop-to-loop bigon at the basepoint.

    Source and target of the bigon must be loops at a common basepoint.
    When they are the same loop pointwise, the value is asserted to lie in
    ker t up to ``kernel_tol``.
    """
    corners = [bigon(np.array([u, v])) for u in (0.0, 1.0) for v in (0.0, 1.0)]
    spread = float(np.max(np.abs(np.stack(corners) - corners[0])))
    if spread > 1e-9:
        raise DomainError(
            f"bigon boundary paths are not loops at one basepoint "
            f"(corner spread {spread:.3e})")
    result = surface_transport(conn, bigon, p, steps, steps)

    v = np.linspace(0.0, 1.0, 17)
    src = bigon(np.stack([np.zeros_like(v), v], axis=-1))
    tgt = bigon(np.stack([np.ones_like(v), v], axis=-1))
    same_loop = float(np.max(np.abs(src - tgt))) <= 1e-9
    out = {"value": result.value_h, "same_loop": same_loop,
           "group_defect": result.group_defect}
    if same_loop:
        kd = float(np.max(np.abs(conn.family.cm.t(result.value_h)
                                 - conn.family.group_G.identity)))
        out["kernel_defect"] = kd
        out["kernel_pass"] = kd <= kernel_tol
    return out


def _loop_bigon_family(x0, dirs, amp):
    """Loop-to-loop bigon cube at x0: slices share the same boundary loop."""
    d1, d2, d3 = dirs

    def fn(params):
        u = params[..., 0][..., None]
        v = params[..., 1][..., None]
        w = params[..., 2][..., None]
        loop = (np.sin(np.pi * w) * d1 + np.sin(2 * np.pi * w) * 0.5 * d2)
        bump = np.sin(np.pi * w) ** 2 * (np.sin(np.pi * v) ** 2) * d3
        return x0 + amp * (loop + u * bump)

    return ParamMap(3, x0.shape[0], fn, name="loop-bigon-family")


def ambrose_singer_check(conn: TwoConnection, p=None, rng=None,
                         n_paths: int = 6, n_bigons: int = 6,
                         steps: int = 48, span_tol: float = 1e-5,
                         derivative_tol: float = 1e-4,
                         amplitude: float = 0.35) -> dict:
    """Compare the span of sampled 3-curvature values with 2-holonomy logs.

    Builds S = span{K_(transported point)(X, Y, Z)} over random transported
    frames and tangent triples, then checks (i) the log of every sampled
    reduced 2-holonomy lies in S and (ii) finite-difference derivatives of
    2-holonomy families reproduce the double integral of K.
    """
    rng = rng or np.random.default_rng(0)
    fam = conn.family
    d = conn.chart.dim
    x0 = np.asarray(p[0], dtype=float) if p is not None else np.full(d, 0.5)

    # span of curvature samples along random transported frames
    kvecs = []
    for _ in range(n_paths):
        end = x0 + amplitude * rng.uniform(-1.0, 1.0, size=d)
        wig = amplitude * 0.5 * rng.uniform(-1.0, 1.0, size=d)
        path = ParamMap(
            1, d,
            lambda q, end=end, wig=wig: (x0 + q[..., 0][..., None] * (end - x0)
                                         + np.sin(np.pi * q[..., 0])[..., None] * wig),
            name="probe")
        _ = transport_point(conn, path, p, steps=max(16, steps // 2))
        endpoint = path([1.0])[None, :]
        for _ in range(3):
            X, Y, Z = (rng.standard_normal(d) for _ in range(3))
            kv = conn.K_of(endpoint, X, Y, Z)[0]
            kvecs.append(fam.l2a.project_ker_t_star(kv))
    kmat = np.stack(kvecs)
    scale = float(np.max(np.abs(kmat))) if kmat.size else 0.0
    if scale > 1e-12:
        u, s, vh = np.linalg.svd(kmat / scale)
        rank = int(np.sum(s > 1e-8 * max(kmat.shape)))
        basis = vh[:rank]
    else:
        rank, basis = 0, np.zeros((0, kmat.shape[1]))

    # reduced 2-holonomies and their containment in the span
    frame = np.eye(d)
    logs = []
    residual = 0.0
    for _ in range(n_bigons):
        idx = rng.permutation(d)[:3] if d >= 3 else np.arange(d)
        dirs = [frame[i] for i in idx[:3]] if d >= 3 else [frame[0], frame[-1], frame[0]]
        cube = _loop_bigon_family(x0, dirs, amplitude * rng.uniform(0.5, 1.0))
        hol = holonomy2_H(conn, cube.slice_first(1.0), p, steps=steps)
        log = fam.l2a.h_alg.from_matrix(fam.group_H.log(hol["value"]))
        logs.append(log)
        if basis.shape[0]:
            off = log - basis.T @ (basis @ log)
        else:
            off = log
        residual = max(residual, float(np.max(np.abs(off))))
    hol_scale = max(float(np.max(np.abs(np.stack(logs)))), 1e-30)

    if rank == 0 and hol_scale > 1e-7:
        raise SamplingError(
            "curvature sampling spanned nothing, but 2-holonomies are "
            f"nonzero (scale {hol_scale:.2e}); enlarge the sample plan")

    # converse: d/dr log hol(r) matches the K double integral over the slice
    dirs = [frame[i % d] for i in range(3)]
    cube = _loop_bigon_family(x0, dirs, amplitude)
    r0, dr = 0.5, 1e-3

    def hol_log(r):
        hol = holonomy2_H(conn, cube.slice_first(r), p, steps=steps)
        return fam.l2a.h_alg.from_matrix(fam.group_H.log(hol["value"]))

    fd = (hol_log(r0 + dr) - hol_log(r0 - dr)) / (2.0 * dr)
    n = steps if steps % 2 == 0 else steps + 1
    w1 = _simpson_weights(n)
    nodes = np.linspace(0.0, 1.0, n + 1)
    vv, ww = np.meshgrid(nodes, nodes, indexing="ij")
    mesh = np.stack([np.full(vv.size, r0), vv.reshape(-1), ww.reshape(-1)],
                    axis=-1)
    weights = (w1[:, None] * w1[None, :]).reshape(-1)
    kvals = conn.K_of(cube(mesh), cube.partial(0, mesh),
                      cube.partial(1, mesh), cube.partial(2, mesh))
    integral = weights @ fam.l2a.project_ker_t_star(kvals)
    derivative_defect = float(np.max(np.abs(fd - SURFACE_ODE_SIGN * integral)))

    return {
        "span_rank": rank,
        "span_basis": basis,
        "containment_residual": residual,
        "containment_pass": residual <= span_tol * (1.0 + hol_scale),
        "derivative_defect": derivative_defect,
        "derivative_pass": derivative_defect <= derivative_tol * (1.0 + hol_scale),
        "holonomy_scale": hol_scale,
    }
