"""Local 2-connection data and its derived forms.

A TwoConnection stores a g-valued 1-form ``a`` and an h-valued 2-form
``b`` over a chart as coefficient fields.  Exterior derivatives are taken
by 4th-order central differences of the coefficient fields; for constant
tangent vectors

    F(X, Y)    = D_X a(Y) - D_Y a(X) + [a(X), a(Y)],
    K(X, Y, Z) = D_X b(Y, Z) - D_Y b(X, Z) + D_Z b(X, Y)
                 + alpha_*(a(X), b(Y,Z)) - alpha_*(a(Y), b(X,Z))
                 + alpha_*(a(Z), b(X,Y)).

``b`` may be given explicitly (one field per k<l pair and h-basis element)
or derived as the fake-flat lift of the curvature plus a ker t_* part.
Bundle-level forms on the trivial bundle are never stored; they are
computed on demand from the trivialization formulas.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .families import MatrixFamily
from .fields import (CoefficientField, GroupValuedField, chart_grid,
                     directional_diff, FD_STEP)
from .geometry import Chart

__all__ = ["TwoConnection", "TransitionData", "curvature_F",
           "fake_flatness_residual", "three_curvature_K", "bundle_form_B",
           "check_local_data", "pair_index"]


def pair_index(dim: int):
    """The k<l coordinate pairs indexing stored 2-form components."""
    return [(k, l) for k in range(dim) for l in range(k + 1, dim)]


class TwoConnection:
    """Local 2-connection (a, b) for a matrix crossed-module family."""

    def __init__(self, family: MatrixFamily, chart: Chart, a,
                 b="fake_flat", b_extra=None, fd_step=None,
                 fd_richardson=False, name="conn"):
        self.family = family
        self.chart = chart
        self.name = name
        d = chart.dim
        dim_g = family.l2a.g_alg.dim
        dim_h = family.l2a.h_alg.dim
        self.fd_step = fd_step if fd_step is not None else FD_STEP * chart.scale
        self.fd_richardson = fd_richardson
        self.pairs = pair_index(d)

        # a and b accept nested expression lists, CoefficientFields, or a
        # callable producing the whole coefficient tensor (used by gauge
        # transforms, whose coefficients are not expressions).
        if callable(a) and not isinstance(a, CoefficientField):
            self._a = a
        else:
            if not isinstance(a, CoefficientField):
                a = CoefficientField(a, d, (d, dim_g))
            if a.shape != (d, dim_g):
                raise DomainError(
                    f"a needs shape ({d}, {dim_g}) coefficient fields")
            self._a = a

        self.fake_flat_mode = isinstance(b, str) and b == "fake_flat"
        if self.fake_flat_mode:
            self._b = None
        elif callable(b) and not isinstance(b, CoefficientField):
            self._b = b
        else:
            if not isinstance(b, CoefficientField):
                b = CoefficientField(b, d, (len(self.pairs), dim_h))
            if b.shape != (len(self.pairs), dim_h):
                raise DomainError(
                    f"b needs shape ({len(self.pairs)}, {dim_h}) fields")
            self._b = b
        if b_extra is not None and not isinstance(b_extra, CoefficientField):
            b_extra = CoefficientField(b_extra, d, (len(self.pairs), dim_h))
        self._b_extra = b_extra

    # -- pointwise evaluation (batched over points) -----------------------------

    def a_coeffs(self, points):
        """(N, d, dim_g) coefficient tensor of the 1-form."""
        return self._a(np.atleast_2d(np.asarray(points, dtype=float)))

    def a_of(self, points, X):
        """a_x(X) as (N, dim_g); X is a constant vector or an (N, d) batch."""
        return np.einsum("...kg,...k->...g", self.a_coeffs(points),
                         np.asarray(X, dtype=float))

    def F_of(self, points, X, Y):
        """Curvature F = da + 1/2 [a, a] on constant tangents (N, dim_g)."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        da = (directional_diff(lambda p: self.a_of(p, Y), points, X,
                               self.fd_step, self.fd_richardson)
              - directional_diff(lambda p: self.a_of(p, X), points, Y,
                                 self.fd_step, self.fd_richardson))
        comm = self.family.l2a.g_alg.bracket(self.a_of(points, X),
                                             self.a_of(points, Y))
        return da + comm

    def _b_pairs(self, points):
        """(N, npairs, dim_h) stored components b_{kl} for k < l."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.fake_flat_mode:
            out = self._b(points)
        else:
            cols = []
            for (k, l) in self.pairs:
                ek = np.zeros(self.chart.dim)
                el = np.zeros(self.chart.dim)
                ek[k] = 1.0
                el[l] = 1.0
                f = self.F_of(points, ek, el)
                cols.append(np.einsum("hg,...g->...h",
                                      self.family.rep_star, f))
            out = np.stack(cols, axis=-2)
        if self._b_extra is not None:
            out = out + self._b_extra(points)
        return out

    def b_of(self, points, X, Y):
        """b_x(X, Y) as (N, dim_h) for constant tangents."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        comps = self._b_pairs(points)
        weights = np.stack([X[..., k] * Y[..., l] - X[..., l] * Y[..., k]
                            for (k, l) in self.pairs], axis=-1)
        return np.einsum("...p,...ph->...h", np.atleast_1d(weights), comps)

    def K_of(self, points, X, Y, Z):
        """3-curvature dB-part plus the alpha_* wedge, full h value (N, dim_h)."""
        step = self.fd_step
        rich = self.fd_richardson
        db = (directional_diff(lambda p: self.b_of(p, Y, Z), points, X, step, rich)
              - directional_diff(lambda p: self.b_of(p, X, Z), points, Y, step, rich)
              + directional_diff(lambda p: self.b_of(p, X, Y), points, Z, step, rich))
        l2a = self.family.l2a
        wedge = (l2a.apply_alpha_star(self.a_of(points, X), self.b_of(points, Y, Z))
                 - l2a.apply_alpha_star(self.a_of(points, Y), self.b_of(points, X, Z))
                 + l2a.apply_alpha_star(self.a_of(points, Z), self.b_of(points, X, Y)))
        return db + wedge

    def validation_grid(self, per_axis=5):
        return chart_grid(self.chart, per_axis)


# --- module operations ---------------------------------------------------------


def curvature_F(conn: TwoConnection, x, X, Y):
    """F = da + 1/2 [a, a] evaluated on (X, Y) at x (batched)."""
    conn.chart.check_points(x, pad=4 * conn.fd_step)
    return conn.F_of(x, X, Y)


def fake_flatness_residual(conn: TwoConnection, grid=None) -> dict:
    """Max-norm of t_* b - F_a over the grid, with a pass flag at 1e-8."""
    if grid is None:
        grid = conn.validation_grid()
    worst = 0.0
    d = conn.chart.dim
    for (k, l) in conn.pairs:
        ek = np.zeros(d)
        el = np.zeros(d)
        ek[k] = 1.0
        el[l] = 1.0
        tb = conn.family.l2a.apply_t_star(conn.b_of(grid, ek, el))
        f = conn.F_of(grid, ek, el)
        worst = max(worst, float(np.max(np.abs(tb - f))))
    return {"residual": worst, "pass": worst <= 1e-8, "grid_points": len(grid)}


def three_curvature_K(conn: TwoConnection, x, X, Y, Z,
                      bianchi_tol=1e-7) -> dict:
    """3-curvature at x on (X, Y, Z).

    Returns the full h-valued result, its ker t_* projection, and the
    Bianchi defect max|t_* K| (asserted <= ``bianchi_tol``).  Charts of
    dimension < 3 have no 3-forms; the result is zero with a note.
    """
    if conn.chart.dim < 3:
        dim_h = conn.family.l2a.h_alg.dim
        n = np.atleast_2d(x).shape[0]
        zero = np.zeros((n, dim_h))
        return {"value": zero, "projected": zero, "bianchi_defect": 0.0,
                "note": "chart dimension < 3: every 3-form vanishes"}
    value = conn.K_of(x, X, Y, Z)
    t_part = conn.family.l2a.apply_t_star(value)
    defect = float(np.max(np.abs(t_part)))
    projected = conn.family.l2a.project_ker_t_star(value)
    result = {"value": value, "projected": projected, "bianchi_defect": defect}
    if defect > bianchi_tol:
        result["warning"] = (f"Bianchi defect {defect:.3e} exceeds "
                             f"{bianchi_tol:.1e}")
    return result


def bundle_form_B(conn: TwoConnection, x, g, X, Y):
    """Bundle-level B at the point (x, g) of the trivial bundle.

    Equals (alpha_{g^-1})_* b_x(X, Y); contraction with vertical directions
    vanishes by construction since only the base components of the tangents
    enter.
    """
    vals = conn.b_of(x, X, Y)
    ginv = conn.family.group_G.inv(g)
    return conn.family.alpha_vec(ginv, vals)


class TransitionData:
    """Two-chart gluing datum: a G-valued field on the overlap."""

    def __init__(self, family: MatrixFamily, overlap_chart: Chart, g_field,
                 name="transition"):
        if not isinstance(g_field, GroupValuedField):
            g_field = GroupValuedField(
                family.group_G, family.l2a.g_alg,
                CoefficientField(g_field, overlap_chart.dim,
                                 (family.l2a.g_alg.dim,)),
                name=name)
        self.family = family
        self.chart = overlap_chart
        self.g_field = g_field
        self.name = name

    def membership_defect(self, grid) -> float:
        return self.family.group_G.membership_defect(self.g_field(grid))


def check_local_data(conn_i: TwoConnection, conn_j: TwoConnection,
                     transition: TransitionData, grid=None,
                     tol=1e-7) -> dict:
    """Verify the two gluing equations on the overlap grid.

        a_i = g^-1 a_j g + g^-1 dg,      b_i = (alpha_{g^-1})_* b_j.

    Returns both max defects and a pass flag at ``tol``.
    """
    if grid is None:
        grid = chart_grid(transition.chart)
    if len(np.atleast_2d(grid)) == 0:
        raise DomainError("empty overlap grid")
    fam = conn_i.family
    d = conn_i.chart.dim
    g = transition.g_field(grid)
    ginv = fam.group_G.inv(g)

    a_defect = 0.0
    for k in range(d):
        ek = np.zeros(d)
        ek[k] = 1.0
        lhs = conn_i.a_of(grid, ek)
        adj = fam.ad_g_vec(ginv, conn_j.a_of(grid, ek))
        mc = transition.g_field.maurer_cartan(grid, k)
        a_defect = max(a_defect, float(np.max(np.abs(lhs - adj - mc))))

    b_defect = 0.0
    for (k, l) in conn_i.pairs:
        ek = np.zeros(d)
        el = np.zeros(d)
        ek[k] = 1.0
        el[l] = 1.0
        lhs = conn_i.b_of(grid, ek, el)
        rhs = fam.alpha_vec(ginv, conn_j.b_of(grid, ek, el))
        b_defect = max(b_defect, float(np.max(np.abs(lhs - rhs))))

    membership = transition.membership_defect(grid)
    return {"a_defect": a_defect, "b_defect": b_defect,
            "transition_membership_defect": membership,
            "pass": max(a_defect, b_defect) <= tol and membership <= 1e-10,
            "grid_points": int(len(np.atleast_2d(grid)))}
