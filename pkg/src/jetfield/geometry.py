"""Connections and derivative operators at a jet point.

PointGeometry evaluates a scenario at one point of the jet bundle with a
chosen jet order and lazily builds, as tables of jets:

* the temporal Christoffel symbols H^g_ab of h and the generalized spatial
  Christoffel symbols Gamma^i_jk of g;
* the canonical nonlinear connection: temporal part M^(i)_(a)b and spatial
  part N^(i)_(a)j, the latter through the semispray when p = 1 and a
  general Lagrangian is given;
* the metric linear connection in the adapted frame, with coefficient
  families (H^g_ab, G^k_jg, L^i_jk, C^i(g)_j(k)) fixed by metricity for
  both h and g together with h-normality (temporal indices are corrected
  only by H).

Because every entry is a jet, the adapted derivatives d/dt^a and d/dx^i and
the three covariant derivatives (time `t`, space `x`, velocity `v`) of any
derived table are exact reads of the stored expansions; each application
lowers the remaining jet order by one.

Index conventions for stored tables (all 0-based):

========================  =============================================
h[a,b], h_inv[a,b]        temporal metric and inverse
H[g,a,b]                  H^g_ab, symmetric in (a,b)
g[i,j], g_inv[i,j]        spatial metric and inverse
Gamma[i,j,k]              Gamma^i_jk from plain x-partials of g
M[i,a,b]                  M^(i)_(a)b
N[i,a,j]                  N^(i)_(a)j
Gt[k,j,g]                 G^k_jg
Lc[i,j,k]                 L^i_jk, symmetric in (j,k)
Cc[i,j,k,g]               C^i(g)_j(k), symmetric in (j,k)
==========================================================================

All operations are pure functions of (scenario, point); instances may be
shared read-only between parallel point evaluations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import expr as ex
from .errors import ScenarioError
from .jets import JetValue, jet_table, table_values
from .scenario import Electrodynamics, GeneralP1, JetPoint, synthesize_lagrangian
from .tables import (
    LOWER,
    SPATIAL,
    TEMPORAL,
    UPPER,
    ComponentTable,
    Slot,
    invert_symmetric,
    ndrange,
    t_lo,
    t_up,
    x_lo,
    x_up,
)


class PointGeometry:
    """All geometric data of a scenario at one jet point, built lazily."""

    def __init__(self, scenario, point, order=None, perturb=None):
        if isinstance(point, JetPoint):
            if (point.p, point.n) != (scenario.p, scenario.n):
                raise ScenarioError(
                    f"point has dimensions (p={point.p}, n={point.n}); scenario "
                    f"expects (p={scenario.p}, n={scenario.n})"
                )
        else:
            point = JetPoint.from_row(scenario.p, scenario.n, point)
        self.scenario = scenario
        self.point = point
        self.p = scenario.p
        self.n = scenario.n
        self.order = scenario.default_order() if order is None else order
        self.space = scenario.space(self.order)
        self._perturb = dict(perturb or {})
        self._cache = {}

    # -- plumbing -----------------------------------------------------------

    def cached(self, key, build):
        value = self._cache.get(key)
        if value is None:
            value = self._cache[key] = build()
        return value

    def vname(self, i, a):
        return f"v{i + 1}_{a + 1}"

    @cached_property
    def coords(self):
        values = self.point.variables()
        return {
            nm: JetValue.coordinate(self.space, nm, values[nm], self.order)
            for nm in self.space.names
        }

    def jet(self, expression):
        """Evaluate a scenario expression at this point, as a full-order jet."""
        result = ex.eval_in_env(expression, self.coords)
        if not isinstance(result, JetValue):
            result = JetValue.constant(self.space, result, self.order)
        return result

    def _jet_matrix(self, rows):
        out = jet_table((len(rows), len(rows[0])))
        for i, row in enumerate(rows):
            for j, e in enumerate(row):
                out[i, j] = self.jet(e)
        return out

    def _apply_perturb(self, name, tab):
        delta = self._perturb.get(name)
        if delta:
            first = (0,) * tab.ndim
            tab[first] = tab[first] + float(delta)
        return tab

    # -- metrics and Christoffel symbols --------------------------------------

    @cached_property
    def h(self):
        return self._jet_matrix(self.scenario.h)

    @cached_property
    def h_inv(self):
        return invert_symmetric(self.h, family="temporal metric h", point=self.point)

    @cached_property
    def temporal_christoffel(self):
        """H^g_ab = h^{ge}/2 (dh_ea/dt^b + dh_eb/dt^a - dh_ab/dt^e)."""
        p = self.p
        dh = jet_table((p, p, p))  # dh[a,b,c] = dh_ab/dt^c
        for a, b, c in ndrange(p, p, p):
            dh[a, b, c] = self.h[a, b].d(f"t{c + 1}")
        H = jet_table((p, p, p))
        for gixa in ndrange(p, p, p):
            gi, a, b = gixa
            acc = 0.0
            for e in range(p):
                acc = acc + self.h_inv[gi, e] * (dh[e, a, b] + dh[e, b, a] - dh[a, b, e])
            H[gi, a, b] = 0.5 * acc
        return self._apply_perturb("temporal_christoffel", H)

    @cached_property
    def lagrangian_jet(self):
        """The Lagrangian as a jet (given for general_p1, synthesized otherwise)."""
        fam = self.scenario.family
        if isinstance(fam, GeneralP1):
            return self.jet(fam.L)
        return self.jet(synthesize_lagrangian(self.scenario))

    @cached_property
    def vertical_metric(self):
        """G^(a)(b)_(i)(j), axes [a,b,i,j]: half the velocity Hessian of L."""
        p, n = self.p, self.n
        G = jet_table((p, p, n, n))
        fam = self.scenario.family
        if isinstance(fam, GeneralP1):
            L = self.lagrangian_jet
            dv = [L.d(self.vname(i, 0)) for i in range(n)]
            for i in range(n):
                for j in range(n):
                    G[0, 0, i, j] = 0.5 * dv[i].d(self.vname(j, 0))
        else:
            g = self.g
            for a, b, i, j in ndrange(p, p, n, n):
                G[a, b, i, j] = self.h_inv[a, b] * g[i, j]
        return G

    @cached_property
    def g(self):
        fam = self.scenario.family
        if isinstance(fam, Electrodynamics):
            return self._jet_matrix(fam.g)
        # p = 1: the spatial metric is h_11 times half the velocity Hessian
        n = self.n
        G = self.vertical_metric
        g = jet_table((n, n))
        for i, j in ndrange(n, n):
            g[i, j] = self.h[0, 0] * G[0, 0, i, j]
        return g

    @cached_property
    def g_inv(self):
        return invert_symmetric(self.g, family="spatial metric g", point=self.point)

    @cached_property
    def spatial_christoffel(self):
        """Gamma^i_jk = g^{im}/2 (dg_mj/dx^k + dg_mk/dx^j - dg_jk/dx^m)."""
        n = self.n
        dg = jet_table((n, n, n))
        for i, j, k in ndrange(n, n, n):
            dg[i, j, k] = self.g[i, j].d(f"x{k + 1}")
        Gamma = jet_table((n, n, n))
        for i, j, k in ndrange(n, n, n):
            acc = 0.0
            for m in range(n):
                acc = acc + self.g_inv[i, m] * (dg[m, j, k] + dg[m, k, j] - dg[j, k, m])
            Gamma[i, j, k] = 0.5 * acc
        return self._apply_perturb("spatial_christoffel", Gamma)

    @cached_property
    def potential_curl(self):
        """U^(b)_(k)j = dU^(b)_(k)/dx^j - dU^(b)_(j)/dx^k, axes [b,k,j]."""
        p, n = self.p, self.n
        curl = jet_table((p, n, n))
        fam = self.scenario.family
        if isinstance(fam, Electrodynamics):
            U = [[self.jet(fam.U[a][i]) for i in range(n)] for a in range(p)]
            for b, k, j in ndrange(p, n, n):
                curl[b, k, j] = U[b][k].d(f"x{j + 1}") - U[b][j].d(f"x{k + 1}")
        else:
            zero = JetValue.constant(self.space, 0.0, self.order)
            curl[...] = zero
        return curl

    # -- canonical nonlinear connection ----------------------------------------

    @cached_property
    def nonlinear_temporal(self):
        """M^(i)_(a)b = -H^g_ab x^i_g, axes [i,a,b]."""
        p, n = self.p, self.n
        H = self.temporal_christoffel
        M = jet_table((n, p, p))
        for i, a, b in ndrange(n, p, p):
            acc = 0.0
            for gi in range(p):
                acc = acc - H[gi, a, b] * self.coords[self.vname(i, gi)]
            M[i, a, b] = acc
        return self._apply_perturb("nonlinear_temporal", M)

    @cached_property
    def semispray(self):
        """Semispray of a p=1 Lagrangian, axes [i]:

        G^i = g^{ik}/4 (d2L/dx^j dy^k y^j - dL/dx^k + d2L/dt dy^k
              + dL/dx^k H^1_11 + 2 h^{11} H^1_11 g_kl y^l).
        """
        if self.p != 1:
            raise ScenarioError("the semispray is defined only for p = 1")
        n = self.n
        L = self.lagrangian_jet
        H111 = self.temporal_christoffel[0, 0, 0]
        dLdy = [L.d(self.vname(k, 0)) for k in range(n)]
        out = jet_table((n,))
        for i in range(n):
            acc = 0.0
            for k in range(n):
                term = 0.0
                for j in range(n):
                    term = term + dLdy[k].d(f"x{j + 1}") * self.coords[self.vname(j, 0)]
                term = term - L.d(f"x{k + 1}")
                term = term + dLdy[k].d("t1")
                term = term + L.d(f"x{k + 1}") * H111
                extra = 0.0
                for l in range(n):
                    extra = extra + self.g[k, l] * self.coords[self.vname(l, 0)]
                term = term + 2.0 * self.h_inv[0, 0] * H111 * extra
                acc = acc + self.g_inv[i, k] * term
            out[i] = 0.25 * acc
        return out

    @cached_property
    def nonlinear_spatial(self):
        """N^(i)_(a)j, axes [i,a,j].

        For a p=1 general Lagrangian this is h_11 dG^i/dy^j through the
        semispray.  For the quadratic families it is the closed form
        Gamma^i_jk x^k_a + g^{ik}/2 dg_jk/dt^a + g^{ik}/4 h_ab U^(b)_(k)j,
        which for p=1 carries the extra H^1_11 terms produced by the
        semispray route (the two routes agree identically).
        """
        p, n = self.p, self.n
        N = jet_table((n, p, n))
        fam = self.scenario.family
        if isinstance(fam, GeneralP1):
            spray = self.semispray
            for i, j in ndrange(n, n):
                N[i, 0, j] = self.h[0, 0] * spray[i].d(self.vname(j, 0))
            return self._apply_perturb("nonlinear_spatial", N)

        Gamma = self.spatial_christoffel
        curl = self.potential_curl
        dg_t = jet_table((n, n, p))
        for j, k, a in ndrange(n, n, p):
            dg_t[j, k, a] = self.g[j, k].d(f"t{a + 1}")
        for i, a, j in ndrange(n, p, n):
            acc = 0.0
            for k in range(n):
                acc = acc + Gamma[i, j, k] * self.coords[self.vname(k, a)]
                acc = acc + 0.5 * self.g_inv[i, k] * dg_t[j, k, a]
                u_part = 0.0
                for b in range(p):
                    u_part = u_part + self.h[a, b] * curl[b, k, j]
                acc = acc + 0.25 * self.g_inv[i, k] * u_part
            N[i, a, j] = acc
        if p == 1:
            # algebraic reduction of the semispray route for quadratic L
            H111 = self.temporal_christoffel[0, 0, 0]
            U = [self.jet(fam.U[0][i]) for i in range(n)]
            for i, j in ndrange(n, n):
                extra = -0.5 if i == j else 0.0
                for k in range(n):
                    grad = 0.0
                    for m in range(n):
                        grad = grad + self.g[j, m].d(f"x{k + 1}") * self.coords[self.vname(m, 0)]
                    extra = extra + 0.5 * self.g_inv[i, k] * grad
                    extra = extra + 0.25 * self.g_inv[i, k] * self.h[0, 0] * U[j].d(f"x{k + 1}")
                N[i, 0, j] = N[i, 0, j] + H111 * extra
        return self._apply_perturb("nonlinear_spatial", N)

    # -- adapted derivatives -----------------------------------------------------

    def delta_t(self, u, a):
        """d/dt^a in the adapted frame: du/dt^a - M^(j)_(b)a du/dv^j_b."""
        M = self.nonlinear_temporal
        acc = u.d(f"t{a + 1}")
        for j, b in ndrange(self.n, self.p):
            acc = acc - M[j, b, a] * u.d(self.vname(j, b))
        return acc

    def delta_x(self, u, k):
        """d/dx^k in the adapted frame: du/dx^k - N^(j)_(b)k du/dv^j_b."""
        N = self.nonlinear_spatial
        acc = u.d(f"x{k + 1}")
        for j, b in ndrange(self.n, self.p):
            acc = acc - N[j, b, k] * u.d(self.vname(j, b))
        return acc

    def d_v(self, u, k, g):
        """Plain vertical derivative d/dx^k_g."""
        return u.d(self.vname(k, g))

    # -- metric linear connection --------------------------------------------------

    @cached_property
    def cartan_time_spatial(self):
        """G^k_jg = g^{ki}/2 (dg_ij/dt^g in the adapted frame), axes [k,j,g]."""
        p, n = self.p, self.n
        dgt = jet_table((n, n, p))
        for i, j, g in ndrange(n, n, p):
            dgt[i, j, g] = self.delta_t(self.g[i, j], g)
        Gt = jet_table((n, n, p))
        for k, j, g in ndrange(n, n, p):
            acc = 0.0
            for i in range(n):
                acc = acc + self.g_inv[k, i] * dgt[i, j, g]
            Gt[k, j, g] = 0.5 * acc
        return self._apply_perturb("cartan_time_spatial", Gt)

    @cached_property
    def cartan_spatial(self):
        """L^i_jk from adapted x-derivatives of g, axes [i,j,k]."""
        n = self.n
        dgx = jet_table((n, n, n))
        for m, j, k in ndrange(n, n, n):
            dgx[m, j, k] = self.delta_x(self.g[m, j], k)
        Lc = jet_table((n, n, n))
        for i, j, k in ndrange(n, n, n):
            acc = 0.0
            for m in range(n):
                acc = acc + self.g_inv[i, m] * (dgx[m, j, k] + dgx[m, k, j] - dgx[j, k, m])
            Lc[i, j, k] = 0.5 * acc
        return self._apply_perturb("cartan_spatial", Lc)

    @cached_property
    def cartan_vertical(self):
        """C^i(g)_j(k) from vertical derivatives of g, axes [i,j,k,g]."""
        p, n = self.p, self.n
        dgv = jet_table((n, n, n, p))
        for m, j, k, g in ndrange(n, n, n, p):
            dgv[m, j, k, g] = self.d_v(self.g[m, j], k, g)
        Cc = jet_table((n, n, n, p))
        for i, j, k, g in ndrange(n, n, n, p):
            acc = 0.0
            for m in range(n):
                acc = acc + self.g_inv[i, m] * (dgv[m, j, k, g] + dgv[m, k, j, g] - dgv[j, k, m, g])
            Cc[i, j, k, g] = 0.5 * acc
        return self._apply_perturb("cartan_vertical", Cc)

    # -- canonical field tables ------------------------------------------------------

    def velocity_table(self):
        """The coordinate velocity field x^i_a itself, slots (x up, t lo)."""
        tab = jet_table((self.n, self.p))
        for i, a in ndrange(self.n, self.p):
            tab[i, a] = self.coords[self.vname(i, a)]
        return ComponentTable(
            "velocity", (x_up(), t_lo()), self.p, self.n, tab
        )


# -- covariant derivatives ------------------------------------------------------------


def covariant_derivative(geom, table, kind):
    """Signature-driven covariant derivative of a table of jets.

    kind "t" appends a lower temporal slot (derivative along dt^g in the
    adapted frame, temporal slots corrected by H, spatial slots by G);
    kind "x" appends a lower spatial slot (adapted dx^k, spatial slots
    corrected by L, temporal slots untouched by h-normality); kind "v"
    appends an upper-temporal + lower-spatial pair (plain velocity
    derivative, spatial slots corrected by C).  Velocity-pair slots of the
    input are corrected as one upper-spatial plus one lower-temporal slot.
    """
    if kind not in ("t", "x", "v"):
        raise ValueError(f"kind must be 't', 'x' or 'v', got {kind!r}")
    p, n = geom.p, geom.n
    slots = table.slots
    data = table.data
    H = geom.temporal_christoffel
    Gt = geom.cartan_time_spatial
    Lc = geom.cartan_spatial
    Cc = geom.cartan_vertical

    if kind == "t":
        appended = (t_lo(),)
        extra = [(g,) for g in range(p)]
    elif kind == "x":
        appended = (x_lo(),)
        extra = [(k,) for k in range(n)]
    else:
        appended = (t_up(), x_lo())
        extra = [(g, k) for g in range(p) for k in range(n)]

    out = np.empty(table.extents + tuple(s.extent(p, n) for s in appended), dtype=object)
    for idx in ndrange(*table.extents):
        u = data[idx]
        for tail in extra:
            if kind == "t":
                (g,) = tail
                acc = geom.delta_t(u, g)
            elif kind == "x":
                (k,) = tail
                acc = geom.delta_x(u, k)
            else:
                g, k = tail
                acc = geom.d_v(u, k, g)
            for a, slot in enumerate(slots):
                cur = idx[a]
                ext = slot.extent(p, n)
                for m in range(ext):
                    swapped = idx[:a] + (m,) + idx[a + 1:]
                    w = data[swapped]
                    if kind == "t":
                        (g,) = tail
                        if slot.kind == TEMPORAL and slot.variance == UPPER:
                            acc = acc + H[cur, m, g] * w
                        elif slot.kind == TEMPORAL:
                            acc = acc - H[m, cur, g] * w
                        elif slot.variance == UPPER:
                            acc = acc + Gt[cur, m, g] * w
                        else:
                            acc = acc - Gt[m, cur, g] * w
                    elif kind == "x":
                        (k,) = tail
                        if slot.kind == SPATIAL and slot.variance == UPPER:
                            acc = acc + Lc[cur, m, k] * w
                        elif slot.kind == SPATIAL:
                            acc = acc - Lc[m, cur, k] * w
                    else:
                        g, k = tail
                        if slot.kind == SPATIAL and slot.variance == UPPER:
                            acc = acc + Cc[cur, m, k, g] * w
                        elif slot.kind == SPATIAL:
                            acc = acc - Cc[m, cur, k, g] * w
            out[idx + tail] = acc
    suffix = {"t": "/t", "x": "|x", "v": "|v"}[kind]
    return ComponentTable(table.name + suffix, slots + appended, p, n, out)


# -- public dataclasses and operations ----------------------------------------------


@dataclass
class NonlinearConnection:
    """Canonical nonlinear connection values at a point.

    temporal[i,a,b] is M^(i)_(a)b, spatial[i,a,j] is N^(i)_(a)j; the
    semispray is present only for p = 1.
    """

    point: JetPoint
    temporal: np.ndarray
    spatial: np.ndarray
    semispray: np.ndarray | None = None


@dataclass
class CartanConnection:
    """Metric linear connection coefficients at a point.

    temporal[g,a,b] = H^g_ab, time_spatial[k,j,g] = G^k_jg,
    spatial[i,j,k] = L^i_jk and vertical[i,j,k,g] = C^i(g)_j(k).
    """

    point: JetPoint
    temporal: np.ndarray
    time_spatial: np.ndarray
    spatial: np.ndarray
    vertical: np.ndarray


def geometry_at(scenario, at, order=None, perturb=None):
    """PointGeometry factory (the hub shared by the per-family operations)."""
    return PointGeometry(scenario, at, order=order, perturb=perturb)


def temporal_christoffel(scenario, at):
    """H^g_ab of the temporal metric at a point, axes [g,a,b]."""
    return table_values(geometry_at(scenario, at, order=2).temporal_christoffel)


def spatial_christoffel(scenario, at):
    """Gamma^i_jk of the spatial metric at a point, axes [i,j,k]."""
    return table_values(geometry_at(scenario, at, order=2).spatial_christoffel)


def nonlinear_connection(scenario, at, order=None):
    geom = geometry_at(scenario, at, order=order)
    spray = None
    if scenario.p == 1 and isinstance(scenario.family, GeneralP1):
        spray = table_values(geom.semispray)
    return NonlinearConnection(
        geom.point,
        table_values(geom.nonlinear_temporal),
        table_values(geom.nonlinear_spatial),
        spray,
    )


def cartan_connection(scenario, at, order=None):
    geom = geometry_at(scenario, at, order=order)
    return CartanConnection(
        geom.point,
        table_values(geom.temporal_christoffel),
        table_values(geom.cartan_time_spatial),
        table_values(geom.cartan_spatial),
        table_values(geom.cartan_vertical),
    )


def adapted_derivative(scenario, at, f, direction, order=None):
    """Adapted derivative of a scalar field at a point.

    `f` is an expression (or source text); `direction` names a coordinate:
    a temporal name means d/dt^a in the adapted frame, a spatial name means
    d/dx^i in the adapted frame, a velocity name means the plain vertical
    derivative.
    """
    geom = geometry_at(scenario, at, order=order)
    if isinstance(f, str):
        f = ex.parse(f, (scenario.p, scenario.n))
    u = geom.jet(f)
    if direction not in geom.space.names:
        raise ScenarioError(f"unknown direction {direction!r}")
    if direction.startswith("t"):
        return geom.delta_t(u, int(direction[1:]) - 1).value
    if direction.startswith("x"):
        return geom.delta_x(u, int(direction[1:]) - 1).value
    i, a = direction[1:].split("_")
    return geom.d_v(u, int(i) - 1, int(a) - 1).value


def metricity_residuals(geom):
    """Max-abs residuals of aligning the connection with both metrics.

    All six vanish for the metric linear connection: the covariant
    derivatives of g along t, x and v, and of h along t, x and v.
    """
    p, n = geom.p, geom.n
    g_tab = ComponentTable("g", (x_lo(), x_lo()), p, n, geom.g)
    h_tab = ComponentTable("h", (t_lo(), t_lo()), p, n, geom.h)

    def max_abs(tab):
        return float(np.max(np.abs(tab.values())))

    return {
        "g_time": max_abs(covariant_derivative(geom, g_tab, "t")),
        "g_space": max_abs(covariant_derivative(geom, g_tab, "x")),
        "g_vertical": max_abs(covariant_derivative(geom, g_tab, "v")),
        "h_time": max_abs(covariant_derivative(geom, h_tab, "t")),
        "h_space": max_abs(covariant_derivative(geom, h_tab, "x")),
        "h_vertical": max_abs(covariant_derivative(geom, h_tab, "v")),
    }


def connection_symmetry_residuals(geom):
    """Symmetries fixed by the construction: H, Gamma, L and C index pairs."""
    out = {}
    H = table_values(geom.temporal_christoffel)
    out["temporal_christoffel"] = float(np.max(np.abs(H - H.transpose(0, 2, 1))))
    Gm = table_values(geom.spatial_christoffel)
    out["spatial_christoffel"] = float(np.max(np.abs(Gm - Gm.transpose(0, 2, 1))))
    Lc = table_values(geom.cartan_spatial)
    out["cartan_spatial"] = float(np.max(np.abs(Lc - Lc.transpose(0, 2, 1))))
    Cc = table_values(geom.cartan_vertical)
    out["cartan_vertical"] = float(np.max(np.abs(Cc - Cc.transpose(0, 2, 1, 3))))
    return out
