"""Torsion and curvature families of the metric linear connection.

Two routes are kept for the torsion families: the generic route evaluates
the frame brackets and coefficient differences directly (curls of the
nonlinear connection in the adapted frame), while the closed route uses the
reduced expressions in terms of the curvature of h, the curvature of the
spatial Christoffel symbols and the potential curl.  The two must agree,
and the cells that the construction forces to zero are evaluated
generically and audited against zero rather than assumed.

Curvature families are computed from the coefficient formulas in the
adapted frame, with every derivative of a coefficient read from its jet.
Index conventions continue those of `geometry`; the final two indices of
each curvature family are the (antisymmetric) derivative pair, and a
velocity leg is written as its spatial index paired with an upper temporal
index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointGeometry, covariant_derivative, geometry_at
from .jets import jet_table, table_values
from .scenario import Electrodynamics, JetPoint
from .tables import ComponentTable, ndrange, t_lo, t_up, x_lo, x_up


def _max_abs(table):
    arr = table_values(table) if isinstance(table, np.ndarray) else table.values()
    return float(np.max(np.abs(arr))) if arr.size else 0.0


# -- torsion -------------------------------------------------------------------------


def torsion_jets(geom):
    """Generic torsion families as jets, keyed by family name.

    spatial_time[m,a,j]        T^m_aj
    curl_tt[m,u,a,b]           R^(m)_(u)ab
    curl_tx[m,u,a,j]           R^(m)_(u)aj
    curl_xx[m,u,i,j]           R^(m)_(u)ij
    vert_pair_time[m,u,a,j,b]  P^(m)(b)_(u)a(j)
    spatial_vert[m,i,j,b]      P^m(b)_i(j)
    vert_pair_space[m,u,i,j,b] P^(m)(b)_(u)i(j)
    vert_vert[m,u,i,a,j,b]     velocity-velocity cell (vanishes)
    """

    def build():
        p, n = geom.p, geom.n
        M = geom.nonlinear_temporal
        N = geom.nonlinear_spatial
        H = geom.temporal_christoffel
        Gt = geom.cartan_time_spatial
        Lc = geom.cartan_spatial
        Cc = geom.cartan_vertical

        spatial_time = jet_table((n, p, n))
        for m, a, j in ndrange(n, p, n):
            spatial_time[m, a, j] = -Gt[m, j, a]

        curl_tt = jet_table((n, p, p, p))
        dMt = jet_table((n, p, p, p))
        for m, u, a, b in ndrange(n, p, p, p):
            dMt[m, u, a, b] = geom.delta_t(M[m, u, a], b)
        for m, u, a, b in ndrange(n, p, p, p):
            curl_tt[m, u, a, b] = dMt[m, u, a, b] - dMt[m, u, b, a]

        curl_tx = jet_table((n, p, p, n))
        for m, u, a, j in ndrange(n, p, p, n):
            curl_tx[m, u, a, j] = geom.delta_x(M[m, u, a], j) - geom.delta_t(N[m, u, j], a)

        curl_xx = jet_table((n, p, n, n))
        dNx = jet_table((n, p, n, n))
        for m, u, i, j in ndrange(n, p, n, n):
            dNx[m, u, i, j] = geom.delta_x(N[m, u, i], j)
        for m, u, i, j in ndrange(n, p, n, n):
            curl_xx[m, u, i, j] = dNx[m, u, i, j] - dNx[m, u, j, i]

        vert_pair_time = jet_table((n, p, p, n, p))
        for m, u, a, j, b in ndrange(n, p, p, n, p):
            acc = geom.d_v(M[m, u, a], j, b)
            if m == j:
                acc = acc + H[b, u, a]
            if b == u:
                acc = acc - Gt[m, j, a]
            vert_pair_time[m, u, a, j, b] = acc

        spatial_vert = jet_table((n, n, n, p))
        for m, i, j, b in ndrange(n, n, n, p):
            spatial_vert[m, i, j, b] = Cc[m, i, j, b]

        vert_pair_space = jet_table((n, p, n, n, p))
        for m, u, i, j, b in ndrange(n, p, n, n, p):
            acc = geom.d_v(N[m, u, i], j, b)
            if b == u:
                acc = acc - Lc[m, j, i]
            vert_pair_space[m, u, i, j, b] = acc

        vert_vert = jet_table((n, p, n, p, n, p))
        zero = 0.0
        for m, u, i, a, j, b in ndrange(n, p, n, p, n, p):
            acc = zero
            if u == a:
                acc = acc + Cc[m, i, j, b]
            if u == b:
                acc = acc - Cc[m, j, i, a]
            vert_vert[m, u, i, a, j, b] = acc

        return {
            "spatial_time": spatial_time,
            "curl_tt": curl_tt,
            "curl_tx": curl_tx,
            "curl_xx": curl_xx,
            "vert_pair_time": vert_pair_time,
            "spatial_vert": spatial_vert,
            "vert_pair_space": vert_pair_space,
            "vert_vert": vert_vert,
        }

    return geom.cached("torsion_jets", build)


def temporal_curvature_jets(geom):
    """H^g_uab: curvature of the temporal Christoffel symbols, axes [g,u,a,b]."""

    def build():
        p = geom.p
        H = geom.temporal_christoffel
        out = jet_table((p, p, p, p))
        for g, u, a, b in ndrange(p, p, p, p):
            acc = H[g, u, a].d(f"t{b + 1}") - H[g, u, b].d(f"t{a + 1}")
            for e in range(p):
                acc = acc + H[e, u, a] * H[g, e, b] - H[e, u, b] * H[g, e, a]
            out[g, u, a, b] = acc
        return out

    return geom.cached("temporal_curvature_jets", build)


def spatial_plain_curvature_jets(geom):
    """r^l_ijk from plain x-partials of the spatial Christoffel symbols."""

    def build():
        n = geom.n
        Gm = geom.spatial_christoffel
        out = jet_table((n, n, n, n))
        for l, i, j, k in ndrange(n, n, n, n):
            acc = Gm[l, i, j].d(f"x{k + 1}") - Gm[l, i, k].d(f"x{j + 1}")
            for m in range(n):
                acc = acc + Gm[m, i, j] * Gm[l, m, k] - Gm[m, i, k] * Gm[l, m, j]
            out[l, i, j, k] = acc
        return out

    return geom.cached("spatial_plain_curvature_jets", build)


def _time_potential_block(geom):
    """F^m_i(u) = g^{mp}/2 (dg_pi/dt^u + h_ub U^(b)_(p)i / 2), axes [m,i,u]."""
    p, n = geom.p, geom.n
    curl = geom.potential_curl
    out = jet_table((n, n, p))
    for m, i, u in ndrange(n, n, p):
        acc = 0.0
        for q in range(n):
            inner = geom.g[q, i].d(f"t{u + 1}")
            for b in range(p):
                inner = inner + 0.5 * geom.h[u, b] * curl[b, q, i]
            acc = acc + geom.g_inv[m, q] * inner
        out[m, i, u] = 0.5 * acc
    return out


def torsion_closed_jets(geom):
    """Closed-form torsion families available for the scenario's branch."""

    def build():
        p, n = geom.p, geom.n
        Hc = temporal_curvature_jets(geom)
        Gt = geom.cartan_time_spatial
        out = {}

        closed_tt = jet_table((n, p, p, p))
        for m, u, a, b in ndrange(n, p, p, p):
            acc = 0.0
            for g in range(p):
                acc = acc - Hc[g, u, a, b] * geom.coords[geom.vname(m, g)]
            closed_tt[m, u, a, b] = acc
        out["curl_tt"] = closed_tt

        closed_vt = jet_table((n, p, p, n, p))
        for m, u, a, j, b in ndrange(n, p, p, n, p):
            closed_vt[m, u, a, j, b] = -Gt[m, j, a] if b == u else 0.0 * Gt[m, j, a]
        out["vert_pair_time"] = closed_vt

        N = geom.nonlinear_spatial
        closed_tx = jet_table((n, p, p, n))
        if p == 1:
            H111 = geom.temporal_christoffel[0, 0, 0]
            for m, j in ndrange(n, n):
                acc = -N[m, 0, j].d("t1")
                bracket = N[m, 0, j]
                for k in range(n):
                    bracket = bracket - N[m, 0, j].d(geom.vname(k, 0)) * geom.coords[geom.vname(k, 0)]
                closed_tx[m, 0, 0, j] = acc + H111 * bracket
            out["curl_tx"] = closed_tx
        elif isinstance(geom.scenario.family, Electrodynamics):
            F = _time_potential_block(geom)
            H = geom.temporal_christoffel
            for m, u, a, j in ndrange(n, p, p, n):
                acc = -N[m, u, j].d(f"t{a + 1}")
                for b in range(p):
                    acc = acc + H[b, u, a] * F[m, j, b]
                closed_tx[m, u, a, j] = acc
            out["curl_tx"] = closed_tx

        if isinstance(geom.scenario.family, Electrodynamics):
            F = _time_potential_block(geom)
            F_tab = ComponentTable("time_potential", (x_up(), x_lo(), t_lo()), p, n, F)
            F_cov = covariant_derivative(geom, F_tab, "x").data
            r = spatial_plain_curvature_jets(geom)
            closed_xx = jet_table((n, p, n, n))
            for m, u, i, j in ndrange(n, p, n, n):
                acc = F_cov[m, i, u, j] - F_cov[m, j, u, i]
                for l in range(n):
                    acc = acc + r[m, l, i, j] * geom.coords[geom.vname(l, u)]
                closed_xx[m, u, i, j] = acc
            out["curl_xx"] = closed_xx
        return out

    return geom.cached("torsion_closed_jets", build)


def autonomous_torsion_closed_jets(geom):
    """Reduced torsion families of a time-independent spatial metric.

    curl_tt = -H^g_uab x^m_g;
    curl_tx = -(h_ue g^{mk}/4)(H^e_ag U^(g)_(k)j + dU^(e)_(k)j/dt^a);
    curl_xx = r^m_kij x^k_u + (h_ue g^{mk}/4)(U^(e)_(k)i|j - U^(e)_(k)j|i).
    """
    fam = geom.scenario.family
    if not (isinstance(fam, Electrodynamics) and fam.autonomous):
        raise ValueError("autonomous reductions need an autonomous scenario")

    def build():
        p, n = geom.p, geom.n
        H = geom.temporal_christoffel
        curl = geom.potential_curl
        curl_tab = ComponentTable("potential_curl", (t_up(), x_lo(), x_lo()), p, n, curl)
        curl_cov = covariant_derivative(geom, curl_tab, "x").data
        r = spatial_plain_curvature_jets(geom)
        out = {}
        out["curl_tt"] = torsion_closed_jets(geom)["curl_tt"]

        closed_tx = jet_table((n, p, p, n))
        for m, u, a, j in ndrange(n, p, p, n):
            acc = 0.0
            for e in range(p):
                for k in range(n):
                    term = curl[e, k, j].d(f"t{a + 1}")
                    for g in range(p):
                        term = term + H[e, a, g] * curl[g, k, j]
                    acc = acc - 0.25 * geom.h[u, e] * geom.g_inv[m, k] * term
            closed_tx[m, u, a, j] = acc
        out["curl_tx"] = closed_tx

        closed_xx = jet_table((n, p, n, n))
        for m, u, i, j in ndrange(n, p, n, n):
            acc = 0.0
            for k in range(n):
                acc = acc + r[m, k, i, j] * geom.coords[geom.vname(k, u)]
                for e in range(p):
                    acc = acc + 0.25 * geom.h[u, e] * geom.g_inv[m, k] * (
                        curl_cov[e, k, i, j] - curl_cov[e, k, j, i]
                    )
            closed_xx[m, u, i, j] = acc
        out["curl_xx"] = closed_xx
        return out

    return geom.cached("autonomous_torsion_closed_jets", build)


@dataclass
class TorsionTensors:
    """Torsion family values at a point (indices as in `torsion_jets`)."""

    point: JetPoint
    p: int
    spatial_time: np.ndarray
    curl_tt: np.ndarray
    curl_tx: np.ndarray
    curl_xx: np.ndarray
    vert_pair_time: np.ndarray
    spatial_vert: np.ndarray
    vert_pair_space: np.ndarray


def torsion(scenario, at, order=None):
    geom = geometry_at(scenario, at, order=order)
    fams = torsion_jets(geom)
    return TorsionTensors(
        geom.point,
        geom.p,
        *[table_values(fams[k]) for k in (
            "spatial_time", "curl_tt", "curl_tx", "curl_xx",
            "vert_pair_time", "spatial_vert", "vert_pair_space",
        )],
    )


def torsion_zero_residuals(geom):
    """Cells the construction forces to zero, evaluated generically."""
    fams = torsion_jets(geom)
    H = table_values(geom.temporal_christoffel)
    Lc = table_values(geom.cartan_spatial)
    out = {
        "tt_temporal_out": float(np.max(np.abs(H - H.transpose(0, 2, 1)))),
        "xx_spatial_out": float(np.max(np.abs(Lc - Lc.transpose(0, 2, 1)))),
        "vert_vert": _max_abs(fams["vert_vert"]),
    }
    if geom.p == 1:
        out["tt_vertical_out"] = _max_abs(fams["curl_tt"])
    else:
        out["vx_spatial_out"] = _max_abs(fams["spatial_vert"])
        out["vx_vertical_out"] = _max_abs(fams["vert_pair_space"])
    return out


def torsion_dual_path_residuals(geom):
    """Generic frame-bracket families against their closed forms."""
    fams = torsion_jets(geom)
    closed = torsion_closed_jets(geom)
    return {
        name: float(np.max(np.abs(table_values(fams[name]) - table_values(tab))))
        for name, tab in closed.items()
    }


# -- curvature -----------------------------------------------------------------------


def curvature_jets(geom):
    """Curvature families as jets, keyed by leg pair.

    temporal[g,u,a,b]     H^g_uab (temporal output, tt legs)
    from_tt[l,i,b,g]      R^l_ibg
    from_xt[l,i,b,k]      R^l_ibk
    from_xx[l,i,j,k]      R^l_ijk
    from_vt[l,i,b,k,g]    P^l(g)_ib(k)
    from_vx[l,i,j,k,g]    P^l(g)_ij(k)
    from_vv[l,i,j,g,k,e]  S^l(g)(e)_i(j)(k)
    t_out_xt[u,a,b,k]     temporal output with a spatial leg (vanishes)
    t_out_vt[u,a,b,k,g]   temporal output with a velocity leg (vanishes)
    """

    def build():
        p, n = geom.p, geom.n
        tor = torsion_jets(geom)
        H = geom.temporal_christoffel
        Gt = geom.cartan_time_spatial
        Lc = geom.cartan_spatial
        Cc = geom.cartan_vertical
        out = {"temporal": temporal_curvature_jets(geom)}

        def c_torsion(l, i, tor_entry):
            acc = 0.0
            for m, u in ndrange(n, p):
                acc = acc + Cc[l, i, m, u] * tor_entry[m, u]
            return acc

        from_tt = jet_table((n, n, p, p))
        for l, i, b, g in ndrange(n, n, p, p):
            acc = geom.delta_t(Gt[l, i, b], g) - geom.delta_t(Gt[l, i, g], b)
            for m in range(n):
                acc = acc + Gt[m, i, b] * Gt[l, m, g] - Gt[m, i, g] * Gt[l, m, b]
            acc = acc + c_torsion(l, i, tor["curl_tt"][:, :, b, g])
            from_tt[l, i, b, g] = acc
        out["from_tt"] = from_tt

        from_xt = jet_table((n, n, p, n))
        for l, i, b, k in ndrange(n, n, p, n):
            acc = geom.delta_x(Gt[l, i, b], k) - geom.delta_t(Lc[l, i, k], b)
            for m in range(n):
                acc = acc + Gt[m, i, b] * Lc[l, m, k] - Lc[m, i, k] * Gt[l, m, b]
            acc = acc + c_torsion(l, i, tor["curl_tx"][:, :, b, k])
            from_xt[l, i, b, k] = acc
        out["from_xt"] = from_xt

        from_xx = jet_table((n, n, n, n))
        dLx = jet_table((n, n, n, n))
        for l, i, j, k in ndrange(n, n, n, n):
            dLx[l, i, j, k] = geom.delta_x(Lc[l, i, j], k)
        for l, i, j, k in ndrange(n, n, n, n):
            acc = dLx[l, i, j, k] - dLx[l, i, k, j]
            for m in range(n):
                acc = acc + Lc[m, i, j] * Lc[l, m, k] - Lc[m, i, k] * Lc[l, m, j]
            acc = acc + c_torsion(l, i, tor["curl_xx"][:, :, j, k])
            from_xx[l, i, j, k] = acc
        out["from_xx"] = from_xx

        cc_tab = ComponentTable("vertical_coeff", (x_up(), x_lo(), x_lo(), t_up()), p, n,
                                Cc)
        cc_time = covariant_derivative(geom, cc_tab, "t").data
        from_vt = jet_table((n, n, p, n, p))
        for l, i, b, k, g in ndrange(n, n, p, n, p):
            acc = geom.d_v(Gt[l, i, b], k, g) - cc_time[l, i, k, g, b]
            acc = acc + c_torsion(l, i, tor["vert_pair_time"][:, :, b, k, g])
            from_vt[l, i, b, k, g] = acc
        out["from_vt"] = from_vt

        cc_space = covariant_derivative(geom, cc_tab, "x").data
        from_vx = jet_table((n, n, n, n, p))
        for l, i, j, k, g in ndrange(n, n, n, n, p):
            acc = geom.d_v(Lc[l, i, j], k, g) - cc_space[l, i, k, g, j]
            acc = acc + c_torsion(l, i, tor["vert_pair_space"][:, :, j, k, g])
            from_vx[l, i, j, k, g] = acc
        out["from_vx"] = from_vx

        from_vv = jet_table((n, n, n, p, n, p))
        for l, i, j, g, k, e in ndrange(n, n, n, p, n, p):
            acc = geom.d_v(Cc[l, i, j, g], k, e) - geom.d_v(Cc[l, i, k, e], j, g)
            for m in range(n):
                acc = acc + Cc[m, i, j, g] * Cc[l, m, k, e] - Cc[m, i, k, e] * Cc[l, m, j, g]
            from_vv[l, i, j, g, k, e] = acc
        out["from_vv"] = from_vv

        t_out_xt = jet_table((p, p, p, n))
        for u, a, b, k in ndrange(p, p, p, n):
            t_out_xt[u, a, b, k] = geom.delta_x(H[u, a, b], k)
        out["t_out_xt"] = t_out_xt

        t_out_vt = jet_table((p, p, p, n, p))
        for u, a, b, k, g in ndrange(p, p, p, n, p):
            t_out_vt[u, a, b, k, g] = geom.d_v(H[u, a, b], k, g)
        out["t_out_vt"] = t_out_vt
        return out

    return geom.cached("curvature_jets", build)


@dataclass
class CurvatureTensors:
    """Curvature family values at a point (indices as in `curvature_jets`).

    The vertical-output blocks are Kronecker compositions of these: over tt
    legs they are d^a_e R^l_i.. + d^l_i H^a_e.., over other legs d^a_e times
    the spatial block; `vertical_block` builds them on demand.
    """

    point: JetPoint
    p: int
    n: int
    temporal: np.ndarray
    from_tt: np.ndarray
    from_xt: np.ndarray
    from_xx: np.ndarray
    from_vt: np.ndarray
    from_vx: np.ndarray
    from_vv: np.ndarray

    def vertical_block(self, legs):
        """Vertical-output curvature over the given legs: 'tt', 'xt' or 'xx'."""
        p, n = self.p, self.n
        eye_p = np.eye(p)
        eye_n = np.eye(n)
        if legs == "tt":
            return (
                np.einsum("ae,libg->laeibg", eye_p, self.from_tt)
                + np.einsum("li,aebg->laeibg", eye_n, self.temporal)
            )
        if legs == "xt":
            return np.einsum("ae,libk->laeibk", eye_p, self.from_xt)
        if legs == "xx":
            return np.einsum("ae,lijk->laeijk", eye_p, self.from_xx)
        raise ValueError(f"legs must be 'tt', 'xt' or 'xx', got {legs!r}")


def curvature(scenario, at, order=None):
    geom = geometry_at(scenario, at, order=order)
    fams = curvature_jets(geom)
    return CurvatureTensors(
        geom.point,
        geom.p,
        geom.n,
        *[table_values(fams[k]) for k in (
            "temporal", "from_tt", "from_xt", "from_xx",
            "from_vt", "from_vx", "from_vv",
        )],
    )


def curvature_zero_residuals(geom):
    """Curvature cells forced to zero, computed generically."""
    fams = curvature_jets(geom)
    out = {
        "temporal_out_spatial_leg": _max_abs(fams["t_out_xt"]),
        "temporal_out_velocity_leg": _max_abs(fams["t_out_vt"]),
    }
    if geom.p == 1:
        out["temporal_tt"] = _max_abs(fams["temporal"])
        out["spatial_tt"] = _max_abs(fams["from_tt"])
    else:
        out["spatial_vt"] = _max_abs(fams["from_vt"])
        out["spatial_vx"] = _max_abs(fams["from_vx"])
        out["spatial_vv"] = _max_abs(fams["from_vv"])
    return out


def curvature_antisymmetry_residuals(geom):
    """Lowered first-pair antisymmetry of the spatial curvature families.

    With R_mibk = g_mp R^p_ibk and likewise for the xx and vx families,
    the lowered tensors are antisymmetric in their first two indices.
    """
    g = table_values(geom.g)
    fams = curvature_jets(geom)
    out = {}
    for key, name in (("from_xt", "time_space"), ("from_xx", "space_space"),
                      ("from_vx", "velocity_space")):
        block = table_values(fams[key])
        lowered = np.einsum("mp,pi...->mi...", g, block)
        out[name] = float(np.max(np.abs(lowered + np.swapaxes(lowered, 0, 1))))
    return out


def autonomous_reduction_residuals(geom):
    """Torsion and curvature against the reduced autonomous forms."""
    fams = torsion_jets(geom)
    closed = autonomous_torsion_closed_jets(geom)
    out = {
        f"torsion_{name}": float(
            np.max(np.abs(table_values(fams[name]) - table_values(tab)))
        )
        for name, tab in closed.items()
    }
    for name in ("spatial_time", "vert_pair_time", "spatial_vert", "vert_pair_space"):
        out[f"torsion_{name}_zero"] = _max_abs(fams[name])
    cur = curvature_jets(geom)
    r = spatial_plain_curvature_jets(geom)
    out["curvature_spatial_vs_plain"] = float(
        np.max(np.abs(table_values(cur["from_xx"]) - table_values(r)))
    )
    for name in ("from_tt", "from_xt", "from_vt", "from_vx", "from_vv"):
        out[f"curvature_{name}_zero"] = _max_abs(cur[name])
    return out


# -- Bianchi identities -----------------------------------------------------------------


def bianchi_residuals(scenario_or_geom, at=None, order=None):
    """Max-abs residual of the three coefficient-level cyclic identities.

    b1 alternates (j,k) over R^l_jak + T^l_aj|k + C^l(u)_k(m) R^(m)_(u)aj;
    b2 sums (i,j,k) cyclically over R^l_ijk - C^l(u)_k(m) R^(m)_(u)ij;
    b3 alternates (j,k) over P^l(e)_jk(q) + C^l(e)_j(q)|k
       + C^l(u)_k(m) P^(m)(e)_(u)j(q).
    """
    geom = (
        scenario_or_geom
        if isinstance(scenario_or_geom, PointGeometry)
        else geometry_at(scenario_or_geom, at, order=order)
    )
    p, n = geom.p, geom.n
    tor = torsion_jets(geom)
    cur = curvature_jets(geom)
    Cc = geom.cartan_vertical

    T_tab = ComponentTable(
        "spatial_time_torsion", (x_up(), t_lo(), x_lo()), p, n, tor["spatial_time"]
    )
    T_cov = covariant_derivative(geom, T_tab, "x").data
    b1 = np.zeros((n, p, n, n))
    for l, a, j, k in ndrange(n, p, n, n):
        def brace(jj, kk):
            acc = cur["from_xt"][l, jj, a, kk] + T_cov[l, a, jj, kk]
            for u, m in ndrange(p, n):
                acc = acc + Cc[l, kk, m, u] * tor["curl_tx"][m, u, a, jj]
            return acc
        b1[l, a, j, k] = (brace(j, k) - brace(k, j)).value

    b2 = np.zeros((n, n, n, n))
    for l, i, j, k in ndrange(n, n, n, n):
        acc = 0.0
        for ii, jj, kk in ((i, j, k), (j, k, i), (k, i, j)):
            acc = acc + cur["from_xx"][l, ii, jj, kk]
            for u, m in ndrange(p, n):
                acc = acc - Cc[l, kk, m, u] * tor["curl_xx"][m, u, ii, jj]
        b2[l, i, j, k] = acc.value if not isinstance(acc, float) else acc

    cc_tab = ComponentTable(
        "vertical_coeff", (x_up(), x_lo(), x_lo(), t_up()), p, n, Cc
    )
    cc_space = covariant_derivative(geom, cc_tab, "x").data
    b3 = np.zeros((n, p, n, n, n))
    for l, e, j, k, q in ndrange(n, p, n, n, n):
        def brace3(jj, kk):
            acc = cur["from_vx"][l, jj, kk, q, e] + cc_space[l, jj, q, e, kk]
            for u, m in ndrange(p, n):
                acc = acc + Cc[l, kk, m, u] * tor["vert_pair_space"][m, u, jj, q, e]
            return acc
        b3[l, e, j, k, q] = (brace3(j, k) - brace3(k, j)).value

    return {
        "b1": float(np.max(np.abs(b1))),
        "b2": float(np.max(np.abs(b2))),
        "b3": float(np.max(np.abs(b3))),
    }
