"""Shared fixtures: canonical scenarios and seeded random corpora."""

import numpy as np

from jetfield.scenario import JetPoint, Scenario

# flat 2+2 electrodynamics space: everything geometric vanishes
FLAT_22 = Scenario.build(
    2, 2,
    h=[["1", "0"], ["0", "1"]],
    family="electrodynamics",
    g=[["1", "0"], ["0", "1"]],
)

# flat metrics with a linear potential: constant potential curl
U_FIELD_22 = Scenario.build(
    2, 2,
    h=[["1", "0"], ["0", "1"]],
    family="electrodynamics",
    g=[["1", "0"], ["0", "1"]],
    U=[["x2", "0"], ["0", "0"]],
)

# unit-sphere spatial metric at p = 1 (chart away from the poles)
SPHERE_P1 = Scenario.build(
    1, 2,
    h=[["1"]],
    family="autonomous",
    g=[["1", "0"], ["0", "sin(x1)^2"]],
)

# curved temporal 3-sphere block over a flat plane: nontrivial h-curvature
CURVED_H_P3 = Scenario.build(
    3, 2,
    h=[["1", "0", "0"], ["0", "sin(t1)^2", "0"], ["0", "0", "sin(t1)^2*sin(t2)^2"]],
    family="autonomous",
    g=[["1", "0"], ["0", "1"]],
)


def point_for(s, t=None, x=None, v=None):
    t = t if t is not None else [0.1 * (a + 1) for a in range(s.p)]
    x = x if x is not None else [0.2 * (i + 1) for i in range(s.n)]
    if v is None:
        v = [[0.3 + 0.1 * i - 0.05 * a for a in range(s.p)] for i in range(s.n)]
    elif np.ndim(v) == 1:
        if s.p != 1:
            raise ValueError("flat v only for p=1")
        v = [[c] for c in v]
    return JetPoint.of(t, x, v)


def _coef(rng, scale=0.2):
    return f"{rng.uniform(-scale, scale):.6f}"


def _smooth_txn(rng, p, n, temporal=True, spatial=True):
    """A small smooth expression in the allowed coordinates."""
    pieces = []
    if spatial:
        i = rng.integers(1, n + 1)
        j = rng.integers(1, n + 1)
        pieces.append(f"{_coef(rng)}*sin(x{i})*x{j}")
        pieces.append(f"{_coef(rng)}*x{rng.integers(1, n + 1)}^2")
    if temporal:
        a = rng.integers(1, p + 1)
        pieces.append(f"{_coef(rng)}*cos(t{a})")
        if spatial:
            pieces.append(f"{_coef(rng)}*t{a}*x{rng.integers(1, n + 1)}")
    return " + ".join(pieces) if pieces else "0"


def _metric_rows(rng, dim, label, p, n, temporal):
    rows = [["0"] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            if i == j:
                if label == "h":
                    entry = f"1 + {_coef(rng, 0.15)}*t{i + 1 if i < p else 1}^2"
                else:
                    entry = f"1 + {_smooth_txn(rng, p, n, temporal=temporal)}"
            else:
                entry = (
                    f"{_coef(rng, 0.08)}*x{min(i + 1, n)}*x{min(j + 1, n)}"
                    if label == "g"
                    else f"{_coef(rng, 0.05)}*t{min(i + 1, p)}*t{min(j + 1, p)}"
                )
            rows[i][j] = entry
            rows[j][i] = entry
    return rows


def random_scenarios(rng, family, count, p=2, n=2):
    """Seed-deterministic smooth scenarios, regular on the sampling box."""
    out = []
    for _ in range(count):
        h = _metric_rows(rng, p, "h", p, n, temporal=True)
        if family == "general_p1":
            if p != 1:
                raise ValueError("general_p1 requires p=1")
            quad = " + ".join(
                f"(1 + {_smooth_txn(rng, 1, n, temporal=False)})*v{i + 1}_1^2"
                for i in range(n)
            )
            cross = f" + {_coef(rng, 0.1)}*sin(x1)*v1_1*v{n}_1"
            quartic = f" + {_coef(rng, 0.05)}*v1_1^2*v{n}_1^2"
            linear = f" + {_coef(rng)}*x1*v1_1 + {_coef(rng)}*t1*v{n}_1"
            potential = f" + {_coef(rng)}*cos(x1)"
            out.append(
                Scenario.build(1, n, h=h, family="general_p1",
                               L=quad + cross + quartic + linear + potential)
            )
            continue
        autonomous = family == "autonomous"
        g = _metric_rows(rng, n, "g", p, n, temporal=not autonomous)
        U = [
            [_smooth_txn(rng, p, n) for _ in range(n)]
            for _ in range(p)
        ]
        F = _smooth_txn(rng, p, n)
        out.append(
            Scenario.build(p, n, h=h, family=family, g=g, U=U, F=F)
        )
    return out


def random_points(rng, s, count, box=0.7):
    """Uniform points in [-box, box] for every coordinate."""
    pts = []
    for _ in range(count):
        row = rng.uniform(-box, box, size=s.p + s.n + s.n * s.p)
        pts.append(JetPoint.from_row(s.p, s.n, row))
    return pts
