"""Scenario ingestion: the declared space and the points where it is evaluated.

A scenario fixes the dimensions (p temporal, n spatial), a symmetric
temporal metric h(t), a Lagrangian family and the field constants.  Three
families are supported:

* ``general_p1`` - an arbitrary smooth Lagrangian L(t1, x, v), p = 1 only;
* ``electrodynamics`` - quadratic data g(t, x), potentials U(t, x), F(t, x);
* ``autonomous`` - electrodynamics with a time-independent spatial metric
  g(x).

Scenario files are flat key/value documents::

    p = 2
    n = 2
    family = electrodynamics
    h[1][1] = 1
    h[2][2] = t1^2
    g[1][1] = 1
    g[2][2] = 1
    U[1][1] = x2
    F = 0
    einstein_K = 1.0
    tol = 1e-8

Matrix entries default to 0; declaring both (i,j) and (j,i) is allowed only
when the two expressions are structurally identical.  Unknown keys are
rejected.  Scenarios and jet points are immutable after construction.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import ScenarioError
from .jets import jet_space


def var_names(p, n):
    """Coordinate names in canonical order: t1..tp, x1..xn, v<i>_<a>."""
    names = [f"t{a + 1}" for a in range(p)]
    names += [f"x{i + 1}" for i in range(n)]
    names += [f"v{i + 1}_{a + 1}" for i in range(n) for a in range(p)]
    return tuple(names)


def temporal_names(p):
    return tuple(f"t{a + 1}" for a in range(p))


def spatial_names(n):
    return tuple(f"x{i + 1}" for i in range(n))


@dataclass(frozen=True)
class JetPoint:
    """A point (t^a, x^i, x^i_a) of the 1-jet bundle; v[i][a] is x^i_a."""

    t: tuple
    x: tuple
    v: tuple  # n rows of p entries

    @classmethod
    def of(cls, t, x, v):
        t = tuple(float(c) for c in t)
        x = tuple(float(c) for c in x)
        v = tuple(tuple(float(c) for c in row) for row in v)
        if any(len(row) != len(t) for row in v) or len(v) != len(x):
            raise ScenarioError(
                f"velocity block must be {len(x)} rows of {len(t)} entries"
            )
        for c in (*t, *x, *(c for row in v for c in row)):
            if not math.isfinite(c):
                raise ScenarioError("jet point coordinates must be finite")
        return cls(t, x, v)

    @property
    def p(self):
        return len(self.t)

    @property
    def n(self):
        return len(self.x)

    def variables(self):
        out = {f"t{a + 1}": self.t[a] for a in range(self.p)}
        out.update({f"x{i + 1}": self.x[i] for i in range(self.n)})
        for i in range(self.n):
            for a in range(self.p):
                out[f"v{i + 1}_{a + 1}"] = self.v[i][a]
        return out

    def as_row(self):
        return list(self.t) + list(self.x) + [c for row in self.v for c in row]

    @classmethod
    def from_row(cls, p, n, row):
        row = [float(c) for c in row]
        if len(row) != p + n + n * p:
            raise ScenarioError(
                f"expected {p + n + n * p} coordinates (t, x, then v row-major), got {len(row)}"
            )
        t = row[:p]
        x = row[p:p + n]
        flat = row[p + n:]
        v = [flat[i * p:(i + 1) * p] for i in range(n)]
        return cls.of(t, x, v)

    def __str__(self):
        return "(" + ", ".join(f"{c:.6g}" for c in self.as_row()) + ")"


@dataclass(frozen=True)
class GeneralP1:
    """Arbitrary smooth Lagrangian on the 1-jet bundle; requires p = 1."""

    L: ex.Expr

    name = "general_p1"


@dataclass(frozen=True)
class Electrodynamics:
    """Quadratic family: h^{ab} g_ij v^i_a v^j_b + U^{(a)}_{(i)} v^i_a + F.

    `autonomous` marks a time-independent spatial metric g(x).
    """

    g: tuple  # n x n of Expr
    U: tuple  # p x n of Expr
    F: ex.Expr
    autonomous: bool = False

    @property
    def name(self):
        return "autonomous" if self.autonomous else "electrodynamics"


@dataclass(frozen=True)
class Scenario:
    p: int
    n: int
    h: tuple  # p x p of Expr
    family: object
    einstein_K: float = 1.0
    tol: float = 1e-8

    def __post_init__(self):
        _validate(self)

    @property
    def family_name(self):
        return self.family.name

    @property
    def names(self):
        return var_names(self.p, self.n)

    def space(self, order):
        return jet_space(self.names, order)

    def default_order(self):
        """Jet order that feeds every check down to the conservation laws."""
        return 5 if isinstance(self.family, GeneralP1) else 3

    @classmethod
    def build(cls, p, n, h, family, g=None, U=None, F="0", L=None,
              einstein_K=1.0, tol=1e-8):
        """Construct from nested lists of expression strings (or Exprs)."""
        dims = (p, n)

        def one(src):
            return src if isinstance(src, ex.Expr) else ex.parse(str(src), dims)

        def matrix(rows, shape):
            rows = list(rows)
            if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
                raise ScenarioError(f"expected a {shape[0]}x{shape[1]} matrix")
            return tuple(tuple(one(c) for c in r) for r in rows)

        h_m = matrix(h, (p, p))
        if family == "general_p1":
            if L is None:
                raise ScenarioError("general_p1 requires L")
            fam = GeneralP1(one(L))
        elif family in ("electrodynamics", "autonomous"):
            if g is None:
                raise ScenarioError(f"{family} requires g")
            g_m = matrix(g, (n, n))
            U_m = matrix(U, (p, n)) if U is not None else tuple(
                tuple(ex.num(0.0) for _ in range(n)) for _ in range(p)
            )
            fam = Electrodynamics(g_m, U_m, one(F), autonomous=(family == "autonomous"))
        else:
            raise ScenarioError(f"unknown family {family!r}")
        return cls(p, n, h_m, fam, einstein_K=einstein_K, tol=tol)


def _expr_matrix_symmetric(name, m):
    k = len(m)
    for i in range(k):
        for j in range(i + 1, k):
            if m[i][j] != m[j][i]:
                raise ScenarioError(
                    f"asymmetric {name} declaration: {name}[{i + 1}][{j + 1}] != "
                    f"{name}[{j + 1}][{i + 1}]"
                )


def _forbid(name, e, kinds, p, n):
    names = ex.free_vars(e)
    for kind in kinds:
        if kind == "t":
            bad = names & set(temporal_names(p))
            label = "temporal"
        elif kind == "v":
            bad = {nm for nm in names if nm.startswith("v")}
            label = "velocity"
        else:
            bad = names & set(spatial_names(n))
            label = "spatial"
        if bad:
            raise ScenarioError(
                f"{name} must not depend on {label} variables (found {sorted(bad)})"
            )


def _validate(s):
    if s.p < 1 or s.n < 1:
        raise ScenarioError(f"dimensions must be at least 1, got (p={s.p}, n={s.n})")
    if len(s.h) != s.p or any(len(r) != s.p for r in s.h):
        raise ScenarioError(f"h must be {s.p}x{s.p}")
    _expr_matrix_symmetric("h", s.h)
    for i in range(s.p):
        for j in range(s.p):
            _forbid(f"h[{i + 1}][{j + 1}]", s.h[i][j], ("x", "v"), s.p, s.n)
    if s.einstein_K <= 0:
        raise ScenarioError("einstein_K must be positive")
    if s.tol <= 0:
        raise ScenarioError("tol must be positive")

    fam = s.family
    if isinstance(fam, GeneralP1):
        if s.p != 1:
            raise ScenarioError("general_p1 requires p=1")
    elif isinstance(fam, Electrodynamics):
        if len(fam.g) != s.n or any(len(r) != s.n for r in fam.g):
            raise ScenarioError(f"g must be {s.n}x{s.n}")
        _expr_matrix_symmetric("g", fam.g)
        if len(fam.U) != s.p or any(len(r) != s.n for r in fam.U):
            raise ScenarioError(f"U must be {s.p}x{s.n}")
        forbidden = ("v", "t") if fam.autonomous else ("v",)
        for i in range(s.n):
            for j in range(s.n):
                _forbid(f"g[{i + 1}][{j + 1}]", fam.g[i][j], forbidden, s.p, s.n)
        for a in range(s.p):
            for i in range(s.n):
                _forbid(f"U[{a + 1}][{i + 1}]", fam.U[a][i], ("v",), s.p, s.n)
        _forbid("F", fam.F, ("v",), s.p, s.n)
    else:
        raise ScenarioError(f"unknown family object {fam!r}")


# -- scenario documents -----------------------------------------------------------

_KEY_RE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\[\d+\])*)$")
_SCALAR_KEYS = {"p", "n", "family", "einstein_K", "tol", "F", "L"}
_MATRIX_KEYS = {"h", "g", "U"}


def _strip_comment(line):
    out = []
    quoted = False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def _unquote(value):
    value = value.strip()
    if len(value) >= 2 and value[0] == '"' and value[-1] == '"':
        return value[1:-1].strip()
    return value


def load_scenario(document):
    """Parse and validate a scenario document (the text, not a path)."""
    scalars = {}
    matrices = {k: {} for k in _MATRIX_KEYS}
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = _unquote(value)
        m = _KEY_RE.match(key)
        if m is None:
            raise ScenarioError(f"line {lineno}: malformed key {key!r}")
        base, subscript = m.group(1), m.group(2)
        indices = tuple(int(d) for d in re.findall(r"\[(\d+)\]", subscript))
        if base in _MATRIX_KEYS:
            if len(indices) != 2:
                raise ScenarioError(
                    f"line {lineno}: {base} entries need two indices, e.g. {base}[1][2]"
                )
            if indices in matrices[base]:
                raise ScenarioError(f"line {lineno}: duplicate key {key}")
            matrices[base][indices] = (value, lineno)
        elif base in _SCALAR_KEYS:
            if indices:
                raise ScenarioError(f"line {lineno}: {base} takes no indices")
            if base in scalars:
                raise ScenarioError(f"line {lineno}: duplicate key {base}")
            scalars[base] = (value, lineno)
        else:
            raise ScenarioError(f"line {lineno}: unknown key {base!r}")

    def require(key):
        if key not in scalars:
            raise ScenarioError(f"missing required key {key!r}")
        return scalars[key][0]

    def as_int(key):
        text = require(key)
        try:
            return int(text)
        except ValueError:
            raise ScenarioError(f"{key} must be an integer, got {text!r}") from None

    def as_float(key, default):
        if key not in scalars:
            return default
        text = scalars[key][0]
        try:
            return float(text)
        except ValueError:
            raise ScenarioError(f"{key} must be a number, got {text!r}") from None

    p = as_int("p")
    n = as_int("n")
    family = require("family")
    if family not in ("general_p1", "electrodynamics", "autonomous"):
        raise ScenarioError(
            f"family must be general_p1, electrodynamics or autonomous, got {family!r}"
        )
    if p < 1 or n < 1:
        raise ScenarioError(f"dimensions must be at least 1, got (p={p}, n={n})")
    dims = (p, n)

    def parse_entry(text, lineno, what):
        try:
            return ex.parse(text, dims)
        except Exception as err:
            raise ScenarioError(f"line {lineno}: bad expression for {what}: {err}") from None

    def assemble(base, shape, soft_zero=True):
        rows, cols = shape
        entries = matrices[base]
        for (i, j), _ in entries.items():
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise ScenarioError(
                    f"{base}[{i}][{j}] out of range for a {rows}x{cols} matrix"
                )
        out = [[ex.num(0.0)] * cols for _ in range(rows)]
        for (i, j), (text, lineno) in entries.items():
            out[i - 1][j - 1] = parse_entry(text, lineno, f"{base}[{i}][{j}]")
        if base in ("h", "g"):
            for i in range(rows):
                for j in range(i + 1, cols):
                    a = matrices[base].get((i + 1, j + 1))
                    b = matrices[base].get((j + 1, i + 1))
                    if a is not None and b is not None:
                        if out[i][j] != out[j][i]:
                            raise ScenarioError(
                                f"asymmetric {base} declaration at "
                                f"[{i + 1}][{j + 1}] vs [{j + 1}][{i + 1}]"
                            )
                    elif a is not None:
                        out[j][i] = out[i][j]
                    elif b is not None:
                        out[i][j] = out[j][i]
        return tuple(tuple(r) for r in out)

    h = assemble("h", (p, p))
    einstein_K = as_float("einstein_K", 1.0)
    tol = as_float("tol", 1e-8)

    if family == "general_p1":
        if "L" not in scalars:
            raise ScenarioError("general_p1 requires L")
        for bad in ("g", "U"):
            if matrices[bad]:
                raise ScenarioError(f"general_p1 does not take {bad} entries")
        if "F" in scalars:
            raise ScenarioError("general_p1 does not take F")
        L = parse_entry(*scalars["L"], "L")
        fam = GeneralP1(L)
    else:
        if "L" in scalars:
            raise ScenarioError(f"{family} does not take L")
        if not matrices["g"]:
            raise ScenarioError(f"{family} requires g entries")
        g = assemble("g", (n, n))
        U = assemble("U", (p, n))
        F = parse_entry(*scalars["F"], "F") if "F" in scalars else ex.num(0.0)
        fam = Electrodynamics(g, U, F, autonomous=(family == "autonomous"))

    return Scenario(p, n, h, fam, einstein_K=einstein_K, tol=tol)


def load_scenario_file(path):
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


# -- Lagrangian synthesis -----------------------------------------------------------


def _eadd(a, b):
    if a == ex.num(0.0):
        return b
    if b == ex.num(0.0):
        return a
    return ex.BinOp("+", a, b)


def _emul(a, b):
    zero = ex.num(0.0)
    if a == zero or b == zero:
        return zero
    if a == ex.num(1.0):
        return b
    if b == ex.num(1.0):
        return a
    return ex.BinOp("*", a, b)


def _esub(a, b):
    if b == ex.num(0.0):
        return a
    if a == ex.num(0.0):
        return ex.Neg(b)
    return ex.BinOp("-", a, b)


def _expr_det(m):
    k = len(m)
    if k == 1:
        return m[0][0]
    acc = ex.num(0.0)
    for j in range(k):
        minor = [[m[r][c] for c in range(k) if c != j] for r in range(1, k)]
        term = _emul(m[0][j], _expr_det(minor))
        acc = _eadd(acc, term) if j % 2 == 0 else _esub(acc, term)
    return acc


def expr_matrix_inverse(m):
    """Entrywise inverse of a small symmetric Expr matrix (adjugate / det)."""
    k = len(m)
    det = _expr_det(m)
    out = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            minor = [[m[r][c] for c in range(k) if c != j] for r in range(k) if r != i]
            cof = _expr_det(minor) if k > 1 else ex.num(1.0)
            if (i + j) % 2 == 1:
                cof = ex.Neg(cof)
            out[j][i] = ex.BinOp("/", cof, det)
    return tuple(tuple(r) for r in out)


def synthesize_lagrangian(scenario):
    """The quadratic Lagrangian h^{ab} g_ij v^i_a v^j_b + U^{(a)}_{(i)} v^i_a + F
    of an electrodynamics scenario, as a single expression.

    Used for the independent route through the velocity Hessian.
    """
    fam = scenario.family
    if not isinstance(fam, Electrodynamics):
        raise ScenarioError("only electrodynamics scenarios synthesize a Lagrangian")
    p, n = scenario.p, scenario.n
    h_inv = expr_matrix_inverse([list(r) for r in scenario.h])
    acc = ex.num(0.0)
    for a in range(p):
        for b in range(p):
            for i in range(n):
                for j in range(n):
                    term = _emul(
                        _emul(h_inv[a][b], fam.g[i][j]),
                        _emul(ex.var(f"v{i + 1}_{a + 1}"), ex.var(f"v{j + 1}_{b + 1}")),
                    )
                    acc = _eadd(acc, term)
    for a in range(p):
        for i in range(n):
            acc = _eadd(acc, _emul(fam.U[a][i], ex.var(f"v{i + 1}_{a + 1}")))
    return _eadd(acc, fam.F)
