"""Jet arithmetic against independent oracles.

Polynomial jets must match a brute-force symbolic differentiator exactly;
transcendental compositions must match nested central finite differences;
truncation must commute with evaluation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetfield import jets
from jetfield.errors import DomainError, OrderError
from jetfield.jets import JetValue, jet_space

from oracles import central_diff, fd_step, poly_partial, rel_err

NAMES3 = ("t1", "x1", "v1_1")


def seed_jets(space, values):
    return {nm: JetValue.coordinate(space, nm, v) for nm, v in zip(space.names, values)}


def poly_as_jet(poly, js):
    """Evaluate an exponent-dict polynomial in jet arithmetic."""
    space = next(iter(js.values())).space
    acc = JetValue.constant(space, 0.0)
    for exps, coef in poly.items():
        term = JetValue.constant(space, coef)
        for nm, e in zip(space.names, exps):
            for _ in range(e):
                term = term * js[nm]
        acc = acc + term
    return acc


class TestBasics:
    def test_constant_and_coordinate(self):
        space = jet_space(NAMES3, 3)
        c = JetValue.constant(space, 2.5)
        assert c.value == 2.5
        assert c.partial("x1") == 0.0
        x = JetValue.coordinate(space, "x1", 3.0)
        assert x.value == 3.0
        assert x.partial("x1") == 1.0
        assert x.partial("t1") == 0.0

    def test_square_partials(self):
        space = jet_space(NAMES3, 2)
        x = JetValue.coordinate(space, "x1", 3.0)
        sq = x * x
        assert sq.value == 9.0
        assert sq.partial("x1") == 6.0
        assert sq.partial("x1", "x1") == 2.0

    def test_sin_maclaurin(self):
        space = jet_space(("t1",), 3)
        t = JetValue.coordinate(space, "t1", 0.0)
        s = jets.sin(t)
        assert s.value == 0.0
        assert s.partial("t1") == pytest.approx(1.0, abs=1e-15)
        assert s.partial("t1", "t1") == pytest.approx(0.0, abs=1e-15)
        assert s.partial("t1", "t1", "t1") == pytest.approx(-1.0, abs=1e-15)

    def test_triple_product_mixed_partial(self):
        space = jet_space(NAMES3, 2)
        js = seed_jets(space, (2.0, 3.0, 5.0))
        f = js["t1"] * js["x1"] * js["v1_1"]

        def plain(p):
            return p[0] * p[1] * p[2]

        want = central_diff(plain, [2.0, 3.0, 5.0], (1, 1, 0), fd_step(2))
        assert f.partial("t1", "x1") == pytest.approx(5.0, abs=1e-12)
        assert rel_err(f.partial("t1", "x1"), want) < 1e-6

    def test_mixed_partial_symmetry_is_structural(self):
        space = jet_space(NAMES3, 3)
        js = seed_jets(space, (0.3, 0.7, -0.2))
        f = jets.exp(js["t1"] * js["x1"]) + js["v1_1"] * js["x1"]
        assert f.partial("t1", "x1") == f.partial("x1", "t1")

    def test_division_and_power(self):
        space = jet_space(("x1",), 3)
        x = JetValue.coordinate(space, "x1", 2.0)
        inv = 1.0 / x
        assert inv.value == 0.5
        assert inv.partial("x1") == pytest.approx(-0.25)
        cube = x ** 3
        assert cube.partial("x1", "x1", "x1") == pytest.approx(6.0)
        neg = x ** -2
        assert neg.value == 0.25
        half = x ** 0.5
        assert half.value == pytest.approx(math.sqrt(2.0))

    def test_order_zero_jet_has_no_derivatives(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", 1.0, order=0)
        with pytest.raises(OrderError):
            x.d("x1")


class TestDomainErrors:
    def test_log_nonpositive(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", -1.0)
        with pytest.raises(DomainError):
            jets.log(x)

    def test_sqrt_negative(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", -4.0)
        with pytest.raises(DomainError):
            jets.sqrt(x)

    def test_divide_by_zero_base_point(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", 0.0)
        with pytest.raises(DomainError):
            (1.0 / x)

    def test_fractional_power_needs_positive_base(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", -2.0)
        with pytest.raises(DomainError):
            x ** 1.5


@st.composite
def polynomials(draw):
    n_terms = draw(st.integers(1, 6))
    poly = {}
    for _ in range(n_terms):
        exps = tuple(draw(st.integers(0, 2)) for _ in NAMES3)
        if sum(exps) > 4:
            continue
        coef = draw(
            st.floats(-4.0, 4.0, allow_nan=False, allow_infinity=False).filter(
                lambda c: abs(c) > 1e-3
            )
        )
        poly[exps] = poly.get(exps, 0.0) + coef
    if not poly:
        poly[(1, 0, 0)] = 1.0
    return poly


class TestPolynomialOracle:
    @settings(max_examples=60, deadline=None)
    @given(
        poly=polynomials(),
        point=st.tuples(*[st.floats(-2.0, 2.0, allow_nan=False) for _ in NAMES3]),
    )
    def test_all_partials_match_symbolic_oracle(self, poly, point):
        space = jet_space(NAMES3, 4)
        js = seed_jets(space, point)
        f = poly_as_jet(poly, js)
        got = f.partials()
        for multi_index, value in got.items():
            want = poly_partial(poly, multi_index, point)
            assert value == pytest.approx(want, abs=1e-12, rel=1e-12)


TRANSCENDENTAL_CASES = [
    ("sin(t*x)+cosh(v)", lambda p: math.sin(p[0] * p[1]) + math.cosh(p[2]),
     lambda js: jets.sin(js["t1"] * js["x1"]) + jets.cosh(js["v1_1"]),
     (0.4, -0.7, 0.3)),
    ("exp(x)*log(2+t)", lambda p: math.exp(p[1]) * math.log(2.0 + p[0]),
     lambda js: jets.exp(js["x1"]) * jets.log(2.0 + js["t1"]),
     (0.5, 0.2, 0.0)),
    ("sqrt(1+t^2+x^2)", lambda p: math.sqrt(1.0 + p[0] ** 2 + p[1] ** 2),
     lambda js: jets.sqrt(1.0 + js["t1"] ** 2 + js["x1"] ** 2),
     (0.3, 0.8, 0.0)),
    ("tan(x/3)+sinh(t*v)", lambda p: math.tan(p[1] / 3.0) + math.sinh(p[0] * p[2]),
     lambda js: jets.tan(js["x1"] / 3.0) + jets.sinh(js["t1"] * js["v1_1"]),
     (0.6, 0.9, -0.4)),
    ("x^2.5/(1+v^2)", lambda p: p[1] ** 2.5 / (1.0 + p[2] ** 2),
     lambda js: js["x1"] ** 2.5 / (1.0 + js["v1_1"] ** 2),
     (0.1, 1.4, 0.5)),
]


class TestTranscendentalFiniteDifferences:
    @pytest.mark.parametrize("label,plain,jetfn,point", TRANSCENDENTAL_CASES)
    def test_partials_orders_1_to_3(self, label, plain, jetfn, point):
        space = jet_space(NAMES3, 3)
        js = seed_jets(space, point)
        f = jetfn(js)
        for multi_index in space.monomials:
            order = sum(multi_index)
            if order < 1 or order > 3:
                continue
            want = central_diff(plain, list(point), multi_index, fd_step(order))
            got = f.partial(
                *[nm for nm, e in zip(NAMES3, multi_index) for _ in range(e)]
            )
            assert rel_err(got, want) < 1e-4, (label, multi_index, got, want)


class TestTruncationConsistency:
    @pytest.mark.parametrize("high,low", [(5, 3), (4, 2), (3, 0), (2, 1)])
    def test_truncation_commutes_with_evaluation(self, high, low):
        space_hi = jet_space(NAMES3, high)
        space_lo = jet_space(NAMES3, low)
        point = (0.37, -0.81, 0.59)

        def build(js):
            return jets.exp(js["t1"] * js["x1"]) * jets.sin(js["v1_1"]) + js["x1"] ** 3

        f_hi = build(seed_jets(space_hi, point)).truncate(low)
        f_lo = build(seed_jets(space_lo, point))
        for m, v in f_lo.partials().items():
            i = space_hi.mono_index[m]
            hi_v = f_hi.c[i] * space_hi.factorials[i]
            assert hi_v == v, m

    def test_min_order_propagates_through_arithmetic(self):
        space = jet_space(NAMES3, 4)
        a = JetValue.coordinate(space, "x1", 1.0, order=4)
        b = JetValue.coordinate(space, "t1", 2.0, order=2)
        assert (a * b).order == 2
        assert (a + b).order == 2
        assert a.d("x1").order == 3


class TestTableHelpers:
    def test_table_values_roundtrip(self):
        space = jet_space(NAMES3, 2)
        tab = jets.jet_table((2, 2))
        js = seed_jets(space, (1.0, 2.0, 3.0))
        tab[0, 0] = js["t1"]
        tab[0, 1] = js["x1"] * js["x1"]
        tab[1, 0] = JetValue.constant(space, -1.0)
        tab[1, 1] = 7.0
        vals = jets.table_values(tab)
        assert np.allclose(vals, [[1.0, 4.0], [-1.0, 7.0]])
