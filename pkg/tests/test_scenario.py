"""Scenario documents, jet points, component tables and matrix inversion."""

import numpy as np
import pytest

from jetfield import expr as ex
from jetfield.errors import ScenarioError, SingularMatrixError
from jetfield.jets import JetValue, jet_space
from jetfield.scenario import (
    Electrodynamics,
    GeneralP1,
    JetPoint,
    Scenario,
    load_scenario,
    synthesize_lagrangian,
    var_names,
)
from jetfield.tables import (
    ComponentTable,
    condition_estimate,
    invert_symmetric,
    t_lo,
    x_lo,
    x_up,
)

FLAT_DOC = """
# flat electrodynamics space
p = 2
n = 2
family = electrodynamics
h[1][1] = 1
h[2][2] = 1
g[1][1] = 1
g[2][2] = 1
"""

SPHERE_DOC = """
p = 1
n = 2
family = autonomous
h[1][1] = 1
g[1][1] = 1
g[2][2] = sin(x1)^2
"""


class TestLoadScenario:
    def test_flat_document(self):
        s = load_scenario(FLAT_DOC)
        assert (s.p, s.n) == (2, 2)
        assert s.family_name == "electrodynamics"
        assert s.einstein_K == 1.0
        assert s.tol == 1e-8
        # omitted U and F default to zero
        assert s.family.F == ex.num(0.0)
        assert all(u == ex.num(0.0) for row in s.family.U for u in row)

    def test_sphere_document(self):
        s = load_scenario(SPHERE_DOC)
        assert s.family_name == "autonomous"
        assert s.family.g[1][1] == ex.parse("sin(x1)^2", (1, 2))

    def test_general_p1_requires_p1(self):
        doc = "p = 2\nn = 1\nfamily = general_p1\nh[1][1]=1\nh[2][2]=1\nL = v1_1^2"
        with pytest.raises(ScenarioError, match="general_p1 requires p=1"):
            load_scenario(doc)

    def test_unknown_key_rejected(self):
        with pytest.raises(ScenarioError, match="unknown key"):
            load_scenario(FLAT_DOC + "\nwarp_factor = 9")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ScenarioError, match="duplicate"):
            load_scenario(FLAT_DOC + "\ng[1][1] = 2")

    def test_asymmetric_declaration_rejected(self):
        doc = FLAT_DOC + "\ng[1][2] = x1\ng[2][1] = x2"
        with pytest.raises(ScenarioError, match="asymmetric g"):
            load_scenario(doc)

    def test_mirrored_entry_fills_other_triangle(self):
        doc = FLAT_DOC + "\ng[1][2] = x1*x2"
        s = load_scenario(doc)
        assert s.family.g[0][1] == s.family.g[1][0]

    def test_autonomous_rejects_time_dependent_g(self):
        doc = SPHERE_DOC.replace("g[1][1] = 1", "g[1][1] = 1 + t1^2")
        with pytest.raises(ScenarioError, match="temporal"):
            load_scenario(doc)

    def test_g_rejects_velocity_dependence(self):
        doc = FLAT_DOC.replace("g[1][1] = 1", "g[1][1] = 1 + v1_1^2")
        with pytest.raises(ScenarioError, match="velocity"):
            load_scenario(doc)

    def test_h_must_depend_on_time_only(self):
        doc = FLAT_DOC.replace("h[1][1] = 1", "h[1][1] = 1 + x1^2")
        with pytest.raises(ScenarioError, match="spatial"):
            load_scenario(doc)

    def test_deterministic(self):
        a = load_scenario(SPHERE_DOC)
        b = load_scenario(SPHERE_DOC)
        assert a == b

    def test_bad_expression_carries_location(self):
        doc = FLAT_DOC + "\nF = sin(x1"
        with pytest.raises(ScenarioError, match="bad expression"):
            load_scenario(doc)

    def test_build_constructor(self):
        s = Scenario.build(
            1, 1, h=[["1"]], family="general_p1", L="v1_1^2 + x1^2"
        )
        assert isinstance(s.family, GeneralP1)


class TestJetPoint:
    def test_variables_view(self):
        pt = JetPoint.of((0.5,), (1.0, 2.0), ((3.0,), (4.0,)))
        assert pt.variables() == {
            "t1": 0.5, "x1": 1.0, "x2": 2.0, "v1_1": 3.0, "v2_1": 4.0
        }

    def test_row_roundtrip(self):
        pt = JetPoint.of((0.1, 0.2), (1.0, 2.0), ((3.0, 4.0), (5.0, 6.0)))
        assert JetPoint.from_row(2, 2, pt.as_row()) == pt

    def test_nonfinite_rejected(self):
        with pytest.raises(ScenarioError, match="finite"):
            JetPoint.of((float("nan"),), (0.0,), ((0.0,),))

    def test_var_names_order(self):
        assert var_names(2, 2) == (
            "t1", "t2", "x1", "x2", "v1_1", "v1_2", "v2_1", "v2_2"
        )


class TestComponentTable:
    def test_zero_initialized(self):
        tab = ComponentTable("demo", [x_up(), x_lo()], p=1, n=3)
        assert np.all(tab.values() == 0.0)

    def test_set_get_roundtrip(self):
        tab = ComponentTable("demo", [x_up(), t_lo()], p=2, n=3)
        tab.set(2, 1, 4.5)
        assert tab.get(2, 1) == 4.5

    def test_bounds_checked(self):
        tab = ComponentTable("demo", [x_up()], p=1, n=2)
        with pytest.raises(IndexError, match="out of range"):
            tab.get(2)
        with pytest.raises(IndexError, match="expected 1"):
            tab.get(0, 0)

    def test_symmetry_check_flags_asymmetric_writes(self):
        tab = ComponentTable("christoffel", [x_up(), x_lo(), x_lo()], p=1, n=2)
        tab.set(0, 0, 1, 2.0)
        assert tab.max_asymmetry(1, 2) == 2.0
        tab.set(0, 1, 0, 2.0)
        assert tab.max_asymmetry(1, 2) == 0.0


class TestInvertSymmetric:
    def test_diagonal(self):
        inv = invert_symmetric(np.diag([1.0, 4.0]))
        assert np.allclose(inv, np.diag([1.0, 0.25]))

    def test_dense_2x2_product_is_identity(self):
        m = np.array([[2.0, 1.0], [1.0, 1.0]])
        inv = invert_symmetric(m)
        assert np.allclose(inv, [[1.0, -1.0], [-1.0, 2.0]], atol=1e-12)
        assert np.allclose(m @ inv, np.eye(2), atol=1e-10)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            invert_symmetric(np.diag([1.0, 0.0]), family="g")

    def test_ill_conditioned_raises(self):
        with pytest.raises(SingularMatrixError, match="condition"):
            invert_symmetric(np.diag([1.0, 1e-13]), family="h")

    def test_involution(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            a = rng.normal(size=(3, 3))
            m = a @ a.T + 3.0 * np.eye(3)
            twice = invert_symmetric(invert_symmetric(m))
            assert np.max(np.abs(twice - m)) < 1e-9

    def test_jet_entries_invert_and_differentiate(self):
        space = jet_space(("x1",), 2)
        x = JetValue.coordinate(space, "x1", 0.3)
        m = np.empty((2, 2), dtype=object)
        m[0, 0] = 1.0 + x * x
        m[0, 1] = m[1, 0] = x * 0.5
        m[1, 1] = JetValue.constant(space, 2.0)
        inv = invert_symmetric(m, family="g")
        # product with the original is the identity, entry by entry
        for i in range(2):
            for j in range(2):
                acc = sum((m[i, k] * inv[k, j] for k in range(2)), 0.0)
                want = 1.0 if i == j else 0.0
                assert acc.value == pytest.approx(want, abs=1e-12)
        # derivative of the inverse matches -(m^-1 m' m^-1)
        d_inv = inv[0, 0].d("x1").value
        base = np.array([[1.09, 0.15], [0.15, 2.0]])
        dm = np.array([[0.6, 0.5], [0.5, 0.0]])
        want = -(np.linalg.inv(base) @ dm @ np.linalg.inv(base))[0, 0]
        assert d_inv == pytest.approx(want, rel=1e-10)

    def test_condition_estimate(self):
        assert condition_estimate(np.eye(3)) == pytest.approx(1.0)
        assert condition_estimate(np.zeros((2, 2))) == float("inf")


class TestSynthesizedLagrangian:
    def test_matches_direct_evaluation(self):
        s = load_scenario(
            """
            p = 2
            n = 2
            family = electrodynamics
            h[1][1] = 1 + t1^2
            h[2][2] = 2
            h[1][2] = t1*t2*0.1
            g[1][1] = 1 + x1^2
            g[2][2] = 1 + x2^2
            g[1][2] = 0.2*x1*x2
            U[1][1] = x2
            U[2][2] = x1*t1
            F = x1 + t2
            """
        )
        L = synthesize_lagrangian(s)
        env = JetPoint.of((0.3, -0.2), (0.5, 0.7), ((0.9, -0.4), (0.2, 1.1))).variables()
        h = np.array([[ex.eval_float(e, env) for e in row] for row in s.h])
        g = np.array([[ex.eval_float(e, env) for e in row] for row in s.family.g])
        h_inv = np.linalg.inv(h)
        v = np.array([[env[f"v{i}_{a}"] for a in (1, 2)] for i in (1, 2)])
        want = float(np.einsum("ab,ij,ia,jb->", h_inv, g, v, v))
        want += sum(
            ex.eval_float(s.family.U[a][i], env) * v[i, a]
            for a in range(2)
            for i in range(2)
        )
        want += ex.eval_float(s.family.F, env)
        assert ex.eval_float(L, env) == pytest.approx(want, rel=1e-12)
