import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dhtbound.errors import IndeterminateError, ValidationError
from dhtbound.prob import (
    MAX_ALPHABET,
    JointTable,
    as_kernel,
    as_simplex,
    compose_joint,
    condition,
    conditional_kl,
    conditional_mi,
    entropy,
    ext_add,
    ext_sub,
    ext_sum,
    extend,
    kl_divergence,
    kl_tables,
    marginalize,
    merge_axes,
    push_forward,
)


def simplex_vectors(n_min=2, n_max=5):
    return st.integers(n_min, n_max).flatmap(
        lambda n: arrays(float, n, elements=st.floats(0.0, 1.0)).filter(lambda a: a.sum() > 1e-3)
    ).map(lambda a: a / a.sum())


class TestValidation:
    def test_simplex_ok_and_readonly(self):
        p = as_simplex([0.25, 0.75])
        with pytest.raises(ValueError):
            p[0] = 1.0

    @pytest.mark.parametrize("bad", [[0.5, 0.4], [1.2, -0.2], [np.nan, 1.0], [[0.5, 0.5]], []])
    def test_simplex_rejects(self, bad):
        with pytest.raises(ValidationError):
            as_simplex(bad)

    def test_alphabet_cap(self):
        with pytest.raises(ValidationError, match="cap"):
            as_simplex(np.full(MAX_ALPHABET + 1, 1.0 / (MAX_ALPHABET + 1)))

    def test_kernel_row_error_names_row(self):
        with pytest.raises(ValidationError, match="row 1"):
            as_kernel([[0.5, 0.5], [0.3, 0.699]])

    def test_joint_table_checks(self):
        with pytest.raises(ValidationError):
            JointTable(("X", "X"), np.full((2, 2), 0.25))
        with pytest.raises(ValidationError):
            JointTable(("X",), np.full((2, 2), 0.25))
        with pytest.raises(ValidationError):
            JointTable(("X", "Y"), np.full((2, 2), 0.2))


class TestExtendedReals:
    def test_inf_minus_inf_raises(self):
        with pytest.raises(IndeterminateError):
            ext_sub(math.inf, math.inf)
        with pytest.raises(IndeterminateError):
            ext_add(math.inf, -math.inf)

    def test_finite_and_one_sided(self):
        assert ext_sub(math.inf, 3.0) == math.inf
        assert ext_sub(2.0, math.inf) == -math.inf
        assert ext_sum([1.0, math.inf, 2.0]) == math.inf


class TestDivergences:
    def test_known_kl(self):
        # D((0.5,0.5) || (0.25,0.75)) = 0.5 ln 2 + 0.5 ln(2/3)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(2 / 3))

    def test_absolute_continuity(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    @given(simplex_vectors(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_kl_nonnegative_and_zero_on_diagonal(self, p, data):
        q = data.draw(arrays(float, p.size, elements=st.floats(0.01, 1.0)))
        q = q / q.sum()
        assert kl_divergence(p, q) >= -1e-12
        assert kl_divergence(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_conditional_kl_skips_zero_weight(self):
        pk = np.array([[1.0, 0.0], [0.5, 0.5]])
        qk = np.array([[0.0, 1.0], [0.5, 0.5]])
        assert conditional_kl(pk, qk, [0.0, 1.0]) == 0.0
        assert conditional_kl(pk, qk, [0.1, 0.9]) == math.inf

    def test_entropy_and_push_forward(self):
        assert entropy([0.5, 0.5]) == pytest.approx(math.log(2))
        np.testing.assert_allclose(push_forward([1.0, 0.0], [[0.9, 0.1], [0.2, 0.8]]), [0.9, 0.1])


class TestJointTables:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.t = JointTable(("X", "Y", "Z"), rng.dirichlet(np.ones(12)).reshape(2, 3, 2))

    def test_marginal_and_reorder(self):
        m = marginalize(self.t, ("Z", "X"))
        np.testing.assert_allclose(m.table, self.t.table.sum(axis=1).T)
        assert self.t["Y"].table.shape == (3,)
        np.testing.assert_allclose(self.t.reorder(("Z", "Y", "X")).table, self.t.table.transpose(2, 1, 0))

    def test_condition_then_extend_roundtrip(self):
        k, zero = condition(self.t, ("X", "Y"), "Z")
        assert not zero.any()
        back = extend(marginalize(self.t, ("X", "Y")), ("X", "Y"), k, "Z")
        np.testing.assert_allclose(back.table, self.t.table, atol=1e-15)

    def test_zero_mass_rows_are_uniform_placeholders(self):
        j = compose_joint([1.0, 0.0], [[0.3, 0.7], [0.6, 0.4]], ("X", "Y"))
        k, zero = condition(j, "X", "Y")
        assert zero.tolist() == [False, True]
        np.testing.assert_allclose(k[1], [0.5, 0.5])

    def test_merge_axes_row_major(self):
        m = merge_axes(self.t, ("Y", "Z"), "W")
        assert m.axes == ("X", "W")
        np.testing.assert_allclose(m.table, self.t.table.reshape(2, 6))

    def test_conditional_mi_identities(self):
        t = self.t
        chain = conditional_mi(t, "X", ("Y", "Z"))
        assert chain == pytest.approx(conditional_mi(t, "X", "Z") + conditional_mi(t, "X", "Y", "Z"))
        assert conditional_mi(t, "X", "Y", "Z") >= 0.0
        with pytest.raises(ValidationError):
            conditional_mi(t, "X", "X")

    def test_independent_table_has_zero_mi(self):
        j = JointTable(("A", "B"), np.outer([0.2, 0.8], [0.5, 0.3, 0.2]))
        assert conditional_mi(j, "A", "B") == pytest.approx(0.0, abs=1e-14)

    def test_kl_tables_reorders(self):
        q = JointTable(("Z", "Y", "X"), np.full((2, 3, 2), 1 / 12))
        expected = kl_divergence(self.t.table.ravel(), np.full(12, 1 / 12))
        assert kl_tables(self.t, q) == pytest.approx(expected)


class TestWorkedValues:
    def test_kl_point_mass_vs_uniform(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(0.693147, abs=1e-6)

    def test_conditional_kl_hand_value(self):
        v = conditional_kl(np.eye(2), np.full((2, 2), 0.5), [0.5, 0.5])
        assert v == pytest.approx(math.log(2), abs=1e-12)

    def test_copy_channel_mi(self):
        assert conditional_mi(JointTable(("A", "B"), np.eye(2) / 2), "A", "B") == pytest.approx(math.log(2))

    def test_dsbs_mi(self):
        e = 0.1
        j = JointTable(("A", "B"), np.array([[1 - e, e], [e, 1 - e]]) / 2)
        hb = -e * math.log(e) - (1 - e) * math.log(1 - e)
        assert conditional_mi(j, "A", "B") == pytest.approx(math.log(2) - hb, abs=1e-12)

    def test_push_forward_hand_value(self):
        np.testing.assert_allclose(push_forward([0.5, 0.5], [[0.9, 0.1], [0.2, 0.8]]), [0.55, 0.45])

    def test_three_stage_chain(self):
        # X ~ (0.6, 0.4); Y | X and Z | Y both binary
        k1 = np.array([[0.9, 0.1], [0.3, 0.7]])
        k2 = np.array([[0.8, 0.2], [0.25, 0.75]])
        j = extend(compose_joint([0.6, 0.4], k1), "Y", k2, "Z")
        expected = np.array([
            [[0.6 * 0.9 * 0.8, 0.6 * 0.9 * 0.2], [0.6 * 0.1 * 0.25, 0.6 * 0.1 * 0.75]],
            [[0.4 * 0.3 * 0.8, 0.4 * 0.3 * 0.2], [0.4 * 0.7 * 0.25, 0.4 * 0.7 * 0.75]],
        ])
        np.testing.assert_allclose(j.table, expected, atol=1e-15)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_kl_chain_rule(self, seed):
        rng = np.random.default_rng(seed)
        p = JointTable(("U", "Y"), rng.dirichlet(np.ones(6)).reshape(2, 3))
        q = JointTable(("U", "Y"), rng.dirichlet(np.ones(6)).reshape(2, 3))
        pk, _ = condition(p, "U", "Y")
        qk, _ = condition(q, "U", "Y")
        lhs = kl_tables(p, q)
        rhs = kl_divergence(p["U"].table, q["U"].table) + conditional_kl(pk, qk, p["U"].table)
        assert lhs == pytest.approx(rhs, abs=1e-10)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_mi_invariant_to_relabeling(self, seed):
        rng = np.random.default_rng(seed)
        t = JointTable(("A", "B", "C"), rng.dirichlet(np.ones(18)).reshape(2, 3, 3))
        base = conditional_mi(t, "A", "B", "C")
        perm = t.table[:, rng.permutation(3)][:, :, rng.permutation(3)]
        renamed = JointTable(("P", "Q", "R"), perm)
        assert conditional_mi(renamed, "P", "Q", "R") == pytest.approx(base, abs=1e-12)
        assert conditional_mi(t, "B", "A", "C") == pytest.approx(base, abs=1e-12)

    def test_compose_marginalize_roundtrip(self):
        p = np.array([0.2, 0.5, 0.3])
        k = np.random.default_rng(0).dirichlet(np.ones(4), 3)
        j = compose_joint(p, k)
        np.testing.assert_allclose(j["X"].table, p, atol=1e-14)
        np.testing.assert_allclose(condition(j, "X", "Y")[0], k, atol=1e-14)
