import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entmono.entropy import von_neumann
from entmono.qcore import (
    DensityOperator,
    StateError,
    ginibre_random_density,
    haar_random_pure,
    partial_trace,
    permute,
    tensor_product,
)
from entmono.roof import RoofConfig
from entmono.squashed import (
    ExtensionCandidate,
    chain_rule_check,
    cmi,
    squashed_monogamy_diag,
    squashed_upper_bound,
    superadditivity_diag,
)
from entmono.states import basis_state, bell, ghz
from entmono.tangle import eof_two_qubit

QUICK = RoofConfig(restarts=1, max_iterations=50, seed=0)
CLASSICAL = DensityOperator([2, 2], np.diag([0.5, 0, 0, 0.5]))
seeds = st.integers(0, 2**32 - 1)


def _flag_extension(rng, n_flags=3):
    """sum_l p_l sigma_A^l (x) sigma_B^l (x) |l><l|."""
    p = rng.dirichlet(np.ones(n_flags))
    m = np.zeros((4 * n_flags, 4 * n_flags), dtype=complex)
    for l in range(n_flags):
        a = ginibre_random_density([2], 2, rng.integers(2**32)).matrix
        b = ginibre_random_density([2], 2, rng.integers(2**32)).matrix
        flag = np.zeros((n_flags, n_flags))
        flag[l, l] = 1
        m += p[l] * np.kron(np.kron(a, b), flag)
    return DensityOperator([2, 2, n_flags], m)


class TestCMI:
    def test_pure_pair_with_decoupled_environment(self):
        rho = tensor_product(bell("phi+").projector(), ginibre_random_density([3], 2, 1))
        assert cmi(rho, ([0], [1], [2])) == pytest.approx(2.0, abs=1e-12)

    def test_classical_flag_is_zero(self, rng):
        assert cmi(_flag_extension(rng), ([0], [1], [2])) == pytest.approx(0.0, abs=1e-12)

    def test_product(self):
        rho = tensor_product(
            tensor_product(ginibre_random_density([2], 2, 1), ginibre_random_density([2], 2, 2)),
            ginibre_random_density([2], 2, 3),
        )
        assert cmi(rho, ([0], [1], [2])) == pytest.approx(0.0, abs=1e-12)

    def test_empty_environment_is_mutual_information(self):
        assert cmi(bell("psi-").projector(), ([0], [1], [])) == pytest.approx(2.0)

    @pytest.mark.parametrize("parts", [([0], [0], [1, 2]), ([0], [1], []), ([], [1], [0, 2])])
    def test_bad_partitions(self, parts):
        with pytest.raises(StateError):
            cmi(ghz(3), parts)

    def test_strong_subadditivity(self):
        for k, s in enumerate(np.random.SeedSequence(8).spawn(200)):
            rho = ginibre_random_density([2, 2, 2], 1 + k % 8, s)
            assert cmi(rho, ([0], [1], [2])) >= -1e-9


class TestChainRule:
    def test_random_four_qubit(self):
        for k, s in enumerate(np.random.SeedSequence(6).spawn(50)):
            c = chain_rule_check(ginibre_random_density([2] * 4, 1 + k % 16, s), ([0], [1], [2], [3]))
            assert c.residue <= 1e-9

    def test_ghz4(self):
        lhs, rhs, residue = chain_rule_check(ghz(4), ([0], [1], [2], [3]))
        assert residue <= 1e-9

    def test_product(self):
        c = chain_rule_check(basis_state([2] * 4, [0, 1, 0, 1]), ([0], [1], [2], [3]))
        assert c.lhs == pytest.approx(0, abs=1e-12) and c.rhs == pytest.approx(0, abs=1e-12)

    def test_grouped_parts(self):
        rho = ginibre_random_density([2, 2, 2, 2, 2], 4, 9)
        c = chain_rule_check(rho, ([0], [1, 2], [3], [4]))
        assert c.residue <= 1e-9


class TestExtensionCandidate:
    def test_wrong_marginal(self):
        ext = tensor_product(bell("phi+").projector(), ginibre_random_density([2], 2, 1))
        with pytest.raises(StateError, match="marginal"):
            ExtensionCandidate(ext, CLASSICAL)

    def test_valid(self):
        ext = tensor_product(CLASSICAL, ginibre_random_density([2], 2, 1))
        assert ExtensionCandidate(ext, CLASSICAL).d_e == 2


class TestUpperBound:
    @pytest.mark.parametrize("label", ["psi+", "phi-"])
    def test_bell(self, label):
        b = squashed_upper_bound(bell(label).projector())
        assert b.value == pytest.approx(1.0, abs=1e-6) and b.direction == "exact"

    @settings(max_examples=20, deadline=None)
    @given(seeds)
    def test_pure_equals_entropy(self, seed):
        psi = haar_random_pure([2, 3], seed)
        b = squashed_upper_bound(psi.projector(), 2, QUICK)
        assert abs(b.value - von_neumann(partial_trace(psi, [0]))) <= 1e-6

    def test_classical_flag(self):
        b = squashed_upper_bound(CLASSICAL, 2, RoofConfig(restarts=1, max_iterations=100))
        assert b.value <= 1e-3 and b.direction == "upper"

    def test_product_with_trivial_extension(self):
        rho = tensor_product(ginibre_random_density([2], 2, 1), ginibre_random_density([3], 3, 2))
        assert squashed_upper_bound(rho, 1).value <= 1e-6

    def test_extension_witness(self):
        rho = ginibre_random_density([2, 2], 3, 5)
        b = squashed_upper_bound(rho, 3, QUICK)
        assert b.extension is not None and b.extension.d_e == 3
        assert 0.5 * b.extension.cmi() == pytest.approx(b.value, abs=1e-9)

    def test_below_eof(self):
        for k, s in enumerate(np.random.SeedSequence(10).spawn(12)):
            rho = ginibre_random_density([2, 2], 2 + k % 3, s)
            assert squashed_upper_bound(rho, 4, QUICK).value <= eof_two_qubit(rho) + 1e-3

    def test_monotone_in_environment(self):
        rho = ginibre_random_density([2, 2], 3, 14)
        vals = [squashed_upper_bound(rho, d, QUICK).value for d in range(1, 5)]
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))

    def test_errors(self):
        with pytest.raises(StateError):
            squashed_upper_bound(ghz(3))
        with pytest.raises(StateError):
            squashed_upper_bound(CLASSICAL, 0)


class TestDiagnostics:
    def test_ghz_monogamy(self):
        d = squashed_monogamy_diag(ghz(3), 2, QUICK)
        assert d.lhs.value == pytest.approx(1.0) and d.lhs.direction == "exact"
        assert d.pair_ab.value <= 1e-3 and d.pair_ac.value <= 1e-3
        assert d.consistent and d.chain.residue <= 1e-9

    def test_singlet_with_ancilla(self):
        d = squashed_monogamy_diag(tensor_product(bell("psi-"), basis_state([2], [0])), 2, QUICK)
        assert d.lhs.value == pytest.approx(1.0) and d.pair_ab.value == pytest.approx(1.0)
        assert d.pair_ac.value <= 1e-6 and d.consistent

    def test_product_three(self):
        d = squashed_monogamy_diag(basis_state([2, 2, 2], [0, 1, 1]), 2, QUICK)
        assert max(d.lhs.value, d.pair_ab.value, d.pair_ac.value) <= 1e-6

    def test_report_json(self):
        d = squashed_monogamy_diag(ghz(3), 2, QUICK).to_dict()
        json.dumps(d)
        assert d["lhs"]["direction"] == "exact" and d["rhs"][0]["direction"] == "upper"

    def test_two_bell_pairs(self):
        # ordering (A1, A2, B1, B2)
        psi = permute(tensor_product(bell("phi+"), bell("phi+")), [0, 2, 1, 3])
        d = superadditivity_diag(psi, QUICK, d_e=2)
        assert d.joint.value == pytest.approx(2.0, abs=1e-9)
        assert d.pair_1.value == pytest.approx(1.0, abs=1e-9) and d.pair_2.value == pytest.approx(1.0, abs=1e-9)
        assert d.subadditive_on_product

    def test_separable_pairs(self):
        big = permute(tensor_product(CLASSICAL, CLASSICAL), [0, 2, 1, 3])
        d = superadditivity_diag(big, RoofConfig(restarts=1, max_iterations=100), d_e=2)
        assert max(d.pair_1.value, d.pair_2.value, d.product.value) <= 1e-3
        assert d.subadditive_on_product

    def test_product_four(self):
        d = superadditivity_diag(basis_state([2] * 4, [0, 1, 0, 1]), QUICK, d_e=2)
        assert d.joint.value == 0 and d.pair_1.value == 0 and d.product.value == 0

    def test_subadditive_on_random_product(self):
        r1, r2 = ginibre_random_density([2, 2], 2, 1), ginibre_random_density([2, 2], 2, 2)
        d = superadditivity_diag(permute(tensor_product(r1, r2), [0, 2, 1, 3]), QUICK, d_e=2)
        assert d.subadditive_on_product

    @pytest.mark.parametrize("fn, state", [(squashed_monogamy_diag, ghz(4)), (superadditivity_diag, ghz(3))])
    def test_wrong_subsystem_count(self, fn, state):
        with pytest.raises(StateError):
            fn(state)
