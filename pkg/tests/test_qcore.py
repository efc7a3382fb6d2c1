import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entmono.qcore import (
    Bipartition,
    DensityOperator,
    PureState,
    StateError,
    WitnessOperator,
    as_density,
    ginibre_random_density,
    group,
    haar_random_pure,
    load_state,
    partial_trace,
    permute,
    psd_sqrt,
    purify,
    random_isometry,
    save_state,
    state_from_dict,
    state_to_dict,
    tensor_product,
    witness_expectation,
)
from entmono.states import basis_state, bell, w_state

from conftest import random_psd

S = 1 / math.sqrt(2)


def _dm(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


class TestValidation:
    def test_pure_rejects_unnormalized(self):
        with pytest.raises(StateError, match="normalized"):
            PureState([2], [1, 1])

    def test_pure_rejects_length_mismatch(self):
        with pytest.raises(StateError):
            PureState([2, 2], [1, 0])

    def test_dims_below_two_rejected_by_default(self):
        with pytest.raises(StateError):
            PureState([1, 2], [1, 0])
        PureState([1, 2], [1, 0], min_dim=1)

    @pytest.mark.parametrize(
        "matrix, msg",
        [
            ([[0.5, 0.1], [0.0, 0.5]], "Hermitian"),
            ([[0.6, 0], [0, 0.6]], "trace"),
            ([[1.1, 0], [0, -0.1]], "negative"),
        ],
    )
    def test_density_invariants(self, matrix, msg):
        with pytest.raises(StateError, match=msg):
            DensityOperator([2], matrix)

    def test_small_negative_eigenvalue_tolerated(self):
        rho = DensityOperator([2], [[1 + 5e-10, 0], [0, -5e-10]])
        assert rho.spectrum().min() == 0.0

    def test_immutable(self):
        psi = bell("psi-")
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1


class TestBipartition:
    def test_parse_and_str(self):
        cut = Bipartition.parse("0|1,2")
        assert cut.side_a == {0} and cut.side_b == {1, 2}
        assert str(cut) == "0|1,2"

    @pytest.mark.parametrize("text", ["0,1", "0|0", "|1", "a|b"])
    def test_parse_rejects(self, text):
        with pytest.raises(StateError):
            Bipartition.parse(text)

    def test_validate_for(self):
        Bipartition.parse("0|1,2").validate_for(3)
        with pytest.raises(StateError):
            Bipartition.parse("0|1").validate_for(3)

    def test_focus(self):
        assert Bipartition.focus(1, 3) == Bipartition([1], [0, 2])
        with pytest.raises(StateError):
            Bipartition.focus(3, 3)


class TestTensorProduct:
    def test_basis(self):
        out = tensor_product(basis_state([2], [0]), basis_state([2], [1]))
        assert out.dims == (2, 2)
        np.testing.assert_array_equal(out.amplitudes, [0, 1, 0, 0])

    def test_identity(self):
        half = DensityOperator([2], np.eye(2) / 2)
        out = tensor_product(half, half)
        assert out.dims == (2, 2)
        np.testing.assert_allclose(out.matrix, np.eye(4) / 4)

    def test_singlet_with_ancilla(self):
        out = tensor_product(bell("psi-"), basis_state([2], [0]))
        assert out.dims == (2, 2, 2)
        np.testing.assert_allclose(partial_trace(out, [0, 1]).matrix, bell("psi-").projector().matrix, atol=1e-15)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(StateError):
            tensor_product(bell("psi-"), DensityOperator([2], np.eye(2) / 2))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 3), st.integers(2, 3))
    def test_trace_multiplicative(self, seed, da, db):
        a = ginibre_random_density([da], da, seed)
        b = ginibre_random_density([db], db, seed + 1)
        out = tensor_product(a, b)
        assert abs(np.trace(out.matrix).real - 1.0) < 1e-9


class TestPartialTrace:
    def test_singlet_reduces_to_maximally_mixed(self):
        np.testing.assert_allclose(partial_trace(bell("psi-"), [0]).matrix, np.eye(2) / 2, atol=1e-15)

    def test_w_reduction(self):
        psi_plus = np.array([0, S, S, 0])
        expected = _dm([1, 0, 0, 0]) / 3 + 2 * _dm(psi_plus) / 3
        np.testing.assert_allclose(partial_trace(w_state(3), [0, 1]).matrix, expected, atol=1e-15)

    def test_product_factorizes(self):
        a = ginibre_random_density([2], 2, 1)
        b = ginibre_random_density([3], 2, 2)
        np.testing.assert_allclose(partial_trace(tensor_product(a, b), [0]).matrix, a.matrix, atol=1e-14)
        np.testing.assert_allclose(partial_trace(tensor_product(a, b), [1]).matrix, b.matrix, atol=1e-14)

    def test_kept_order_is_original_order(self):
        psi = basis_state([2, 3, 4], [1, 2, 3])
        red = partial_trace(psi, [2, 0])
        assert red.dims == (2, 4)
        assert red.matrix[7, 7] == pytest.approx(1.0)

    @pytest.mark.parametrize("keep", [[], [3], [-1]])
    def test_bad_keep(self, keep):
        with pytest.raises(StateError):
            partial_trace(w_state(3), keep)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 2))
    def test_trace_preserved(self, seed, k):
        rho = ginibre_random_density([2, 3, 2], 3, seed)
        assert abs(np.trace(partial_trace(rho, [k]).matrix).real - 1.0) < 1e-12

    def test_pure_and_mixed_paths_agree(self, rng):
        psi = haar_random_pure([2, 3, 2], 7)
        for keep in ([0], [1, 2], [0, 2]):
            np.testing.assert_allclose(
                partial_trace(psi, keep).matrix, partial_trace(psi.projector(), keep).matrix, atol=1e-14
            )


class TestPermuteGroup:
    def test_permute_moves_digits(self):
        psi = basis_state([2, 3], [1, 2])
        out = permute(psi, [1, 0])
        assert out.dims == (3, 2)
        assert out.amplitudes[2 * 2 + 1] == 1

    def test_group_merges_sides(self):
        psi = basis_state([2, 2, 2], [1, 0, 1])
        g = group(psi, Bipartition([1], [0, 2]))
        assert g.dims == (2, 4)
        assert g.amplitudes[0 * 4 + 3] == 1


class TestPurify:
    def test_maximally_mixed_qubit(self):
        p = purify(DensityOperator([2], np.eye(2) / 2))
        assert p.dims == (2, 2)
        schmidt = np.linalg.svd(p.amplitudes.reshape(2, 2), compute_uv=False)
        np.testing.assert_allclose(schmidt, [S, S], atol=1e-15)

    def test_pure_input_gets_trivial_environment(self):
        psi = bell("phi+")
        p = purify(psi.projector())
        assert p.dims == (2, 2, 1)
        assert abs(abs(np.vdot(p.amplitudes, psi.amplitudes)) - 1) < 1e-12

    def test_classical_correlations(self):
        rho = DensityOperator([2, 2], np.diag([0.5, 0, 0, 0.5]))
        p = purify(rho)
        assert p.dims == (2, 2, 2)
        np.testing.assert_allclose(partial_trace(p, [0, 1]).matrix, rho.matrix, atol=1e-9)

    @pytest.mark.parametrize("rank", [1, 2, 3, 4])
    def test_round_trip(self, rank):
        for seed in range(25):
            rho = ginibre_random_density([2, 2], rank, seed)
            p = purify(rho)
            assert p.dims == (2, 2, rank)
            np.testing.assert_allclose(partial_trace(p, [0, 1]).matrix, rho.matrix, atol=1e-9)


class TestPsdSqrt:
    def test_scalar(self):
        np.testing.assert_allclose(psd_sqrt(np.eye(4) / 4), np.eye(4) / 2, atol=1e-15)

    def test_projector_idempotent(self):
        p = _dm(np.array([1, 1j]) / math.sqrt(2))
        np.testing.assert_allclose(psd_sqrt(p), p, atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(psd_sqrt(np.diag([0.64, 0.36])), np.diag([0.8, 0.6]), atol=1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(StateError):
            psd_sqrt([[1, 1], [0, 1]])

    def test_random_squares_back(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 9))
            m = random_psd(rng, d, int(rng.integers(1, d + 1)))
            s = psd_sqrt(m)
            np.testing.assert_allclose(s @ s, m, atol=1e-8)
            np.testing.assert_allclose(s, s.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(s).min() > -1e-9


class TestRandomStates:
    def test_haar_norm_and_determinism(self):
        a = haar_random_pure([2, 3], 99)
        b = haar_random_pure([2, 3], 99)
        assert abs(np.linalg.norm(a.amplitudes) - 1) < 1e-12
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert not np.array_equal(a.amplitudes, haar_random_pure([2, 3], 100).amplitudes)

    def test_haar_purity_moment(self):
        # E tr(rho_A^2) = (dA + dB) / (dA dB + 1) = 0.8 for two qubits
        ss = np.random.SeedSequence(2024).spawn(100_000)
        tot = 0.0
        for s in ss:
            t = haar_random_pure([2, 2], s).amplitudes.reshape(2, 2)
            r = t @ t.conj().T
            tot += np.vdot(r, r).real
        assert abs(tot / len(ss) - 0.8) < 0.01

    def test_ginibre_rank_and_determinism(self):
        r1 = ginibre_random_density([2, 2], 1, 5)
        assert r1.rank() == 1 and r1.is_pure()
        full = ginibre_random_density([2, 2], 4, 5)
        assert full.spectrum().min() > 0
        assert np.array_equal(full.matrix, ginibre_random_density([2, 2], 4, 5).matrix)

    @pytest.mark.parametrize("rank", [0, 5])
    def test_ginibre_rank_out_of_range(self, rank):
        with pytest.raises(StateError):
            ginibre_random_density([2, 2], rank, 0)

    def test_isometry_columns_orthonormal(self, rng):
        v = random_isometry(7, 3, rng)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(3), atol=1e-12)


class TestWitness:
    W = 0.5 * np.eye(4) - _dm([0, S, -S, 0])

    def test_detects_singlet(self):
        assert witness_expectation(bell("psi-"), WitnessOperator([2, 2], self.W)) == pytest.approx(-0.5)

    def test_positive_on_product(self):
        assert witness_expectation(basis_state([2, 2], [0, 0]), WitnessOperator([2, 2], self.W)) == pytest.approx(0.5)

    def test_identity(self):
        rho = ginibre_random_density([2, 2], 3, 1)
        assert witness_expectation(rho, WitnessOperator([2, 2], np.eye(4))) == pytest.approx(1.0, abs=1e-12)

    def test_dims_mismatch(self):
        with pytest.raises(StateError):
            witness_expectation(bell("psi-"), WitnessOperator([4], np.eye(4)))

    def test_non_hermitian_witness(self):
        with pytest.raises(StateError):
            WitnessOperator([2], [[0, 1], [0, 0]])


class TestSerialization:
    @pytest.mark.parametrize(
        "state",
        [bell("psi-"), w_state(3), haar_random_pure([3, 2], 4), ginibre_random_density([2, 3], 2, 8)],
        ids=["singlet", "w3", "haar", "ginibre"],
    )
    def test_round_trip_bit_exact(self, state, tmp_path):
        path = tmp_path / "s.json"
        save_state(state, path)
        back = load_state(path)
        assert type(back) is type(state) and back.dims == state.dims
        a = state.amplitudes if isinstance(state, PureState) else state.matrix
        b = back.amplitudes if isinstance(back, PureState) else back.matrix
        assert np.array_equal(a, b)

    def test_format(self):
        d = state_to_dict(bell("phi+"))
        assert d["kind"] == "pure" and d["dims"] == [2, 2]
        assert d["data"][0] == [S, 0.0]
        m = state_to_dict(as_density(bell("phi+")))
        assert m["kind"] == "mixed" and len(m["data"]) == 4 and len(m["data"][0]) == 4

    @pytest.mark.parametrize(
        "obj",
        [{"dims": [2]}, {"dims": [2], "kind": "other", "data": [[1, 0], [0, 0]]},
         {"dims": [2], "kind": "pure", "data": [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]},
         {"dims": [2], "kind": "pure", "data": [[1, 0], [1, 0]]}],
    )
    def test_bad_objects(self, obj):
        with pytest.raises(StateError):
            state_from_dict(obj)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{not json")
        with pytest.raises(StateError):
            load_state(p)
