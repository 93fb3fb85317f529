import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qnetcode.quantum import (
    DimensionCapError,
    QuantumError,
    RegisterError,
    ZeroProbabilityError,
    apply_coding_unitary,
    apply_fourier,
    apply_phase,
    basis_state,
    fidelity,
    fourier_matrix,
    init_state,
    marginal_distribution,
    measure,
)
from qnetcode.rings import identity_matrix, parse_ring_spec, zero_matrix

Z2 = parse_ring_spec("Z(2)")
Z3 = parse_ring_spec("Z(3)")
GF4 = parse_ring_spec("GF(4)")

RING_POOL = ["Z(2)", "Z(3)", "Z(4)", "GF(4)", "GF(8)", "Z(2)xZ(4)", "Z(3)", "Z(2)xZ(2)"]


def random_state(spec_text, q, n_regs, seed):
    spec = parse_ring_spec(spec_text)
    rng = np.random.default_rng(seed)
    d = spec.cardinality**q
    amps = rng.normal(size=d**n_regs) + 1j * rng.normal(size=d**n_regs)
    amps /= np.linalg.norm(amps)
    return init_state(spec, q, n_regs, amps, reg_ids=[f"r{i}" for i in range(n_regs)])


class TestInit:
    def test_basis_state(self):
        state = basis_state(Z2, 1, (1, 0))
        assert state.amplitude((1, 0)) == 1
        assert state.amplitude((0, 0)) == 0
        assert state.reg_ids == ("src:1", "src:2")

    def test_uniform(self):
        state = init_state(Z2, 1, 2, [0.5, 0.5, 0.5, 0.5])
        assert state.norm() == pytest.approx(1.0, abs=1e-12)

    def test_gf4_superposition_norm(self):
        # equal weight on |t> and |t+1>, labels 1 and 3
        amps = [0, 1 / math.sqrt(2), 0, 1 / math.sqrt(2)]
        state = init_state(GF4, 1, 1, amps)
        assert state.norm() == pytest.approx(1.0, abs=1e-12)
        assert GF4.element((0, 1)).to_int() == 1
        assert GF4.element((1, 1)).to_int() == 3
        assert abs(state.amplitude((1,))) == pytest.approx(1 / math.sqrt(2), abs=1e-12)

    def test_normalization_warns(self):
        with pytest.warns(UserWarning, match="normalizing"):
            state = init_state(Z2, 1, 1, [2.0, 0.0])
        assert state.amplitude((0,)) == 1

    def test_rejects_zero_and_wrong_length(self):
        with pytest.raises(QuantumError):
            init_state(Z2, 1, 1, [0.0, 0.0])
        with pytest.raises(QuantumError):
            init_state(Z2, 1, 2, [1.0, 0.0])

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapError):
            init_state(Z2, 1, 5, np.ones(32) / math.sqrt(32), max_entries=16)


class TestCodingUnitary:
    def test_fan_out_copy(self):
        eye = identity_matrix(Z2, 1)
        for y in (0, 1):
            state = basis_state(Z2, 1, (y,), reg_ids=("S1",))
            state = apply_coding_unitary(state, ("S1",), ("R1", "R2"), [[eye], [eye]])
            assert state.reg_ids == ("S1", "R1", "R2")
            assert state.amplitude((y, y, y)) == 1

    def test_xor(self):
        eye = identity_matrix(Z2, 1)
        for y1 in (0, 1):
            for y2 in (0, 1):
                state = basis_state(Z2, 1, (y1, y2), reg_ids=("a", "b"))
                state = apply_coding_unitary(state, ("a", "b"), ("c",), [[eye, eye]])
                assert state.amplitude((y1, y2, (y1 + y2) % 2)) == 1

    def test_zero_coeffs(self):
        z = zero_matrix(Z2, 1)
        state = basis_state(Z2, 1, (1,), reg_ids=("a",))
        state = apply_coding_unitary(state, ("a",), ("b",), [[z]])
        assert state.amplitude((1, 0)) == 1

    def test_amplitude_multiset_preserved(self):
        state = random_state("Z(3)", 1, 2, seed=5)
        eye = identity_matrix(Z3, 1)
        out = apply_coding_unitary(state, ("r0", "r1"), ("r2",), [[eye, eye]])
        before = np.sort(np.abs(state.amps.ravel()))
        after = np.sort(np.abs(out.amps.ravel()))[-before.size :]
        assert np.allclose(before, after, atol=1e-12)
        assert out.norm() == pytest.approx(1.0, abs=1e-9)

    def test_register_collision(self):
        eye = identity_matrix(Z2, 1)
        state = basis_state(Z2, 1, (0,), reg_ids=("a",))
        with pytest.raises(RegisterError):
            apply_coding_unitary(state, ("a",), ("a",), [[eye]])

    def test_growth_cap(self):
        eye = identity_matrix(Z2, 1)
        state = basis_state(Z2, 1, (0,), reg_ids=("a",))
        with pytest.raises(DimensionCapError):
            apply_coding_unitary(state, ("a",), ("b", "c"), [[eye], [eye]], max_entries=4)


class TestFourier:
    def test_z2_is_hadamard(self):
        mat = fourier_matrix(Z2, 1)
        expected = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
        assert np.allclose(mat, expected, atol=1e-12)
        state = apply_fourier(basis_state(Z2, 1, (0,)), "src:1")
        assert np.allclose(state.amps, [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12)

    def test_z3_phases(self):
        w = np.exp(2j * np.pi / 3)
        state = apply_fourier(basis_state(Z3, 1, (1,)), "src:1")
        expected = np.array([1, w, w**2]) / math.sqrt(3)
        assert np.allclose(state.amps, expected, atol=1e-12)

    @pytest.mark.parametrize("text", ["Z(2)", "Z(3)", "Z(4)", "GF(4)", "GF(8)", "Z(2)xZ(4)"])
    def test_unitary(self, text):
        spec = parse_ring_spec(text)
        assert spec.cardinality <= 9 or text == "GF(8)"
        mat = fourier_matrix(spec, 1)
        d = spec.cardinality
        assert np.allclose(mat @ mat.conj().T, np.eye(d), atol=1e-12)

    @given(st.sampled_from(RING_POOL), st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_random_state(self, text, seed):
        state = random_state(text, 1, 2, seed)
        back = apply_fourier(apply_fourier(state, "r0"), "r0", adjoint=True)
        assert np.allclose(back.amps, state.amps, atol=1e-12)

    def test_vector_register_unitary(self):
        mat = fourier_matrix(Z2, 2)
        assert mat.shape == (4, 4)
        assert np.allclose(mat @ mat.conj().T, np.eye(4), atol=1e-12)

    def test_unknown_register(self):
        with pytest.raises(RegisterError):
            apply_fourier(basis_state(Z2, 1, (0,)), "nope")


class TestMeasure:
    def test_uniform_probabilities(self):
        state = init_state(Z2, 1, 1, [1 / math.sqrt(2), 1 / math.sqrt(2)])
        marg = marginal_distribution(state, "src:1")
        assert np.allclose(marg, [0.5, 0.5], atol=1e-12)

    def test_deterministic_on_basis_state(self):
        state = basis_state(Z2, 1, (1, 0))
        outcome, rest = measure(state, "src:1", rng=np.random.default_rng(0))
        assert outcome.label == 1
        assert rest.reg_ids == ("src:2",)
        assert rest.amplitude((0,)) == 1

    @pytest.mark.parametrize("text", ["Z(2)", "Z(3)", "Z(4)", "GF(4)", "Z(2)xZ(4)", "Z(3)xZ(3)"])
    def test_fourier_marginals_uniform(self, text):
        # after the transform every outcome of a basis state is equally likely
        spec = parse_ring_spec(text)
        d = spec.cardinality
        assert d <= 9
        for y in range(d):
            state = apply_fourier(basis_state(spec, 1, (y,)), "src:1")
            marg = marginal_distribution(state, "src:1")
            assert np.allclose(marg, np.full(d, 1.0 / d), atol=1e-12)

    def test_seeded_reproducibility(self):
        state = random_state("Z(4)", 1, 2, seed=11)
        runs = []
        for _ in range(2):
            out, rest = measure(state, "r0", rng=np.random.default_rng(42))
            runs.append((out.label, rest.amps.copy()))
        assert runs[0][0] == runs[1][0]
        assert np.array_equal(runs[0][1], runs[1][1])

    def test_forced(self):
        state = init_state(Z2, 1, 1, [1 / math.sqrt(2), 1 / math.sqrt(2)])
        outcome, rest = measure(state, "src:1", forced=1)
        assert outcome.label == 1
        assert rest.reg_ids == ()
        assert rest.amps.shape == ()
        assert abs(rest.amps) == pytest.approx(1.0, abs=1e-12)

    def test_forced_zero_probability(self):
        state = basis_state(Z2, 1, (0,))
        with pytest.raises(ZeroProbabilityError):
            measure(state, "src:1", forced=1)

    def test_requires_exactly_one_mode(self):
        state = basis_state(Z2, 1, (0,))
        with pytest.raises(QuantumError):
            measure(state, "src:1")

    def test_register_count_bookkeeping(self):
        state = basis_state(Z2, 1, (0, 1), reg_ids=("a", "b"))
        eye = identity_matrix(Z2, 1)
        grown = apply_coding_unitary(state, ("a",), ("c", "d"), [[eye], [eye]])
        assert len(grown.reg_ids) == 4
        _, shrunk = measure(grown, "a", forced=0)
        assert len(shrunk.reg_ids) == 3


class TestPhase:
    def test_zero_phase_is_identity(self):
        state = random_state("Z(3)", 1, 1, seed=3)
        out = apply_phase(state, "r0", lambda v: Fraction(0))
        assert np.array_equal(out.amps, state.amps)

    def test_z_gate(self):
        state = init_state(Z2, 1, 1, [1 / math.sqrt(2), 1 / math.sqrt(2)])
        out = apply_phase(state, "src:1", lambda v: Fraction(v.to_index(), 2), sign=-1)
        assert np.allclose(out.amps, [1 / math.sqrt(2), -1 / math.sqrt(2)], atol=1e-12)

    def test_sign_pair_inverts(self):
        state = random_state("GF(4)", 1, 2, seed=9)
        fn = lambda v: Fraction(v.to_index(), 7)
        out = apply_phase(apply_phase(state, "r1", fn, sign=1), "r1", fn, sign=-1)
        assert np.allclose(out.amps, state.amps, atol=1e-12)


class TestFidelity:
    def test_self(self):
        state = random_state("Z(3)", 1, 2, seed=1)
        assert fidelity(state, state) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        a = basis_state(Z2, 1, (0,))
        b = basis_state(Z2, 1, (1,))
        assert fidelity(a, b) == 0

    def test_half(self):
        plus = init_state(Z2, 1, 1, [1 / math.sqrt(2), 1 / math.sqrt(2)])
        zero = basis_state(Z2, 1, (0,))
        assert fidelity(plus, zero) == pytest.approx(0.5, abs=1e-12)

    def test_positional_matching_ignores_ids(self):
        a = basis_state(Z2, 1, (1,), reg_ids=("src:1",))
        b = basis_state(Z2, 1, (1,), reg_ids=("tgt:1",))
        assert fidelity(a, b) == pytest.approx(1.0, abs=1e-12)

    def test_roster_mismatch(self):
        a = basis_state(Z2, 1, (0,))
        b = basis_state(Z2, 1, (0, 0))
        with pytest.raises(RegisterError):
            fidelity(a, b)


@given(st.sampled_from(RING_POOL), st.integers(0, 2**31 - 1))
@settings(max_examples=20, deadline=None)
def test_norm_preserved_through_pipeline(text, seed):
    spec = parse_ring_spec(text)
    state = random_state(text, 1, 2, seed)
    eye = identity_matrix(spec, 1)
    state = apply_coding_unitary(state, ("r0", "r1"), ("r2",), [[eye, eye]])
    assert state.norm() == pytest.approx(1.0, abs=1e-9)
    state = apply_fourier(state, "r0")
    assert state.norm() == pytest.approx(1.0, abs=1e-9)
    _, state = measure(state, "r0", rng=np.random.default_rng(seed))
    assert state.norm() == pytest.approx(1.0, abs=1e-9)
    state = apply_phase(state, "r1", lambda v: Fraction(v.to_index(), 5))
    assert state.norm() == pytest.approx(1.0, abs=1e-9)
