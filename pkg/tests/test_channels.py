import math

import mpmath
import numpy as np
import pytest

from oracles import (
    PZ,
    S_GATE,
    covariant_map_diamond,
    haar_su2,
    process_matrix,
    rz,
    su2_from_entries,
    unitary_pair_diamond,
)
from qsynth.channels import (
    MixSpec,
    PauliChannel,
    diamond_diag_diag,
    diamond_diag_general,
    diamond_unitary_unitary,
    fallback_mixture_bound,
    mixing_probability,
    pauli_distance,
    projective_mixture_distance,
    sequence_unitary,
    twirl_expand,
    twirled_mixture_distance,
)
from qsynth.exactsynth import parse_sequence

# sin(0.04) / (sin(0.04) + sin(0.02)), evaluated with 30-digit mpmath
P_FROZEN = 0.666622217777362924909430305074


def test_diag_diag_examples():
    assert diamond_diag_diag(0.3, 0.3) == 0
    assert diamond_diag_diag(math.pi / 2, 0) == pytest.approx(2)
    assert diamond_diag_diag(math.pi / 4, 0) == pytest.approx(1.41421356237309504880, abs=1e-12)
    assert diamond_diag_diag(math.pi / 4, 0) == pytest.approx(unitary_pair_diamond(rz(math.pi / 4), rz(0)), abs=1e-8)


def test_diag_general_examples():
    assert diamond_diag_general(0.7, np.exp(0.7j)) == pytest.approx(0, abs=1e-7)
    assert diamond_diag_general(0.7, 0) == pytest.approx(2)
    u = (39 + 40j) / math.sqrt(3125)
    assert diamond_diag_general(math.pi / 4, u) <= 0.1
    with pytest.raises(ValueError):
        diamond_diag_general(0.0, 1.5)


def test_diag_general_is_exact_in_mpmath_near_zero():
    with mpmath.workprec(300):
        delta = mpmath.mpf("1e-12")
        u = mpmath.expj(mpmath.mpf("0.3") + delta)
        assert abs(diamond_diag_general(mpmath.mpf("0.3"), u) - 2 * mpmath.sin(delta)) < mpmath.mpf("1e-40")


def test_unitary_unitary_examples_and_bound():
    rng = np.random.default_rng(0)
    U = haar_su2(rng)
    assert diamond_unitary_unitary(U, U) == pytest.approx(0, abs=1e-12)
    assert diamond_unitary_unitary(np.eye(2), rz(0.4)) == pytest.approx(2 * math.sin(0.4))
    for _ in range(200):
        U, V = haar_su2(rng), haar_su2(rng)
        d = diamond_unitary_unitary(U, V)
        bound = 2 * min(np.linalg.norm(U - V, 2), np.linalg.norm(U + V, 2))
        assert d <= bound + 1e-12
        assert d == pytest.approx(unitary_pair_diamond(U, V), abs=1e-7)
    with pytest.raises(ValueError):
        diamond_unitary_unitary(np.eye(2), 2 * np.eye(2))


def test_pauli_distance_examples():
    a = PauliChannel((0.7, 0.1, 0.1, 0.1))
    assert pauli_distance(a, a) == 0
    assert pauli_distance(PauliChannel((1, 0, 0, 0)), PauliChannel((0, 1, 0, 0))) == 2
    with pytest.raises(ValueError):
        PauliChannel((0.5, 0.6, 0, 0))


def test_mixing_probability_examples():
    assert mixing_probability(MixSpec(0.9, -0.05, 0.9, 0.05)) == pytest.approx(0.5)
    assert mixing_probability(MixSpec(1.0, 0.0, 1.0, 0.02)) == 1
    assert mixing_probability(MixSpec(1, -0.01, 1, 0.02)) == pytest.approx(P_FROZEN, abs=1e-14)
    p, degenerate = mixing_probability(MixSpec(1, 0.0, 1, 0.0), with_flag=True)
    assert (p, degenerate) == (1.0, True)
    with pytest.raises(ValueError):
        MixSpec(1, 0.1, 1, 0.1)
    with pytest.raises(ValueError):
        mixing_probability(MixSpec(1, -0.1, 1, 0.1), kind="other")


def test_twirled_mixture_examples():
    assert twirled_mixture_distance(MixSpec(1, 0, 1, 0)) == 0
    d = 0.03
    assert twirled_mixture_distance(MixSpec(1, -d, 1, d)) == pytest.approx(2 * math.sin(d) ** 2)


def test_fallback_bound_examples():
    assert fallback_mixture_bound(MixSpec(1, 0, 1, 0), (0, 0)) == 0
    spec = MixSpec(0.99, -0.02, 0.99, 0.03, q1=1.0, q2=1.0)
    assert fallback_mixture_bound(spec, (0.5, 0.5)) == pytest.approx(projective_mixture_distance(spec))
    with pytest.raises(ValueError):
        fallback_mixture_bound(spec, (-1, 0))


def _mixture_terms(theta, spec, p, rng):
    terms = []
    for w, (r, d) in ((p, (spec.r1, spec.delta1)), (1 - p, (spec.r2, spec.delta2))):
        U = su2_from_entries(r * np.exp(1j * (theta + d)), math.sqrt(1 - r * r) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
        for s in (np.eye(2), S_GATE, PZ, S_GATE.conj().T):
            terms.append((w / 4, s @ U @ s.conj().T))
    return terms


def test_twirled_mixture_matches_oracle_and_is_pauli():
    rng = np.random.default_rng(1)
    for _ in range(50):
        theta = rng.uniform(0, 2 * np.pi)
        spec = MixSpec(rng.uniform(0.99, 1), -rng.uniform(0, 0.05), rng.uniform(0.99, 1), rng.uniform(0, 0.05))
        p = mixing_probability(spec)
        terms = _mixture_terms(theta, spec, p, rng)
        expect = covariant_map_diamond(terms + [(-1.0, rz(theta))])
        assert twirled_mixture_distance(spec) == pytest.approx(expect, abs=1e-9)
        chi = process_matrix([(c, rz(-theta) @ W) for c, W in terms])
        assert np.abs(chi - np.diag(np.diag(chi))).max() < 1e-12


def test_projective_term_matches_oracle():
    rng = np.random.default_rng(2)
    for _ in range(50):
        theta = rng.uniform(0, 2 * np.pi)
        q1, q2 = rng.uniform(0.9, 1, 2)
        spec = MixSpec(1, -rng.uniform(0, 0.1), 1, rng.uniform(0, 0.1), q1=q1, q2=q2)
        p = mixing_probability(spec, "fallback")
        terms = [
            (p * q1, rz(theta + spec.delta1)),
            ((1 - p) * q2, rz(theta + spec.delta2)),
            (-(p * q1 + (1 - p) * q2), rz(theta)),
        ]
        assert projective_mixture_distance(spec) == pytest.approx(covariant_map_diamond(terms), abs=1e-9)


def test_twirl_expand_conjugates_by_s_powers():
    seq = parse_sequence("H Tz H Tz S Tx", "CliffordT")
    U = sequence_unitary(seq)
    branches = twirl_expand(seq)
    assert sum(w for _, w in branches) == 1
    for (twirled, _), s in zip(branches, (np.eye(2), S_GATE, PZ, S_GATE.conj().T)):
        W = sequence_unitary(twirled)
        expect = s @ U @ s.conj().T
        expect = expect / np.sqrt(np.linalg.det(expect))
        assert min(np.abs(W - expect).max(), np.abs(W + expect).max()) < 1e-9


def test_twirl_of_diagonal_sequence_is_invariant():
    seq = parse_sequence("Tz S Tz", "CliffordT")
    U = sequence_unitary(seq)
    for twirled, _ in twirl_expand(seq):
        W = sequence_unitary(twirled)
        assert min(np.abs(W - U).max(), np.abs(W + U).max()) < 1e-9


def test_twirl_requires_s():
    with pytest.raises(ValueError):
        twirl_expand(parse_sequence("V+z", "V"))
