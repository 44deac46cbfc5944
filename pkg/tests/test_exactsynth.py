import random

import numpy as np
import pytest

from oracles import V_SCALED, su2_from_entries
from qsynth.exactsynth import (
    ExactSynthesisError,
    QuaternionMatrix,
    build_lookup_tables,
    eval_sequence,
    order_data,
    parse_sequence,
    synth,
    synth_sqrt_t,
    synth_t,
    synth_v,
)

GATE_SETS = ["V", "CliffordT", "CliffordSqrtT"]


def random_word(rng, gs, length):
    data = order_data(gs)
    letters = list(data.gates) + list(data.cliffords)
    return " ".join(rng.choice(letters) for _ in range(length))


def test_single_v_gate():
    seq = synth_v(QuaternionMatrix.from_hat("V", ((1, 2), (0, 0))))  # I + 2iZ
    assert seq.gates == ("V+z",) and seq.tail == ""


def test_content_is_removed_before_synthesis():
    # 25 I - 40 iX + 30 iY = 5 (5 I - 8 iX + 6 iY)
    M = QuaternionMatrix.from_hat("V", ((25, 0), (-30, -40)))
    assert (M.a.coords, M.b.coords, M.c.coords, M.d.coords) == ((5,), (-8,), (6,), (0,))
    seq = synth_v(M)
    assert len(seq) == 3 == M.det_power
    # V-y is I - 2iY, the matrix [[1, -2], [2, 1]] up to scale
    assert seq.gates == ("V+z", "V-y", "V-z")
    assert eval_sequence(seq) == M


def test_golden_table_row_without_residual():
    seq = synth_v(QuaternionMatrix.from_hat("V", ((41, 38), (0, 0))))
    assert seq.gates == ("V-z",) * 5
    assert set(seq.tail) <= {"X", "Z"}


def test_clifford_and_single_gate_inputs():
    data = order_data("CliffordT")
    seq = synth_t(QuaternionMatrix.from_hat("CliffordT", data.cliffords["H"]))
    assert seq.gates == () and str(seq) == "H"
    assert synth_t(QuaternionMatrix.from_hat("CliffordT", data.gates["Tz"])).gates == ("Tz",)
    data = order_data("CliffordSqrtT")
    seq = synth_sqrt_t(QuaternionMatrix.from_hat("CliffordSqrtT", data.cliffords["S"]))
    assert seq.gates == ()
    seq = synth_sqrt_t(QuaternionMatrix.from_hat("CliffordSqrtT", data.gates["sTz"]))
    assert seq.gates == ("sTz",) and seq.power == 3


def test_lookup_table_sizes():
    # every nonzero residue class has an entry; the zero class is content
    assert len(build_lookup_tables("V")) == 5**4 - 1
    assert len(build_lookup_tables("CliffordT")) == 2**4 - 1
    assert len(build_lookup_tables("CliffordSqrtT")) == 4096 - 1


def test_eval_identity_and_inverse_pair():
    ident = eval_sequence("", "V")
    assert ident.coords == (1, 0, 0, 0)
    assert eval_sequence("V+z V-z", "V") == ident


def test_v_matrices_match_hand_products():
    rng = random.Random(9)
    for _ in range(100):
        word = [rng.choice(list(V_SCALED)) for _ in range(rng.randint(1, 8))]
        expect = np.eye(2, dtype=complex)
        for g in word:
            expect = expect @ V_SCALED[g]
        tokens = " ".join(g[:2] + g[2].lower() for g in word)
        M = eval_sequence(tokens, "V", normalize=False)
        (a, b), (c, d) = M.hat
        assert np.array_equal(su2_from_entries(complex(a, b), complex(c, d)), expect)


@pytest.mark.parametrize("gs", GATE_SETS)
def test_unitary_matches_product_of_gate_unitaries(gs):
    rng = random.Random(2)
    data = order_data(gs)
    singles = {g: eval_sequence(g, gs).unitary() for g in list(data.gates) + list(data.cliffords)}
    for _ in range(30):
        word = random_word(rng, gs, rng.randint(1, 10)).split()
        expect = np.eye(2)
        for g in word:
            expect = expect @ singles[g]
        got = eval_sequence(" ".join(word), gs).unitary()
        assert min(np.abs(got - expect).max(), np.abs(got + expect).max()) < 1e-9


@pytest.mark.parametrize("gs", GATE_SETS)
def test_round_trip_small(gs):
    rng = random.Random(13)
    for _ in range(60):
        M = eval_sequence(random_word(rng, gs, rng.randint(1, 20)), gs)
        seq = synth(M)
        assert eval_sequence(seq) == M
        assert seq.power == M.det_power
        if gs != "CliffordSqrtT":
            assert len(seq) == M.det_power


def test_sqrt_t_power_is_sum_of_gate_powers():
    rng = random.Random(21)
    data = order_data("CliffordSqrtT")
    for _ in range(30):
        gates = [rng.choice(list(data.gates)) for _ in range(8)]
        seq = parse_sequence(" ".join(gates), "CliffordSqrtT")
        assert seq.power == sum(data.gate_power[g] for g in gates)
        M = eval_sequence(seq)
        out = synth(M)
        assert eval_sequence(out) == M
        assert out.power == M.det_power <= seq.power


def test_costs_of_sqrt_t_gates():
    seq = parse_sequence("sTz Tx s3Ty H", "CliffordSqrtT")
    assert seq.cost == {"power": 8, "gate_count": 3, "t_count": 9}
    assert seq.metric("t-count") == 9


def test_parse_errors_and_invalid_matrices():
    with pytest.raises(ValueError):
        parse_sequence("Tz Q", "CliffordT")
    with pytest.raises(ExactSynthesisError):
        QuaternionMatrix.from_hat("V", ((0, 0), (0, 0)))
    with pytest.raises(ExactSynthesisError):
        QuaternionMatrix.from_hat("V", ((1, 1), (0, 0)))  # determinant 2
