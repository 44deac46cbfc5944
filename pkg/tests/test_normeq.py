import random

import pytest

from qsynth.exactsynth import _eval_tokens, order_data
from qsynth.normeq import (
    FactoringTimeout,
    factor_integer,
    is_probable_prime,
    primes_above,
    solve_norm_in_coset,
    solve_relative_norm,
    unit_square_root,
)
from qsynth.rings import RingElement, absolute_norm, conjugate, divide_exact, get_gate_set, relative_norm

GATE_SETS = ["V", "CliffordT", "CliffordSqrtT"]


def ok(gs, *coords):
    return RingElement(gs, "OK", coords)


def associated(x: RingElement, y: RingElement) -> bool:
    return divide_exact(x, y) is not None and divide_exact(y, x) is not None


def trial_division(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def test_factor_integer_examples():
    assert factor_integer(3125) == {5: 5}
    assert factor_integer(1) == {}
    assert factor_integer(3121) == {3121: 1}
    big = (2**31 - 1) * (2**61 - 1) * 1000003**2
    assert factor_integer(big) == {2**31 - 1: 1, 2**61 - 1: 1, 1000003: 2}


def test_factor_integer_matches_trial_division():
    rng = random.Random(5)
    for _ in range(300):
        n = rng.randint(1, 10**7)
        assert factor_integer(n) == trial_division(n)


def test_primality_agrees_with_trial_division():
    for n in range(1, 5000):
        assert is_probable_prime(n) == (trial_division(n) == {n: 1})


def test_factoring_budget_raises_timeout():
    with pytest.raises(FactoringTimeout):
        factor_integer((2**61 - 1) * (2**89 - 1) * (2**107 - 1), budget=100)


def test_prime_splitting_in_gaussian_integers():
    five = primes_above(5, "V")
    assert [kind for *_, kind in five.factors] == ["split"]
    eta, gen, _ = five.factors[0]
    assert eta == ok("V", 5)
    assert relative_norm(gen) == ok("V", 5)  # gen is an associate of 2 + i
    three = primes_above(3, "V")
    assert [kind for *_, kind in three.factors] == ["inert"]
    assert three.factors[0][0] == ok("V", 3)


def test_two_ramifies_in_clifford_t():
    two = primes_above(2, "CliffordT")
    (eta, gen, kind), = two.factors
    assert kind == "ramified"
    assert absolute_norm(eta) == 2
    assert associated(relative_norm(gen), eta)
    assert associated(gen, conjugate(gen))
    # sqrt 2 is an associate of the prime below
    assert associated(eta, ok("CliffordT", 0, 1))


@pytest.mark.parametrize("gs", GATE_SETS)
@pytest.mark.parametrize("p", [2, 3, 5, 7, 17, 31, 97, 113, 257])
def test_prime_generators_have_prime_norm_power(gs, p):
    split = primes_above(p, gs)
    g = get_gate_set(gs)
    primes_in_l = 0
    for eta, gen, kind in split.factors:
        n_gen = absolute_norm(relative_norm(gen))
        assert n_gen == p**split.residue_degree
        n_eta = abs(absolute_norm(eta))
        assert n_gen == (n_eta**2 if kind == "inert" else n_eta)
        primes_in_l += 2 if kind == "split" else 1
    assert primes_in_l * split.residue_degree <= 2 * g.d


def test_relative_norm_examples():
    m = solve_relative_norm(ok("V", 4))
    assert m is not None and m.coords in {(2, 0), (-2, 0), (0, 2), (0, -2)}
    assert solve_relative_norm(ok("V", 3)) is None
    m = solve_relative_norm(ok("CliffordT", 2, 1))
    assert m is not None and relative_norm(m) == ok("CliffordT", 2, 1)
    assert associated(m, RingElement("CliffordT", "OL", (1, 1, 0, 0)))


def test_relative_norm_rejects_non_positive():
    assert solve_relative_norm(ok("CliffordT", 0, 1)) is None
    assert solve_relative_norm(ok("CliffordT", -3, 0)) is None


@pytest.mark.parametrize("gs", GATE_SETS)
def test_planted_norm_equations_are_solved(gs):
    rng = random.Random(1)
    g = get_gate_set(gs)
    for _ in range(80):
        x = RingElement(gs, "OL", tuple(rng.randint(-12, 12) for _ in range(2 * g.d)))
        if x.is_zero():
            continue
        r = relative_norm(x)
        m = solve_relative_norm(r)
        assert m is not None and relative_norm(m) == r


def test_v_basis_verdict_matches_brute_force_small():
    squares = {c * c + d * d for c in range(-40, 41) for d in range(-40, 41)}
    for r in range(1, 1601):
        m = solve_relative_norm(ok("V", r))
        assert (m is not None) == (r in squares)
        if m is not None:
            a, b = m.coords
            assert a * a + b * b == r


def test_unit_square_root_examples():
    assert relative_norm(unit_square_root(ok("CliffordT", 1, 0))) == ok("CliffordT", 1, 0)
    u = ok("CliffordT", 3, 2)  # (1 + sqrt 2)^2
    w = unit_square_root(u)
    assert relative_norm(w) == u
    with pytest.raises(ValueError):
        unit_square_root(ok("CliffordT", 1, 1))
    with pytest.raises(ValueError):
        unit_square_root(ok("CliffordT", 2, 1))


def test_unit_square_root_random_sqrt_t_units():
    g = get_gate_set("CliffordSqrtT")
    rng = random.Random(2)
    for _ in range(10):
        u = RingElement.from_power(g, g.one(), "OK")
        for f in g.fundamental_units:
            e = rng.randint(-3, 3)
            base = RingElement.from_power(g, f, "OK")
            for _ in range(abs(e)):
                u = u * base if e > 0 else divide_exact(u, base)
        t = u * u
        w = unit_square_root(t)
        assert relative_norm(w) == t


def test_coset_solver_reduces_to_plain_solver_for_v():
    zhat = RingElement("V", "MO", (39, 40))
    z = solve_norm_in_coset(zhat, ok("V", 4))
    assert z is not None and relative_norm(z) == ok("V", 4)
    assert solve_norm_in_coset(zhat, ok("V", 3)) is None


@pytest.mark.parametrize("gs", ["CliffordT", "CliffordSqrtT"])
def test_coset_solver_recovers_planted_columns(gs):
    data = order_data(gs)
    rng = random.Random(4)
    names = list(data.gates)
    for _ in range(30):
        h = _eval_tokens(data, [rng.choice(names) for _ in range(rng.randint(2, 12))])
        m1, m2 = h
        zhat = RingElement.from_power(gs, m1, "MO")
        r = relative_norm(RingElement.from_power(gs, m2, "OL"))
        z = solve_norm_in_coset(zhat, r)
        assert z is not None
        assert relative_norm(z) == r
        assert data.coords((m1, z.power)) is not None


def test_coset_solver_rejects_non_positive_target():
    zhat = RingElement("CliffordT", "MO", (1, 0, 0, 0))
    assert solve_norm_in_coset(zhat, ok("CliffordT", 0, 1)) is None
