"""Relative norm equations ``m m* = r`` over the cyclotomic rings.

The solver factors the absolute norm of ``r``, splits each rational
prime in ``O_L`` (via a degree-``f`` factor of the cyclotomic
polynomial mod ``p`` and a Euclidean gcd), and assembles ``m`` from
prime generators and a unit square root.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
import mpmath

from .rings import (
    Coords,
    GateSetDescriptor,
    RingElement,
    get_gate_set,
    pconj,
    pconorm,
    pdivexact,
    pembed_mp,
    pgalois,
    pint,
    pis_real,
    pis_zero,
    pmul,
    pnorm_K,
    pnorm_L,
    pone,
    ptotally_positive,
    psub,
    pzeta,
)

__all__ = [
    "FactoringTimeout",
    "PrimeSplitting",
    "factor_integer",
    "is_probable_prime",
    "primes_above",
    "solve_norm_in_coset",
    "solve_relative_norm",
    "unit_square_root",
]

DEFAULT_RHO_BUDGET = 10**7


class FactoringTimeout(RuntimeError):
    """The factoring work budget ran out; the verdict is indeterminate."""


# ---------------------------------------------------------------------------
# integer factoring
# ---------------------------------------------------------------------------

_SMALL_PRIME_LIMIT = 10**6
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_BOUND = 3317044064679887385961981


@lru_cache(maxsize=1)
def _small_primes() -> tuple[int, ...]:
    sieve = bytearray([1]) * _SMALL_PRIME_LIMIT
    sieve[0] = sieve[1] = 0
    for i in range(2, int(_SMALL_PRIME_LIMIT**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return tuple(i for i, f in enumerate(sieve) if f)


@lru_cache(maxsize=1)
def _primorial() -> int:
    return int(gmpy2.primorial(_SMALL_PRIME_LIMIT))


def _miller_rabin(n: int, a: int) -> bool:
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = int(gmpy2.powmod(a, d, n))
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin: deterministic below 3.3e24, 64 random rounds above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n < _MR_DETERMINISTIC_BOUND:
        return all(_miller_rabin(n, a) for a in _MR_BASES)
    rng = random.Random(n)
    return all(_miller_rabin(n, rng.randrange(2, n - 1)) for _ in range(64))


def _pollard_brent(n: int, budget: int, seed: int) -> tuple[int | None, int]:
    """One nontrivial factor of the composite ``n`` and the iterations used."""
    rng = random.Random(seed)
    used = 0
    nz = gmpy2.mpz(n)
    while used < budget:
        y = gmpy2.mpz(rng.randrange(1, n))
        c = gmpy2.mpz(rng.randrange(1, n))
        block = 128
        g = r = q = gmpy2.mpz(1)
        x = ys = y
        while g == 1 and used < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % nz
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(block, r - k)):
                    y = (y * y + c) % nz
                    q = q * abs(x - y) % nz
                g = gmpy2.gcd(q, nz)
                k += block
            used += r
            r *= 2
        if g == nz:
            while True:
                ys = (ys * ys + c) % nz
                g = gmpy2.gcd(abs(x - ys), nz)
                if g > 1:
                    break
        if 1 < g < nz:
            return int(g), used
    return None, used


def factor_integer(n: int, budget: int = DEFAULT_RHO_BUDGET) -> dict[int, int]:
    """Prime factorization ``{p: exponent}`` of ``n >= 1``.

    Trial division by primes below ``10**6`` (through a primorial gcd),
    then Pollard rho with Brent's cycle detection.  Raises
    ``FactoringTimeout`` when more than ``budget`` rho iterations are
    needed.
    """
    if n < 1:
        raise ValueError("factor_integer needs a positive integer")
    out: dict[int, int] = {}
    g = math.gcd(n, _primorial())
    if g > 1:
        for p in _small_primes():
            if g % p == 0:
                while n % p == 0:
                    n //= p
                    out[p] = out.get(p, 0) + 1
                g //= p
                if g == 1:
                    break
    stack = [n] if n > 1 else []
    remaining = budget
    while stack:
        x = stack.pop()
        if is_probable_prime(x):
            out[x] = out.get(x, 0) + 1
            continue
        r = math.isqrt(x)
        if r * r == x:
            stack += [r, r]
            continue
        f, used = _pollard_brent(x, remaining, seed=x & 0xFFFFFFFF)
        remaining -= used
        if f is None:
            raise FactoringTimeout(f"rho budget exhausted on a {x.bit_length()}-bit cofactor")
        stack += [f, x // f]
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# polynomials over F_p (for splitting x^m + 1)
# ---------------------------------------------------------------------------


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    while len(_ptrim(a)) - 1 >= db:
        coef = a[-1] * inv % p
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - coef * bi) % p
        _ptrim(a)
    return a


def _pmulmod(a: list[int], b: list[int], h: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    res = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] += ai * bj
    return _pmod([c % p for c in res], h, p)


def _ppowmod(a: list[int], e: int, h: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, h, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, h, p)
        e >>= 1
        if e:
            base = _pmulmod(base, base, h, p)
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = _ptrim([x % p for x in a])
    b = _ptrim([x % p for x in b])
    while b:
        a, b = b, _pmod(a, b, p)
    inv = pow(a[-1], -1, p)
    return [x * inv % p for x in a]


def _pdiv(a: list[int], b: list[int], p: int) -> list[int]:
    a = list(a)
    inv = pow(b[-1], -1, p)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        coef = a[k + db] * inv % p
        q[k] = coef
        for i, bi in enumerate(b):
            a[k + i] = (a[k + i] - coef * bi) % p
    return q


def _irreducible_factor(m: int, p: int, f: int) -> list[int]:
    """A monic degree-``f`` factor of ``x^m + 1`` over ``F_p`` (odd ``p``)."""
    h = [1] + [0] * (m - 1) + [1]
    if f == m:
        return h
    rng = random.Random(p * 1000003 + m)
    e = (p**f - 1) // 2
    while len(h) - 1 > f:
        a = [rng.randrange(p) for _ in range(len(h) - 1)]
        if not _ptrim(list(a)):
            continue
        t = _ppowmod(a, e, h, p)
        t = t + [0] * (1 - len(t)) if t else [0]
        t[0] = (t[0] - 1) % p
        g = _pgcd(h, t, p)
        dg = len(g) - 1
        if 0 < dg < len(h) - 1:
            other = _pdiv(h, g, p)
            h = g if dg <= len(other) - 1 else [x % p for x in other]
            inv = pow(h[-1], -1, p)
            h = [x * inv % p for x in h]
    return h


# ---------------------------------------------------------------------------
# Euclidean arithmetic in Z[z]
# ---------------------------------------------------------------------------


def _round_div(a: int, b: int) -> int:
    return (2 * a + b) // (2 * b)


def _euclid_step(a: Coords, b: Coords) -> Coords:
    conorm = pconorm(b)
    nb = pmul(b, conorm)[0]
    t = pmul(a, conorm)
    q = tuple(_round_div(c, nb) for c in t)
    r = psub(a, pmul(q, b))
    if abs(pnorm_L(r)) < abs(nb):
        return r
    # rounding to the nearest lattice point was not enough: try neighbours
    frac = [(abs(2 * c - (2 * qq) * nb), i) for i, (c, qq) in enumerate(zip(t, q))]
    frac.sort(reverse=True)
    idx = [i for _, i in frac[:6]]
    best = r
    best_norm = abs(pnorm_L(r))
    for signs in range(1, 3 ** len(idx)):
        qq = list(q)
        s = signs
        for i in idx:
            qq[i] += (s % 3) - 1
            s //= 3
        r2 = psub(a, pmul(tuple(qq), b))
        n2 = abs(pnorm_L(r2))
        if n2 < best_norm:
            best, best_norm = r2, n2
            if n2 < abs(nb):
                return r2
    raise ArithmeticError("Euclidean step failed to reduce the norm")


def ring_gcd(a: Coords, b: Coords) -> Coords:
    """A gcd in the norm-Euclidean ring ``Z[z]``."""
    while not pis_zero(b):
        a, b = b, _euclid_step(a, b)
    return a


def _associated(a: Coords, b: Coords) -> bool:
    """``a`` and ``b`` differ by a unit (both are assumed to have equal norm)."""
    return pdivexact(a, b) is not None


# ---------------------------------------------------------------------------
# prime splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimeSplitting:
    """Primes of ``O_L`` above the rational prime ``p``.

    ``factors`` lists ``(eta, gen, kind)`` per prime of ``O_K`` above
    ``p``: ``gen`` generates one prime of ``O_L`` above it and ``eta``
    generates the ``O_K`` prime (``eta = gen gen*`` up to a unit unless
    the prime is inert, where ``eta`` is a real associate of ``gen``).
    ``kind`` is ``inert``, ``split`` or ``ramified`` (relative to
    ``L/K``).
    """

    p: int
    gate_set: str
    residue_degree: int
    factors: tuple[tuple[RingElement, RingElement, str], ...]

    @property
    def generators(self) -> tuple[Coords, ...]:
        """Generators of all primes of ``O_L`` above ``p`` (conjugates included)."""
        return _prime_generators(self.p, self.gate_set)


def _multiplicative_order(p: int, n: int) -> int:
    f = 1
    x = p % n
    while x != 1:
        x = x * p % n
        f += 1
    return f


@lru_cache(maxsize=4096)
def _prime_generators(p: int, gate_set: str) -> tuple[Coords, ...]:
    gs = get_gate_set(gate_set)
    m, n = gs.m, gs.n
    if p == 2:
        pi = psub(pone(m), pzeta(1, m))
        return (pi,)
    f = _multiplicative_order(p, n)
    t = _irreducible_factor(m, p, f)
    if f == m:
        return (pint(p, m),)
    tz = tuple(t[i] if i < len(t) else 0 for i in range(m))
    if len(t) > m:
        raise AssertionError("factor degree exceeds the ring degree")
    pi = ring_gcd(pint(p, m), tz)
    if abs(pnorm_L(pi)) != p**f:
        raise AssertionError(f"gcd did not produce a prime generator above {p}")
    gens: list[Coords] = [pi]
    for j in gs.galois_exponents:
        g = pgalois(pi, j)
        if not any(_associated(g, h) for h in gens):
            gens.append(g)
    assert len(gens) == m // f
    return tuple(gens)


def _real_associate(x: Coords, gs: GateSetDescriptor) -> Coords | None:
    for k in range(gs.n):
        y = pmul(pzeta(k, gs.m), x)
        if pis_real(y):
            return y
    return None


@lru_cache(maxsize=4096)
def _splitting(p: int, gate_set: str) -> PrimeSplitting:
    gs = get_gate_set(gate_set)
    gens = _prime_generators(p, gate_set)
    seen: list[Coords] = []
    factors = []
    for g in gens:
        if any(_associated(g, s) for s in seen):
            continue
        gc = pconj(g)
        seen += [g, gc]
        if _associated(g, gc):
            kind = "ramified" if p == 2 else "inert"
            if kind == "inert":
                eta = _real_associate(g, gs)
                if eta is None:
                    raise AssertionError(f"no real associate found for the inert prime above {p}")
            else:
                eta = pmul(g, gc)
        else:
            kind = "split"
            eta = pmul(g, gc)
        factors.append(
            (
                RingElement.from_power(gs, eta, "OK"),
                RingElement.from_power(gs, g, "OL"),
                kind,
            )
        )
    f = 1 if p == 2 else _multiplicative_order(p, gs.n)
    return PrimeSplitting(p, gs.name, f, tuple(factors))


def primes_above(p: int, gs: str | GateSetDescriptor) -> PrimeSplitting:
    """Split the rational prime ``p`` in ``O_K`` and ``O_L`` for a gate set."""
    if not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")
    return _splitting(p, get_gate_set(gs).name)


# ---------------------------------------------------------------------------
# units
# ---------------------------------------------------------------------------


def _unit_inverse(u: Coords) -> Coords:
    q = pdivexact(pone(len(u)), u)
    if q is None:
        raise ValueError("element is not a unit")
    return q


def _unit_power(u: Coords, e: int) -> Coords:
    base = u if e >= 0 else _unit_inverse(u)
    out = pone(len(u))
    for _ in range(abs(e)):
        out = pmul(out, base)
    return out


@lru_cache(maxsize=8)
def _unit_log_matrix(gate_set: str) -> list[list[float]]:
    gs = get_gate_set(gate_set)
    rows = []
    for j in gs.embedding_exponents:
        rows.append([math.log(abs(float(pembed_mp(u, j).real))) for u in gs.fundamental_units])
    return rows


def _log_embeddings(a: Coords, gs: GateSetDescriptor) -> list[float]:
    bits = 4 * max(abs(x).bit_length() for x in a) + 80
    with mpmath.workprec(bits):
        return [float(mpmath.log(abs(pembed_mp(a, j).real))) for j in gs.embedding_exponents]


def _real_unit_sqrt(u: Coords, gs: GateSetDescriptor) -> Coords | None:
    """Real unit ``v`` with ``v^2 = u`` or ``None``."""
    one = gs.one()
    if gs.d == 1:
        return one if u == one else None
    import numpy as np

    logs = _log_embeddings(u, gs)
    a = np.array(_unit_log_matrix(gs.name))
    sol, *_ = np.linalg.lstsq(a, np.array(logs) / 2, rcond=None)
    base = [int(round(x)) for x in sol]
    k = len(base)
    for delta in _small_offsets(k):
        e = [b + dd for b, dd in zip(base, delta)]
        v = one
        for unit, ei in zip(gs.fundamental_units, e):
            if ei:
                v = pmul(v, _unit_power(unit, ei))
        if pmul(v, v) == u:
            return v
    return None


def _small_offsets(k: int) -> list[tuple[int, ...]]:
    out = [(0,) * k]
    for i in range(k):
        for s in (1, -1):
            out.append(tuple(s if j == i else 0 for j in range(k)))
    return out


def unit_square_root(u: RingElement, gs: str | GateSetDescriptor | None = None) -> RingElement:
    """Unit ``w`` of ``O_L`` with ``w w* = u`` for a totally positive unit ``u`` of ``O_K``."""
    g = get_gate_set(gs if gs is not None else u.gate_set)
    a = u.power
    if not pis_real(a) or abs(pnorm_K(a, g)) != 1:
        raise ValueError("input is not a unit of O_K")
    if not ptotally_positive(a, g):
        raise ValueError("unit is not totally positive")
    v = _real_unit_sqrt(a, g)
    if v is None:
        raise AssertionError("totally positive unit without a square root")
    return RingElement.from_power(g, v, "OL")


# ---------------------------------------------------------------------------
# norm equations
# ---------------------------------------------------------------------------


def _valuation(x: Coords, pi: Coords) -> tuple[int, Coords]:
    conorm = pconorm(pi)
    norm = pmul(pi, conorm)[0]
    v = 0
    while True:
        q = pdivexact(x, pi, conorm, norm)
        if q is None:
            return v, x
        x = q
        v += 1


def solve_relative_norm_power(r: Coords, gs: GateSetDescriptor, budget: int = DEFAULT_RHO_BUDGET) -> Coords | None:
    """Power-basis core of :func:`solve_relative_norm`."""
    m = gs.m
    if pis_zero(r):
        return (0,) * m
    if not pis_real(r) or not ptotally_positive(r, gs):
        return None
    big_r = pnorm_K(r, gs)
    result = gs.one()
    rest = r
    for p in factor_integer(big_r, budget):
        for pi in _prime_generators(p, gs.name):
            v, rest_new = _valuation(rest, pi)
            if v == 0:
                continue
            pic = pconj(pi)
            if _associated(pi, pic):
                # self-conjugate prime: pi pi* contributes 2 to its valuation
                if v % 2:
                    return None
                half = v // 2
                for _ in range(half):
                    result = pmul(result, pi)
                rest = rest_new
            else:
                # split pair: take pi^v, the conjugate's share comes from m*
                for _ in range(v):
                    result = pmul(result, pi)
                rest = rest_new
                v2, rest = _valuation(rest, pic)
                assert v2 == v
    # rest is now a unit times nothing; recompute it exactly
    mm = pmul(result, pconj(result))
    u = pdivexact(r, mm)
    if u is None or not pis_real(u) or abs(pnorm_K(u, gs)) != 1:
        raise AssertionError("norm-equation assembly left a non-unit cofactor")
    if not ptotally_positive(u, gs):
        return None
    w = _real_unit_sqrt(u, gs)
    if w is None:
        return None
    sol = pmul(w, result)
    assert pmul(sol, pconj(sol)) == r
    return sol


def solve_relative_norm(
    r: RingElement, gs: str | GateSetDescriptor | None = None, budget: int = DEFAULT_RHO_BUDGET
) -> RingElement | None:
    """Solve ``m m* = r`` with ``m`` in ``O_L``.

    Returns ``None`` when no solution exists and raises
    ``FactoringTimeout`` when the factoring budget runs out.
    """
    g = get_gate_set(gs if gs is not None else r.gate_set)
    sol = solve_relative_norm_power(tuple(r.power), g, budget)
    if sol is None:
        return None
    return RingElement.from_power(g, sol, "OL")


def coset_variants(sol: Coords, gs: GateSetDescriptor) -> list[Coords]:
    """Torsion-unit multiples of a norm-equation solution."""
    return [pmul(pzeta(k, gs.m), sol) for k in range(gs.n)]


def solve_norm_in_coset_power(
    m1hat: Coords, r: Coords, gs: GateSetDescriptor, budget: int = DEFAULT_RHO_BUDGET
) -> Coords | None:
    """``m2hat`` with ``m2hat m2hat* = r`` such that ``(m1hat, m2hat)`` lies in the order."""
    from .exactsynth import order_data

    sol = solve_relative_norm_power(r, gs, budget)
    if sol is None:
        return None
    data = order_data(gs.name)
    for cand in coset_variants(sol, gs):
        if data.coords((m1hat, cand)) is not None:
            return cand
    for cand in coset_variants(pconj(sol), gs):
        if data.coords((m1hat, cand)) is not None:
            return cand
    return None


def solve_norm_in_coset(
    zhat: RingElement, r: RingElement, gs: str | GateSetDescriptor | None = None, budget: int = DEFAULT_RHO_BUDGET
) -> RingElement | None:
    """Solve ``|z|^2 = r`` subject to ``(zhat, z)`` being the scaled first column of an order element.

    ``zhat`` is the scaled top-left entry; the solution is searched among
    torsion-unit multiples of one unconstrained solution.
    """
    g = get_gate_set(gs if gs is not None else r.gate_set)
    sol = solve_norm_in_coset_power(tuple(zhat.power), tuple(r.power), g, budget)
    if sol is None:
        return None
    return RingElement.from_power(g, sol, "OL")


def as_ok(values: Sequence[int], gs: str | GateSetDescriptor) -> RingElement:
    """Convenience constructor for an ``O_K`` element from integral-basis coordinates."""
    g = get_gate_set(gs)
    return RingElement(g.name, "OK", tuple(values))
