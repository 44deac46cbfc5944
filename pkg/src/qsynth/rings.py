"""Exact arithmetic in the cyclotomic rings used by the three gate sets.

Every ring element is stored as integer coordinates.  Internally all
arithmetic happens in the power basis ``1, z, ..., z^(m-1)`` of
``Z[z]``, where ``z`` is a primitive ``n``-th root of unity and
``z^m = -1`` (``m = n / 2``).  The real subring ``O_K`` and the set
``M_O`` of admissible (scaled) diagonal entries are views over the same
power basis with their own integral bases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

__all__ = [
    "ComplexInterval",
    "GateSetDescriptor",
    "RingElement",
    "TagMismatchError",
    "absolute_norm",
    "arith",
    "conjugate",
    "divide_exact",
    "embed",
    "get_gate_set",
    "is_totally_positive",
    "relative_norm",
]

Coords = tuple  # tuple[int, ...] in the power basis


class TagMismatchError(ValueError):
    """Raised when ring elements of different gate sets or rings are combined."""


# ---------------------------------------------------------------------------
# power-basis primitives (module level for speed; used by the other modules)
# ---------------------------------------------------------------------------


def pmul(a: Coords, b: Coords) -> Coords:
    """Product in ``Z[x]/(x^m + 1)``."""
    m = len(a)
    res = [0] * m
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            if not bj:
                continue
            k = i + j
            if k < m:
                res[k] += ai * bj
            else:
                res[k - m] -= ai * bj
    return tuple(res)


def padd(a: Coords, b: Coords) -> Coords:
    return tuple(x + y for x, y in zip(a, b))


def psub(a: Coords, b: Coords) -> Coords:
    return tuple(x - y for x, y in zip(a, b))


def pneg(a: Coords) -> Coords:
    return tuple(-x for x in a)


def pscale(a: Coords, k: int) -> Coords:
    return tuple(k * x for x in a)


def pconj(a: Coords) -> Coords:
    """Complex conjugation ``z -> z^-1 = -z^(m-1)``."""
    m = len(a)
    return (a[0],) + tuple(-a[m - j] for j in range(1, m))


def pgalois(a: Coords, j: int) -> Coords:
    """Apply the automorphism ``z -> z^j`` (``j`` odd)."""
    m = len(a)
    n = 2 * m
    res = [0] * m
    for i, ai in enumerate(a):
        if not ai:
            continue
        e = (i * j) % n
        if e < m:
            res[e] += ai
        else:
            res[e - m] -= ai
    return tuple(res)


def pzeta(k: int, m: int) -> Coords:
    """The root of unity ``z^k``."""
    k %= 2 * m
    res = [0] * m
    if k < m:
        res[k] = 1
    else:
        res[k - m] = -1
    return tuple(res)


def pone(m: int) -> Coords:
    return (1,) + (0,) * (m - 1)


def pint(v: int, m: int) -> Coords:
    return (v,) + (0,) * (m - 1)


def ppow(a: Coords, e: int) -> Coords:
    result = pone(len(a))
    base = a
    while e:
        if e & 1:
            result = pmul(result, base)
        e >>= 1
        if e:
            base = pmul(base, base)
    return result


def pis_zero(a: Coords) -> bool:
    return not any(a)


def pis_real(a: Coords) -> bool:
    m = len(a)
    return all(a[j] == -a[m - j] for j in range(1, m))


def _units_mod(n: int) -> list[int]:
    return [j for j in range(1, n) if math.gcd(j, n) == 1]


def pnorm_L(a: Coords) -> int:
    """Absolute norm from ``Q(z)`` to ``Q`` (exact integer)."""
    m = len(a)
    prod = a
    for j in _units_mod(2 * m)[1:]:
        prod = pmul(prod, pgalois(a, j))
    assert not any(prod[1:])
    return prod[0]


def pconorm(a: Coords) -> Coords:
    """Product of the non-identity Galois conjugates, so ``a * conorm = N(a)``."""
    m = len(a)
    prod = pone(m)
    for j in _units_mod(2 * m)[1:]:
        prod = pmul(prod, pgalois(a, j))
    return prod


def pdivexact(x: Coords, y: Coords, conorm: Coords | None = None, norm: int | None = None) -> Coords | None:
    """Exact quotient ``x / y`` in ``Z[z]`` or ``None`` when not integral."""
    if conorm is None:
        conorm = pconorm(y)
    if norm is None:
        norm = pmul(y, conorm)[0]
    if norm == 0:
        raise ZeroDivisionError("division by zero ring element")
    t = pmul(x, conorm)
    out = []
    for c in t:
        q, r = divmod(c, norm)
        if r:
            return None
        out.append(q)
    return tuple(out)


# ---------------------------------------------------------------------------
# fixed-point embeddings
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _trig_table(n: int, prec: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``round(2^prec cos(2 pi t / n))`` and the sine analogue for ``t < n``.

    Each entry is within one unit of the true scaled value.
    """
    with mpmath.workprec(prec + 40):
        scale = mpmath.mpf(2) ** prec
        cos_t = []
        sin_t = []
        for t in range(n):
            ang = 2 * mpmath.pi * t / n
            cos_t.append(int(mpmath.nint(mpmath.cos(ang) * scale)))
            sin_t.append(int(mpmath.nint(mpmath.sin(ang) * scale)))
    return tuple(cos_t), tuple(sin_t)


def pembed_fixed(a: Coords, j: int, prec: int) -> tuple[int, int, int]:
    """Fixed-point ``sigma_j(a)`` as ``(re, im, err)`` scaled by ``2^prec``.

    The true scaled real and imaginary parts lie within ``err`` of the
    returned integers.
    """
    m = len(a)
    n = 2 * m
    cos_t, sin_t = _trig_table(n, prec)
    re = 0
    im = 0
    err = 0
    for i, ai in enumerate(a):
        if not ai:
            continue
        t = (i * j) % n
        re += ai * cos_t[t]
        im += ai * sin_t[t]
        err += abs(ai)
    return re, im, err + 1


def pembed_float(a: Coords, j: int) -> complex:
    m = len(a)
    n = 2 * m
    z = complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n))
    acc = 0j
    p = 1 + 0j
    for ai in a:
        acc += ai * p
        p *= z
    return acc


def pembed_mp(a: Coords, j: int) -> mpmath.mpc:
    """``sigma_j(a)`` at the current mpmath precision."""
    m = len(a)
    n = 2 * m
    acc = mpmath.mpc(0)
    for i, ai in enumerate(a):
        if ai:
            acc += ai * mpmath.expjpi(mpmath.mpf(2 * i * j) / n)
    return acc


# ---------------------------------------------------------------------------
# gate-set descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GateSetDescriptor:
    """Number-theoretic data attached to one gate set.

    Power-basis coordinates are with respect to ``Z[z]`` with ``z`` a
    primitive ``n``-th root of unity.  ``embedding_exponents[k]`` is the
    exponent ``j`` such that the ``k``-th embedding sends ``z`` to
    ``exp(2 pi i j / n)``; one representative is kept per complex
    conjugate pair.
    """

    name: str
    n: int
    degree: int
    embedding_exponents: tuple[int, ...]
    ok_basis: tuple[Coords, ...]
    mo_basis: tuple[Coords, ...]
    omega: Coords
    ell: Coords
    xi: Coords
    xi_prime: Coords
    chi: Coords
    fundamental_units: tuple[Coords, ...]
    log_base: int
    mo_inverse: tuple[tuple[Fraction, ...], ...] = field(repr=False)
    ok_mul_table: tuple[tuple[tuple[int, ...], ...], ...] = field(repr=False)

    @property
    def m(self) -> int:
        return self.n // 2

    @property
    def d(self) -> int:
        return self.degree

    @property
    def torsion_units(self) -> tuple[Coords, ...]:
        return tuple(pzeta(k, self.m) for k in range(self.n))

    @property
    def galois_exponents(self) -> tuple[int, ...]:
        return tuple(_units_mod(self.n))

    def one(self) -> Coords:
        return pone(self.m)

    def integer(self, v: int) -> Coords:
        return pint(v, self.m)

    def zeta(self, k: int = 1) -> Coords:
        return pzeta(k, self.m)

    # -- basis conversions --------------------------------------------------
    def ok_to_power(self, c: Sequence[int]) -> Coords:
        res = [0] * self.m
        for coeff, b in zip(c, self.ok_basis):
            if coeff:
                for i, bi in enumerate(b):
                    res[i] += coeff * bi
        return tuple(res)

    def power_to_ok(self, a: Coords) -> tuple[int, ...] | None:
        if not pis_real(a):
            return None
        return (a[0],) + tuple(a[j] for j in range(1, self.d))

    def mo_to_power(self, c: Sequence[int]) -> Coords:
        res = [0] * self.m
        for coeff, b in zip(c, self.mo_basis):
            if coeff:
                for i, bi in enumerate(b):
                    res[i] += coeff * bi
        return tuple(res)

    def power_to_mo(self, a: Coords) -> tuple[int, ...] | None:
        out = []
        for row in self.mo_inverse:
            s = sum((r * x for r, x in zip(row, a) if x), Fraction(0))
            if s.denominator != 1:
                return None
            out.append(int(s))
        return tuple(out)

    def in_mo(self, a: Coords) -> bool:
        return self.power_to_mo(a) is not None

    # -- embedding matrices -------------------------------------------------
    def sigma_matrix(self) -> np.ndarray:
        """``2d x 2d`` matrix mapping ``M_O`` coordinates to ``(Re s1, Im s1, ...)``."""
        rows = []
        for j in self.embedding_exponents:
            vals = [pembed_float(b, j) for b in self.mo_basis]
            rows.append([v.real for v in vals])
            rows.append([v.imag for v in vals])
        return np.array(rows)

    def sigma_prime_matrix(self) -> np.ndarray:
        """``d x d`` matrix mapping ``O_K`` coordinates to real embeddings."""
        return np.array(
            [[pembed_float(b, j).real for b in self.ok_basis] for j in self.embedding_exponents]
        )

    def embed_real(self, a: Coords) -> list[float]:
        return [pembed_float(a, j).real for j in self.embedding_exponents]


def _ok_basis(n: int) -> tuple[Coords, ...]:
    m = n // 2
    d = m // 2
    basis = [pone(m)]
    for j in range(1, d):
        basis.append(padd(pzeta(j, m), pzeta(-j, m)))
    return tuple(basis)


def _rational_inverse(cols: Sequence[Coords]) -> tuple[tuple[Fraction, ...], ...]:
    """Inverse of the square matrix whose columns are ``cols``."""
    size = len(cols)
    mat = [[Fraction(cols[c][r]) for c in range(size)] + [Fraction(int(r == k)) for k in range(size)] for r in range(size)]
    for col in range(size):
        piv = next(r for r in range(col, size) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        pv = mat[col][col]
        mat[col] = [x / pv for x in mat[col]]
        for r in range(size):
            if r != col and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return tuple(tuple(row[size:]) for row in mat)


def _cyclotomic_real_units(n: int) -> tuple[Coords, ...]:
    """Real cyclotomic units ``z^((1-a)/2) (1 - z^a) / (1 - z)`` for ``a = 3, 5, ...``.

    For ``n = 8`` this yields ``1 + sqrt2``; for ``n = 16`` the three units
    generate the unit group of the real subfield modulo ``-1``.
    """
    m = n // 2
    units = []
    for a in range(3, m, 2):
        # (1 - z^a) / (1 - z) = 1 + z + ... + z^(a-1)
        geo = tuple(1 if i < a else 0 for i in range(m))
        u = pmul(pzeta((1 - a) // 2, m), geo)
        assert pis_real(u)
        units.append(u)
    return tuple(units)


def _build(name: str) -> GateSetDescriptor:
    if name == "V":
        n, d, exps = 4, 1, (1,)
    elif name == "CliffordT":
        n, d, exps = 8, 2, (1, 5)
    elif name == "CliffordSqrtT":
        n, d, exps = 16, 4, (1, 3, 5, 7)
    else:
        raise ValueError(f"unknown gate set {name!r}")
    m = n // 2
    ok_basis = _ok_basis(n)
    if name == "V":
        omega = pzeta(1, m)  # i
        xi = pone(m)
        ell = pint(5, m)
        units: tuple[Coords, ...] = ()
        log_base = 5
    else:
        omega = pzeta(n // 8, m)  # exp(i pi / 4)
        xi = padd(pzeta(n // 8, m), pzeta(-(n // 8), m))  # sqrt 2
        one_plus = padd(pone(m), pzeta(1 if name == "CliffordT" else 1, m))
        ell = pmul(one_plus, pconj(one_plus))  # 2 + 2 cos(2 pi / n)
        units = _cyclotomic_real_units(n)
        log_base = 2
    mo_basis = tuple(ok_basis) + tuple(pmul(omega, b) for b in ok_basis)
    mo_inverse = _rational_inverse(mo_basis)
    # structure constants of O_K in its integral basis, derived from z^m = -1
    table = []
    for bi in ok_basis:
        row = []
        for bj in ok_basis:
            prod = pmul(bi, bj)
            row.append((prod[0],) + tuple(prod[k] for k in range(1, d)))
        table.append(tuple(row))
    return GateSetDescriptor(
        name=name,
        n=n,
        degree=d,
        embedding_exponents=exps,
        ok_basis=ok_basis,
        mo_basis=mo_basis,
        omega=omega,
        ell=ell,
        xi=xi,
        xi_prime=xi,
        chi=pone(m),
        fundamental_units=units,
        log_base=log_base,
        mo_inverse=mo_inverse,
        ok_mul_table=tuple(table),
    )


_ALIASES = {
    "v": "V",
    "V": "V",
    "clifford-t": "CliffordT",
    "cliffordt": "CliffordT",
    "CliffordT": "CliffordT",
    "clifford+t": "CliffordT",
    "clifford-sqrt-t": "CliffordSqrtT",
    "cliffordsqrtt": "CliffordSqrtT",
    "CliffordSqrtT": "CliffordSqrtT",
}


@lru_cache(maxsize=None)
def _cached(name: str) -> GateSetDescriptor:
    return _build(name)


def get_gate_set(name: str | GateSetDescriptor) -> GateSetDescriptor:
    """Return the shared descriptor for ``V``, ``CliffordT`` or ``CliffordSqrtT``."""
    if isinstance(name, GateSetDescriptor):
        return name
    key = _ALIASES.get(name, _ALIASES.get(str(name).lower()))
    if key is None:
        raise ValueError(f"unknown gate set {name!r}")
    return _cached(key)


# ---------------------------------------------------------------------------
# public ring element type
# ---------------------------------------------------------------------------

_RING_TAGS = ("OK", "MO", "OL")


@dataclass(frozen=True)
class RingElement:
    """Exact element of ``O_K``, ``M_O`` or ``O_L`` for one gate set.

    ``coords`` are integers over the ring's integral basis: length ``d``
    for ``O_K`` and ``2d`` otherwise.
    """

    gate_set: str
    ring: str
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.ring not in _RING_TAGS:
            raise ValueError(f"unknown ring tag {self.ring!r}")
        gs = get_gate_set(self.gate_set)
        object.__setattr__(self, "gate_set", gs.name)
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        expected = gs.d if self.ring == "OK" else 2 * gs.d
        if len(self.coords) != expected:
            raise ValueError(f"{self.ring} element of {gs.name} needs {expected} coordinates")

    # -- constructors -------------------------------------------------------
    @classmethod
    def from_power(cls, gate_set: str | GateSetDescriptor, power: Coords, ring: str = "OL") -> "RingElement":
        gs = get_gate_set(gate_set)
        if ring == "OL":
            coords = tuple(power)
        elif ring == "OK":
            c = gs.power_to_ok(tuple(power))
            if c is None:
                raise TagMismatchError("element is not real, so not in O_K")
            coords = c
        else:
            c = gs.power_to_mo(tuple(power))
            if c is None:
                raise TagMismatchError("element is not in M_O")
            coords = c
        return cls(gs.name, ring, coords)

    @classmethod
    def integer(cls, gate_set: str, v: int, ring: str = "OK") -> "RingElement":
        gs = get_gate_set(gate_set)
        return cls.from_power(gs, gs.integer(v), ring)

    @property
    def descriptor(self) -> GateSetDescriptor:
        return get_gate_set(self.gate_set)

    @property
    def power(self) -> Coords:
        gs = self.descriptor
        if self.ring == "OL":
            return self.coords
        if self.ring == "OK":
            return gs.ok_to_power(self.coords)
        return gs.mo_to_power(self.coords)

    def _wrap(self, power: Coords) -> "RingElement":
        return RingElement.from_power(self.gate_set, power, self.ring)

    def _check(self, other: "RingElement") -> None:
        if not isinstance(other, RingElement):
            raise TagMismatchError("operand is not a RingElement")
        if other.gate_set != self.gate_set or other.ring != self.ring:
            raise TagMismatchError(
                f"cannot combine {self.gate_set}/{self.ring} with {other.gate_set}/{other.ring}"
            )

    def __add__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.gate_set, self.ring, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        return RingElement(self.gate_set, self.ring, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "RingElement":
        return RingElement(self.gate_set, self.ring, tuple(-a for a in self.coords))

    def __mul__(self, other: "RingElement") -> "RingElement":
        self._check(other)
        if self.ring == "OK":
            table = self.descriptor.ok_mul_table
            d = len(self.coords)
            res = [0] * d
            for i, a in enumerate(self.coords):
                if not a:
                    continue
                for j, b in enumerate(other.coords):
                    if b:
                        for k, t in enumerate(table[i][j]):
                            res[k] += a * b * t
            return RingElement(self.gate_set, "OK", tuple(res))
        prod = pmul(self.power, other.power)
        if self.ring == "MO" and not self.descriptor.in_mo(prod):
            # M_O need not be multiplicatively closed; report the product in O_L
            return RingElement.from_power(self.gate_set, prod, "OL")
        return self._wrap(prod)

    def conjugate(self) -> "RingElement":
        return conjugate(self)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_ring(self, ring: str) -> "RingElement":
        return RingElement.from_power(self.gate_set, self.power, ring)

    def __complex__(self) -> complex:
        return pembed_float(self.power, self.descriptor.embedding_exponents[0])

    def __repr__(self) -> str:
        return f"RingElement({self.gate_set}, {self.ring}, {self.coords})"


def arith(x: RingElement, y: RingElement, op: str) -> RingElement:
    """Exact ``add``, ``sub`` or ``mul`` of two elements with matching tags."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown operation {op!r}")


def conjugate(x: RingElement) -> RingElement:
    """Complex conjugate; real elements of ``O_K`` are returned unchanged."""
    if x.ring == "OK":
        return x
    return RingElement.from_power(x.gate_set, pconj(x.power), x.ring)


@dataclass(frozen=True)
class ComplexInterval:
    """Axis-aligned box in the complex plane with honest mpmath endpoints."""

    re_lo: mpmath.mpf
    re_hi: mpmath.mpf
    im_lo: mpmath.mpf
    im_hi: mpmath.mpf

    def contains(self, z: complex | mpmath.mpc) -> bool:
        z = mpmath.mpc(z)
        return self.re_lo <= z.real <= self.re_hi and self.im_lo <= z.imag <= self.im_hi

    @property
    def mid(self) -> complex:
        return complex(float((self.re_lo + self.re_hi) / 2), float((self.im_lo + self.im_hi) / 2))

    @property
    def width(self) -> mpmath.mpf:
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def __mul__(self, other: "ComplexInterval") -> "ComplexInterval":
        iv = mpmath.iv
        a = iv.mpf([self.re_lo, self.re_hi])
        b = iv.mpf([self.im_lo, self.im_hi])
        c = iv.mpf([other.re_lo, other.re_hi])
        d = iv.mpf([other.im_lo, other.im_hi])
        re = a * c - b * d
        im = a * d + b * c
        return ComplexInterval(mpmath.mpf(re.a), mpmath.mpf(re.b), mpmath.mpf(im.a), mpmath.mpf(im.b))


def embed(x: RingElement, k: int, precision: int = 128) -> ComplexInterval:
    """``sigma_k(x)`` (``k`` counted from 1) as a complex interval."""
    gs = x.descriptor
    if not 1 <= k <= gs.d:
        raise ValueError(f"embedding index must lie in 1..{gs.d}")
    j = gs.embedding_exponents[k - 1]
    re, im, err = pembed_fixed(x.power, j, precision)
    with mpmath.workprec(max(precision, 53) + 64 + max(re.bit_length(), im.bit_length())):
        s = mpmath.ldexp(1, -precision)
        return ComplexInterval(
            mpmath.mpf(re - err) * s,
            mpmath.mpf(re + err) * s,
            mpmath.mpf(im - err) * s,
            mpmath.mpf(im + err) * s,
        )


def relative_norm(x: RingElement) -> RingElement:
    """``x x*`` as an element of ``O_K``.

    For ``M_O`` inputs (scaled hat entries) the value is the scaled norm
    ``n_hat = xi xi* n``; divide by ``xi xi* = 2`` to recover ``n``.
    """
    power = pmul(x.power, pconj(x.power))
    return RingElement.from_power(x.gate_set, power, "OK")


def absolute_norm(r: RingElement) -> int:
    """Exact norm from ``K`` to ``Q`` of an element of ``O_K``."""
    gs = r.descriptor
    return pnorm_K(r.power, gs)


def pnorm_K(a: Coords, gs: GateSetDescriptor) -> int:
    prod = a
    for j in gs.embedding_exponents[1:]:
        prod = pmul(prod, pgalois(a, j))
    assert not any(prod[1:]), "element is not real"
    return prod[0]


def psign_embeddings(a: Coords, gs: GateSetDescriptor, start_prec: int = 128) -> list[int]:
    """Exact signs of the real embeddings of a real element."""
    if pis_zero(a):
        return [0] * gs.d
    signs = []
    for j in gs.embedding_exponents:
        prec = start_prec
        while True:
            re, _, err = pembed_fixed(a, j, prec)
            if abs(re) > err:
                signs.append(1 if re > 0 else -1)
                break
            prec *= 2
    return signs


def ptotally_positive(a: Coords, gs: GateSetDescriptor) -> bool:
    if pis_zero(a) or not pis_real(a):
        return False
    return all(s > 0 for s in psign_embeddings(a, gs))


def is_totally_positive(r: RingElement) -> bool:
    """True iff every real embedding of ``r`` is strictly positive."""
    return ptotally_positive(r.power, r.descriptor)


def divide_exact(x: RingElement, y: RingElement) -> RingElement | None:
    """``q`` with ``q y = x`` when it exists in the ring of ``x``, else ``None``."""
    if x.gate_set != y.gate_set:
        raise TagMismatchError("gate sets differ")
    if y.is_zero():
        raise ZeroDivisionError("division by zero ring element")
    q = pdivexact(x.power, y.power)
    if q is None:
        return None
    gs = x.descriptor
    if x.ring == "OK":
        if gs.power_to_ok(q) is None:
            return None
    elif x.ring == "MO" and not gs.in_mo(q):
        return None
    return RingElement.from_power(x.gate_set, q, x.ring)
