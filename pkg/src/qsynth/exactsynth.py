"""Exact synthesis: factor quaternion-order elements into gate sequences.

A matrix ``M = [[m1, -m2*], [m2, m1*]]`` of the order is stored through
its scaled entries ``(xi m1, xi m2)`` (the *hat pair*), which are
integral.  Its order coordinates ``(a, b, c, d)`` over ``O_K`` are
obtained by a fixed integer linear map.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .rings import (
    Coords,
    GateSetDescriptor,
    RingElement,
    get_gate_set,
    padd,
    pconj,
    pconorm,
    pdivexact,
    pint,
    pis_zero,
    pmul,
    pneg,
    pone,
    pscale,
    psub,
    pzeta,
    ppow,
    _rational_inverse,
)

__all__ = [
    "ExactSynthesisError",
    "GateSequence",
    "OrderData",
    "QuaternionMatrix",
    "build_lookup_tables",
    "eval_sequence",
    "order_data",
    "parse_sequence",
    "synth",
    "synth_sqrt_t",
    "synth_t",
    "synth_v",
]

Hat = tuple  # (m1_hat, m2_hat) pair of power-basis tuples


class ExactSynthesisError(ValueError):
    """Raised for matrices outside the order or with a determinant that is not a power of l."""


# ---------------------------------------------------------------------------
# hat-pair arithmetic
# ---------------------------------------------------------------------------


def hat_mul(x: Hat, y: Hat, xi_div: tuple[Coords, int] | None) -> Hat:
    """Product of two scaled matrices, rescaled by ``1 / xi``."""
    a1, a2 = x
    b1, b2 = y
    c1 = psub(pmul(a1, b1), pmul(pconj(a2), b2))
    c2 = padd(pmul(a2, b1), pmul(pconj(a1), b2))
    if xi_div is None:
        return c1, c2
    conorm, norm = xi_div
    q1 = pdivexact(c1, None, conorm, norm)  # type: ignore[arg-type]
    q2 = pdivexact(c2, None, conorm, norm)  # type: ignore[arg-type]
    if q1 is None or q2 is None:
        raise ExactSynthesisError("product left the order")
    return q1, q2


def hat_adjoint(x: Hat) -> Hat:
    return pconj(x[0]), pneg(x[1])


def hat_neg(x: Hat) -> Hat:
    return pneg(x[0]), pneg(x[1])


# ---------------------------------------------------------------------------
# per gate set data
# ---------------------------------------------------------------------------

GATE_COSTS = {
    # name prefix -> (power, gate count, T-count)
    "V": (1, 1, 0),
    "T": (1, 1, 1),
    "sT": (3, 1, 4),
    "s3T": (3, 1, 4),
}

CLIFFORD_LETTERS = ("H", "S", "X", "Z")


@dataclass
class OrderData:
    """Order basis, gate hats and lookup machinery for one gate set."""

    gs: GateSetDescriptor
    phi_cols: list[Coords]
    phi_adj: list[list[int]]
    phi_den: int
    xi_div: tuple[Coords, int] | None
    xi_sq: int
    gates: dict[str, Hat]
    gate_power: dict[str, int]
    gate_cost: dict[str, tuple[int, int, int]]
    cliffords: dict[str, Hat]
    clifford_words: dict[tuple, str]
    ideal_hnf: dict[int, list[list[int]]] = field(default_factory=dict)
    _tables: dict = field(default_factory=dict)

    # -- coordinates --------------------------------------------------------
    def coords(self, h: Hat) -> tuple[int, ...] | None:
        v = h[0] + h[1]
        out = []
        for row in self.phi_adj:
            s = 0
            for r, x in zip(row, v):
                if x:
                    s += r * x
            q, rem = divmod(s, self.phi_den)
            if rem:
                return None
            out.append(q)
        return tuple(out)

    def from_coords(self, c: Sequence[int]) -> Hat:
        m = self.gs.m
        res = [0] * (2 * m)
        for coeff, col in zip(c, self.phi_cols):
            if coeff:
                for i, x in enumerate(col):
                    if x:
                        res[i] += coeff * x
        return tuple(res[:m]), tuple(res[m:])

    def det(self, h: Hat) -> Coords:
        """``det M`` as a power-basis tuple."""
        s = padd(pmul(h[0], pconj(h[0])), pmul(h[1], pconj(h[1])))
        q = pdivexact(s, pint(self.xi_sq, self.gs.m))
        assert q is not None
        return q

    def det_power(self, h: Hat) -> int | None:
        """``N`` with ``det M = l^N``, or ``None``."""
        det = self.det(h)
        ell = self.gs.ell
        n = 0
        one = self.gs.one()
        while det != one:
            q = pdivexact(det, ell)
            if q is None:
                return None
            det = q
            n += 1
            if n > 100000:
                return None
        return n

    def mul(self, x: Hat, y: Hat) -> Hat:
        return hat_mul(x, y, self.xi_div)

    # -- ideal l^k O_K ------------------------------------------------------
    def hnf(self, k: int) -> list[list[int]]:
        if k not in self.ideal_hnf:
            gs = self.gs
            lk = ppow(gs.ell, k)
            rows = [list(gs.power_to_ok(pmul(lk, b))) for b in gs.ok_basis]
            self.ideal_hnf[k] = _hnf(rows)
        return self.ideal_hnf[k]

    def reduce_ok(self, c: Sequence[int], k: int) -> tuple[int, ...]:
        h = self.hnf(k)
        x = list(c)
        for i, row in enumerate(h):
            q = x[i] // row[i]
            if q:
                for j in range(i, len(x)):
                    x[j] -= q * row[j]
        return tuple(x)

    def residue_key(self, coords: Sequence[int], k: int) -> tuple[int, ...]:
        d = self.gs.d
        key: tuple[int, ...] = ()
        for part in range(4):
            key += self.reduce_ok(coords[part * d : (part + 1) * d], k)
        return key

    def divisible(self, coords: Sequence[int], k: int) -> bool:
        return not any(self.residue_key(coords, k))


def _hnf(rows: list[list[int]]) -> list[list[int]]:
    """Upper-triangular Hermite normal form of a full-rank integer row basis."""
    a = [list(r) for r in rows]
    n = len(a[0])
    out = []
    for col in range(n):
        # gcd-combine rows on column ``col``
        pivot_rows = [r for r in a if r[col] != 0]
        rest = [r for r in a if r[col] == 0]
        while len(pivot_rows) > 1:
            pivot_rows.sort(key=lambda r: abs(r[col]))
            p = pivot_rows[0]
            new = [p]
            for r in pivot_rows[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                if r2[col] != 0:
                    new.append(r2)
                else:
                    rest.append(r2)
            pivot_rows = new
        p = pivot_rows[0]
        if p[col] < 0:
            p = [-x for x in p]
        out.append(p)
        a = [r for r in rest if any(r)]
    # reduce entries above the diagonal
    for i in range(n):
        for j in range(i):
            q = out[j][i] // out[i][i]
            if q:
                out[j] = [x - q * y for x, y in zip(out[j], out[i])]
    return out


def _half(a: Coords) -> Coords:
    if any(x % 2 for x in a):
        raise AssertionError("expected an element divisible by 2")
    return tuple(x // 2 for x in a)


def _axis_hats(w: Coords, xi: Coords, i_unit: Coords) -> dict[str, Hat]:
    """Hat pairs of the X, Y and Z rotations whose Z version has top-left ``w``."""
    m = len(w)
    zero = (0,) * m
    s = padd(w, pconj(w))
    t = psub(w, pconj(w))
    re = _half(pmul(xi, s))
    return {
        "x": (re, _half(pmul(xi, t))),
        "y": (re, _half(pmul(xi, pmul(i_unit, t)))),
        "z": (pmul(xi, w), zero),
    }


@lru_cache(maxsize=None)
def order_data(gate_set: str | GateSetDescriptor) -> OrderData:
    gs = get_gate_set(gate_set)
    m = gs.m
    zero = (0,) * m
    i_unit = pzeta(gs.n // 4, m)
    xi = gs.xi
    cols: list[Coords] = []
    if gs.name == "V":
        # M = a I + b iX + c iY + d iZ ; m1 = a + i d, m2 = i b - c
        for part in range(4):
            for k in gs.ok_basis:
                if part == 0:
                    h = (k, zero)
                elif part == 1:
                    h = (zero, pmul(i_unit, k))
                elif part == 2:
                    h = (zero, pneg(k))
                else:
                    h = (pmul(i_unit, k), zero)
                cols.append(h[0] + h[1])
        xi_div = None
        xi_sq = 1
    else:
        z8 = gs.omega
        z83 = pmul(z8, pmul(z8, z8))
        for part in range(4):
            for k in gs.ok_basis:
                if part == 0:
                    h = (pmul(xi, k), zero)
                elif part == 1:
                    h = (k, pmul(i_unit, k))
                elif part == 2:
                    h = (k, pneg(k))
                else:
                    h = (pmul(z8, k), pmul(z83, k))
                cols.append(h[0] + h[1])
        # x / xi = x * xi / 2
        xi_div = (xi, 2)
        xi_sq = 2
    inv = _rational_inverse(cols)
    den = 1
    for row in inv:
        for f in row:
            den = den * f.denominator // _gcd(den, f.denominator)
    adj = [[int(f * den) for f in row] for row in inv]

    gates: dict[str, Hat] = {}
    power: dict[str, int] = {}
    cost: dict[str, tuple[int, int, int]] = {}
    if gs.name == "V":
        for sign, sname in ((1, "+"), (-1, "-")):
            two = pint(2 * sign, m)
            gates[f"V{sname}z"] = (padd(pone(m), pmul(i_unit, two)), zero)
            gates[f"V{sname}x"] = (pone(m), pmul(i_unit, two))
            gates[f"V{sname}y"] = (pone(m), pneg(two))
        for g in gates:
            power[g] = 1
            cost[g] = GATE_COSTS["V"]
    elif gs.name == "CliffordT":
        w = padd(pone(m), pzeta(-1, m))
        for ax, h in _axis_hats(w, xi, i_unit).items():
            gates[f"T{ax}"] = h
            power[f"T{ax}"] = 1
            cost[f"T{ax}"] = GATE_COSTS["T"]
    else:
        theta = padd(pzeta(1, m), pzeta(-1, m))
        sqrt2 = xi
        k3 = padd(pzeta(3, m), pzeta(-3, m))
        ell = gs.ell
        u1 = psub(psub(pone(m), k3), sqrt2)  # 1 - 2cos(3pi/8) - sqrt2
        u2 = psub(padd(pone(m), theta), k3)  # 1 + 2cos(pi/8) - 2cos(3pi/8)
        specs = {
            "sT": (pmul(ell, padd(pone(m), pzeta(-1, m))), 3, GATE_COSTS["sT"]),
            "T": (pmul(u2, padd(pone(m), pzeta(-2, m))), 2, (2, 1, 1)),
            "s3T": (pmul(pmul(u1, ell), padd(pone(m), pzeta(-3, m))), 3, GATE_COSTS["s3T"]),
        }
        for prefix, (w, pw, cst) in specs.items():
            for ax, h in _axis_hats(w, xi, i_unit).items():
                gates[f"{prefix}{ax}"] = h
                power[f"{prefix}{ax}"] = pw
                cost[f"{prefix}{ax}"] = cst

    data = OrderData(
        gs=gs,
        phi_cols=cols,
        phi_adj=adj,
        phi_den=den,
        xi_div=xi_div,
        xi_sq=xi_sq,
        gates=gates,
        gate_power=power,
        gate_cost=cost,
        cliffords={},
        clifford_words={},
    )
    for g, h in gates.items():
        if data.coords(h) is None:
            raise AssertionError(f"gate {g} is not in the order")
        if data.det(h) != ppow(gs.ell, power[g]):
            raise AssertionError(f"gate {g} has unexpected determinant")
    _build_cliffords(data, i_unit)
    return data


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _build_cliffords(data: OrderData, i_unit: Coords) -> None:
    """Canonical shortest words for the determinant-one elements, modulo sign."""
    gs = data.gs
    m = gs.m
    zero = (0,) * m
    xi = gs.xi
    if gs.name == "V":
        letters = {"X": (zero, i_unit), "Z": (i_unit, zero)}
    else:
        letters = {
            "H": (i_unit, i_unit),
            "S": (psub(pone(m), i_unit), zero),
            "X": (zero, pmul(xi, i_unit)),
            "Z": (pmul(xi, i_unit), zero),
        }
    data.cliffords = dict(letters)
    identity = (xi if gs.name != "V" else pone(m), zero)
    words: dict[tuple, str] = {}

    def key(h: Hat) -> tuple:
        # canonical representative modulo sign
        flat = h[0] + h[1]
        for x in flat:
            if x:
                return flat if x > 0 else tuple(-y for y in flat)
        return flat

    words[key(identity)] = ""
    frontier = [("", identity)]
    while frontier:
        nxt = []
        for word, h in frontier:
            for letter in sorted(letters):
                h2 = data.mul(h, letters[letter])
                k = key(h2)
                if k not in words:
                    w2 = word + letter
                    words[k] = w2
                    nxt.append((w2, h2))
        frontier = sorted(nxt)
    expected = 4 if gs.name == "V" else 24
    assert len(words) == expected, len(words)
    data.clifford_words = words
    data._clifford_key = key  # type: ignore[attr-defined]


def _word_hat(data: OrderData, word: str) -> Hat:
    gs = data.gs
    h: Hat = ((gs.xi if gs.name != "V" else pone(gs.m)), (0,) * gs.m)
    for letter in word:
        h = data.mul(h, data.cliffords[letter])
    return h


# ---------------------------------------------------------------------------
# public types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuaternionMatrix:
    """Order element ``a w1 + b w2 + c w3 + d w4`` with ``a..d`` in ``O_K``.

    For the V basis the order basis is ``I, iX, iY, iZ``.  Construction
    checks that the determinant is a power of ``l``; common factors of
    ``l`` are divided out unless ``normalize=False``.
    """

    gate_set: str
    a: RingElement
    b: RingElement
    c: RingElement
    d: RingElement

    @classmethod
    def from_coords(cls, gate_set: str, coords: Sequence[int], normalize: bool = True) -> "QuaternionMatrix":
        data = order_data(gate_set)
        h = data.from_coords(coords)
        return cls.from_hat(gate_set, h, normalize=normalize)

    @classmethod
    def from_hat(cls, gate_set: str | GateSetDescriptor, h: Hat, normalize: bool = True) -> "QuaternionMatrix":
        data = order_data(gate_set)
        gs = data.gs
        c = data.coords(h)
        if c is None:
            raise ExactSynthesisError("matrix is not in the order")
        if all(x == 0 for x in c):
            raise ExactSynthesisError("zero matrix")
        if data.det_power(h) is None:
            raise ExactSynthesisError("determinant is not a power of l")
        if normalize:
            h, c = _remove_content(data, h, c)
        d = gs.d
        parts = [RingElement(gs.name, "OK", c[k * d : (k + 1) * d]) for k in range(4)]
        return cls(gs.name, *parts)

    @property
    def coords(self) -> tuple[int, ...]:
        return self.a.coords + self.b.coords + self.c.coords + self.d.coords

    @property
    def hat(self) -> Hat:
        return order_data(self.gate_set).from_coords(self.coords)

    @property
    def det_power(self) -> int:
        n = order_data(self.gate_set).det_power(self.hat)
        assert n is not None
        return n

    def determinant(self) -> RingElement:
        data = order_data(self.gate_set)
        return RingElement.from_power(self.gate_set, data.det(self.hat), "OK")

    def __neg__(self) -> "QuaternionMatrix":
        return QuaternionMatrix(self.gate_set, -self.a, -self.b, -self.c, -self.d)

    def __matmul__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        data = order_data(self.gate_set)
        return QuaternionMatrix.from_hat(self.gate_set, data.mul(self.hat, other.hat))

    def adjoint(self) -> "QuaternionMatrix":
        return QuaternionMatrix.from_hat(self.gate_set, hat_adjoint(self.hat))

    def equal_up_to_sign(self, other: "QuaternionMatrix") -> bool:
        return self == other or self == -other

    def unitary(self):
        """Numerical unitary ``sigma_1(M) / sqrt(sigma_1(det M))`` as a numpy array."""
        import numpy as np

        from .rings import pembed_float

        gs = get_gate_set(self.gate_set)
        h = self.hat
        j = gs.embedding_exponents[0]
        xi = pembed_float(gs.xi, j).real if gs.name != "V" else 1.0
        m1 = pembed_float(h[0], j) / xi
        m2 = pembed_float(h[1], j) / xi
        scale = abs(m1) ** 2 + abs(m2) ** 2
        s = scale**0.5
        return np.array([[m1, -m2.conjugate()], [m2, m1.conjugate()]]) / s


def _remove_content(data: OrderData, h: Hat, c: tuple[int, ...]) -> tuple[Hat, tuple[int, ...]]:
    gs = data.gs
    while data.divisible(c, 1) and any(c):
        q0 = pdivexact(h[0], gs.ell)
        q1 = pdivexact(h[1], gs.ell)
        assert q0 is not None and q1 is not None
        h = (q0, q1)
        c2 = data.coords(h)
        assert c2 is not None
        c = c2
    return h, c


@dataclass(frozen=True)
class GateSequence:
    """Gates in matrix-product order followed by a Clifford (or Pauli) tail word.

    ``sign`` is the global factor ``+-1`` relating the product of the
    scaled gate matrices to the synthesized order element.
    """

    gate_set: str
    gates: tuple[str, ...]
    tail: str = ""
    sign: int = 1

    @property
    def power(self) -> int:
        data = order_data(self.gate_set)
        return sum(data.gate_cost[g][0] for g in self.gates)

    @property
    def det_power(self) -> int:
        data = order_data(self.gate_set)
        return sum(data.gate_power[g] for g in self.gates)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    @property
    def t_count(self) -> int:
        data = order_data(self.gate_set)
        return sum(data.gate_cost[g][2] for g in self.gates)

    @property
    def cost(self) -> dict[str, int]:
        return {"power": self.power, "gate_count": self.gate_count, "t_count": self.t_count}

    def metric(self, name: str) -> int:
        key = {"power": "power", "gate-count": "gate_count", "gate_count": "gate_count", "t-count": "t_count", "t_count": "t_count"}[name]
        return self.cost[key]

    def tokens(self) -> list[str]:
        return list(self.gates) + list(self.tail)

    def __str__(self) -> str:
        return " ".join(self.tokens())

    def __len__(self) -> int:
        return len(self.gates)


def parse_sequence(text: str | Iterable[str], gate_set: str) -> GateSequence:
    """Parse whitespace-separated tokens; Clifford letters may appear anywhere."""
    data = order_data(gate_set)
    tokens = text.split() if isinstance(text, str) else list(text)
    gates: list[str] = []
    tail = ""
    allowed_cliff = set(data.cliffords) | {"Y"}
    for tok in tokens:
        if tok in data.gates:
            if tail:
                # Clifford in the middle: keep exact semantics by re-synthesis below
                gates.append("|" + tail)
                tail = ""
            gates.append(tok)
        elif tok in allowed_cliff:
            tail += tok
        else:
            raise ValueError(f"unknown token {tok!r} for gate set {data.gs.name}")
    if any(g.startswith("|") for g in gates):
        # mixed order: evaluate and re-synthesize to a canonical sequence
        h = _eval_tokens(data, tokens)
        return _synth_hat(data, h)
    return GateSequence(data.gs.name, tuple(gates), tail)


def _letter_hat(data: OrderData, tok: str) -> Hat:
    if tok in data.gates:
        return data.gates[tok]
    if tok == "Y":
        if data.gs.name == "V":
            return ((0,) * data.gs.m, pneg(pone(data.gs.m)))
        return data.mul(data.cliffords["X"], data.cliffords["Z"])
    return data.cliffords[tok]


def _identity_hat(data: OrderData) -> Hat:
    gs = data.gs
    return ((gs.xi if gs.name != "V" else pone(gs.m)), (0,) * gs.m)


def _eval_tokens(data: OrderData, tokens: Iterable[str]) -> Hat:
    h = _identity_hat(data)
    for tok in tokens:
        h = data.mul(h, _letter_hat(data, tok))
    return h


def eval_sequence(seq: GateSequence | str, gate_set: str | None = None, normalize: bool = True) -> QuaternionMatrix:
    """Exact product of the scaled gate matrices, content-normalized."""
    if isinstance(seq, str):
        if gate_set is None:
            raise ValueError("gate_set required when evaluating a token string")
        seq = parse_sequence(seq, gate_set)
    data = order_data(seq.gate_set)
    h = _eval_tokens(data, seq.tokens())
    if seq.sign < 0:
        h = hat_neg(h)
    return QuaternionMatrix.from_hat(seq.gate_set, h, normalize=normalize)


# ---------------------------------------------------------------------------
# lookup tables and synthesis
# ---------------------------------------------------------------------------


def _table_modulus(gs: GateSetDescriptor) -> int:
    return 3 if gs.name == "CliffordSqrtT" else 1


def build_lookup_tables(gate_set: str | GateSetDescriptor) -> dict[tuple[int, ...], tuple[str, ...]]:
    """Map each residue class of ``(a, b, c, d)`` modulo ``l^k`` to its reducing gates.

    A gate ``g`` reduces a class when ``g^dagger M`` is divisible by
    ``det g`` for every ``M`` in the class.  Gates are listed by
    decreasing determinant power, then by name.  Every class whose
    determinant is divisible by ``l^k`` and which is not the zero class
    must have at least one reducing gate.
    """
    data = order_data(gate_set)
    gs = data.gs
    k = _table_modulus(gs)
    if k in data._tables:
        return data._tables[k]
    hnf = data.hnf(k)
    ranges = [range(row[i]) for i, row in enumerate(hnf)]
    ok_reps = list(itertools.product(*ranges))
    order = sorted(data.gates, key=lambda g: (-data.gate_power[g], g))
    table: dict[tuple[int, ...], tuple[str, ...]] = {}
    for rep in itertools.product(ok_reps, repeat=4):
        coords = tuple(x for part in rep for x in part)
        if not any(coords):
            continue
        h = data.from_coords(coords)
        reducing = tuple(g for g in order if _try_remove(data, h, g) is not None)
        det_c = gs.power_to_ok(data.det(h))
        det_zero = not any(data.reduce_ok(det_c, k))
        if det_zero and not reducing:
            raise AssertionError(f"residue class {coords} has no reducing gate")
        table[coords] = reducing
    data._tables[k] = table
    return table


def _synth_hat(data: OrderData, h: Hat) -> GateSequence:
    gs = data.gs
    c = data.coords(h)
    if c is None:
        raise ExactSynthesisError("matrix is not in the order")
    n = data.det_power(h)
    if n is None:
        raise ExactSynthesisError("determinant is not a power of l")
    k_mod = _table_modulus(gs)
    table = build_lookup_tables(gs)
    gates: list[str] = []
    while n > 0:
        if data.divisible(c, 1):
            q0 = pdivexact(h[0], gs.ell)
            q1 = pdivexact(h[1], gs.ell)
            h = (q0, q1)  # type: ignore[assignment]
            n -= 2
            c = data.coords(h)
            continue
        key = data.residue_key(c, k_mod)
        choice = None
        for g in table.get(key, ()):
            if data.gate_power[g] <= n:
                choice = g
                break
        if choice is None:
            # fall back to a direct search over gates (small determinant remainders)
            for g in sorted(data.gates, key=lambda g: (-data.gate_power[g], g)):
                if data.gate_power[g] > n:
                    continue
                if _try_remove(data, h, g) is not None:
                    choice = g
                    break
        if choice is None:
            raise ExactSynthesisError("no reducing gate found; matrix does not factor")
        h2 = _try_remove(data, h, choice)
        assert h2 is not None
        h = h2
        c = data.coords(h)
        n -= data.gate_power[choice]
        gates.append(choice)
    key = data._clifford_key(h)  # type: ignore[attr-defined]
    word = data.clifford_words.get(key)
    if word is None:
        raise ExactSynthesisError("residual is not a Clifford element")
    sign = 1 if _word_hat(data, word) == h else -1
    return GateSequence(gs.name, tuple(gates), word, sign)


@lru_cache(maxsize=None)
def _removal_data(gate_set: str, g: str) -> tuple[Hat, Coords, int]:
    data = order_data(gate_set)
    gs = data.gs
    denom = ppow(gs.ell, data.gate_power[g])
    if data.xi_div is not None:
        denom = pmul(denom, gs.xi)
    conorm = pconorm(denom)
    return hat_adjoint(data.gates[g]), conorm, pmul(denom, conorm)[0]


def _try_remove(data: OrderData, h: Hat, g: str) -> Hat | None:
    gd, conorm, norm = _removal_data(data.gs.name, g)
    prod = hat_mul(gd, h, None)
    q0 = pdivexact(prod[0], None, conorm, norm)  # type: ignore[arg-type]
    if q0 is None:
        return None
    q1 = pdivexact(prod[1], None, conorm, norm)  # type: ignore[arg-type]
    if q0 is None or q1 is None:
        return None
    h2 = (q0, q1)
    if data.coords(h2) is None:
        return None
    return h2


def synth(M: QuaternionMatrix) -> GateSequence:
    """Factor ``M`` into gates followed by a Clifford tail."""
    data = order_data(M.gate_set)
    return _synth_hat(data, M.hat)


def synth_v(M: QuaternionMatrix) -> GateSequence:
    if M.gate_set != "V":
        raise ExactSynthesisError("synth_v needs a V-basis matrix")
    return synth(M)


def synth_t(M: QuaternionMatrix) -> GateSequence:
    if M.gate_set != "CliffordT":
        raise ExactSynthesisError("synth_t needs a Clifford+T matrix")
    return synth(M)


def synth_sqrt_t(M: QuaternionMatrix) -> GateSequence:
    if M.gate_set != "CliffordSqrtT":
        raise ExactSynthesisError("synth_sqrt_t needs a Clifford+sqrt(T) matrix")
    return synth(M)


def synth_hat(gate_set: str | GateSetDescriptor, h: Hat) -> GateSequence:
    """Synthesize directly from a hat pair (no content normalization)."""
    return _synth_hat(order_data(gate_set), h)


def sequence_hat(seq: GateSequence) -> Hat:
    data = order_data(seq.gate_set)
    h = _eval_tokens(data, seq.tokens())
    return hat_neg(h) if seq.sign < 0 else h
