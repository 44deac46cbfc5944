"""Closed-form diamond-norm distances used to certify approximations.

All quantities are for single-qubit channels.  ``e^{i phi Z}`` denotes
``diag(e^{i phi}, e^{-i phi})`` and ``Z_phi`` the channel it induces.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .exactsynth import GateSequence, eval_sequence, order_data, synth_hat, _eval_tokens

__all__ = [
    "CERTIFICATION_SLACK",
    "MixSpec",
    "PauliChannel",
    "diamond_diag_diag",
    "diamond_diag_general",
    "diamond_unitary_unitary",
    "fallback_mixture_bound",
    "mixing_probability",
    "pauli_distance",
    "projective_mixture_distance",
    "sequence_unitary",
    "twirl_expand",
    "twirled_mixture_distance",
]

CERTIFICATION_SLACK = 1e-6
TWIRL_WORDS = ("", "S", "Z", "SSS")  # I, S, Z, S^dagger


def _lib(*xs):
    """``mpmath`` when any argument is an mpmath number, else ``math``.

    Certification near ``eps = 1e-10`` needs the extra precision because
    ``1 - Re(u e^{-i phi})^2`` cancels catastrophically in doubles.
    """
    return mpmath if any(isinstance(x, (mpmath.mpf, mpmath.mpc)) for x in xs) else math


def diamond_diag_diag(phi1: float, phi2: float) -> float:
    """Distance between ``Z_phi1`` and ``Z_phi2``."""
    lib = _lib(phi1, phi2)
    return 2 * abs(lib.sin(phi1 - phi2))


def diamond_diag_general(phi: float, u: complex) -> float:
    """Distance between ``Z_phi`` and the channel of an SU(2) matrix with top-left entry ``u``."""
    if abs(u) > 1 + 1e-12:
        raise ValueError("|u| must not exceed 1")
    if _lib(phi, u) is mpmath:
        re = (mpmath.mpc(u) * mpmath.expj(-mpmath.mpf(phi))).real
        return 2 * mpmath.sqrt(max(mpmath.mpf(0), 1 - re * re))
    re = (complex(u) * cmath.exp(-1j * phi)).real
    return 2 * math.sqrt(max(0.0, 1 - re * re))


def diamond_unitary_unitary(U: np.ndarray, V: np.ndarray) -> float:
    """Diameter of the smallest disc holding the eigenvalues of ``U^dagger V``."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    for M in (U, V):
        if M.shape != (2, 2) or np.abs(M.conj().T @ M - np.eye(2)).max() > 1e-10:
            raise ValueError("inputs must be 2x2 unitaries")
    lam = np.linalg.eigvals(U.conj().T @ V)
    return float(abs(lam[0] - lam[1]))


@dataclass(frozen=True)
class PauliChannel:
    """``rho -> sum_P q_P P rho P`` with ``P`` in ``I, X, Y, Z``."""

    probabilities: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        p = tuple(float(x) for x in self.probabilities)
        if len(p) != 4 or any(x < 0 for x in p) or abs(sum(p) - 1) > 1e-12:
            raise ValueError("Pauli channel probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probabilities", p)


def pauli_distance(e1: PauliChannel, e2: PauliChannel) -> float:
    return float(sum(abs(a - b) for a, b in zip(e1.probabilities, e2.probabilities)))


@dataclass(frozen=True)
class MixSpec:
    """Polar data ``r_k e^{i(theta + delta_k)}`` of an under (k=1) and over (k=2) rotation.

    ``q1, q2`` default to ``r1^2, r2^2``.
    """

    r1: float
    delta1: float
    r2: float
    delta2: float
    p: float | None = None
    q1: float | None = None
    q2: float | None = None

    def __post_init__(self) -> None:
        if math.sin(float(self.delta1)) > 1e-15 or math.sin(float(self.delta2)) < -1e-15:
            raise ValueError("need sin(delta1) <= 0 <= sin(delta2)")
        if self.p is not None and not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")

    @property
    def success1(self) -> float:
        return self.r1**2 if self.q1 is None else self.q1

    @property
    def success2(self) -> float:
        return self.r2**2 if self.q2 is None else self.q2

    def with_p(self, p: float) -> "MixSpec":
        return MixSpec(self.r1, self.delta1, self.r2, self.delta2, p, self.q1, self.q2)


def mixing_probability(spec: MixSpec, kind: str = "unitary", with_flag: bool = False):
    """Weight of the under-rotation that cancels the coherent error.

    When both rotations are exact in angle the mixture is degenerate;
    ``p = 1`` is returned and, with ``with_flag``, the flag is ``True``.
    """
    if kind == "unitary":
        w1, w2 = spec.r1**2, spec.r2**2
    elif kind == "fallback":
        w1, w2 = spec.success1, spec.success2
    else:
        raise ValueError(f"unknown kind {kind!r}")
    lib = _lib(spec.delta1, spec.delta2, w1, w2)
    a = w2 * lib.sin(2 * spec.delta2)
    b = w1 * lib.sin(2 * spec.delta1)
    denom = a - b
    if denom == 0:
        return (1.0, True) if with_flag else 1.0
    p = min(1, max(0, a / denom))
    return (p, False) if with_flag else p


def _p_of(spec: MixSpec, kind: str) -> float:
    return spec.p if spec.p is not None else mixing_probability(spec, kind)


def twirled_mixture_distance(spec: MixSpec) -> float:
    """Distance between ``Z_theta`` and the twirled mixture of the two unitaries."""
    p = _p_of(spec, "unitary")
    lib = _lib(spec.delta1, spec.delta2, spec.r1, spec.r2)
    c1 = spec.r1 * lib.cos(spec.delta1)
    c2 = spec.r2 * lib.cos(spec.delta2)
    return 2 * (1 - p * c1 * c1 - (1 - p) * c2 * c2)


def projective_mixture_distance(spec: MixSpec) -> float:
    """Norm of ``p q1 (Z_{theta+delta1} - Z_theta) + (1-p) q2 (Z_{theta+delta2} - Z_theta)``."""
    p = _p_of(spec, "fallback")
    lib = _lib(spec.delta1, spec.delta2)
    s1 = lib.sin(spec.delta1)
    s2 = lib.sin(spec.delta2)
    return 2 * (p * spec.success1 * s1 * s1 + (1 - p) * spec.success2 * s2 * s2)


def fallback_mixture_bound(spec: MixSpec, fallback_errors: Sequence[float]) -> float:
    """Upper bound on the distance of a mixture of two fallback protocols from ``Z_theta``."""
    b1, b2 = fallback_errors
    if b1 < 0 or b2 < 0:
        raise ValueError("fallback errors must be nonnegative")
    p = _p_of(spec, "fallback")
    return projective_mixture_distance(spec) + p * (1 - spec.success1) * b1 + (1 - p) * (1 - spec.success2) * b2


def twirl_expand(seq: GateSequence) -> list[tuple[GateSequence, float]]:
    """The four conjugates ``sigma seq sigma^dagger`` for ``sigma`` in ``I, S, Z, S^dagger``.

    Each comes with weight ``1/4``.  Requires ``S`` in the gate set's
    Clifford group.
    """
    data = order_data(seq.gate_set)
    if "S" not in data.cliffords:
        raise ValueError(f"gate set {seq.gate_set} has no S gate to twirl with")
    out = []
    inverse = {"": "", "S": "SSS", "Z": "Z", "SSS": "S"}
    for w in TWIRL_WORDS:
        tokens = list(w) + seq.tokens() + list(inverse[w])
        h = _eval_tokens(data, tokens)
        out.append((synth_hat(data.gs, h), 0.25))
    return out


def sequence_unitary(seq: GateSequence) -> np.ndarray:
    """Numerical SU(2) matrix of a sequence (for certification and oracles)."""
    return eval_sequence(seq, normalize=False).unitary()
