import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest

from oracles import scan_convex
from qsynth.enumerate import (
    BoxSpec,
    ConvexBody,
    UnboundedBodyError,
    box_point_by_rounding,
    box_volume_thresholds,
    candidates_1d,
    candidates_2d,
    enumerate_box,
    enumerate_convex,
    lll_reduce,
)
from qsynth.regions import Interval, diagonal_region
from qsynth.rings import get_gate_set, pconj, pmul, ppow

GOLDEN = {(38, 41), (39, 40), (40, 39), (41, 38)}


def test_unit_square():
    body = ConvexBody(2, np.vstack([np.eye(2), -np.eye(2)]), [1, 1, 0, 0])
    assert set(enumerate_convex(body)) == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_thin_parallelogram_without_points():
    # 2x - 201y lies in [0.6, 0.9], so no integer point; lattice width 0.3
    A = np.array([[1, -100.5], [-1, 100.5], [0, 1], [0, -1]])
    body = ConvexBody(2, A, [0.45, -0.3, 50, 50])
    stats: dict = {}
    assert list(enumerate_convex(body, stats)) == []
    assert stats["slices"] <= 2
    assert scan_convex(body) == set()


def test_golden_region_as_convex_body():
    scale = math.sqrt(5**5)
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    A = np.array([[-c, -s]])
    b = np.array([-scale * math.sqrt(1 - 0.1**2 / 4)])
    body = ConvexBody(2, A, b, [(np.eye(2) / 5**5, np.zeros(2))])
    assert set(enumerate_convex(body)) == GOLDEN


def test_unbounded_body_is_rejected():
    with pytest.raises(UnboundedBodyError):
        ConvexBody(2, np.array([[1.0, 0.0]]), [1.0])
    with pytest.raises(UnboundedBodyError):
        ConvexBody(2, quadratics=[(np.diag([1.0, -1.0]), np.zeros(2))])


def test_random_bodies_match_scan():
    rng = np.random.default_rng(8)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        c = rng.normal(size=n) * 5
        M = rng.normal(size=(n, n))
        body = ConvexBody(n, np.vstack([M, np.eye(n), -np.eye(n)]), np.concatenate([M @ c + rng.uniform(0.5, 3, n), c + 8, 8 - c]))
        assert set(enumerate_convex(body)) == scan_convex(body)


def _lll_ok(basis, reduced, transform, delta=Fraction(3, 4)):
    n = len(basis)
    assert [[sum(transform[i][k] * basis[k][j] for k in range(n)) for j in range(len(basis[0]))] for i in range(n)] == reduced
    det = round(np.linalg.det(np.array(transform, dtype=float)))
    assert abs(det) == 1
    # Gram-Schmidt over the rationals
    gs, mu = [], [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in reduced[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(a) * b for a, b in zip(reduced[i], gs[j])) / sum(b * b for b in gs[j])
            v = [a - mu[i][j] * b for a, b in zip(v, gs[j])]
        gs.append(v)
    norms = [sum(x * x for x in v) for v in gs]
    for i in range(n):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2)
    for i in range(1, n):
        assert norms[i] >= (delta - mu[i][i - 1] ** 2) * norms[i - 1]


def test_lll_reduction_properties():
    rng = random.Random(6)
    assert lll_reduce([[1, 0], [0, 1]])[0] == [[1, 0], [0, 1]]
    for _ in range(30):
        n = rng.randint(2, 5)
        while True:
            basis = [[rng.randint(-10**6, 10**6) for _ in range(n)] for _ in range(n)]
            if abs(np.linalg.det(np.array(basis, dtype=float))) > 0.5:
                break
        reduced, transform = lll_reduce(basis)
        _lll_ok(basis, reduced, transform)


def test_enumerate_box_examples():
    pts = [x.coords for x in enumerate_box(BoxSpec("V", ((3.2, 6.9),)))]
    assert sorted(pts) == [(4,), (5,), (6,)]
    got = {x.coords for x in enumerate_box(BoxSpec("CliffordT", ((0.0, 3.0), (0.0, 3.0))))}
    r2 = math.sqrt(2)
    expect = {(a, b) for a in range(-4, 5) for b in range(-4, 5) if 0 <= a + b * r2 <= 3 and 0 <= a - b * r2 <= 3}
    assert got == expect


@pytest.mark.parametrize("gs", ["V", "CliffordT", "CliffordSqrtT"])
def test_box_thresholds(gs):
    v0, v0_prime = box_volume_thresholds(gs)
    assert v0_prime == 1.0 and v0 >= 1.0
    g = get_gate_set(gs)
    rng = np.random.default_rng(4)
    for _ in range(20):
        w = np.exp(rng.normal(size=g.d) * 2)
        big = w / np.prod(w) ** (1 / g.d) * v0 ** (1 / g.d) * 1.0001
        center = rng.normal(size=g.d) * 50
        spec = BoxSpec(gs, tuple((c - x / 2, c + x / 2) for c, x in zip(center, big)))
        point = box_point_by_rounding(spec)
        assert point is not None
        for (lo, hi), v in zip(spec.intervals, g.embed_real(point.power)):
            assert lo - 1e-9 <= v <= hi + 1e-9
        small = w / np.prod(w) ** (1 / g.d) * 0.999
        spec = BoxSpec(gs, tuple((c - x / 2, c + x / 2) for c, x in zip(center, small)))
        assert len(list(enumerate_box(spec))) <= 1


def test_golden_candidates_2d():
    region = diagonal_region(math.pi / 4, 0.1)
    for N in range(1, 5):
        assert candidates_2d("V", region, N) == []
    assert {x.coords for x in candidates_2d("V", region, 5)} == GOLDEN


def test_far_region_has_no_candidates():
    region = diagonal_region(0.3, 1e-6)
    assert candidates_2d("CliffordT", region, 1) == []


def test_candidates_2d_match_brute_force_clifford_t():
    g = get_gate_set("CliffordT")
    sigma = g.sigma_matrix()
    N, theta, eps = 4, 0.3, 0.6
    region = diagonal_region(theta, eps)
    target = g.embed_real(_scaled_norm(g, N))
    rng = range(-12, 13)
    pts = np.array(list(itertools.product(rng, repeat=4)))
    emb = pts @ sigma.T
    u1 = (emb[:, 0] + 1j * emb[:, 1]) / math.sqrt(target[0])
    u2sq = (emb[:, 2] ** 2 + emb[:, 3] ** 2) / target[1]
    keep = (np.abs(u1) <= 1) & (u2sq <= 1) & (np.real(u1 * np.exp(-1j * theta)) >= math.sqrt(1 - eps * eps / 4))
    expect = {tuple(int(v) for v in p) for p in pts[keep]}
    got = {x.coords for x in candidates_2d("CliffordT", region, N)}
    assert got == expect and len(got) > 0


def _scaled_norm(g, N):
    return pmul(pmul(g.xi, pconj(g.xi)), ppow(g.ell, N))


def test_candidates_1d_examples():
    assert [x.coords for x in candidates_1d("V", Interval(0.38, 0.45), 2)] == [(10,), (11,)]
    assert candidates_1d("V", Interval(0.3, 0.3000001), 1) == []
    got = {x.coords for x in candidates_1d("V", Interval(0.0, 1.0), 3)}
    assert got == {(n,) for n in range(0, 126)}


def test_candidates_1d_match_brute_force_clifford_t():
    g = get_gate_set("CliffordT")
    N = 4
    t1, t2 = g.embed_real(_scaled_norm(g, N))
    r2 = math.sqrt(2)
    lo, hi = 0.2, 0.7
    expect = {
        (a, b)
        for a in range(-200, 201)
        for b in range(-200, 201)
        if lo * t1 <= a + b * r2 <= hi * t1 and 0 <= a - b * r2 <= t2
    }
    got = {x.coords for x in candidates_1d("CliffordT", Interval(lo, hi), N)}
    assert got == expect and len(got) > 0
