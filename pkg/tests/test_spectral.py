import csv
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from stacklab import (
    CircleFrequency,
    ParameterError,
    build_tower,
    cardinality_bound_check,
    chacon_gate,
    chacon_spec,
    chain_intersect,
    circle_norm,
    defect_sequence,
    eigenvalue_screen,
    odometer_spec,
    ornstein_spec,
    sample_omega,
)
from stacklab.spectral import passes, strongest_eps, write_survivors_csv

from .oracles import arcs_grid_mask, grid_pass_mask

F = Fraction


@pytest.mark.parametrize("x, expected", [(F(3, 10), F(3, 10)), (F(3, 4), F(1, 4)), (2, 0), (F(-7, 5), F(2, 5))])
def test_circle_norm(x, expected):
    assert circle_norm(x) == expected


def test_circle_norm_refuses_floats():
    with pytest.raises(ParameterError):
        circle_norm(0.3)


def test_circle_frequency_range():
    assert CircleFrequency(F(1, 3)).alpha == F(1, 3)
    with pytest.raises(ParameterError):
        CircleFrequency(F(1))


@pytest.mark.parametrize(
    "alpha, n, expected",
    [
        (F(1, 3), (3, 9, 27), (0, 0, 0)),
        (F(1, 2), (3, 9, 27), (F(1, 2),) * 3),
        (F(1, 5), (4, 8, 16), (F(1, 5), F(2, 5), F(1, 5))),
    ],
)
def test_defect_sequence(alpha, n, expected):
    assert defect_sequence(CircleFrequency(alpha), n) == expected


def test_chain_powers_of_two_grid():
    n, eps = (4, 8, 16), F(1, 20)
    chain = chain_intersect(n, eps, L=0)
    assert [a.center for a in chain.survivors] == [0, F(1, 4), F(1, 2), F(3, 4)]
    assert all(a.half_width == F(1, 320) for a in chain.survivors)
    Q = 10**5
    assert np.array_equal(arcs_grid_mask(chain.survivors, Q), grid_pass_mask(n, eps, Q))


def test_chain_coprime_pair_keeps_only_zero():
    n, eps = (4, 5), F(1, 100)
    chain = chain_intersect(n, eps)
    assert len(chain.survivors) == 1
    assert chain.survivors[0].center == 0
    Q = 10**5
    assert np.array_equal(arcs_grid_mask(chain.survivors, Q), grid_pass_mask(n, eps, Q))


def test_single_stage_keeps_every_arc():
    eps = F(1, 2) - F(1, 10**6)
    chain = chain_intersect((7,), eps)
    assert len(chain.survivors) == 7


def test_chain_skips_terms_up_to_L():
    chain = chain_intersect((3, 6, 12, 24), F(1, 30), L=6)
    assert chain.k0 == 2
    assert chain.window == (12, 24)


def test_chain_errors():
    with pytest.raises(ParameterError):
        chain_intersect((4, 8), F(1, 2))
    with pytest.raises(ParameterError, match="window empty"):
        chain_intersect((4, 8), F(1, 10), L=8)
    with pytest.raises(ParameterError):
        chain_intersect((4, 4), F(1, 10))


@st.composite
def ratio_bounded(draw, max_len=6):
    M = F(draw(st.integers(8, 24)), 4)  # M in [2, 6]
    n = [draw(st.integers(1, 40))]
    for _ in range(draw(st.integers(0, max_len - 1))):
        upper = -(-M.numerator * n[-1] // M.denominator) - 1  # largest integer below M * n
        n.append(draw(st.integers(n[-1] + 1, max(n[-1] + 1, upper))))
    assume(all(F(b, a) < M for a, b in zip(n, n[1:])))
    eps_den = draw(st.integers(4 * M.numerator // M.denominator + 1, 200))
    eps = F(1, eps_den)
    assume(eps < 1 / (4 * M))
    return n, M, eps


@settings(max_examples=60, deadline=None)
@given(ratio_bounded())
def test_ratio_bound_and_grid_agreement(args):
    n, M, eps = args
    chain = chain_intersect(n, eps)
    report = cardinality_bound_check(chain, M)
    assert report.status == "pass"
    assert len(chain.survivors) <= n[0]
    Q = 20000
    assert np.array_equal(arcs_grid_mask(chain.survivors, Q), grid_pass_mask(n, eps, Q))


def test_bound_check_examples():
    chain = chain_intersect((4, 8, 16, 32), F(1, 10))
    report = cardinality_bound_check(chain, 2 + F(1, 1000))
    assert report.passed and report.survivors == 4 and report.bound == 4
    assert cardinality_bound_check(chain_intersect((4, 8), F(1, 4)), 2 + F(1, 1000)).status == "not-applicable"

    n = [3 * 2**k for k in range(7)]
    chain = chain_intersect(n, F(1, 9))
    report = cardinality_bound_check(chain, 2 + F(1, 1000))
    assert report.passed and report.survivors <= 3
    Q = 10**5
    assert np.array_equal(arcs_grid_mask(chain.survivors, Q), grid_pass_mask(n, F(1, 9), Q))


def test_bound_check_flags_large_ratio():
    chain = chain_intersect((4, 40), F(1, 100))
    report = cardinality_bound_check(chain, 5)
    assert report.status == "not-applicable" and report.stage == 1


def test_arcs_split_when_eps_is_large():
    # eps = 1/5 is far above 1/(4M) for ratio 3; an arc of B(4) then meets two arcs of B(13)
    chain = chain_intersect((4, 13), F(1, 5))
    parents = [a.parent for a in chain.survivors]
    assert len(parents) > len(set(parents))


@settings(max_examples=100, deadline=None)
@given(
    n=st.lists(st.integers(1, 400), min_size=1, max_size=5, unique=True).map(sorted),
    eps=st.fractions(F(1, 200), F(49, 100)),
    num=st.integers(0, 10**6),
    den=st.integers(1, 10**6),
)
def test_membership_equivalence(n, eps, num, den):
    alpha = F(num % den, den)
    chain = chain_intersect(n, eps)
    assert chain.contains(alpha) == passes(alpha, n, eps)
    assert chain.contains(0)


@settings(max_examples=50, deadline=None)
@given(
    n=st.lists(st.integers(1, 300), min_size=2, max_size=6, unique=True).map(sorted),
    eps=st.fractions(F(1, 100), F(2, 5)),
)
def test_refinement_is_monotone(n, eps):
    Q = 5000
    masks = [arcs_grid_mask(chain_intersect(n[: i + 1], eps).survivors, Q) for i in range(len(n))]
    for small, big in zip(masks[1:], masks):
        assert not np.any(small & ~big)
    chain = chain_intersect(n, eps)
    for i in range(1, len(chain.stages)):
        prev = chain.stages[i - 1]
        for arc in chain.stages[i]:
            parent = prev[arc.parent]
            assert parent.lo <= arc.lo and arc.hi <= parent.hi


def test_chacon_gate_examples():
    assert chacon_gate(0, 17, F(1, 10)).bound == 0
    gate = chacon_gate(F(1, 2000), 10, F(1, 100))
    assert gate.applicable and gate.bound == F(21, 2000) and gate.bound < F(1, 50)
    assert not chacon_gate(F(1, 1000), 10, F(1, 100)).applicable  # ||10 alpha|| = eps exactly


@pytest.mark.parametrize("n", [10, 50, 200])
@pytest.mark.parametrize("eps", [F(1, 100), F(1, 500)])
def test_chacon_gate_soundness_on_grid(n, eps):
    Q = 10**4
    both = grid_pass_mask((n, n + 1), eps, Q)
    m = np.arange(Q)
    far = np.minimum(m, Q - m) * eps.denominator >= 2 * eps.numerator * Q
    assert not np.any(both & far)


def test_strongest_eps():
    n = (4, 8, 16)
    alpha = F(1, 5)
    top = strongest_eps(alpha, n)
    assert top == F(2, 5)
    assert chain_intersect(n, top + F(1, 1000)).contains(alpha)
    assert not chain_intersect(n, top).contains(alpha)


def test_odometer_screen_keeps_dyadic_candidates():
    tower = build_tower(odometer_spec(10))
    for k1, k2 in [(1, 4), (3, 10), (5, 7)]:
        screen = eigenvalue_screen(tower, F(1, 5), (k1, k2))
        centers = sorted(a.center for a in screen.chain.survivors)
        assert centers == [F(j, 2**k1) for j in range(2**k1)]
        assert not screen.weak_mixing_evidence


def test_chacon_return_times_keep_a_nontrivial_candidate():
    # along h_k = (3^(k+1) - 1)/2 the point 2/9 has defect exactly 1/9 for every k >= 1
    tower = build_tower(chacon_spec(9))
    assert set(defect_sequence(F(2, 9), tower.heights[1:])) == {F(1, 9)}
    screen = eigenvalue_screen(tower, F(1, 5), (1, 9))
    assert any(a.contains(F(2, 9)) for a in screen.nontrivial)
    assert eigenvalue_screen(tower, F(1, 5), (0, 9)).weak_mixing_evidence


def test_sampled_screen_regression():
    spec = ornstein_spec(12, 4, lambda k: k * k)
    draw = sample_omega(spec, 7)
    tower = build_tower(spec, draw)
    screen = eigenvalue_screen(tower, F(1, 50), (6, 12))
    got = [(a.center, a.half_width) for a in screen.chain.survivors]
    hw = F(1, 2081605350)
    assert got == [
        (F(0), hw),
        (F(4096, 41632107), hw),
        (F(8192, 41632107), hw),
        (F(41623915, 41632107), hw),
        (F(41628011, 41632107), hw),
    ]
    assert len(screen.nontrivial) == 4


def test_frequency_sequence_screen():
    spec = ornstein_spec(8, 4, lambda k: k)
    draw = sample_omega(spec, 3)
    tower = build_tower(spec, draw)
    screen = eigenvalue_screen(tower, F(1, 20), (2, 8), draw=draw, sequence="frequency")
    n = [tower.heights[k] + draw.x[k][0] for k in range(2, 9)]
    assert screen.chain.n_seq == tuple(n)
    with pytest.raises(ParameterError):
        eigenvalue_screen(tower, F(1, 20), (2, 8), sequence="frequency")
    with pytest.raises(ParameterError):
        eigenvalue_screen(tower, F(1, 20), (2, 9))


def test_survivors_csv(tmp_path):
    chain = chain_intersect((4, 8, 16), F(1, 20))
    path = tmp_path / "survivors.csv"
    write_survivors_csv(reversed(chain.survivors), path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["center_numerator", "center_denominator", "halfwidth_numerator", "halfwidth_denominator"]
    assert rows[1:] == [["0", "1", "1", "320"], ["1", "4", "1", "320"], ["1", "2", "1", "320"], ["3", "4", "1", "320"]]
