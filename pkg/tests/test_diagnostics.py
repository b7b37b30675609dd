import csv
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stacklab import (
    Level,
    LevelSet,
    ParameterError,
    build_tower,
    cesaro_score,
    chacon_spec,
    correlation,
    decode_level,
    lift_level_set,
    odometer_spec,
    ornstein_spec,
    rigidity_scan,
    sample_omega,
)
from stacklab.diagnostics import lift_positions, write_correlations_csv

F = Fraction


def lift_by_decoding(A, K, tower):
    """Reference lift: walk every stage-K level down to stage A.k with decode_level."""
    out = []
    for l in range(tower[K].h):
        pos = l
        for j in range(K, A.k, -1):
            d = decode_level(pos, tower[j])
            if not isinstance(d, Level):
                pos = None
                break
            pos = d.inner
        if pos is not None and pos in A.members:
            out.append(l)
    return out


def brute_correlation(A, B, n, K, tower):
    a, b = set(lift_by_decoding(A, K, tower)), lift_by_decoding(B, K, tower)
    return sum(1 for l in b if l + n in a) * tower[K].w


@pytest.fixture(scope="module")
def chacon():
    return build_tower(chacon_spec(10))


@pytest.fixture(scope="module")
def odometer():
    return build_tower(odometer_spec(12))


def test_chacon_lift_of_bottom_level(chacon):
    A = LevelSet(1, [0])
    assert chacon[2].h == 13
    assert lift_positions(A, 2, chacon) == [0, 4, 9]


def test_lift_full_and_empty(chacon):
    full = LevelSet.full(chacon, 2)
    assert lift_positions(full, 4, chacon) == lift_by_decoding(full, 4, chacon)
    assert lift_level_set(LevelSet(2, []), 5, chacon) == 0
    with pytest.raises(ParameterError):
        lift_level_set(full, 1, chacon)


@st.composite
def sampled_towers(draw):
    K = draw(st.integers(2, 6))
    p = draw(st.lists(st.integers(2, 4), min_size=K + 1, max_size=K + 1))
    spec = ornstein_spec(K, p, lambda k: min(k, 2), [4] + [0] * K)
    return build_tower(spec, sample_omega(spec, draw(st.integers(0, 10**6))))


@settings(max_examples=25, deadline=None)
@given(tower=sampled_towers(), data=st.data())
def test_lift_matches_decoding_and_keeps_measure(tower, data):
    k = data.draw(st.integers(0, tower.K))
    members = data.draw(st.sets(st.integers(0, tower[k].h - 1), max_size=8))
    A = LevelSet(k, members)
    K = data.draw(st.integers(k, tower.K))
    if tower[K].h > 4000:
        return
    positions = lift_positions(A, K, tower)
    assert positions == lift_by_decoding(A, K, tower)
    assert len(positions) * tower[K].w == A.measure(tower)


def test_disjoint_levels_do_not_correlate(chacon):
    A = LevelSet(6, [0])
    assert correlation(A, A, 1, 6, chacon).value == 0


def test_measure_preservation_against_whole_tower(chacon, odometer):
    # with B the whole stage-K tower only the top n levels can be lost
    rng = random.Random(0)
    for tower in (chacon, odometer):
        for _ in range(25):
            k = rng.randint(0, 3)
            A = LevelSet(k, rng.sample(range(tower[k].h), rng.randint(1, tower[k].h)))
            K = rng.randint(k, tower.K)
            n = rng.randrange(tower[K].h)
            r = correlation(A, LevelSet.full(tower, K), n, K, tower)
            kept = sum(1 for l in lift_positions(A, K, tower) if l >= n)
            assert r.value == kept * tower[K].w
            assert 0 <= r.mu_A - r.value <= r.error_bound


def test_correlation_against_brute_force(chacon):
    rng = random.Random(1)
    for _ in range(20):
        k = rng.randint(0, 3)
        A = LevelSet(k, rng.sample(range(chacon[k].h), rng.randint(1, chacon[k].h)))
        B = LevelSet(k, rng.sample(range(chacon[k].h), rng.randint(1, chacon[k].h)))
        K = rng.randint(max(k, 1), 5)
        n = rng.randrange(chacon[K].h)
        r = correlation(A, B, n, K, chacon)
        assert r.value == brute_correlation(A, B, n, K, chacon)
        assert 0 <= r.value <= min(r.mu_A, r.mu_B)
        assert r.error_bound == n * chacon[K].w


def test_error_bound_is_sound_across_stages(chacon):
    A = LevelSet(2, [0, 3, 5, 7, 11])
    B = LevelSet(1, [0, 2])
    for n in (1, 4, 13, 27, 40):
        for K in range(4, chacon.K):
            lo, hi = correlation(A, B, n, K, chacon), correlation(A, B, n, K + 1, chacon)
            assert abs(hi.value - lo.value) <= lo.error_bound


def test_error_bound_shrinks_with_K(chacon):
    A = LevelSet.full(chacon, 1)
    bounds = [correlation(A, A, 4, K, chacon).error_bound for K in range(2, 11)]
    assert all(b < a for a, b in zip(bounds, bounds[1:]))


def test_shift_must_stay_inside_tower(chacon):
    A = LevelSet(1, [0])
    with pytest.raises(ParameterError, match="shift exceeds tower height"):
        correlation(A, A, chacon[3].h, 3, chacon)


def test_chacon_partial_rigidity_at_first_height(chacon):
    A = LevelSet.full(chacon, 1)
    r = correlation(A, A, 4, 7, chacon)
    assert r.value == brute_correlation(A, A, 4, 7, chacon)
    assert r.normalized_lower >= F(3, 5)
    assert (r.value - r.error_bound) / (r.mu_A * r.mu_B) >= F(3, 5)


def test_rigidity_scan_chacon_heights(chacon):
    A = LevelSet.full(chacon, 1)
    shifts = [chacon[k].h for k in range(1, 7)]
    hits = rigidity_scan(A, shifts, 10, chacon, F(1, 2))
    assert [h.n for h in hits] == shifts


def test_rigidity_scan_shift_one_on_a_level(chacon):
    for k in (1, 2, 3):
        assert rigidity_scan(LevelSet(k, [0]), [1], 10, chacon, F(1, 2)) == []


def test_rigidity_scan_odometer(odometer):
    A = LevelSet(2, [0, 1])
    shifts = [odometer[k].h for k in range(2, 8)]
    hits = rigidity_scan(A, shifts, 12, odometer, F(9, 10))
    assert [h.n for h in hits] == shifts
    # dyadic shifts only lose the top n levels
    mu, w = A.measure(odometer), odometer[12].w
    assert all(h.overlap == 1 - len([l for l in lift_positions(A, 12, odometer) if l >= 4096 - h.n]) * w / mu
               for h in hits)


def test_cesaro_empty_set(chacon):
    assert cesaro_score(LevelSet(2, []), LevelSet.full(chacon, 2), 50, 6, chacon).score == 0


def test_cesaro_odometer_stays_away_from_zero():
    odometer = build_tower(odometer_spec(16))
    A = LevelSet(2, [0, 1])
    scores = [cesaro_score(A, A, N, 16, odometer) for N in (50, 200, 1000, 3000)]
    assert all(s.score - s.error_bound > F(1, 10) for s in scores)


def test_cesaro_chacon_below_odometer():
    chacon9, odo9 = build_tower(chacon_spec(9)), build_tower(odometer_spec(9))
    c = LevelSet(2, range(chacon9[2].h // 2))
    o = LevelSet(2, range(odo9[2].h // 2))
    assert cesaro_score(c, c, 200, 9, chacon9).score < cesaro_score(o, o, 200, 9, odo9).score


def test_correlations_csv(tmp_path, chacon):
    A = LevelSet.full(chacon, 1)
    reports = [correlation(A, A, n, 5, chacon) for n in (0, 4)]
    path = tmp_path / "correlations.csv"
    write_correlations_csv(reports, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["n", "value_num", "value_den", "err_num", "err_den", "normalized_display"]
    n, vn, vd, en, ed, shown = rows[2]
    assert F(int(vn), int(vd)) == reports[1].value
    assert F(int(en), int(ed)) == F(4, 243)
    assert len(shown.split(".")[1]) == 12


def test_whole_tower_loses_only_top_levels(chacon, odometer):
    rng = random.Random(2)
    for tower in (chacon, odometer):
        for _ in range(25):
            K = rng.randint(1, tower.K)
            n = rng.randrange(tower[K].h)
            X = LevelSet.full(tower, K)
            assert correlation(X, X, n, K, tower).value == (tower[K].h - n) * tower[K].w
