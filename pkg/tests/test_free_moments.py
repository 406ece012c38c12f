import numpy as np
import pytest
from hypothesis import given, strategies as st

from projlab.entropy_functionals import chi_proj_pair
from projlab.errors import ContractViolation
from projlab.free_moments import BlockFamily, PairBlock, SingleBlock, additivity_gap, \
    asymptotic_freeness_report, empirical_moments, free_mixed_moment
from projlab.grassmann_sim import sample_haar_pair, sample_projection
from projlab.linalg_core import as_generator
from projlab.two_projection_model import free_pair_state, pair_moment, words_up_to


@pytest.fixture(scope="module")
def mixed_family():
    return BlockFamily([PairBlock.haar(0.3, 0.6, 1000), SingleBlock(0.5), PairBlock.haar(0.5, 0.5, 1000)])


def test_generator_names(mixed_family):
    assert list(mixed_family.names) == ["p1", "q1", "r1", "p2", "q2"]
    assert mixed_family.parse_word("p1 q2 r1") == (0, 4, 2)
    assert mixed_family.format_word((0, 4, 2)) == "p1q2r1"
    for bad in ("p3", "x1", "", "p1p"):
        with pytest.raises(ContractViolation):
            mixed_family.parse_word(bad)
    with pytest.raises(ContractViolation):
        mixed_family.parse_word([7])


def test_two_letters_factorise(mixed_family):
    assert free_mixed_moment(mixed_family, "p1q2") == pytest.approx(0.3 * 0.5, abs=1e-12)
    assert free_mixed_moment(mixed_family, "r1p2") == pytest.approx(0.25, abs=1e-12)


def test_r1r2r1r2_half():
    fam = BlockFamily([SingleBlock(0.5), SingleBlock(0.5)])
    assert free_mixed_moment(fam, "r1r2r1r2") == pytest.approx(3 / 16, abs=1e-15)
    assert free_mixed_moment(fam, "r1r2r1r2") == pytest.approx(
        pair_moment(free_pair_state(0.5, 0.5), "efef"), abs=1e-6)


@given(a=st.floats(0, 1), b=st.floats(0, 1))
def test_pqpq_closed_form(a, b):
    fam = BlockFamily([SingleBlock(a), SingleBlock(b)])
    ref = a * a * b * b + b * b * a * (1 - a) + a * a * b * (1 - b)
    assert free_mixed_moment(fam, "r1r2r1r2") == pytest.approx(ref, abs=1e-12)


def test_words_inside_one_block_equal_pair_moment():
    st_ = free_pair_state(0.3, 0.6, 1000)
    fam = BlockFamily([PairBlock(st_), SingleBlock(0.4)])
    for w in words_up_to(("e", "f"), 6):
        word = "".join("p1" if c == "e" else "q1" for c in w)
        assert free_mixed_moment(fam, word) == pytest.approx(pair_moment(st_, w), abs=1e-10)


def _random_word(rng, n_gen, max_len):
    return tuple(int(c) for c in rng.integers(0, n_gen, size=rng.integers(1, max_len + 1)))


def test_cyclic_invariance(mixed_family):
    rng = as_generator(5)
    for _ in range(100):
        w = _random_word(rng, mixed_family.n_generators, 6)
        r = int(rng.integers(0, len(w)))
        rot = w[r:] + w[:r]
        assert free_mixed_moment(mixed_family, rot) == pytest.approx(free_mixed_moment(mixed_family, w), abs=1e-12)


def test_positivity_of_w_wstar(mixed_family):
    rng = as_generator(6)
    for _ in range(100):
        w = _random_word(rng, mixed_family.n_generators, 4)
        assert free_mixed_moment(mixed_family, w + w[::-1]) >= -1e-12


def test_long_words_tractable(mixed_family):
    rng = as_generator(7)
    for _ in range(5):
        w = tuple(int(c) for c in rng.integers(0, mixed_family.n_generators, size=8))
        v = free_mixed_moment(mixed_family, w)
        assert -1e-12 <= v <= 1 + 1e-12


def test_freeness_report_length_one_words():
    fam = BlockFamily([SingleBlock(0.5), SingleBlock(0.3)])
    rows = asymptotic_freeness_report(fam, ["r1", "r2"], [8, 10], 5, as_generator(1))
    for r in rows:
        alpha = 0.5 if r["word"] == "r1" else 0.3
        assert r["mean_abs_error"] == pytest.approx(abs(np.floor(alpha * r["N"] + 0.5) / r["N"] - alpha), abs=1e-12)


def test_freeness_report_independent_of_threads():
    fam = BlockFamily([SingleBlock(0.5), SingleBlock(0.5)])
    a = asymptotic_freeness_report(fam, ["r1r2r1r2"], [8, 12, 16], 10, as_generator(3), threads=1)
    b = asymptotic_freeness_report(fam, ["r1r2r1r2"], [8, 12, 16], 10, as_generator(3), threads=3)
    assert a == b


def test_freeness_report_rows_and_columns():
    fam = BlockFamily([SingleBlock(0.5), SingleBlock(0.5)])
    rows = asymptotic_freeness_report(fam, ["r1r2", "r1r2r1r2"], [8, 16], 10, as_generator(4))
    assert [(r["word"], r["N"]) for r in rows] == [("r1r2", 8), ("r1r2", 16), ("r1r2r1r2", 8), ("r1r2r1r2", 16)]
    assert rows[0]["decreasing"] is None and isinstance(rows[1]["decreasing"], bool)


def test_freeness_report_fixed_block():
    rng = as_generator(8)
    P, Q = sample_haar_pair(128, 40, 70, rng)
    fam = BlockFamily([PairBlock.fixed(P, Q), SingleBlock(0.5)])
    words = ["p1r1", "q1r1p1r1", "p1q1r1q1"]
    rows = asymptotic_freeness_report(fam, words, [128], 20, rng)
    for r in rows:
        assert r["available"] and r["mean_abs_error"] <= 0.05


def test_freeness_report_unavailable_rows():
    rng = as_generator(9)
    P, Q = sample_haar_pair(16, 4, 8, rng)
    fam = BlockFamily([PairBlock.fixed(P, Q), SingleBlock(0.5)])
    rows = asymptotic_freeness_report(fam, ["p1r1"], [32], 5, rng)
    assert rows[0]["available"] is False and rows[0]["note"]
    fam = BlockFamily([PairBlock(free_pair_state(0.5, 0.5, 200)), SingleBlock(0.5)])
    rows = asymptotic_freeness_report(fam, ["p1r1"], [8], 5, rng)
    assert rows[0]["available"] is False


def test_freeness_report_gibbs_block():
    from projlab.pressure import PressureHamiltonian, equilibrium_pressure
    from projlab.two_projection_model import FunctionOnUnitInterval
    psi = FunctionOnUnitInterval.identity()
    sol = equilibrium_pressure(0.5, 0.5, PressureHamiltonian(0, 0, psi), 300)
    fam = BlockFamily([PairBlock.gibbs(sol.state, psi), SingleBlock(0.5)])
    rows = asymptotic_freeness_report(fam, ["p1q1", "p1r1q1r1"], [32], 20, as_generator(10))
    assert all(r["available"] for r in rows)
    assert rows[0]["mean_abs_error"] <= 0.05


def test_additivity_self_consistent():
    fam = BlockFamily([PairBlock.haar(0.3, 0.6, 1000), PairBlock.haar(0.5, 0.5, 1000)])
    words = fam.alternating_words(4)
    rep = additivity_gap(fam, {w: fam.moment(w) for w in words})
    assert rep.score <= 1e-10 and rep.n_words > 0
    assert rep.bound == pytest.approx(sum(chi_proj_pair(b.state).chi for b in fam.blocks))


def test_additivity_non_free_tuple():
    rng = as_generator(11)
    P1, Q1 = sample_haar_pair(40, 12, 20, rng)
    P2 = P1.copy()
    Q2 = sample_projection(40, 20, rng)
    fam = BlockFamily([PairBlock.fixed(P1, Q1), PairBlock.fixed(P2, Q2)])
    words = fam.alternating_words(4)
    joint = empirical_moments([P1, Q1, P2, Q2], words)
    assert additivity_gap(fam, joint).score >= 0.1


def test_additivity_single_block_bound():
    st_ = free_pair_state(0.3, 0.6, 1000)
    rep = additivity_gap(BlockFamily([PairBlock(st_)]), {})
    assert rep.bound == pytest.approx(chi_proj_pair(st_).chi)


def test_single_blocks_are_free_with_zero_bound():
    fam = BlockFamily([SingleBlock(0.2), SingleBlock(0.7), SingleBlock(0.5)])
    words = fam.alternating_words(4)
    rep = additivity_gap(fam, {w: fam.moment(w) for w in words})
    assert rep.score == 0.0 and rep.bound == 0.0


def test_single_block_validation():
    with pytest.raises(ContractViolation):
        SingleBlock(1.5)
