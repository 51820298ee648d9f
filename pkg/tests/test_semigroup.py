"""Moment sequences on commutative monoids and the exponential constructor."""

from __future__ import annotations

import math
import random

import pytest

from moment_leibniz.multiindex import MultiIndex
from moment_leibniz.semigroup import (
    MomentSeq,
    check_exponential,
    check_monoid_axioms,
    convolution_terms,
    intvec_additive,
    make_exponential_moment_seq,
    random_probe_pairs,
    reals_additive,
    seq_from_json,
    tampered,
    verify_moment_seq,
)


def _mi(*entries: int) -> MultiIndex:
    return MultiIndex(tuple(entries))


def _pairs(monoid, count: int, seed: int):
    return random_probe_pairs(monoid, count, random.Random(seed))


# ---- carriers ----


def test_monoid_axioms_on_probes():
    rng = random.Random(51)
    reals = reals_additive()
    triples = [(reals.sampler(rng), reals.sampler(rng), reals.sampler(rng)) for _ in range(20)]
    assert check_monoid_axioms(reals, triples)
    ints = intvec_additive(3)
    triples2 = [(ints.sampler(rng), ints.sampler(rng), ints.sampler(rng)) for _ in range(20)]
    assert check_monoid_axioms(ints, triples2, tol=0)
    assert ints.op((1, 2, 3), (0, -1, 1)) == (1, 1, 4)


# ---- the exponential constructor ----


def test_rank1_rate0_is_binomial_theorem():
    # f_k(x) = x^k: the identity is literally (x+y)^k = sum C(k,j) x^j y^(k-j)
    seq = make_exponential_moment_seq(1, 3, 0.0, [1.0])
    assert seq.value(_mi(2), 3.0) == 9.0
    report = verify_moment_seq(seq, _pairs(seq.monoid, 50, 1), tol=1e-10)
    assert report.passed, report.failures[:1]


def test_pinned_rank2_value():
    # rate 1, scales (1, 2), alpha = (1, 1) at x + y = 0.75:
    # lhs = e^0.75 * 0.75 * 1.5, both sides written out by hand
    seq = make_exponential_moment_seq(2, 2, 1.0, [1.0, 2.0])
    x, y = 0.5, 0.25
    lhs = seq.value(_mi(1, 1), x + y)
    assert lhs == pytest.approx(math.exp(0.75) * 0.75 * 1.5, rel=1e-14)
    rhs = (
        seq.value(_mi(0, 0), x) * seq.value(_mi(1, 1), y)
        + seq.value(_mi(0, 1), x) * seq.value(_mi(1, 0), y)
        + seq.value(_mi(1, 0), x) * seq.value(_mi(0, 1), y)
        + seq.value(_mi(1, 1), x) * seq.value(_mi(0, 0), y)
    )
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_exponential_sequences_verify_across_rates():
    rng = random.Random(52)
    for rank in (1, 2, 3):
        for rate in (0.0, 1.0, -1.0):
            scales = [rng.uniform(0.5, 2.0) for _ in range(rank)]
            seq = make_exponential_moment_seq(rank, 3, rate, scales)
            report = verify_moment_seq(seq, _pairs(seq.monoid, 30, rank), tol=1e-10)
            assert report.passed, (rank, rate, report.failures[:1])


def test_f0_never_identically_zero():
    seq = make_exponential_moment_seq(1, 2, -1.0, [2.0])
    f0 = seq.functions[_mi(0)]
    assert check_exponential(f0, seq.monoid, _pairs(seq.monoid, 20, 2))


def test_scale_count_checked():
    with pytest.raises(ValueError):
        make_exponential_moment_seq(2, 2, 0.0, [1.0])


# ---- the verifier on hand-built sequences ----


def test_zero_collapse_sequence_passes():
    # f_0 = 0 forces every f_alpha = 0; the all-zero sequence satisfies
    # the identity trivially and the verifier accepts it
    seq = MomentSeq(
        1,
        2,
        reals_additive(),
        {_mi(0): lambda x: 0.0, _mi(1): lambda x: 0.0, _mi(2): lambda x: 0.0},
    )
    report = verify_moment_seq(seq, _pairs(seq.monoid, 10, 3))
    assert report.passed and report.max_residual == 0.0


def test_zero_f0_with_nonzero_tail_fails():
    # f_0 = 0 but f_1 = 1 violates the alpha = 1 instance
    seq = MomentSeq(
        1,
        1,
        reals_additive(),
        {_mi(0): lambda x: 0.0, _mi(1): lambda x: 1.0},
    )
    report = verify_moment_seq(seq, _pairs(seq.monoid, 5, 4))
    assert not report.passed
    assert all(tuple(f["alpha"]) == (1,) for f in report.failures)


def test_multiplicativity_is_the_alpha_zero_row():
    # f_0(x) = e^x is multiplicative; x -> x is not
    reals = reals_additive()
    probes = _pairs(reals, 20, 5)
    assert check_exponential(math.exp, reals, probes)
    assert check_exponential(lambda x: 1.0, reals, probes)
    assert not check_exponential(lambda x: x, reals, probes)
    assert not check_exponential(lambda x: 0.0, reals, probes)  # identically zero


def test_tamper_detected_at_its_index():
    seq = make_exponential_moment_seq(1, 3, 1.0, [1.5])
    bad = tampered(seq, _mi(2), 1.01)
    probes = _pairs(seq.monoid, 30, 6)
    good_report = verify_moment_seq(seq, probes)
    bad_report = verify_moment_seq(bad, probes)
    assert good_report.passed
    assert not bad_report.passed
    assert {tuple(f["alpha"]) for f in bad_report.failures} >= {(2,)}
    with pytest.raises(ValueError):
        tampered(seq, _mi(9), 1.01)


# ---- rank-1 degeneration ----


def test_rank1_terms_match_scalar_binomial_recurrence():
    # term-for-term: the rank-1 convolution at order k is the classical
    # sum over C(k, j) f_j f_{k-j}
    for k in range(0, 5):
        got = [(w, b.entries, c.entries) for w, b, c in convolution_terms(_mi(k))]
        expected = [(math.comb(k, j), (j,), (k - j,)) for j in range(k + 1)]
        assert got == expected


def test_rank1_agrees_with_handwritten_verifier():
    seq = make_exponential_moment_seq(1, 4, 1.0, [0.8])
    probes = _pairs(seq.monoid, 25, 7)
    report = verify_moment_seq(seq, probes, tol=1e-10)
    assert report.passed
    # independent check written directly against the scalar recurrence
    for x, y in probes:
        for k in range(5):
            lhs = seq.value(_mi(k), x + y)
            rhs = sum(
                math.comb(k, j) * seq.value(_mi(j), x) * seq.value(_mi(k - j), y)
                for j in range(k + 1)
            )
            assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


# ---- serialization ----


def test_seq_json_roundtrip():
    seq = make_exponential_moment_seq(2, 3, -1.0, [1.0, 0.5])
    data = seq.to_json()
    assert data == {
        "carrier": "reals_add",
        "rank": 2,
        "order": 3,
        "rate": -1.0,
        "scales": [1.0, 0.5],
    }
    back = seq_from_json(data)
    assert back.value(_mi(1, 2), 0.7) == seq.value(_mi(1, 2), 0.7)
    with pytest.raises(ValueError):
        tampered(seq, _mi(1, 1), 2.0).to_json()
