import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptcdsim import (ChannelRealization, ConfigurationError, FadingModel, DEFAULT_WEIGHTS,
                     PowerWeights, apply_channel, build_interleavers, make_frame,
                     measure_waveform_siinr, random_frame, sample_block, siinr_per_branch,
                     superpose)
from ptcdsim.transceiver import qpsk_symbols, siinr_from_powers

from oracles import siinr_terms


@st.composite
def weight_vectors(draw, max_len=4):
    L = draw(st.integers(1, max_len))
    raw = sorted(set(draw(st.lists(st.floats(0.01, 1.0), min_size=L, max_size=L))),
                 reverse=True)
    w = np.array(raw) / sum(raw)
    w[0] += 1.0 - w.sum()
    return PowerWeights(w)


# -- power weights ---------------------------------------------------------

def test_default_weights_are_valid():
    for L, w in DEFAULT_WEIGHTS.items():
        assert PowerWeights(w).branch_count == L


@pytest.mark.parametrize("w", [[0.5, 0.5], [0.2, 0.8], [0.7, 0.2], [0.8, 0.3, -0.1], []])
def test_invalid_weights(w):
    with pytest.raises(ConfigurationError):
        PowerWeights(w)


def test_ceilings():
    assert PowerWeights([0.8, 0.2]).ceilings == pytest.approx([4.0])
    assert PowerWeights([0.8, 0.15, 0.04, 0.01]).ceilings == pytest.approx([4.0, 3.0, 4.0])


# -- interleavers ----------------------------------------------------------

def test_interleaver_n4_l2():
    assert build_interleavers(4, 2).permutations.tolist() == [[1, 2, 3, 0]]


def test_interleaver_n6_l3_exhaustive():
    il = build_interleavers(6, 3)
    assert il.permutations.tolist() == [[1, 2, 3, 4, 5, 0], [2, 3, 4, 5, 0, 1]]
    for k in range(6):
        assert len({k, *il.permutations[:, k]}) == 3


def test_interleaver_pigeonhole():
    with pytest.raises(ConfigurationError, match="block_len"):
        build_interleavers(2, 3)


def test_interleaver_rejects_collisions():
    from ptcdsim import InterleaverSet
    with pytest.raises(ConfigurationError):
        InterleaverSet(np.array([[0, 2, 1]]), 3)       # fixes position 0
    with pytest.raises(ConfigurationError):
        InterleaverSet(np.array([[1, 2, 0], [1, 2, 0]]), 3)


@given(st.integers(1, 6).flatmap(lambda L: st.tuples(st.just(L), st.integers(L, 40))))
def test_interleaver_invariants(case):
    L, N = case
    il = build_interleavers(N, L)
    images = np.vstack([np.arange(N), il.permutations])
    for row in il.permutations:
        assert sorted(row) == list(range(N))
    for k in range(N):
        assert len(set(images[:, k])) == L


@given(st.integers(2, 5), st.integers(5, 30), st.integers(0, 2 ** 32 - 1))
def test_deinterleave_inverts_interleave(L, N, seed):
    il = build_interleavers(N, L)
    x = np.random.default_rng(seed).standard_normal(N)
    for b in range(2, L + 1):
        assert np.array_equal(il.deinterleave(il.interleave(x, b), b), x)


# -- superposition and channel --------------------------------------------

def test_superpose_identity():
    s = qpsk_symbols(16, 0)
    assert np.allclose(superpose([s], PowerWeights([1.0])), s)


def test_superpose_two_branches():
    expected = math.sqrt(0.8) + math.sqrt(0.2)
    assert expected == pytest.approx(1.34164, abs=1e-5)
    out = superpose(np.ones((2, 5)), PowerWeights([0.8, 0.2]))
    assert np.allclose(out, expected)
    s1 = qpsk_symbols(5, 1)
    assert np.allclose(superpose([s1, np.zeros(5)], PowerWeights([0.8, 0.2])),
                       math.sqrt(0.8) * s1)


def test_superpose_length_mismatch():
    with pytest.raises(ConfigurationError):
        superpose(np.ones((3, 4)), PowerWeights([0.8, 0.2]))


def test_unit_transmit_power():
    w = PowerWeights(DEFAULT_WEIGHTS[4])
    il = build_interleavers(1000, 4)
    rng = np.random.default_rng(11)
    x = np.concatenate([random_frame(1000, w, il, rng).composite for _ in range(1000)])
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, rel=0.01)


def test_apply_channel_deterministic():
    h = ChannelRealization(np.full(3, 0.5))
    y = apply_channel(np.ones(3), h, 4.0, noise=0.0)
    assert np.allclose(y, 1.0)


def test_apply_channel_noise_power():
    h = ChannelRealization(np.zeros(10 ** 6))
    y = apply_channel(np.ones(10 ** 6), h, 1.0, rng=3)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(1.0, rel=0.01)


def test_apply_channel_received_power():
    n = 10 ** 6
    h = sample_block(FadingModel.rayleigh(), n, 4)
    x = qpsk_symbols(n, 5)
    y = apply_channel(x, h, 10.0, rng=6)
    assert np.mean(np.abs(y) ** 2) == pytest.approx(11.0, rel=0.01)


def test_apply_channel_errors():
    h = ChannelRealization(np.ones(3))
    with pytest.raises(ConfigurationError):
        apply_channel(np.ones(3), h, 0.0)
    with pytest.raises(ConfigurationError):
        apply_channel(np.ones(4), h, 1.0)


# -- analytic SIINR --------------------------------------------------------

def test_siinr_two_branch_example():
    h = ChannelRealization(np.ones(4))
    il = build_interleavers(4, 2)
    b = siinr_per_branch(h, il.deinterleave_channel(h), PowerWeights([0.8, 0.2]), 10.0, 0)
    assert b.per_branch == pytest.approx([0.8 / 0.3, 2.0], rel=1e-12)
    assert b.total == pytest.approx(14.0 / 3.0, rel=1e-12)


def test_siinr_zero_channel():
    h = ChannelRealization(np.zeros(5))
    w = PowerWeights(DEFAULT_WEIGHTS[3])
    b = siinr_per_branch(h, build_interleavers(5, 3).deinterleave_channel(h), w, 100.0, 2)
    assert np.all(b.per_branch == 0) and b.total == 0


def test_siinr_single_branch_is_snr():
    h = ChannelRealization(np.array([0.3 + 0.4j]))
    b = siinr_per_branch(h, [], PowerWeights([1.0]), 7.0, 0)
    assert b.total == pytest.approx(7.0 * 0.25)


@given(weight_vectors(), st.lists(st.floats(0, 50), min_size=4, max_size=4),
       st.floats(1e-3, 1e6))
def test_siinr_matches_textbook_ratio(w, g, snr):
    g = g[:w.branch_count]
    got = siinr_from_powers(np.array(g), w, snr)
    want = siinr_terms(g, list(w.weights), snr)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-300)


@given(weight_vectors(), st.lists(st.floats(0, 1e3), min_size=4, max_size=4),
       st.floats(1e-3, 1e4))
def test_siinr_ceiling_and_monotone_in_snr(w, g, snr):
    g = np.array(g[:w.branch_count])
    lo = siinr_from_powers(g, w, snr)
    hi = siinr_from_powers(g, w, 10 * snr)
    assert np.all(lo[:-1] < w.ceilings)
    assert np.all(hi >= lo)
    assert hi.sum() >= lo.sum()


@given(weight_vectors(), st.lists(st.floats(0, 1e3), min_size=4, max_size=4),
       st.integers(0, 3), st.floats(1.0, 10.0), st.floats(0.01, 1e3))
def test_total_monotone_in_each_power(w, g, idx, factor, snr):
    g = np.array(g[:w.branch_count])
    bumped = g.copy()
    bumped[idx % g.size] *= factor
    assert siinr_from_powers(bumped, w, snr).sum() >= siinr_from_powers(g, w, snr).sum()


# -- waveform path ---------------------------------------------------------

def _waveform_vs_analytic(w, N, snr, rng):
    il = build_interleavers(N, w.branch_count)
    h = sample_block(FadingModel.rayleigh(), N, rng)
    frame = random_frame(N, w, il, rng)
    meas = measure_waveform_siinr(frame, h, il, w, snr, rng=rng)
    views = il.deinterleave_channel(h)
    analytic = np.array([siinr_per_branch(h, views, w, snr, k).per_branch for k in range(N)])
    return meas, analytic


def test_waveform_matches_analytic_two_branch():
    w = PowerWeights([0.8, 0.2])
    meas, analytic = _waveform_vs_analytic(w, 32, 10.0, np.random.default_rng(21))
    assert np.max(np.abs(meas.siinr.per_branch / analytic - 1)) < 1e-9


def test_waveform_single_branch():
    w = PowerWeights([1.0])
    il = build_interleavers(8, 1)
    h = sample_block(FadingModel.rayleigh(), 8, 1)
    meas = measure_waveform_siinr(random_frame(8, w, il, 2), h, il, w, 5.0, rng=3)
    assert meas.siinr.total == pytest.approx(5.0 * h.power, rel=1e-12)


def test_last_branch_residual_is_clean():
    w = PowerWeights(DEFAULT_WEIGHTS[4])
    il = build_interleavers(64, 4)
    h = sample_block(FadingModel.rayleigh(), 64, 5)
    meas = measure_waveform_siinr(random_frame(64, w, il, 6), h, il, w, 100.0, noise=0.0)
    signal = np.abs(meas.desired[-1]) ** 2
    # with noise switched off the branch-L residual is exactly its own signal
    assert np.all(np.abs(meas.residuals[-1] - meas.desired[-1]) ** 2 <= 1e-18 * signal)
    assert np.all(np.abs(meas.leakage) ** 2 <= 1e-18 * np.abs(meas.residuals) ** 2 + 1e-300)


def test_mrc_output_combines_conjugate_weighted_copies():
    w = PowerWeights([0.8, 0.2])
    il = build_interleavers(4, 2)
    h = sample_block(FadingModel.rayleigh(), 4, 7)
    frame = random_frame(4, w, il, 8)
    meas = measure_waveform_siinr(frame, h, il, w, 3.0, noise=0.0)
    hc = h.coefficients
    for k in range(4):
        p = il.permutations[0][k]
        want = np.conj(hc[k]) * meas.residuals[0][k] + np.conj(hc[p]) * meas.residuals[1][p]
        assert meas.mrc_output[k] == pytest.approx(want)


@settings(max_examples=50, deadline=None)
@given(weight_vectors(), st.integers(4, 64), st.floats(0.1, 1e4), st.integers(0, 2 ** 32 - 1))
def test_waveform_analytic_agreement_randomised(w, N, snr, seed):
    meas, analytic = _waveform_vs_analytic(w, N, snr, np.random.default_rng(seed))
    assert np.allclose(meas.siinr.per_branch, analytic, rtol=1e-9, atol=0)


def test_waveform_dimension_mismatch():
    w = PowerWeights([0.8, 0.2])
    frame = make_frame(qpsk_symbols(6, 0), w, build_interleavers(6, 2))
    with pytest.raises(ConfigurationError):
        measure_waveform_siinr(frame, sample_block(FadingModel.rayleigh(), 5, 0),
                               build_interleavers(5, 2), w, 1.0)


def test_every_symbol_sees_distinct_positions():
    # each copy of symbol k is transmitted at a distinct position
    w = PowerWeights(DEFAULT_WEIGHTS[3])
    il = build_interleavers(9, 3)
    s = np.arange(9) + 1j
    frame = make_frame(s, w, il)
    for k in range(9):
        where = [int(np.flatnonzero(frame.branch_signals[b] == s[k])[0]) for b in range(3)]
        assert len(set(where)) == 3
    for a, b in itertools.combinations(range(3), 2):
        assert not np.array_equal(frame.branch_signals[a], frame.branch_signals[b])
