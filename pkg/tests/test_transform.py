"""MDCT, windows, emphasis filters and the transient detector."""

import numpy as np
import pytest

from celtlab.config import OVERLAP, FrameConfig
from celtlab.transform import (de_emphasis, deinterleave, detect_transient,
                               forward_mdct, interleave, inverse_mdct, mdct,
                               mdct_direct, pre_emphasis, window_value)


def _stream_roundtrip(sig, N, Bs):
    prev = np.zeros(OVERLAP)
    ola = np.zeros(OVERLAP)
    out = []
    for t, B in enumerate(Bs):
        fr = sig[t * N:(t + 1) * N]
        X = forward_mdct(prev, fr, B)
        prev = fr[-OVERLAP:]
        y, ola = inverse_mdct(X, B, ola)
        out.append(y)
    return np.concatenate(out)


def test_window_power_complementary():
    L = 120
    n = np.arange(L)
    w = window_value(n, L)
    assert np.max(np.abs(w ** 2 + w[::-1] ** 2 - 1.0)) < 1e-12
    assert abs(np.sum(w ** 2 + w[::-1] ** 2) - L) < 1e-9
    assert w[L - 1] > 0.999


def test_window_small_case():
    assert window_value(0, 2) == pytest.approx(
        np.sin(0.5 * np.pi * np.sin(np.pi / 8) ** 2))


@pytest.mark.parametrize("M", [120, 240, 480, 960])
def test_fast_mdct_matches_direct(M, rng):
    x = rng.standard_normal(2 * M)
    assert np.allclose(mdct(x), mdct_direct(x), atol=1e-9)


@pytest.mark.parametrize("N", [120, 240, 480, 960])
def test_perfect_reconstruction_long_blocks(N, rng):
    sig = rng.standard_normal(8 * N)
    out = _stream_roundtrip(sig, N, [1] * 8)
    err = out[OVERLAP:] - sig[:len(out) - OVERLAP]
    assert np.sqrt(np.mean(err[N:-N] ** 2)) < 1e-9


def test_perfect_reconstruction_mixed_transients(rng):
    N = 960
    Bs = [1, 8, 8, 1, 8, 1, 1, 8, 1, 8]
    sig = rng.standard_normal(len(Bs) * N)
    out = _stream_roundtrip(sig, N, Bs)
    err = out[OVERLAP:] - sig[:len(out) - OVERLAP]
    assert np.sqrt(np.mean(err[N:-N] ** 2)) < 1e-9


def test_parseval_over_stream(rng):
    N = 480
    sig = rng.standard_normal(60 * N)
    prev = np.zeros(OVERLAP)
    tot = 0.0
    for t in range(60):
        fr = sig[t * N:(t + 1) * N]
        tot += float(np.sum(forward_mdct(prev, fr, 1) ** 2))
        prev = fr[-OVERLAP:]
    assert tot == pytest.approx(np.sum(sig ** 2), rel=1e-2)


def _bin_centered_tone(N, k0):
    # phase-aligned to the analysis basis of frame t=1
    pad = (N - OVERLAP) // 2
    off = N - OVERLAP - pad
    n = np.arange(3 * N)
    return np.cos(np.pi / N * (n - off + 0.5 + N / 2) * (k0 + 0.5))


@pytest.mark.parametrize("N,k0,floor_db", [(120, 30, 40.0), (960, 100, 30.0)])
def test_tone_energy_concentration(N, k0, floor_db):
    # a bin-centered cosine concentrates in its bin; measured rejection at
    # >=4 bins is ~105 dB for the full-overlap window and ~33 dB for the
    # 20 ms flat-top (the low-overlap flanks trade leakage for delay)
    x = _bin_centered_tone(N, k0)
    X = forward_mdct(x[N - OVERLAP:N], x[N:2 * N], 1)
    peak = np.abs(X[k0])
    far = np.abs(np.concatenate([X[:k0 - 4], X[k0 + 5:]]))
    assert 20 * np.log10(peak / (np.max(far) + 1e-30)) > floor_db


def test_impulse_localized_in_short_blocks(rng):
    N = 960
    sig = np.zeros(2 * N)
    sig[N + N // 2] = 1.0  # center of frame 1
    prev = sig[N - OVERLAP:N]
    X = forward_mdct(prev, sig[N:2 * N], 8)
    blocks = deinterleave(X, 8)
    energies = np.sum(blocks ** 2, axis=1)
    hot = np.argsort(energies)[-2:]
    cold = [b for b in range(8) if b not in hot]
    assert np.max(energies[cold]) < 1e-24


def test_interleave_roundtrip(rng):
    x = rng.standard_normal((8, 120))
    assert np.array_equal(deinterleave(interleave(x), 8), x)


def test_pre_emphasis_impulse_and_dc():
    x = np.zeros(16)
    x[0] = 1.0
    y, _ = pre_emphasis(x, 0.0)
    assert y[0] == 1.0 and y[1] == -0.85 and np.all(y[2:] == 0)
    x = np.ones(2000)
    y, st = pre_emphasis(x, 1.0)
    assert y[-1] == pytest.approx(0.15)


def test_emphasis_inverse(rng):
    x = rng.standard_normal(3000)
    state_p, state_d = 0.0, 0.0
    out = []
    for i in range(3):
        seg = x[i * 1000:(i + 1) * 1000]
        y, state_p = pre_emphasis(seg, state_p)
        z, state_d = de_emphasis(y, state_d)
        out.append(z)
    assert np.max(np.abs(np.concatenate(out) - x)) < 1e-12


def test_de_emphasis_saturation_bounds_output():
    x = np.full(4000, 10.0)
    y, _ = de_emphasis(x, 0.0, limit=2.0)
    assert np.max(np.abs(y)) <= 2.0


def test_transient_detector_cases(rng):
    assert detect_transient(np.zeros(960), np.zeros(120))[0] is False
    t = np.arange(48000)
    s = np.sin(2 * np.pi * 997 * t / 48000)
    pe, _ = pre_emphasis(s, 0.0)
    assert detect_transient(pe[9600:10560], pe[9480:9600])[0] is False
    # 40 dB HF step mid-frame
    step = np.concatenate([1e-2 * rng.standard_normal(480),
                           1.0 * rng.standard_normal(480)])
    assert detect_transient(step, 1e-2 * rng.standard_normal(120))[0] is True


def test_frame_config_validation():
    cfg = FrameConfig(20, 2)
    assert cfg.frame_size == 960 and cfg.max_blocks == 8
    assert cfg.blocks(True) == 8 and cfg.blocks(False) == 1
    assert FrameConfig(2.5, 1).blocks(True) == 1
    with pytest.raises(ValueError):
        FrameConfig(7.5, 1)
    with pytest.raises(ValueError):
        FrameConfig(20, 3)
