"""Pitch prefilter/postfilter pair and parameter coding."""

import numpy as np
import pytest

from celtlab.entropy import RangeDecoder, RangeEncoder
from celtlab.prefilter import (FilterState, PitchParams, TAPSETS,
                               apply_postfilter, apply_prefilter,
                               code_pitch_params, decode_pitch_params,
                               pitch_analyze)


def _random_param_seq(rng, n_frames):
    out = []
    p = PitchParams()
    for _ in range(n_frames):
        if rng.random() < 0.5:
            p = PitchParams(period=int(rng.integers(15, 1023)),
                            gain_q=int(rng.integers(0, 8)),
                            tapset=int(rng.integers(0, 3)),
                            enabled=bool(rng.integers(0, 2)))
        out.append(p)
    return out


def test_zero_gain_identity(rng):
    st = FilterState()
    fr = rng.standard_normal(480)
    assert np.allclose(apply_prefilter(fr, PitchParams(), st), fr)
    st = FilterState()
    assert np.allclose(apply_postfilter(fr, PitchParams(), st), fr)


def test_static_params_exact_inverse(rng):
    p = PitchParams(period=97, gain_q=7, tapset=1, enabled=True)
    se, sd = FilterState(), FilterState()
    x = rng.standard_normal(960 * 8)
    out = []
    for t in range(8):
        fr = x[t * 960:(t + 1) * 960]
        y = apply_prefilter(fr, p, se)
        out.append(apply_postfilter(y, p, sd))
    err = np.concatenate(out) - x
    assert np.sqrt(np.mean(err ** 2)) < 1e-9


@pytest.mark.parametrize("N", [120, 480, 960])
def test_time_varying_params_exact_inverse(N, rng):
    for trial in range(10):
        params = _random_param_seq(rng, 12)
        se, sd = FilterState(), FilterState()
        x = rng.standard_normal(N * 12)
        out = []
        for t, p in enumerate(params):
            fr = x[t * N:(t + 1) * N]
            y = apply_prefilter(fr, p, se)
            out.append(apply_postfilter(y, p, sd))
        err = np.concatenate(out) - x
        assert np.sqrt(np.mean(err ** 2)) < 1e-9


def test_prefilter_dc_gain():
    p = PitchParams(period=240, gain_q=7, tapset=0, enabled=True)
    st = FilterState()
    y = apply_prefilter(np.ones(4800), p, st)
    assert y[-1] == pytest.approx(1.0 - 0.75 * (0.80 + 2 * 0.10))


def test_tapset_nyquist_ordering():
    # tapset 2 attenuates the HF enhancement most: |H(pi)| ordering
    T = 24
    g = 0.75
    H = []
    for taps in TAPSETS:
        a0, a1, a2 = taps
        # comb response at Nyquist: z = -1, even T
        resp = a0 * (-1) ** T + 2 * a1 * (-1) ** (T - 1) + 2 * a2 * (-1) ** (T - 2)
        H.append(abs(1 - g * resp))
    assert H[0] > H[1] > H[2] or abs(1 - H[2]) < abs(1 - H[0])


def test_postfilter_stable_impulse_response():
    p = PitchParams(period=19, gain_q=7, tapset=0, enabled=True)
    st = FilterState()
    imp = np.zeros(100000)
    imp[0] = 1.0
    y = apply_postfilter(imp, p, st)
    assert np.isfinite(np.sum(y ** 2))
    assert np.max(np.abs(y[-1000:])) < 1e-6


def test_pitch_analysis_pulse_train():
    import scipy.signal
    x = np.zeros(48000)
    x[::240] = 1.0
    x = scipy.signal.lfilter([1.0], [1.0, -0.9], x)
    p = pitch_analyze(x[:6000], 960)
    assert p.enabled
    assert abs(p.period - 240) <= 1
    assert p.gain_q == 7


def test_pitch_analysis_noise_and_silence(rng):
    assert not pitch_analyze(rng.standard_normal(6000), 960).enabled
    assert not pitch_analyze(np.zeros(6000), 960).enabled


def test_param_coding_exhaustive_sweep():
    # every (period, gain, tapset) combination codes and decodes exactly
    for period in range(15, 1023, 37):
        for gain_q in range(8):
            for tapset in range(3):
                p = PitchParams(period=period, gain_q=gain_q,
                                tapset=tapset, enabled=True)
                enc = RangeEncoder(16)
                code_pitch_params(enc, p)
                assert decode_pitch_params(RangeDecoder(enc.finalize())) == p
    for period in (15, 1022):
        p = PitchParams(period=period, gain_q=0, tapset=0, enabled=True)
        enc = RangeEncoder(16)
        code_pitch_params(enc, p)
        assert decode_pitch_params(RangeDecoder(enc.finalize())) == p


def test_disabled_frame_costs_about_one_bit():
    enc = RangeEncoder(16)
    t0 = enc.tell_frac()
    code_pitch_params(enc, PitchParams())
    assert enc.tell_frac() - t0 <= 8
