"""Synthetic test corpus: six short signals covering the codec's failure
modes (steady tone, sweep, pulse train, noise, castanet-like clicks, and a
tonal+transient mix).  Everything is generated from fixed seeds so tests
and scripts are reproducible without shipping licensed audio.
"""

import numpy as np

from .config import SAMPLE_RATE


def _env_clicks(n, rng, period=6000, start=2000):
    x = np.zeros(n)
    for p in range(start, n - 256, period):
        burst = rng.standard_normal(240) * np.exp(-np.arange(240) / 36.0)
        x[p:p + 240] += 0.8 * burst
    return x


def tone(n, freq=440.0, amp=0.5):
    t = np.arange(n) / SAMPLE_RATE
    return amp * np.sin(2 * np.pi * freq * t) + 0.2 * amp * np.sin(2 * np.pi * 3.1 * freq * t)


def sweep(n, f0=200.0, f1=12000.0, amp=0.5):
    t = np.arange(n) / SAMPLE_RATE
    dur = n / SAMPLE_RATE
    phase = 2 * np.pi * (f0 * t + (f1 - f0) * t * t / (2 * dur))
    return amp * np.sin(phase)


def pulse_train(n, period=240, amp=0.6):
    x = np.zeros(n)
    x[::period] = 1.0
    # smooth into a harmonic-rich but bounded waveform
    from scipy.signal import lfilter
    x = lfilter([1.0], [1.0, -0.92], x)
    return amp * x / (np.max(np.abs(x)) + 1e-12)


def noise(n, amp=0.3, seed=1234):
    return amp * np.random.default_rng(seed).standard_normal(n)


def castanet_clicks(n, seed=5678):
    return _env_clicks(n, np.random.default_rng(seed))


def tonal_transient_mix(n, seed=9012):
    t = np.arange(n) / SAMPLE_RATE
    base = 0.4 * np.sin(2 * np.pi * 880 * t)
    return base + _env_clicks(n, np.random.default_rng(seed))


SIGNALS = {
    "tone": tone,
    "sweep": sweep,
    "pulse_train": pulse_train,
    "noise": noise,
    "clicks": castanet_clicks,
    "mix": tonal_transient_mix,
}


def corpus(duration_s=1.0, stereo=False):
    """Dict of name -> (channels, nsamples) float arrays in [-1, 1]."""
    n = int(duration_s * SAMPLE_RATE)
    out = {}
    for name, fn in SIGNALS.items():
        x = np.clip(fn(n), -0.99, 0.99)
        if stereo:
            # decorrelate the right channel mildly
            shift = 24
            r = np.concatenate([x[shift:], x[:shift]]) * 0.8 + 0.2 * x
            out[name] = np.stack([x, np.clip(r, -0.99, 0.99)])
        else:
            out[name] = x[None, :]
    return out
