"""Pitch-enhancing prefilter/postfilter pair.

The encoder subtracts a 5-tap comb at the pitch period from the signal
entering the MDCT; the decoder runs the exact inverse IIR on its output.
When the transmitted parameters change between frames, the comb term is
cross-faded over the 120-sample overlap with squared-window weights on
both sides, which keeps the pair exactly inverse through transitions.
"""

from dataclasses import dataclass, field

import numpy as np

from .config import OVERLAP
from .transform import window_value

PERIOD_MIN = 15
PERIOD_MAX = 1022
GAIN_STEP = 0.09375      # 8 uniform gain levels: 0.09375 * (q+1)
GAIN_LEVELS = 8
TAPSETS = ((0.80, 0.10, 0.0), (0.46, 0.27, 0.0), (0.30, 0.22, 0.13))
ENABLE_CORR = 0.2
_HIST = PERIOD_MAX + 4


@dataclass
class PitchParams:
    period: int = PERIOD_MIN
    gain_q: int = 0          # quantizer index 0..7
    tapset: int = 0
    enabled: bool = False

    @property
    def gain(self):
        return GAIN_STEP * (self.gain_q + 1) if self.enabled else 0.0


@dataclass
class FilterState:
    """Per-channel comb history plus the previous frame's parameters."""
    hist: np.ndarray = field(default_factory=lambda: np.zeros(_HIST))
    prev: PitchParams = field(default_factory=PitchParams)


def _fade_weights(n):
    c = np.ones(n)
    m = min(n, OVERLAP)
    c[:m] = window_value(np.arange(m, dtype=np.float64), OVERLAP) ** 2
    return c


def _comb(ext, base, n, params):
    """g * (a0 x[-T] + a1 (x[-T+1]+x[-T-1]) + a2 (x[-T+2]+x[-T-2])) for n
    samples starting at ext[base]."""
    g = params.gain
    if g == 0.0:
        return np.zeros(n)
    T = params.period
    a0, a1, a2 = TAPSETS[params.tapset]
    s = base - T
    out = a0 * ext[s:s + n]
    out += a1 * (ext[s + 1:s + 1 + n] + ext[s - 1:s - 1 + n])
    if a2:
        out += a2 * (ext[s + 2:s + 2 + n] + ext[s - 2:s - 2 + n])
    return g * out


def apply_prefilter(frame, params, state):
    """FIR comb subtraction; updates the input history and rolls params."""
    n = len(frame)
    ext = np.concatenate([state.hist, frame])
    prev = state.prev
    if prev == params:
        y = frame - _comb(ext, _HIST, n, params)
    else:
        c = _fade_weights(n)
        y = frame - ((1.0 - c) * _comb(ext, _HIST, n, prev)
                     + c * _comb(ext, _HIST, n, params))
    state.hist = ext[-_HIST:]
    state.prev = params
    return y


def apply_postfilter(frame, params, state):
    """Exact inverse of apply_prefilter, recursing on the output history."""
    n = len(frame)
    ext = np.concatenate([state.hist, np.zeros(n)])
    prev = state.prev
    fade = prev != params
    c = _fade_weights(n) if fade else None
    tmin = min(params.period, prev.period if fade else params.period)
    step = max(1, tmin - 2)
    i = 0
    while i < n:
        j = min(n, i + step)
        comb = _comb(ext, _HIST + i, j - i, params)
        if fade:
            comb = c[i:j] * comb + (1.0 - c[i:j]) * _comb(ext, _HIST + i, j - i, prev)
        ext[_HIST + i:_HIST + j] = frame[i:j] + comb
        i = j
    state.hist = ext[-_HIST:]
    state.prev = params
    return ext[_HIST:]


def pitch_analyze(recent, frame_len, complexity=2):
    """Open-loop pitch search over the last `frame_len` samples of `recent`.

    A decimated pass scans the whole lag range; at complexity >= 1 the best
    lag is refined at full rate.  Returns PitchParams with the gain mapped
    from the normalized autocorrelation.
    """
    n = min(frame_len, 960)
    x = recent[-n:]
    if np.max(np.abs(x)) < 1e-9:
        return PitchParams()
    d = 4
    m = len(recent) // d * d
    dec = recent[-m:].reshape(-1, d).mean(axis=1)
    xd = dec[-(n // d):]
    best_t4, best_c = 0, -1.0
    ex = float(np.dot(xd, xd))
    lo4 = max(PERIOD_MIN // d + 1, 4)
    for t4 in range(lo4, PERIOD_MAX // d):
        if len(dec) < len(xd) + t4:
            break
        y = dec[-(len(xd) + t4):-t4]
        num = float(np.dot(xd, y))
        den = np.sqrt(ex * float(np.dot(y, y))) + 1e-12
        cval = num / den
        if cval > best_c:
            best_c, best_t4 = cval, t4
    if best_t4 == 0:
        return PitchParams()
    T, corr = best_t4 * d, best_c
    if complexity >= 1:
        lo = max(PERIOD_MIN, T - 6)
        hi = min(PERIOD_MAX, T + 6)
        best_c = -1.0
        for t in range(lo, hi + 1):
            if len(recent) < n + t:
                continue
            y = recent[-(n + t):-t]
            num = float(np.dot(x, y))
            den = np.sqrt(float(np.dot(x, x)) * float(np.dot(y, y))) + 1e-12
            cval = num / den
            if cval > best_c:
                best_c, T = cval, t
        corr = best_c
    if corr < ENABLE_CORR:
        return PitchParams()
    q = int(round(min(max(corr, 0.0), 1.0) * 0.75 / GAIN_STEP)) - 1
    q = max(0, min(GAIN_LEVELS - 1, q))
    hf = np.diff(x)
    tilt = float(np.dot(hf, hf)) / (float(np.dot(x, x)) + 1e-12)
    tapset = 0 if tilt > 0.6 else (1 if tilt > 0.15 else 2)
    return PitchParams(period=int(T), gain_q=q, tapset=tapset, enabled=True)


def code_pitch_params(coder, params):
    coder.encode_bit(1 if params.enabled else 0, 1)
    if params.enabled:
        coder.encode_uniform(params.period - PERIOD_MIN,
                             PERIOD_MAX - PERIOD_MIN + 1)
        coder.write_raw(params.gain_q, 3)
        coder.encode_uniform(params.tapset, 3)


def decode_pitch_params(coder):
    if not coder.decode_bit(1):
        return PitchParams()
    period = PERIOD_MIN + coder.decode_uniform(PERIOD_MAX - PERIOD_MIN + 1)
    gain_q = coder.read_raw(3)
    tapset = coder.decode_uniform(3)
    return PitchParams(period=period, gain_q=gain_q, tapset=tapset, enabled=True)
