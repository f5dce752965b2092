"""Windowed MDCT analysis/synthesis with the fixed 2.5 ms overlap.

Long frames use a flat-top window whose 120-sample flanks taper with the
power-complementary sine-of-sine shape; transient frames use full-overlap
240-sample windows, one per 5 ms short block, and interleave the resulting
coefficients.  A direct O(N^2) transform is kept alongside the fast
fold+DCT-IV path as a test oracle.
"""

from functools import lru_cache

import numpy as np
import scipy.fft
import scipy.signal

from .config import OVERLAP

PREEMPH = 0.85


def window_value(n, L):
    """Overlap taper w(n) = sin[(pi/2) sin^2(pi (n+1/2) / 2L)]."""
    return np.sin(0.5 * np.pi * np.sin(np.pi * (n + 0.5) / (2 * L)) ** 2)


@lru_cache(maxsize=None)
def _flank(L):
    return window_value(np.arange(L, dtype=np.float64), L)


@lru_cache(maxsize=None)
def _block_window(M):
    """Length-2M window: flat top with OVERLAP-sample flanks, zero padded.

    For M == OVERLAP this degenerates to the full-overlap shape used by
    short blocks."""
    L = OVERLAP
    assert M >= L
    pad = (M - L) // 2
    w = np.zeros(2 * M)
    r = _flank(L)
    w[pad:pad + L] = r
    w[pad + L:2 * M - pad - L] = 1.0
    w[2 * M - pad - L:2 * M - pad] = r[::-1]
    return w


def _fold(xw):
    """Time-domain aliasing: 2M windowed samples down to M."""
    M = xw.shape[-1] // 2
    h = M // 2
    a = -xw[..., M + h:] - xw[..., M:M + h][..., ::-1]
    b = xw[..., :h] - xw[..., h:M][..., ::-1]
    return np.concatenate([a, b], axis=-1)


def _unfold(u):
    M = u.shape[-1]
    h = M // 2
    y = np.empty(u.shape[:-1] + (2 * M,))
    y[..., :h] = u[..., h:]
    y[..., h:M] = -u[..., h:][..., ::-1]
    y[..., M:M + h] = -u[..., :h][..., ::-1]
    y[..., M + h:] = -u[..., :h]
    return y


def mdct(x2m):
    """Orthonormal-scale MDCT of 2M windowed samples -> M coefficients."""
    return scipy.fft.dct(_fold(x2m), type=4, norm="ortho")


def imdct(coeffs):
    """Inverse of mdct(): M coefficients -> 2M samples (before windowing)."""
    return _unfold(scipy.fft.idct(coeffs, type=4, norm="ortho"))


def mdct_direct(x2m):
    """O(M^2) reference used as the oracle for the fast path."""
    M = len(x2m) // 2
    n = np.arange(2 * M)
    k = np.arange(M)
    basis = np.cos(np.pi / M * (n[None, :] + 0.5 + M / 2) * (k[:, None] + 0.5))
    return np.sqrt(2.0 / M) * (basis @ x2m)


def interleave(blocks):
    """Stack B short-block spectra so coefficient j of block b lands at
    index j*B + b."""
    return np.asarray(blocks).T.reshape(-1)


def deinterleave(coeffs, B):
    return coeffs.reshape(-1, B).T


def forward_mdct(prev_tail, frame, B):
    """Analyze one frame given the previous OVERLAP samples.

    The window support covers [t*N - OVERLAP, t*N + N); short blocks tile
    that support with full-overlap 2*OVERLAP windows.
    """
    N = len(frame)
    support = np.concatenate([prev_tail, frame])
    if B == 1:
        M = N
        pad = (M - OVERLAP) // 2
        x = np.zeros(2 * M)
        x[pad:pad + M + OVERLAP] = support
        return mdct(x * _block_window(M))
    M = N // B
    w = _block_window(M)
    blocks = np.stack([support[b * M:b * M + 2 * M] for b in range(B)])
    return interleave(mdct(blocks * w))


def inverse_mdct(coeffs, B, overlap_tail):
    """Synthesize one frame; returns (N output samples, new overlap tail).

    overlap_tail carries the trailing OVERLAP samples of the previous
    frame's windowed synthesis, so emitted samples lag the encoder input by
    exactly OVERLAP samples.
    """
    N = len(coeffs)
    acc = np.zeros(N + OVERLAP)
    if B == 1:
        M = N
        pad = (M - OVERLAP) // 2
        y = imdct(coeffs) * _block_window(M)
        acc += y[pad:pad + M + OVERLAP]
    else:
        M = N // B
        w = _block_window(M)
        ys = imdct(deinterleave(coeffs, B)) * w
        for b in range(B):
            acc[b * M:b * M + 2 * M] += ys[b]
    acc[:OVERLAP] += overlap_tail
    return acc[:N], acc[N:]


def pre_emphasis(x, state):
    """First-order high-pass y[n] = x[n] - 0.85 x[n-1]; state persists."""
    y = x - PREEMPH * np.concatenate([[state], x[:-1]])
    return y, x[-1] if len(x) else state


def de_emphasis(x, state, limit=None):
    """Inverse filter y[n] = x[n] + 0.85 y[n-1].

    With `limit` set the recursion saturates at +-limit, which bounds the
    output for arbitrary (corrupt) input while leaving sane signals
    untouched."""
    y, zf = scipy.signal.lfilter([1.0], [1.0, -PREEMPH], x, zi=[PREEMPH * state])
    if limit is not None and (len(y) == 0 or np.max(np.abs(y)) > limit):
        s = state
        y = np.empty_like(x)
        for i, v in enumerate(x):
            s = min(max(v + PREEMPH * s, -limit), limit)
            y[i] = s
        return y, s
    return y, (y[-1] if len(y) else state)


_SUB = 60  # transient analysis sub-block, 1.25 ms


def detect_transient(frame, prev_tail, threshold=16.0):
    """Attack detector on the pre-emphasized signal.

    Sub-block HF energies are compared against a forward-masking envelope;
    the frame is transient when some sub-block jumps `threshold` times above
    the decayed envelope.  Returns (flag, ratio) so callers can grade
    strength.
    """
    x = np.concatenate([prev_tail[-2 * _SUB:], frame])
    h = np.diff(x, 2)  # second difference emphasizes HF attacks
    n = len(h) // _SUB
    e = np.sum(h[:n * _SUB].reshape(n, _SUB) ** 2, axis=1)
    env = np.empty(n)
    m = e[0]
    env[0] = m
    for i in range(1, n):
        env[i] = m
        m = max(e[i], 0.5 * m)
    ratio = np.max(e[1:] / (env[1:] + 1e-18)) if n > 1 else 0.0
    return bool(ratio > threshold), float(ratio)
