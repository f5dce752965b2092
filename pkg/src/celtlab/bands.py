"""Band layout and the operations on normalized band vectors: energy
measurement, normalization, spectral folding, spreading rotations, the
Hadamard time-frequency transform and collapse prevention.

All rotations and Hadamard passes are orthonormal, so every tool here is
exactly invertible and norm-preserving; the decoder applies the mirrored
inverse of whatever the encoder did.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Band edges in MDCT bins at the 120-bin (2.5 ms) transform, approximating
# the Bark scale: 1-bin bands at LF widening to 22 bins at the top.  Larger
# frames scale every edge by frame_size/120.  Bins at or above the last edge
# are not coded.
EDGES_120 = (0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 14, 16,
             20, 24, 28, 34, 40, 48, 60, 78, 100)
NBANDS = len(EDGES_120) - 1

ENERGY_EPS = 1e-27


@dataclass(frozen=True)
class BandLayout:
    edges: tuple
    frame_size: int

    @property
    def nbands(self):
        return len(self.edges) - 1

    def start(self, b):
        return self.edges[b]

    def width(self, b):
        return self.edges[b + 1] - self.edges[b]

    @property
    def coded_bins(self):
        return self.edges[-1]


@lru_cache(maxsize=None)
def band_layout(frame_size):
    scale = frame_size // 120
    return BandLayout(tuple(e * scale for e in EDGES_120), frame_size)


def band_energy(coeffs, layout):
    """Per-band log2 amplitude: E_b = log2(||X_b|| + eps)."""
    out = np.empty(layout.nbands)
    for b in range(layout.nbands):
        seg = coeffs[layout.start(b):layout.edges[b + 1]]
        out[b] = np.log2(np.sqrt(np.sum(seg * seg)) + ENERGY_EPS)
    return out


def normalize_band(x):
    """Scale a band to a unit vector; all-zero bands come back zero."""
    n = np.sqrt(np.sum(x * x))
    if n < 1e-30:
        return np.zeros_like(x), True
    return x / n, False


def denormalize_band(x, energy_log2):
    return x * (2.0 ** energy_log2)


class Lcg:
    """32-bit linear congruential generator; identical on both codec sides."""

    def __init__(self, seed):
        self.state = seed & 0xFFFFFFFF

    def next_u32(self):
        self.state = (1664525 * self.state + 1013904223) & 0xFFFFFFFF
        return self.state

    def signs(self, n):
        return np.array([1.0 if self.next_u32() & 0x8000 else -1.0
                         for _ in range(n)])

    def unit_vector(self, n):
        v = np.array([(self.next_u32() >> 8) / float(1 << 23) - 1.0
                      for _ in range(n)])
        norm = np.sqrt(np.sum(v * v))
        if norm < 1e-12:
            v = np.zeros(n)
            v[0] = 1.0
            return v
        return v / norm


def fold_band(shape_spectrum, layout, band, cursor, rng):
    """Fill an uncoded band with a normalized copy of lower coefficients.

    `cursor` walks upward from the lowest filled coefficient, wrapping at
    the target band's start, so repeated folds reuse the lower spectrum
    deterministically.  With no lower content the band falls back to LCG
    noise.  Returns (unit vector, advanced cursor).
    """
    W = layout.width(band)
    lo = layout.start(band)
    if lo == 0 or cursor >= lo:
        return rng.unit_vector(W), cursor
    out = np.empty(W)
    c = cursor
    for i in range(W):
        if c >= lo:
            c = 0
        out[i] = shape_spectrum[c]
        c += 1
    v, zero = normalize_band(out)
    if zero:
        return rng.unit_vector(W), c
    return v, c


def spread_angle(N, K, delta):
    """Rotation angle (pi/4)*(N/(N+delta*K))^2 from the band size and pulse
    count."""
    return 0.25 * np.pi * (N / float(N + delta * K)) ** 2


def _rotate_pairs(x, pairs, theta):
    c, s = np.cos(theta), np.sin(theta)
    for i, j in pairs:
        xi, xj = x[i], x[j]
        x[i] = c * xi - s * xj
        x[j] = s * xi + c * xj


def spread(x, K, delta, inverse=False):
    """Spreading rotation: adjacent-pair Givens sweep up then down, with an
    extra stride-floor(sqrt(N)) pre-pass for N > 8.  inverse=True applies
    the exact transpose."""
    N = len(x)
    y = np.array(x, dtype=np.float64)
    if N < 2 or K < 1 or delta <= 0:
        return y
    theta = spread_angle(N, K, delta)
    up = [(k, k + 1) for k in range(N - 1)]
    passes = []
    if N > 8:
        stride = int(np.floor(np.sqrt(N)))
        pre = [(k, k + stride) for k in range(N - stride)]
        passes.append((pre, 0.5 * np.pi - theta))
    passes.append((up, theta))
    passes.append((up[::-1], theta))
    if inverse:
        for pairs, th in reversed(passes):
            _rotate_pairs(y, pairs[::-1], -th)
    else:
        for pairs, th in passes:
            _rotate_pairs(y, pairs, th)
    return y


def tf_transform(x, factor_log2, inverse=False):
    """Orthonormal Hadamard across runs of 2^k consecutive coefficients.

    On interleaved transient spectra consecutive coefficients are the same
    bin of consecutive short blocks, so this trades time for frequency
    resolution there; on long blocks it trades frequency for time.  The
    orthonormal scaling makes the transform self-inverse, so the inverse
    flag only documents intent.
    """
    del inverse
    k = factor_log2
    if k <= 0:
        return np.array(x, dtype=np.float64)
    n = 1 << k
    assert len(x) % n == 0
    m = np.asarray(x, dtype=np.float64).reshape(-1, n).copy()
    h = 1
    while h < n:
        for off in range(h):
            a = m[:, off::2 * h].copy()
            b = m[:, off + h::2 * h].copy()
            m[:, off::2 * h] = a + b
            m[:, off + h::2 * h] = a - b
        h *= 2
    return (m * (2.0 ** (-0.5 * k))).reshape(-1)


def collapse_mask_from_pulses(y, block, nblocks):
    """Bit per short block set when any pulse lands in it.

    `y` lives in block-planar order covering blocks [block, block+nblocks).
    """
    if nblocks <= 0:
        return 0
    mask = 0
    per = max(1, len(y) // nblocks)
    for i, v in enumerate(y):
        if v != 0:
            mask |= 1 << (block + min(i // per, nblocks - 1))
    return mask


def interleaved_to_planar(x, B):
    """Reorder an interleaved band (coef j of block b at j*B+b) into
    block-planar order (all of block 0, then block 1, ...)."""
    return x.reshape(-1, B).T.reshape(-1)


def planar_to_interleaved(x, B):
    return x.reshape(B, -1).T.reshape(-1)


def prevent_collapse(shapes, masks, energies, hist1, hist2, layout, B, rng):
    """Refill silent short blocks of transient bands with history-scaled
    noise.

    For every coded band whose collapse mask has a zero bit, that block's
    coefficients (interleaved positions congruent to the block index) are
    replaced with LCG noise whose level matches the minimum band energy of
    the previous two frames, then the band is renormalized so its coded
    energy is untouched.  Returns the modified shapes in place.
    """
    if B <= 1:
        return shapes
    full = (1 << B) - 1
    for b in range(layout.nbands):
        if shapes[b] is None:
            continue
        mask = masks[b] & full
        if mask == full:
            continue
        emin = min(hist1[b], hist2[b])
        r = min(1.0, 2.0 ** (emin - energies[b]))
        W = layout.width(b)
        per = W // B
        if per == 0:
            continue
        amp = r / np.sqrt(per)
        vec = shapes[b]
        for blk in range(B):
            if mask & (1 << blk):
                continue
            vec[blk::B] = amp * rng.signs(per)
        v, zero = normalize_band(vec)
        shapes[b] = rng.unit_vector(W) if zero else v
        masks[b] = full
    return shapes
