"""Three-stage band-energy quantization.

Coarse (6 dB steps, one log2 unit) uses a 2-D predictor: a leaky
inter-frame term plus an intra-frame band-to-band filter, with the integer
residual Laplace-coded.  Fine refinement spends allocation-driven raw bits
inside the coarse step, and whatever is left at the end of the frame buys
one extra bit per band per channel.

Encoder and decoder share the reconstruction arithmetic below, so the
predictor memory stays bit-exact on both sides by construction.
"""

from functools import lru_cache

import numpy as np

from .fixedmath import log2_frac8

E_MIN = -28.0   # log2 amplitude floor (keeps silence near-silent)
E_MAX = 20.0
QI_BOUND = 40   # residual magnitude cap; also the Laplace table extent
_PREV_BOUND = 40.0

# Inter-frame leak (alpha) weakens as frames lengthen; the intra-frame pole
# (beta) follows.  Indexed by frame size (2.5/5/10/20 ms).
ALPHA_INTER = (0.90, 0.80, 0.65, 0.50)
BETA_INTER = (0.92, 0.85, 0.70, 0.55)
BETA_INTRA = 0.15

K_FINE8 = 17  # tuned fine-allocation offset, eighth-bits (about 2.1 bits)

_TOTAL = 1 << 15
_WORST_SYMBOL8 = 17 * 8  # conservative upper bound on one residual's cost

# Per-band Laplace decay (Q14), trained offline on the bundled development
# corpus by scripts/train_laplace.py and frozen.  [size][inter=0/intra=1][band].
LAPLACE_DECAY_Q14 = (
    (
        (10967, 10796, 10305, 10713, 10502, 9852, 11143, 9732, 9036, 9319, 9065, 9306, 9030, 9172, 9178, 9184, 9085, 8812, 8524, 8251, 8188),
        (14358, 8945, 6229, 7764, 7297, 5932, 8584, 6514, 7297, 2659, 3074, 2233, 2659, 907, 1356, 1356, 3074, 2659, 2233, 2233, 1799),
    ),
    (
        (11054, 10223, 9151, 8355, 8157, 7459, 6915, 7538, 6354, 6691, 6633, 6513, 6180, 5991, 5929, 5991, 5904, 5893, 5898, 5568, 5641),
        (14301, 7297, 8192, 7047, 5932, 5932, 8192, 4610, 5932, 2659, 1799, 455, 3074, 1356, 1356, 455, 3074, 1799, 907, 1799, 1799),
    ),
    (
        (12622, 10940, 9318, 8178, 7520, 6895, 4926, 5155, 5625, 6924, 6374, 5951, 5965, 6029, 5785, 5974, 5795, 6028, 6131, 5768, 6037),
        (14161, 8768, 6514, 7983, 7764, 4961, 7047, 4961, 4610, 3074, 3477, 1356, 3868, 455, 1799, 455, 1799, 1356, 1799, 2233, 328),
    ),
    (
        (13459, 11290, 8917, 7475, 6842, 4682, 5306, 5330, 6385, 7465, 6769, 5766, 6158, 6000, 5771, 6350, 6032, 6378, 6597, 6339, 6451),
        (14210, 8768, 7764, 7983, 7983, 5621, 8768, 5932, 4961, 3074, 2233, 455, 3074, 1356, 907, 1799, 1799, 907, 1799, 2659, 455),
    ),
)


@lru_cache(maxsize=None)
def _laplace_freqs(decay_q14):
    """Frequency table over signed residuals, total 2^15.

    Index order is 0, +1, -1, +2, -2, ...; every entry keeps frequency >= 1
    so any clamped residual stays codable.
    """
    g = min(decay_q14, 15000) / 16384.0
    p0 = (1.0 - g) / (1.0 + g)
    mags = [max(1, int(round(_TOTAL * p0 * g ** k))) for k in range(1, QI_BOUND + 1)]
    f0 = _TOTAL - 2 * sum(mags)
    assert f0 >= 1
    freqs = [f0]
    for m in mags:
        freqs.extend((m, m))
    cum = np.concatenate([[0], np.cumsum(freqs)])
    return np.asarray(freqs), cum


def _sym_index(qi):
    if qi == 0:
        return 0
    return 2 * abs(qi) - (1 if qi > 0 else 0)


def _sym_value(idx):
    if idx == 0:
        return 0
    mag = (idx + 1) // 2
    return mag if idx % 2 == 1 else -mag


def laplace_encode(coder, qi, decay_q14):
    freqs, cum = _laplace_freqs(decay_q14)
    i = _sym_index(qi)
    coder.encode(int(cum[i]), int(cum[i + 1]), _TOTAL)


def laplace_decode(coder, decay_q14):
    freqs, cum = _laplace_freqs(decay_q14)
    f = coder.decode(_TOTAL)
    i = int(np.searchsorted(cum, f, side="right")) - 1
    coder.update(int(cum[i]), int(cum[i + 1]), _TOTAL)
    return _sym_value(i)


class EnergyPredictorState:
    """Per-stream memory: previous frame's quantized energies."""

    def __init__(self, channels, nbands):
        self.oldE = np.full((channels, nbands), E_MIN)

    def reset(self):
        self.oldE[:] = E_MIN


def coarse_encode(coder, energies, intra, state, size_index, budget8):
    """Quantize per-channel band energies at 6 dB and code the residuals.

    Returns the reconstructed coarse energies (what the decoder will see).
    Bands whose worst-case symbol would not fit in the remaining budget are
    silently pinned to residual zero; the decoder makes the same check.
    """
    C, nbands = energies.shape
    alpha = 0.0 if intra else ALPHA_INTER[size_index]
    beta = BETA_INTRA if intra else BETA_INTER[size_index]
    decays = LAPLACE_DECAY_Q14[size_index][1 if intra else 0]
    out = np.empty_like(energies)
    prev = [0.0] * C
    for b in range(nbands):
        for c in range(C):
            E = min(max(energies[c, b], E_MIN), E_MAX)
            pred = alpha * state.oldE[c, b] + prev[c]
            if budget8 - coder.tell_frac() >= _WORST_SYMBOL8:
                qi = int(np.floor(E - pred + 0.5))
                qi = max(-QI_BOUND, min(QI_BOUND, qi))
                laplace_encode(coder, qi, decays[b])
            else:
                qi = 0
            q = float(qi)
            Ehat = min(max(pred + q, E_MIN), E_MAX + 2.0)
            out[c, b] = Ehat
            state.oldE[c, b] = Ehat
            prev[c] = min(max(prev[c] + (1.0 - beta) * q, -_PREV_BOUND), _PREV_BOUND)
    return out


def coarse_decode(coder, channels, nbands, intra, state, size_index, budget8):
    """Mirror of coarse_encode."""
    alpha = 0.0 if intra else ALPHA_INTER[size_index]
    beta = BETA_INTRA if intra else BETA_INTER[size_index]
    decays = LAPLACE_DECAY_Q14[size_index][1 if intra else 0]
    out = np.empty((channels, nbands))
    prev = [0.0] * channels
    for b in range(nbands):
        for c in range(channels):
            pred = alpha * state.oldE[c, b] + prev[c]
            if budget8 - coder.tell_frac() >= _WORST_SYMBOL8:
                qi = laplace_decode(coder, decays[b])
            else:
                qi = 0
            q = float(qi)
            Ehat = min(max(pred + q, E_MIN), E_MAX + 2.0)
            out[c, b] = Ehat
            state.oldE[c, b] = Ehat
            prev[c] = min(max(prev[c] + (1.0 - beta) * q, -_PREV_BOUND), _PREV_BOUND)
    return out


def fine_bits(a8, ndof):
    """Fine-energy bit count for a band granted a8 eighth-bits over ndof
    degrees of freedom.  Returns (bits, pre-rounding eighth-bit value); the
    latter records the rounding direction for the leftover-bit pass."""
    if a8 <= 0 or ndof <= 0:
        return 0, 0
    v8 = a8 // ndof + (log2_frac8(ndof) >> 1) - K_FINE8
    if ndof == 2:
        v8 += 8
    bits = (v8 + 4) >> 3
    return min(8, max(0, bits)), v8


def fine_encode(coder, E, coarse, a_f):
    """Code the offset inside the coarse step with a_f raw bits; returns the
    refined energy (identical to what fine_decode reconstructs)."""
    if a_f <= 0:
        return coarse
    q2 = int(np.floor((E - coarse + 0.5) * (1 << a_f)))
    q2 = max(0, min((1 << a_f) - 1, q2))
    coder.write_raw(q2, a_f)
    return _fine_recon(coarse, q2, a_f)


def fine_decode(coder, coarse, a_f):
    if a_f <= 0:
        return coarse
    q2 = coder.read_raw(a_f)
    return _fine_recon(coarse, q2, a_f)


def _fine_recon(coarse, q2, a_f):
    e = coarse - 0.5 + (q2 + 0.5) / (1 << a_f)
    # slight upward bias on the first and second fine bit
    if a_f == 1:
        e += 1.0 / 16
    elif a_f == 2:
        e += 1.0 / 32
    return e


def final_bit_order(fine_info, nbands):
    """Priority order for leftover energy bits: bands whose fine allocation
    was rounded down first, ascending band index within each class."""
    down = [b for b in range(nbands) if fine_info[b][0] * 8 < fine_info[b][1]]
    up = [b for b in range(nbands) if b not in down]
    return down + up


FINAL_ROUNDS = 4


def final_encode(coder, energies, refined, fine_info, budget8):
    """Spend leftover whole bits on extra energy bits, one per band per
    channel per round, in priority order.  Mutates and returns `refined`."""
    C, nbands = refined.shape
    order = final_bit_order(fine_info, nbands)
    for r in range(FINAL_ROUNDS):
        if budget8 - coder.tell_frac() < 8:
            break
        for b in order:
            a_f = fine_info[b][0] + r
            for c in range(C):
                if budget8 - coder.tell_frac() < 8:
                    return refined
                bit = 1 if energies[c, b] > refined[c, b] else 0
                coder.write_raw(bit, 1)
                refined[c, b] += (bit - 0.5) * 2.0 ** (-a_f - 1)
    return refined


def final_decode(coder, refined, fine_info, budget8):
    C, nbands = refined.shape
    order = final_bit_order(fine_info, nbands)
    for r in range(FINAL_ROUNDS):
        if budget8 - coder.tell_frac() < 8:
            break
        for b in order:
            a_f = fine_info[b][0] + r
            for c in range(C):
                if budget8 - coder.tell_frac() < 8:
                    return refined
                bit = coder.read_raw(1)
                refined[c, b] += (bit - 0.5) * 2.0 ** (-a_f - 1)
    return refined
