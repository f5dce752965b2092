"""Bit-exact bit allocation shared by encoder and decoder.

A binary search interpolates between static per-band prototype curves so
the summed grant best fits the frame budget, a tilt parameter slopes the
allocation across bands, explicit boosts raise single bands at the expense
of the rest, starved bands are skipped (automatically below a threshold,
plus explicit top-down skip flags), and each band's grant is split between
PVQ shape bits and fine energy bits.

Everything here is integer eighth-bit arithmetic on decoder-visible values,
so both sides always compute the identical result.
"""

from dataclasses import dataclass, field
from functools import lru_cache

from .energy_q import fine_bits
from .fixedmath import log2_frac8
from .pvq import K_MAX, SPLIT_MAX_DEPTH, SPLIT_THRESHOLD8, codebook_size

# Static allocation prototypes in 1/64 bit/sample, 8 quality rows x 21
# bands, fitted by scripts/fit_alloc_prototypes.py and frozen.  Rows span
# roughly 8..175 kb/s for 20 ms mono frames.
PROTO64 = (
    (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0),
    (105, 94, 83, 72, 62, 53, 45, 38, 32, 27, 23, 19, 16, 13, 11, 9, 8, 6, 5, 4, 4),
    (164, 149, 133, 117, 102, 89, 77, 67, 58, 49, 42, 36, 31, 26, 22, 19, 16, 14, 11, 10, 8),
    (250, 230, 208, 186, 166, 147, 130, 115, 101, 89, 77, 68, 59, 51, 45, 39, 33, 29, 25, 22, 19),
    (311, 291, 268, 245, 223, 203, 184, 166, 149, 134, 121, 108, 97, 86, 77, 69, 61, 54, 48, 43, 38),
    (358, 340, 320, 299, 279, 259, 240, 222, 205, 189, 174, 160, 147, 135, 124, 113, 104, 95, 87, 79, 72),
    (402, 388, 372, 355, 338, 321, 305, 289, 274, 259, 245, 231, 218, 206, 194, 182, 172, 161, 152, 142, 134),
    (472, 462, 449, 436, 423, 409, 396, 383, 370, 357, 344, 332, 320, 308, 297, 285, 275, 264, 254, 244, 234),
)
N_QUALITY = len(PROTO64)
Q_STEPS = (N_QUALITY - 1) * 64  # interpolation grid, 1/64 of a row apart

TILT_LIMIT = 5          # tilt index in [-5, +5], 1/64 bit/sample/band each
BOOST_QUANTUM8 = 48     # one boost step, eighth-bits
BOOST_MAX_STEPS = 13
_PARAM_ROOM8 = 192      # don't start a parameter field with less than this


def skip_threshold8(width, c_eff):
    """A band whose grant falls below this is better served by folding."""
    return c_eff * (width // 2 + 3)


@lru_cache(maxsize=None)
def _leaf_cap8(n):
    """Bits one PVQ leaf can absorb under the pulse and codebook caps."""
    lo, hi = 0, K_MAX
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if codebook_size(n, mid) <= (1 << 32) - 1:
            lo = mid
        else:
            hi = mid - 1
    v = codebook_size(n, lo)
    return log2_frac8(v) if v > 1 else 0


@lru_cache(maxsize=None)
def _usable8(n, depth):
    """Largest budget the split recursion can actually consume for an
    n-coefficient vector: leaves stop at the split threshold, splits pay
    for an angle and recurse."""
    leaf = min(_leaf_cap8(n), SPLIT_THRESHOLD8)
    if n < 4 or depth >= SPLIT_MAX_DEPTH:
        return _leaf_cap8(n)
    h = n // 2
    return max(leaf, 64 + _usable8(h, depth + 1) + _usable8(n - h, depth + 1))


@lru_cache(maxsize=None)
def band_cap8(width, c_eff):
    """Upper bound on the eighth-bits one band can actually absorb."""
    return c_eff * _usable8(width, 0) + 8


@dataclass
class AllocParams:
    """Coded side-channel of the allocator."""
    tilt: int = 0
    boosts8: tuple = (0,) * 21
    intensity: int = 21      # first intensity-coded band; nbands = none
    dual: bool = False


@dataclass
class AllocResult:
    coded: list              # per band: receives shape/fine bits at all
    shape8: list             # PVQ budget per band (all channels)
    fine: list               # per band (bits, pre-round eighth value)
    c_eff: list              # channels after intensity coupling
    quality: int = 0
    granted8: int = 0
    skip_flags: list = field(default_factory=list)


def _interp_proto(q, band):
    row, frac = divmod(q, 64)
    if row >= N_QUALITY - 1:
        return PROTO64[N_QUALITY - 1][band]
    a = PROTO64[row][band]
    b = PROTO64[row + 1][band]
    return a + (((b - a) * frac) >> 6)


def _grant8(q, band, width, c_eff, tilt, boost8):
    g = (_interp_proto(q, band) * width * c_eff) >> 3
    g += (tilt * (band - 10) * width * c_eff) >> 3
    g += boost8
    return max(0, min(band_cap8(width, c_eff), g))


def estimate_band_grants(layout, channels, total8):
    """Skip-free per-band grant estimate (both channels), for encoder-side
    heuristics that need a picture of the allocation before the coded
    parameters exist."""
    nb = layout.nbands
    widths = [layout.width(b) for b in range(nb)]

    def total(q):
        return sum(min(band_cap8(widths[b], channels),
                       (_interp_proto(q, b) * widths[b] * channels) >> 3)
                   for b in range(nb))

    lo, hi = 0, Q_STEPS
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if total(mid) <= total8:
            lo = mid
        else:
            hi = mid - 1
    return [min(band_cap8(widths[b], channels),
                (_interp_proto(lo, b) * widths[b] * channels) >> 3)
            for b in range(nb)]


def compute_allocation(coder, encode, layout, channels, total8, params,
                       prev_coded=None):
    """Partition total8 eighth-bits among bands; codes/reads skip flags.

    Returns an AllocResult.  Called at the same stream position by both
    sides; `prev_coded` feeds the encoder's skip hysteresis only.
    """
    nb = layout.nbands
    widths = [layout.width(b) for b in range(nb)]
    c_eff = [1 if (channels == 2 and b >= params.intensity) else channels
             for b in range(nb)]
    thresh = [skip_threshold8(widths[b], c_eff[b]) for b in range(nb)]
    total8 = max(0, total8)
    dropped = [False] * nb
    memo = {}

    def grants(q):
        key = (q, tuple(dropped))
        got = memo.get(key)
        if got is None:
            got = [0 if dropped[b] else
                   _grant8(q, b, widths[b], c_eff[b], params.tilt, params.boosts8[b])
                   for b in range(nb)]
            memo[key] = got
        return got

    def best_quality():
        lo, hi = 0, Q_STEPS
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if sum(grants(mid)) <= total8:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def drop_closure(q):
        changed = True
        while changed:
            changed = False
            g = grants(q)
            for b in range(nb):
                if not dropped[b] and g[b] < thresh[b]:
                    dropped[b] = True
                    changed = True
            if changed:
                q = best_quality()
        return q

    q = drop_closure(best_quality())

    # explicit skip signaling, highest marginal band first
    skip_flags = []
    while True:
        coded = [b for b in range(nb) if not dropped[b]]
        if not coded:
            break
        top = coded[-1]
        g = grants(q)
        if g[top] * 4 >= 5 * thresh[top]:
            break
        if encode:
            keep = bool(prev_coded is not None and prev_coded[top]
                        and g[top] >= thresh[top])
            coder.encode_bit(1 if keep else 0, 1)
        else:
            keep = coder.decode_bit(1) == 1
        skip_flags.append((top, keep))
        if keep:
            break
        dropped[top] = True
        q = drop_closure(best_quality())

    g = grants(q)
    granted = sum(g)
    if granted > total8:
        # boosts or tilt overflowed the budget at quality 0: clip the
        # grants cumulatively and silently drop bands that fall under the
        # threshold (the decoder walks the same path)
        remaining = total8
        for b in range(nb):
            g[b] = min(g[b], remaining)
            remaining -= g[b]
        for b in range(nb):
            if not dropped[b] and g[b] < thresh[b]:
                dropped[b] = True
                g[b] = 0
    coded = [b for b in range(nb) if not dropped[b]]
    granted = sum(g)
    rem = total8 - granted
    if coded and rem > 0:
        wtot = sum(widths[b] * c_eff[b] for b in coded)
        for b in coded:
            add = rem * widths[b] * c_eff[b] // wtot
            room = band_cap8(widths[b], c_eff[b]) - g[b]
            g[b] += min(add, room)
        granted = sum(g)
        scraps = total8 - granted
        for b in coded:
            if scraps <= 0:
                break
            room = band_cap8(widths[b], c_eff[b]) - g[b]
            take = min(room, scraps)
            g[b] += take
            scraps -= take
        granted = sum(g)

    shape8 = [0] * nb
    fine = [(0, 0)] * nb
    for b in coded:
        ndof = widths[b] * c_eff[b]
        if c_eff[b] == 2 and not params.dual and widths[b] >= 2:
            ndof += 1  # the coupling angle is one more degree of freedom
        a_f, v8 = fine_bits(g[b], ndof)
        a_f = min(a_f, g[b] // (8 * channels))
        fine[b] = (a_f, v8)
        shape8[b] = g[b] - 8 * a_f * channels
    return AllocResult(coded=[not d for d in dropped], shape8=shape8,
                       fine=fine, c_eff=c_eff, quality=q, granted8=granted,
                       skip_flags=skip_flags)


def code_alloc_params(coder, params, channels, budget8):
    """Write tilt, boosts, intensity and dual; mirrored by
    decode_alloc_params.  Fields are silently defaulted when the frame is
    too small to carry them (the decoder makes the same check)."""
    if budget8 - coder.tell_frac() >= _PARAM_ROOM8:
        coder.encode_uniform(params.tilt + TILT_LIMIT, 2 * TILT_LIMIT + 1)
    logp = 6
    for b in range(21):
        if budget8 - coder.tell_frac() < _PARAM_ROOM8:
            break
        steps = min(BOOST_MAX_STEPS, params.boosts8[b] // BOOST_QUANTUM8)
        coder.encode_bit(1 if steps > 0 else 0, logp)
        if steps > 0:
            for _ in range(steps - 1):
                coder.encode_bit(1, 1)
            if steps < BOOST_MAX_STEPS:
                coder.encode_bit(0, 1)
            logp = max(2, logp - 1)
    if channels == 2:
        if budget8 - coder.tell_frac() >= _PARAM_ROOM8:
            coder.encode_uniform(params.intensity, 22)
            coder.encode_bit(1 if params.dual else 0, 1)


def decode_alloc_params(coder, channels, budget8):
    params = AllocParams()
    if budget8 - coder.tell_frac() >= _PARAM_ROOM8:
        params.tilt = coder.decode_uniform(2 * TILT_LIMIT + 1) - TILT_LIMIT
    boosts = [0] * 21
    logp = 6
    for b in range(21):
        if budget8 - coder.tell_frac() < _PARAM_ROOM8:
            break
        if coder.decode_bit(logp):
            steps = 1
            while steps < BOOST_MAX_STEPS and coder.decode_bit(1):
                steps += 1
            boosts[b] = steps * BOOST_QUANTUM8
            logp = max(2, logp - 1)
    params.boosts8 = tuple(boosts)
    if channels == 2:
        if budget8 - coder.tell_frac() >= _PARAM_ROOM8:
            params.intensity = coder.decode_uniform(22)
            params.dual = coder.decode_bit(1) == 1
    return params
