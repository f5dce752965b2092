"""Pyramid vector quantization: codebook counting and index coding, the
encoder search, recursive band splitting, and the three stereo coupling
modes (mid-side, dual, intensity).

Vectors are integer pulse patterns y with sum |y_i| = K; the codeword index
is a bijection onto [0, V(N,K)) derived from the codebook recurrence.  All
decoder-visible decisions (K choice, split budgets, angle resolutions) are
integer arithmetic only.
"""

import math

import numpy as np

from . import entropy
from .bands import spread
from .energy_q import fine_bits
from .fixedmath import log2_frac8, qcos14, qsin14

K_MAX = 128                 # pulse cap per coded vector
V_MAX = (1 << 32) - 1       # per-leaf codebook size guard
SPLIT_THRESHOLD8 = 32 * 8   # split bands allocated more than 32 bits
SPLIT_MAX_DEPTH = 4

_vrows = [[1]]  # _vrows[n][k] = V(n, k)


def codebook_size(N, K):
    """V(N,K): number of integer vectors of length N with L1 norm K.

    V(N,0)=1, V(0,K)=0 for K>0, and
    V(N,K) = V(N,K-1) + V(N-1,K) + V(N-1,K-1).
    """
    if K < 0 or N < 0:
        return 0
    if K == 0:
        return 1
    if N == 0:
        return 0
    while len(_vrows) <= N:
        _vrows.append([1])
    row0 = _vrows[0]
    while len(row0) <= K:
        row0.append(0)
    for n in range(1, N + 1):
        row = _vrows[n]
        prow = _vrows[n - 1]
        while len(row) <= K:
            k = len(row)
            row.append(row[k - 1] + prow[k] + prow[k - 1])
    return _vrows[N][K]


def encode_index(y):
    """Bijective codeword index of a pulse vector.

    Vectors sharing a prefix are ordered with y_i = 0 first, then
    +1, -1, +2, -2, ... at each position."""
    y = [int(v) for v in y]
    K = sum(abs(v) for v in y)
    n = len(y)
    idx = 0
    k = K
    for v in y:
        if k == 0:
            break
        if v != 0:
            idx += codebook_size(n - 1, k)
            for m in range(1, abs(v)):
                idx += 2 * codebook_size(n - 1, k - m)
            if v < 0:
                idx += codebook_size(n - 1, k - abs(v))
        k -= abs(v)
        n -= 1
    return idx


def decode_index(index, N, K):
    """Inverse of encode_index.  Raises CorruptStream past the codebook."""
    V = codebook_size(N, K)
    if not 0 <= index < V:
        raise entropy.CorruptStream(f"PVQ index {index} >= V({N},{K})={V}")
    y = np.zeros(N, dtype=np.int64)
    k = K
    n = N
    for i in range(N):
        if k == 0:
            break
        zero_count = codebook_size(n - 1, k)
        if index < zero_count:
            y[i] = 0
        else:
            index -= zero_count
            m = 1
            while True:
                span = codebook_size(n - 1, k - m)
                if index < 2 * span:
                    y[i] = m if index < span else -m
                    if index >= span:
                        index -= span
                    break
                index -= 2 * span
                m += 1
            k -= m
        n -= 1
    return y


def code_index_hybrid(coder, index, V):
    """Uniform index coding with the large-codebook split: the high part is
    range-coded and the low bits go to the raw region."""
    coder.encode_uniform(index, V)


def decode_index_hybrid(coder, V):
    return coder.decode_uniform(V)


def choose_K(N, budget8):
    """Largest pulse count whose codebook fits the budget (one bit slack),
    subject to the pulse and codebook-size caps.  Pure integer math."""
    if N < 1 or budget8 <= 0:
        return 0
    limit = 1 << (budget8 + 8)

    def fits(K):
        V = codebook_size(N, K)
        return V <= V_MAX and V ** 8 < limit

    lo, hi = 0, K_MAX
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if fits(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def pvq_search(x, K):
    """Greedy nearest-codeword search on the unit sphere.

    Projection seeds floor(K |x_i| / sum|x|) pulses, then the rest go one at
    a time to the position maximizing correlation per unit energy.  Ties
    break toward the lowest index so the result is deterministic."""
    x = np.asarray(x, dtype=np.float64)
    N = len(x)
    ax = np.abs(x)
    s = np.sum(ax)
    y = np.zeros(N, dtype=np.int64)
    if K <= 0:
        return y
    if s > 1e-30:
        y = np.floor(K * ax / s).astype(np.int64)
        while np.sum(y) > K:  # guard against rounding overshoot
            y[np.argmax(y)] -= 1
    sxy = float(np.dot(ax, y))
    syy = float(np.dot(y, y))
    for _ in range(K - int(np.sum(y))):
        num = (sxy + ax) ** 2
        den = syy + 2.0 * y + 1.0
        i = int(np.argmax(num / den))
        sxy += ax[i]
        syy += 2.0 * y[i] + 1.0
        y[i] += 1
    # single-pulse exchange refinement: move one pulse wherever it raises
    # the normalized correlation, until a fixed point
    for _ in range(8):
        improved = False
        for i in np.nonzero(y)[0]:
            base_c = sxy - ax[i]
            base_e = syy - 2.0 * y[i] + 1.0
            gain = (base_c + ax) ** 2 / (base_e + 2.0 * y + 1.0)
            gain[i] = -1.0
            j = int(np.argmax(gain))
            if gain[j] > (sxy * sxy) / syy + 1e-15:
                y[i] -= 1
                y[j] += 1
                sxy = base_c + ax[j]
                syy = base_e + 2.0 * y[j] - 1.0
                improved = True
        if not improved:
            break
    return y * np.where(x < 0, -1, 1).astype(np.int64)


# -- stereo / split geometry -------------------------------------------


def ms_couple(xl, xr):
    """Orthogonal mid/side with the energy-ratio angle.

    Returns (m, s, theta): unit mid and side (zero when degenerate) and
    theta = arctan(||S||/||M||) in [0, pi/2]."""
    M = 0.5 * (xl + xr)
    S = 0.5 * (xl - xr)
    nm = float(np.linalg.norm(M))
    ns = float(np.linalg.norm(S))
    if nm < 1e-15 and ns < 1e-15:
        return np.zeros_like(M), np.zeros_like(S), 0.0
    theta = math.atan2(ns, nm)
    m = M / nm if nm > 1e-15 else np.zeros_like(M)
    s = S / ns if ns > 1e-15 else np.zeros_like(S)
    return m, s, theta


def ms_decouple(m, s, theta):
    """Reconstruct unit left/right from unit mid/side and the angle."""
    c, sn = math.cos(theta), math.sin(theta)
    xl = c * m + sn * s
    xr = c * m - sn * s
    nl = np.linalg.norm(xl)
    nr = np.linalg.norm(xr)
    if nl > 1e-15:
        xl = xl / nl
    if nr > 1e-15:
        xr = xr / nr
    return xl, xr


def mid_allocation(a8, N, theta):
    """Reference mid budget (eighth-bits) for a band of size N at angle
    theta: (a - (N-1) log2 tan(theta)) / 2, clamped to [0, a]."""
    if theta <= 0:
        return a8
    if theta >= 0.5 * math.pi:
        return 0
    delta8 = int(round(8.0 * (N - 1) * math.log2(math.tan(theta))))
    return max(0, min(a8, (a8 - delta8 + 1) // 2))


def _mid_allocation8(a8, N, imid, iside):
    """Bitstream version of mid_allocation on Q14 cos/sin, integer only."""
    if iside <= 0:
        return a8
    if imid <= 0:
        return 0
    delta8 = (N - 1) * (log2_frac8(iside) - log2_frac8(imid))
    return max(0, min(a8, (a8 - delta8 + 1) // 2))


def intensity_encode(xl, xr):
    """Mid vector plus the phase-inversion flag for an intensity band."""
    m = xl + xr
    n = np.linalg.norm(m)
    invert = bool(np.dot(xl, xr) < 0)
    if n > 1e-15:
        m = m / n
    else:
        # anti-phase channels: keep the left shape
        m = xl.copy()
        invert = True
    return m, invert


def theta_levels(b8, N):
    """Angle quantizer resolution derived like the fine-energy allocation."""
    bits, _ = fine_bits(b8, N)
    return 1 << max(0, min(8, bits))


class ShapeCoder:
    """Shared recursive shape codec for one band.

    Runs identically on both sides: `enc` carries a RangeEncoder and input
    vectors, otherwise vectors are decoded.  Reconstructions are produced in
    both modes so the encoder can maintain a decoder-exact picture."""

    def __init__(self, coder, encode, delta, blocks, theta_log=None):
        self.coder = coder
        self.encode = encode
        self.delta = delta  # spreading constant, 0 = disabled
        self.B = blocks     # short blocks covered by the band
        self.theta_log = theta_log

    # budget helpers ----------------------------------------------------

    def _used_since(self, t0):
        return self.coder.tell_frac() - t0

    # leaf --------------------------------------------------------------

    def _leaf(self, x, N, b8, blocks, block0):
        K = choose_K(N, b8)
        if K == 0:
            return np.zeros(N), 0
        if self.encode:
            xs = self._spread_fwd(x, K, blocks)
            y = pvq_search(xs, K)
            code_index_hybrid(self.coder, encode_index(y), codebook_size(N, K))
        else:
            idx = decode_index_hybrid(self.coder, codebook_size(N, K))
            y = decode_index(idx, N, K)
        mask = self._pulse_mask(y, blocks, block0)
        v = y / np.linalg.norm(y)
        return self._spread_inv(v, K, blocks), mask

    def _segments(self, N, blocks):
        seg = N // blocks if blocks > 0 else N
        if seg < 2 or blocks < 1:
            return [(0, N)]
        return [(i * seg, (i + 1) * seg) for i in range(blocks)]

    def _spread_fwd(self, x, K, blocks):
        if self.delta <= 0:
            return x
        out = np.array(x)
        for a, b in self._segments(len(x), blocks):
            out[a:b] = spread(out[a:b], K, self.delta)
        return out

    def _spread_inv(self, x, K, blocks):
        if self.delta <= 0:
            return x
        out = np.array(x)
        for a, b in self._segments(len(x), blocks):
            out[a:b] = spread(out[a:b], K, self.delta, inverse=True)
        return out

    def _pulse_mask(self, y, blocks, block0):
        if blocks <= 1:
            return 1 << block0 if np.any(y != 0) else 0
        per = max(1, len(y) // blocks)
        mask = 0
        for i in np.nonzero(y)[0]:
            mask |= 1 << (block0 + min(int(i) // per, blocks - 1))
        return mask

    # split tree ---------------------------------------------------------

    def _code_theta(self, qn, theta):
        """Uniform angle index in [0, qn]; returns (itheta, imid, iside)."""
        if qn <= 1:
            it = 0
        elif self.encode:
            it = int(round(theta / (0.5 * math.pi) * qn))
            it = max(0, min(qn, it))
            self.coder.encode_uniform(it, qn + 1)
        else:
            it = self.coder.decode_uniform(qn + 1)
        if self.theta_log is not None and qn > 1:
            self.theta_log.append((it, qn))
        t = (it << 14) // qn if qn > 0 else 0
        return it, qcos14(t), qsin14(t)

    def node(self, x, N, b8, depth, blocks, block0):
        """Code one mono (sub)vector; returns (unit-or-zero vector, mask)."""
        b8 = max(0, b8)
        if b8 > SPLIT_THRESHOLD8 and depth < SPLIT_MAX_DEPTH and N >= 4:
            return self._split(x, N, b8, depth, blocks, block0)
        return self._leaf(x, N, b8, blocks, block0)

    def _split(self, x, N, b8, depth, blocks, block0):
        h = N // 2
        t0 = self.coder.tell_frac()
        qn = theta_levels(b8, N)
        if qn <= 1:
            # no angle budget: assume an even split, code both halves
            it, imid, iside = -1, qcos14(8192), qsin14(8192)
        else:
            if self.encode:
                nl, nh = np.linalg.norm(x[:h]), np.linalg.norm(x[h:])
                theta = math.atan2(nh, nl) if (nl > 1e-15 or nh > 1e-15) else 0.25 * math.pi
            else:
                theta = 0.0
            it, imid, iside = self._code_theta(qn, theta)
        rem = max(0, b8 - self._used_since(t0))
        a_first = _mid_allocation8(rem, h, imid, iside)
        if self.B > 1:
            # time split: lean allocation toward the later half
            a_first = max(0, a_first - rem // 16)
        bl = blocks // 2 if blocks > 1 else blocks
        b0_hi = block0 + bl if blocks > 1 else block0
        cm = imid / 16384.0
        cs = iside / 16384.0
        if it == 0:
            v1, m1 = self.node(self._unit(x, 0, h) if self.encode else None,
                               h, rem, depth + 1, bl, block0)
            return np.concatenate([v1, np.zeros(N - h)]), m1
        if it == qn:
            v2, m2 = self.node(self._unit(x, h, N) if self.encode else None,
                               N - h, rem, depth + 1, bl, b0_hi)
            return np.concatenate([np.zeros(h), v2]), m2
        t1 = self.coder.tell_frac()
        v1, m1 = self.node(self._unit(x, 0, h) if self.encode else None,
                           h, a_first, depth + 1, bl, block0)
        a_second = max(0, rem - self._used_since(t1))
        v2, m2 = self.node(self._unit(x, h, N) if self.encode else None,
                           N - h, a_second, depth + 1, bl, b0_hi)
        out = np.concatenate([cm * v1, cs * v2])
        n = np.linalg.norm(out)
        if n > 1e-15:
            out = out / n
        return out, m1 | m2

    @staticmethod
    def _unit(x, a, b):
        if x is None:
            return None
        seg = x[a:b]
        n = np.linalg.norm(seg)
        return seg / n if n > 1e-15 else np.zeros(b - a)


def code_band_mono(coder, encode, x, N, b8, blocks, delta, theta_log=None):
    """Top-level mono band shape coding; x is the unit band vector on the
    encoder side (block-planar order for transient frames)."""
    sc = ShapeCoder(coder, encode, delta, blocks, theta_log)
    return sc.node(x, N, b8, 0, blocks, 0)


def code_band_stereo(coder, encode, xl, xr, N, b8, blocks, delta, dual, intensity,
                     theta_log=None):
    """Stereo band coding in one of the three coupling modes.

    Returns (left, right, mask); vectors are unit or zero, pre-denormalize.
    """
    sc = ShapeCoder(coder, encode, delta, blocks, theta_log)
    t0 = coder.tell_frac()
    if intensity:
        if encode:
            m, inv = intensity_encode(xl, xr)
            coder.encode_bit(1 if inv else 0, 1)
        else:
            inv = coder.decode_bit(1) == 1
            m = None
        rem = max(0, b8 - (coder.tell_frac() - t0))
        v, mask = sc.node(m, N, rem, 0, blocks, 0)
        return v, -v if inv else v.copy(), mask
    if dual:
        half = b8 // 2
        t1 = coder.tell_frac()
        vl, ml = sc.node(xl, N, half, 0, blocks, 0)
        rem = max(0, b8 - (coder.tell_frac() - t1))
        vr, mr = sc.node(xr, N, rem, 0, blocks, 0)
        return vl, vr, ml | mr
    # mid-side
    qn = theta_levels(b8, N + 1)
    if encode:
        m, s, theta = ms_couple(xl, xr)
    else:
        m = s = None
        theta = 0.0
    it, imid, iside = sc._code_theta(qn, theta)
    rem = max(0, b8 - (coder.tell_frac() - t0))
    if it == 0:
        v, mask = sc.node(m, N, rem, 0, blocks, 0)
        return v, v.copy(), mask
    if it == qn:
        v, mask = sc.node(s, N, rem, 0, blocks, 0)
        return v, -v, mask
    cm = imid / 16384.0
    cs = iside / 16384.0
    if N == 2:
        # the side of a 2-dim band is +-(mid rotated a quarter turn)
        t1 = coder.tell_frac()
        vm, mask = sc.node(m, 2, max(0, rem - 8), 0, blocks, 0)
        if not np.any(vm):
            vm = np.array([1.0, 0.0])
        orth = np.array([-vm[1], vm[0]])
        if encode:
            sign = 1 if float(np.dot(s, orth)) >= 0 else -1
            coder.write_raw(0 if sign > 0 else 1, 1)
        else:
            sign = -1 if coder.read_raw(1) else 1
        vs = sign * orth
        xl_h = cm * vm + cs * vs
        xr_h = cm * vm - cs * vs
    else:
        a_mid = _mid_allocation8(rem, N, imid, iside)
        t1 = coder.tell_frac()
        vm, mm = sc.node(m, N, a_mid, 0, blocks, 0)
        a_side = max(0, rem - (coder.tell_frac() - t1))
        vs, msk = sc.node(s, N, a_side, 0, blocks, 0)
        mask = mm | msk
        xl_h = cm * vm + cs * vs
        xr_h = cm * vm - cs * vs
    nl, nr = np.linalg.norm(xl_h), np.linalg.norm(xr_h)
    if nl > 1e-15:
        xl_h /= nl
    if nr > 1e-15:
        xr_h /= nr
    if N == 2:
        mask |= (1 << blocks) - 1  # explicit side energy reaches every block
    return xl_h, xr_h, mask
