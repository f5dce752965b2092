"""Byte-wise range coder over a fixed-capacity buffer, with raw bits packed
backward from the buffer end.

Range-coded bytes grow forward from offset 0 and carry propagation is
handled by counting outstanding 0xFF bytes.  Raw (uniform) bits are written
LSB-first into bytes filled from the end of the buffer toward the front, so
the two regions meet in the middle.  The termination rule pins just enough
high bits of the final interval that the stream decodes identically no
matter what the raw-bit region contains, wasting at most one padding bit.

Decoders never fail on truncated input: bytes past either end read as zero.
"""

from .fixedmath import ilog2

_CODE_BITS = 32
_SYM_BITS = 8
_SYM_MAX = 0xFF
_TOP = 1 << (_CODE_BITS - 1)          # 2^31: upper bound for the range
_BOT = _TOP >> _SYM_BITS              # 2^23: renormalization threshold
_SHIFT = _CODE_BITS - _SYM_BITS - 1   # 23: top symbol position in the accumulator
_MASK31 = _TOP - 1

MAX_TOTAL = 1 << 16    # largest allowed cumulative-frequency total
MAX_RAW_BITS = 25      # largest single raw-bit write/read


class BudgetExceeded(Exception):
    """Raised when an encode would collide the forward and backward regions."""


class CorruptStream(Exception):
    """Raised when a decoded value is impossible for a well-formed stream."""


def _tell_frac(nbits_total, rng):
    # eighth-bit bit count: refine log2(rng) to 3 fractional bits by squaring
    nbits = nbits_total << 3
    l = ilog2(rng)
    r = rng >> (l - 16)
    for _ in range(3):
        r = (r * r) >> 15
        b = r >> 16
        l = (l << 1) | b
        r >>= b
    return nbits - l


class RangeEncoder:
    """Encoder half.  `capacity` is the frame's byte budget; finalize()
    always emits exactly that many bytes."""

    def __init__(self, capacity):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self.buf = bytearray(capacity)
        self.front = 0          # bytes of range-coded data written
        self.back = 0           # complete raw-bit bytes written (from the end)
        self._back_window = 0   # pending raw bits, LSB first
        self._back_nbits = 0
        self.low = 0
        self.rng = _TOP
        self._rem = -1          # buffered output byte awaiting carry
        self._ext = 0           # run length of buffered 0xFF bytes
        self.nbits_total = _CODE_BITS + 1

    # -- byte plumbing -------------------------------------------------

    def _write_front(self, b):
        # pending partial raw bits may legally share the last range byte;
        # finalize() verifies the bit-level fit
        if self.front + self.back >= self.capacity:
            raise BudgetExceeded("range bytes would overlap raw-bit region")
        self.buf[self.front] = b
        self.front += 1

    def _write_back(self, b):
        if self.front + self.back >= self.capacity:
            raise BudgetExceeded("raw bits would overlap range-coded region")
        self.back += 1
        self.buf[self.capacity - self.back] = b

    def _carry_out(self, c):
        # c has up to 9 bits; bit 8 is a carry into already-buffered bytes
        if c != _SYM_MAX:
            carry = c >> _SYM_BITS
            if self._rem >= 0:
                self._write_front((self._rem + carry) & _SYM_MAX)
            if self._ext > 0:
                sym = (_SYM_MAX + carry) & _SYM_MAX
                for _ in range(self._ext):
                    self._write_front(sym)
                self._ext = 0
            self._rem = c & _SYM_MAX
        else:
            self._ext += 1

    def _renorm(self):
        while self.rng <= _BOT:
            self._carry_out(self.low >> _SHIFT)
            self.low = (self.low << _SYM_BITS) & _MASK31
            self.rng <<= _SYM_BITS
            self.nbits_total += _SYM_BITS

    # -- symbol interface ----------------------------------------------

    def encode(self, fl, fh, ft):
        """Narrow the interval to [fl/ft, fh/ft)."""
        assert 0 <= fl < fh <= ft <= MAX_TOTAL
        r = self.rng // ft
        if fl > 0:
            self.low += self.rng - r * (ft - fl)
            self.rng = r * (fh - fl)
        else:
            self.rng -= r * (ft - fh)
        self._renorm()

    def encode_bit(self, bit, logp):
        """Code one bit whose probability of being set is 2**-logp."""
        ft = 1 << logp
        if bit:
            self.encode(ft - 1, ft, ft)
        else:
            self.encode(0, ft - 1, ft)

    def encode_uniform(self, value, total):
        """Uniform integer in [0, total).  Totals above 256 are split into a
        range-coded high part and raw LSBs."""
        assert 0 <= value < total
        if total <= 256:
            self.encode(value, value + 1, total)
            return
        rbits = (total - 1).bit_length() - 8
        ft = ((total - 1) >> rbits) + 1
        self.encode(value >> rbits, (value >> rbits) + 1, ft)
        self.write_raw(value & ((1 << rbits) - 1), rbits)

    def write_raw(self, value, nbits):
        """Append nbits of value (LSB first) to the backward raw stream."""
        assert 0 <= nbits <= MAX_RAW_BITS and 0 <= value < (1 << nbits)
        self._back_window |= value << self._back_nbits
        self._back_nbits += nbits
        while self._back_nbits >= 8:
            self._write_back(self._back_window & 0xFF)
            self._back_window >>= 8
            self._back_nbits -= 8
        self.nbits_total += nbits

    def tell(self):
        """Bits consumed so far, rounded up to whole bits."""
        return self.nbits_total - ilog2(self.rng)

    def tell_frac(self):
        """Bits consumed so far in eighth-bit units (upper bound to flush)."""
        return _tell_frac(self.nbits_total, self.rng)

    def finalize(self):
        """Terminate and return exactly `capacity` bytes."""
        # smallest count of pinned high bits that keeps every continuation
        # of the stream inside the final interval
        l = _CODE_BITS - ilog2(self.rng)
        msk = _MASK31 >> l
        end = (self.low + msk) & ~msk
        if (end | msk) >= self.low + self.rng:
            l += 1
            msk >>= 1
            end = (self.low + msk) & ~msk
        while l > 0:
            self._carry_out(end >> _SHIFT)
            end = (end << _SYM_BITS) & _MASK31
            l -= _SYM_BITS
        if self._rem >= 0 or self._ext > 0:
            self._carry_out(0)  # push buffered bytes; the new rem is all padding
        window = self._back_window
        used = self._back_nbits
        while used >= 8:
            self._write_back(window & 0xFF)
            window >>= 8
            used -= 8
        if used > 0:
            pos = self.capacity - self.back - 1
            if pos < 0 or pos < self.front - 1:
                raise BudgetExceeded("no room for trailing raw bits")
            if pos == self.front - 1 and -l < used:
                raise BudgetExceeded("trailing raw bits overlap range data")
            self.buf[pos] |= window & ((1 << used) - 1)
        self._back_window = 0
        self._back_nbits = 0
        return bytes(self.buf)


class RangeDecoder:
    """Decoder half.  Reads zeros past either end of the payload, so
    truncated or empty input decodes without error."""

    def __init__(self, data, capacity=None):
        self.buf = bytes(data)
        self.capacity = len(self.buf) if capacity is None else capacity
        self.front = 0
        self.back = 0
        self._back_window = 0
        self._back_nbits = 0
        # the first byte contributes 7 bits; every renormalization then
        # consumes the 8 bits straddling consecutive byte boundaries
        self.nbits_total = _CODE_BITS + 1 - 3 * _SYM_BITS
        self.rng = 1 << 7
        self._rem = self._read_front()
        self.val = self.rng - 1 - (self._rem >> 1)
        self._r = self.rng
        self._renorm()

    def _read_front(self):
        b = self.buf[self.front] if self.front < self.capacity else 0
        self.front += 1
        return b

    def _read_back(self):
        idx = self.capacity - 1 - self.back
        b = self.buf[idx] if 0 <= idx < len(self.buf) else 0
        self.back += 1
        return b

    def _renorm(self):
        while self.rng <= _BOT:
            self.nbits_total += _SYM_BITS
            self.rng <<= _SYM_BITS
            sym = self._rem
            self._rem = self._read_front()
            sym = ((sym << _SYM_BITS) | self._rem) >> 1
            self.val = ((self.val << _SYM_BITS) + (_SYM_MAX & ~sym)) & _MASK31
    # -- symbol interface ----------------------------------------------

    def decode(self, ft):
        """Return a frequency offset f in [0, ft); commit with update()."""
        assert 0 < ft <= MAX_TOTAL
        self._r = self.rng // ft
        s = self.val // self._r
        return ft - min(s + 1, ft)

    def update(self, fl, fh, ft):
        """Commit the interval of the symbol mapped from the last decode()."""
        r = self._r
        self.val -= r * (ft - fh)
        if fl > 0:
            self.rng = r * (fh - fl)
        else:
            self.rng -= r * (ft - fh)
        self._renorm()

    def decode_bit(self, logp):
        ft = 1 << logp
        f = self.decode(ft)
        if f >= ft - 1:
            self.update(ft - 1, ft, ft)
            return 1
        self.update(0, ft - 1, ft)
        return 0

    def decode_uniform(self, total):
        assert total > 0
        if total <= 256:
            f = self.decode(total)
            self.update(f, f + 1, total)
            return f
        rbits = (total - 1).bit_length() - 8
        ft = ((total - 1) >> rbits) + 1
        f = self.decode(ft)
        self.update(f, f + 1, ft)
        value = (f << rbits) | self.read_raw(rbits)
        # out-of-range only on corrupt input; clamp keeps decoding total
        return min(value, total - 1)

    def read_raw(self, nbits):
        assert 0 <= nbits <= MAX_RAW_BITS
        while self._back_nbits < nbits:
            self._back_window |= self._read_back() << self._back_nbits
            self._back_nbits += 8
        value = self._back_window & ((1 << nbits) - 1)
        self._back_window >>= nbits
        self._back_nbits -= nbits
        self.nbits_total += nbits
        return value

    def tell(self):
        return self.nbits_total - ilog2(self.rng)

    def tell_frac(self):
        return _tell_frac(self.nbits_total, self.rng)
