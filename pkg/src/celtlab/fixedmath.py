"""Integer fixed-point helpers shared by the bit-exact decision paths.

Everything the decoder must reproduce exactly (allocation, pulse counts,
angle budgets) goes through these instead of libm, so the coded stream does
not depend on platform math libraries.
"""


def ilog2(x):
    """Position of the highest set bit plus one; ilog2(0) == 0."""
    return x.bit_length()


def log2_frac8(x):
    """Floor of 8*log2(x) for integer x >= 1, in eighth-bit units.

    Three fractional bits are extracted by repeated squaring of a Q15
    mantissa, which keeps the whole computation in integers.
    """
    if x <= 0:
        raise ValueError("log2_frac8 needs a positive integer")
    l = x.bit_length() - 1
    m = (x << 15) >> l  # Q15 mantissa in [2^15, 2^16)
    f = 0
    for _ in range(3):
        m = (m * m) >> 15
        b = m >> 16
        f = (f << 1) | b
        m >>= b
    return (l << 3) | f


# Quarter-turn cosine, Q14 in and out.  Max abs error vs cos is ~6e-4,
# plenty for allocation biasing; endpoints are pinned exactly.
_QCOS_C = (13, -20446, 894, 3155)


def qcos14(t):
    """cos(0.5*pi*t/16384) in Q14 for t in [0, 16384]."""
    if t <= 0:
        return 16384
    if t >= 16384:
        return 0
    acc = _QCOS_C[3]
    for c in (_QCOS_C[2], _QCOS_C[1], _QCOS_C[0]):
        acc = c + ((t * acc) >> 14)
    return 16384 + ((t * acc) >> 14)


def qsin14(t):
    return qcos14(16384 - t)
