"""celtlab: a self-contained low-delay transform audio codec.

48 kHz MDCT coding with explicit band energies, PVQ shape quantization,
implicit bit allocation, pitch pre/postfilter, spreading rotations,
time-frequency switching and collapse prevention, plus a CLI for WAV
encode/decode, stream inspection and objective metrics.
"""

__version__ = "0.1.0"
