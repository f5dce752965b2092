"""Frame-level configuration shared by every stage of the codec."""

from dataclasses import dataclass

SAMPLE_RATE = 48000
OVERLAP = 120          # fixed 2.5 ms window flank, every frame size
FRAME_SIZES = {2.5: 120, 5: 240, 10: 480, 20: 960}
DURATION_CODES = {2.5: 0, 5: 1, 10: 2, 20: 3}
CODE_DURATIONS = {v: k for k, v in DURATION_CODES.items()}


@dataclass(frozen=True)
class FrameConfig:
    """Per-stream frame geometry.

    frame_size is the MDCT coefficient count per frame (48 per ms); a
    transient frame splits into short_blocks MDCTs of frame_size/short_blocks
    coefficients each.
    """

    duration_ms: float
    channels: int

    def __post_init__(self):
        if self.duration_ms not in FRAME_SIZES:
            raise ValueError(f"unsupported frame duration {self.duration_ms}")
        if self.channels not in (1, 2):
            raise ValueError("only mono and stereo are supported")

    @property
    def frame_size(self):
        return FRAME_SIZES[self.duration_ms]

    @property
    def max_blocks(self):
        return self.frame_size // 120

    def blocks(self, transient):
        """Short-MDCT count for a frame: frame_size/120 when transient."""
        return self.max_blocks if (transient and self.max_blocks > 1) else 1

    @property
    def size_index(self):
        return DURATION_CODES[self.duration_ms]
