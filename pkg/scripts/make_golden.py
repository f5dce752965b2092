#!/usr/bin/env python3
"""Regenerate the golden vectors that pin the bitstream format.

Writes committed streams, per-frame parameter traces, and decoded PCM
references under tests/golden/.  Run only when the format intentionally
changes, and commit the results.
"""

import os
import sys

import numpy as np

_ROOT = os.path.join(os.path.dirname(__file__), "..")
sys.path.insert(0, os.path.join(_ROOT, "src"))
sys.path.insert(0, os.path.join(_ROOT, "tests"))

from celtlab import codec  # noqa: E402
from celtlab.config import FrameConfig  # noqa: E402
from celtlab.corpus import corpus  # noqa: E402
from golden_util import golden_trace_lines  # noqa: E402

OUT = os.path.join(_ROOT, "tests", "golden")

CASES = {
    "mono20": dict(signal="mix", stereo=False, dur=20, bitrate=48000,
                   seconds=0.4),
    "stereo5": dict(signal="tone", stereo=True, dur=5, bitrate=64000,
                    seconds=0.2),
}


def main():
    os.makedirs(OUT, exist_ok=True)
    for name, spec in CASES.items():
        pcm = corpus(spec["seconds"], stereo=spec["stereo"])[spec["signal"]]
        cfg = FrameConfig(spec["dur"], pcm.shape[0])
        opt = codec.EncoderOptions(bitrate=spec["bitrate"], vbr=False,
                                   complexity=2)
        header, packets, _ = codec.encode_stream(pcm, cfg, opt)
        codec.write_stream(os.path.join(OUT, f"{name}.clt"), header, packets)
        with open(os.path.join(OUT, f"{name}_trace.txt"), "w") as f:
            f.write("\n".join(golden_trace_lines(header, packets)) + "\n")
        out, _ = codec.decode_stream(header, packets)
        np.save(os.path.join(OUT, f"{name}_pcm.npy"), out.astype(np.float32))
        print(name, "frames:", len(packets))


if __name__ == "__main__":
    main()
