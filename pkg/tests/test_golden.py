"""Golden vectors: committed streams pin the bitstream format.

Three checks per case: re-encoding the deterministic input reproduces the
committed packets byte for byte; decoding the committed stream yields the
committed parameter trace; and the decoded waveform matches the committed
reference.
"""

import os

import numpy as np
import pytest

from celtlab import codec
from celtlab.config import FrameConfig
from celtlab.corpus import corpus

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

CASES = {
    "mono20": dict(signal="mix", stereo=False, dur=20, bitrate=48000,
                   seconds=0.4),
    "stereo5": dict(signal="tone", stereo=True, dur=5, bitrate=64000,
                    seconds=0.2),
}


def _load(name):
    header, packets, trunc = codec.read_stream(os.path.join(GOLDEN, f"{name}.clt"))
    assert not trunc
    with open(os.path.join(GOLDEN, f"{name}_trace.txt")) as f:
        trace = f.read().strip().splitlines()
    pcm = np.load(os.path.join(GOLDEN, f"{name}_pcm.npy"))
    return header, packets, trace, pcm


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_reencode_byte_identical(name):
    spec = CASES[name]
    header, packets, _, _ = _load(name)
    pcm = corpus(spec["seconds"], stereo=spec["stereo"])[spec["signal"]]
    cfg = FrameConfig(spec["dur"], pcm.shape[0])
    opt = codec.EncoderOptions(bitrate=spec["bitrate"], vbr=False, complexity=2)
    h2, p2, _ = codec.encode_stream(pcm, cfg, opt)
    assert h2.pack() == header.pack()
    assert p2 == packets


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_decode_trace_matches(name):
    from golden_util import golden_trace_lines
    header, packets, trace, _ = _load(name)
    assert golden_trace_lines(header, packets) == trace


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden_decoded_audio_matches(name):
    header, packets, _, ref = _load(name)
    out, _ = codec.decode_stream(header, packets)
    assert out.shape == ref.shape
    err = out.astype(np.float32) - ref
    assert np.sqrt(np.mean(err ** 2)) < 1e-6
