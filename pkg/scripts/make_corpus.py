#!/usr/bin/env python3
"""Write the bundled synthetic test corpus as WAV files.

Usage: python scripts/make_corpus.py [outdir] [--seconds S] [--stereo]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from celtlab.cli import write_wav  # noqa: E402
from celtlab.corpus import corpus  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="corpus")
    ap.add_argument("--seconds", type=float, default=1.0)
    ap.add_argument("--stereo", action="store_true")
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    for name, pcm in corpus(args.seconds, stereo=args.stereo).items():
        path = os.path.join(args.outdir, f"{name}.wav")
        write_wav(path, pcm)
        print(path)


if __name__ == "__main__":
    main()
