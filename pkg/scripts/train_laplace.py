#!/usr/bin/env python3
"""Estimate the per-band coarse-energy residual decay table.

Runs the encoder analysis over a 30-second development corpus (the bundled
synthetic signals, both mono and stereo), collects the integer prediction
residuals per (frame size, intra/inter, band), fits the two-sided geometric
decay that matches each set's mean magnitude, and prints the frozen table
for celtlab.energy_q.LAPLACE_DECAY_Q14.
"""

import os
import sys
from collections import defaultdict

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from celtlab import bands, energy_q, transform  # noqa: E402
from celtlab.config import FrameConfig  # noqa: E402
from celtlab.corpus import corpus  # noqa: E402


def collect_residuals():
    acc = defaultdict(list)  # (size_index, intra, band) -> residuals
    per_signal = 5.0  # seconds each mono + stereo -> 30 s of material
    material = list(corpus(per_signal / 2, stereo=False).values())
    material += list(corpus(per_signal / 2, stereo=True).values())
    for pcm in material:
        C = pcm.shape[0]
        for dur in (2.5, 5, 10, 20):
            cfg = FrameConfig(dur, C)
            N = cfg.frame_size
            lay = bands.band_layout(N)
            nfr = pcm.shape[1] // N
            oldE = np.full((C, lay.nbands), energy_q.E_MIN)
            st = np.zeros(C)
            tail = np.zeros((C, 120))
            for t in range(nfr):
                intra = t == 0
                alpha = 0.0 if intra else energy_q.ALPHA_INTER[cfg.size_index]
                beta = energy_q.BETA_INTRA if intra else energy_q.BETA_INTER[cfg.size_index]
                prev = [0.0] * C
                for c in range(C):
                    fr, st[c] = transform.pre_emphasis(pcm[c, t * N:(t + 1) * N], st[c])
                    E = bands.band_energy(transform.forward_mdct(tail[c], fr, 1), lay)
                    tail[c] = fr[-120:]
                    for b in range(lay.nbands):
                        x = min(max(E[b], energy_q.E_MIN), energy_q.E_MAX)
                        pred = alpha * oldE[c, b] + prev[c]
                        qi = int(np.floor(x - pred + 0.5))
                        qi = max(-energy_q.QI_BOUND, min(energy_q.QI_BOUND, qi))
                        acc[(cfg.size_index, intra, b)].append(abs(qi))
                        Ehat = min(max(pred + qi, energy_q.E_MIN), energy_q.E_MAX + 2.0)
                        oldE[c, b] = Ehat
                        prev[c] = min(max(prev[c] + (1 - beta) * qi, -40.0), 40.0)
    return acc


def decay_from_mean(m):
    # two-sided geometric with P(k) ~ g^|k|: E|k| = 2g / (1 - g^2)
    if m < 1e-3:
        return 0.02
    g = (np.sqrt(1.0 + m * m) - 1.0) / m
    return min(0.92, max(0.02, g))


def main():
    acc = collect_residuals()
    print("LAPLACE_DECAY_Q14 = (")
    for s in range(4):
        print("    (")
        for intra in (False, True):
            row = []
            for b in range(21):
                vals = acc.get((s, intra, b), [0])
                g = decay_from_mean(float(np.mean(vals)))
                row.append(int(round(g * 16384)))
            print("        (" + ", ".join(str(v) for v in row) + "),")
        print("    ),")
    print(")")


if __name__ == "__main__":
    main()
