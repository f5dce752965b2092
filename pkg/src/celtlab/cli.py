"""Command-line tool: WAV encode/decode, stream inspection, objective
metrics and a cascading-transcode harness.

Subcommands: encode, decode, probe, metric, cascade.  Only 48 kHz mono or
stereo WAV input is accepted (16/24-bit PCM or 32-bit float).
"""

import argparse
import sys

import numpy as np
import scipy.io.wavfile

from .codec import (EncoderOptions, MIN_PACKET_BYTES, decode_stream,
                    encode_stream, read_stream, write_stream)
from .config import FRAME_SIZES, SAMPLE_RATE, FrameConfig
from .entropy import CorruptStream

SEG_SNR_CAP_DB = 99.0
_SEG = 480          # 10 ms segments for segmental SNR
_LSD_N = 1024       # spectrum size for log-spectral distance


def read_wav(path):
    """Returns (channels, samples) float64 in [-1, 1]; validates format."""
    rate, data = scipy.io.wavfile.read(path)
    if rate != SAMPLE_RATE:
        raise ValueError(f"only {SAMPLE_RATE} Hz input is supported, got {rate}")
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[1] not in (1, 2):
        raise ValueError(f"only mono/stereo supported, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        x = data / 32768.0
    elif data.dtype == np.int32:
        x = data / 2147483648.0
    elif data.dtype == np.float32 or data.dtype == np.float64:
        x = data.astype(np.float64)
    elif data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype}")
    return np.ascontiguousarray(x.T.astype(np.float64))


def write_wav(path, pcm):
    scipy.io.wavfile.write(path, SAMPLE_RATE, np.ascontiguousarray(pcm.T).astype(np.float32))


def segmental_snr(ref, test):
    """Mean per-segment SNR in dB over 10 ms segments, capped at 99 dB."""
    n = min(ref.shape[-1], test.shape[-1])
    nseg = n // _SEG
    if nseg == 0:
        return SEG_SNR_CAP_DB
    r = ref[..., :nseg * _SEG].reshape(-1, nseg, _SEG)
    t = test[..., :nseg * _SEG].reshape(-1, nseg, _SEG)
    es = np.sum(r * r, axis=-1)
    en = np.sum((r - t) ** 2, axis=-1)
    snr = 10.0 * np.log10((es + 1e-12) / (en + 1e-12))
    return float(np.mean(np.clip(snr, -10.0, SEG_SNR_CAP_DB)))


def log_spectral_distance(ref, test):
    """RMS distance between log power spectra (dB), 1024-point frames with
    50% overlap, averaged over channels."""
    n = min(ref.shape[-1], test.shape[-1])
    if n < _LSD_N:
        return 0.0
    w = np.hanning(_LSD_N)
    dists = []
    for c in range(ref.shape[0]):
        acc = []
        for start in range(0, n - _LSD_N + 1, _LSD_N // 2):
            R = np.fft.rfft(ref[c, start:start + _LSD_N] * w)
            T = np.fft.rfft(test[c, start:start + _LSD_N] * w)
            lr = 10 * np.log10(np.abs(R) ** 2 + 1e-9)
            lt = 10 * np.log10(np.abs(T) ** 2 + 1e-9)
            acc.append(np.sqrt(np.mean((lr - lt) ** 2)))
        dists.append(np.mean(acc))
    return float(np.mean(dists))


def band_energy_error(ref, test):
    """Mean absolute per-band energy error in dB (21-band layout on 20 ms
    long-block spectra)."""
    from . import bands, transform
    lay = bands.band_layout(960)
    n = min(ref.shape[-1], test.shape[-1])
    nf = n // 960
    if nf < 2:
        return 0.0
    errs = []
    for c in range(ref.shape[0]):
        prev_r = np.zeros(120)
        prev_t = np.zeros(120)
        for t in range(nf):
            fr = ref[c, t * 960:(t + 1) * 960]
            ft = test[c, t * 960:(t + 1) * 960]
            er = bands.band_energy(transform.forward_mdct(prev_r, fr, 1), lay)
            et = bands.band_energy(transform.forward_mdct(prev_t, ft, 1), lay)
            prev_r, prev_t = fr[-120:], ft[-120:]
            errs.append(np.abs(er - et))
    return float(np.mean(errs) * 6.02)


def metric_report(ref, test, label="metric"):
    if ref.shape != test.shape:
        raise ValueError(f"length mismatch: ref {ref.shape} vs test {test.shape}")
    if np.array_equal(ref, test):
        seg, lsd, be = SEG_SNR_CAP_DB, 0.0, 0.0
    else:
        seg = segmental_snr(ref, test)
        lsd = log_spectral_distance(ref, test)
        be = band_energy_error(ref, test)
    return f"{label} segsnr_db={seg:.3f} lsd_db={lsd:.3f} band_err_db={be:.3f}"


def _encode_to_stream(pcm, args):
    cfg = FrameConfig(args.frame, pcm.shape[0])
    base = int(round(args.bitrate * cfg.frame_size / (48000.0 * 8.0)))
    if base < MIN_PACKET_BYTES:
        raise ValueError(f"bitrate {args.bitrate} too low for {args.frame} ms frames")
    opt = EncoderOptions(bitrate=args.bitrate, vbr=args.vbr,
                         complexity=args.complexity)
    return encode_stream(pcm, cfg, opt)


def cmd_encode(args):
    pcm = read_wav(args.input)
    header, packets, infos = _encode_to_stream(pcm, args)
    write_stream(args.output, header, packets)
    total_bytes = sum(len(p) for p in packets)
    dur = pcm.shape[1] / SAMPLE_RATE
    mean_rate = total_bytes * 8 / dur if dur else 0.0
    transients = sum(1 for i in infos if i.transient)
    waste = [i.waste8 / 8.0 for i in infos]
    print(f"frames={len(packets)} mean_rate_bps={mean_rate:.0f} "
          f"transients={transients} mean_waste_bits={np.mean(waste):.2f} "
          f"max_waste_bits={max(waste):.2f}", file=sys.stderr)
    return 0


def cmd_decode(args):
    header, packets, truncated = read_stream(args.input)
    if truncated:
        print("warning: truncated final packet dropped", file=sys.stderr)
    pcm, _ = decode_stream(header, packets)
    write_wav(args.output, pcm)
    return 0


def cmd_probe(args):
    header, packets, truncated = read_stream(args.input)
    print(f"stream channels={header.channels} frame_ms={header.duration_ms} "
          f"mode={'vbr' if header.vbr else 'cbr'} bitrate={header.bitrate} "
          f"samples={header.sample_count} frames={len(packets)}")
    cfg = header.config
    from .codec import Decoder
    dec = Decoder(cfg)
    for t, payload in enumerate(packets):
        _, info = dec.decode_frame(payload, want_info=True)
        boosts = sum(1 for x in info.boosts8 if x)
        skips = sum(1 for _, keep in info.skip_flags if not keep)
        nth = len(info.thetas)
        mth = (sum(it / qn for it, qn in info.thetas) / nth) if nth else 0.0
        pf = info.pitch
        print(f"frame={t} bytes={info.nbytes} transient={int(info.transient)} "
              f"intra={int(info.intra)} pf={int(pf.enabled)} period={pf.period} "
              f"gain_q={pf.gain_q} tapset={pf.tapset} tilt={info.tilt} "
              f"boosts={boosts} intensity={info.intensity} dual={int(info.dual)} "
              f"spread={info.spread_code} skips={skips} "
              f"coded={sum(info.coded)} tf={sum(info.tf_flags)} "
              f"thetas={nth} theta_mean={mth:.3f} waste8={info.waste8}")
    if truncated:
        print("warning: truncated final packet dropped", file=sys.stderr)
    return 0


def cmd_metric(args):
    ref = read_wav(args.reference)
    test = read_wav(args.test)
    if ref.shape != test.shape:
        print(f"error: inputs differ in shape {ref.shape} vs {test.shape}",
              file=sys.stderr)
        return 1
    print(metric_report(ref, test))
    return 0


def cmd_cascade(args):
    pcm = read_wav(args.input)
    ref = pcm
    cur = pcm
    for g in range(1, args.generations + 1):
        header, packets, _ = _encode_to_stream(cur, args)
        cur, _ = decode_stream(header, packets)
        print(metric_report(ref, cur, label=f"generation={g}"))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="celtlab",
                                description="low-delay transform audio codec")
    sub = p.add_subparsers(dest="command", required=True)

    def add_rate_opts(q):
        q.add_argument("--bitrate", type=int, default=64000,
                       help="target bitrate in bits/s (default 64000)")
        q.add_argument("--frame", type=float, default=20.0,
                       choices=sorted(FRAME_SIZES), help="frame duration ms")
        g = q.add_mutually_exclusive_group()
        g.add_argument("--cbr", dest="vbr", action="store_false", default=False)
        g.add_argument("--vbr", dest="vbr", action="store_true")
        q.add_argument("--complexity", type=int, default=2, choices=(0, 1, 2))

    e = sub.add_parser("encode", help="WAV -> .clt stream")
    e.add_argument("input"); e.add_argument("output")
    add_rate_opts(e)
    e.set_defaults(fn=cmd_encode)

    d = sub.add_parser("decode", help=".clt stream -> WAV")
    d.add_argument("input"); d.add_argument("output")
    d.set_defaults(fn=cmd_decode)

    pr = sub.add_parser("probe", help="dump per-frame coded parameters")
    pr.add_argument("input")
    pr.set_defaults(fn=cmd_probe)

    m = sub.add_parser("metric", help="objective quality of test vs reference")
    m.add_argument("reference"); m.add_argument("test")
    m.set_defaults(fn=cmd_metric)

    c = sub.add_parser("cascade", help="re-encode repeatedly, metric per generation")
    c.add_argument("input")
    c.add_argument("--generations", type=int, default=5)
    add_rate_opts(c)
    c.set_defaults(fn=cmd_cascade)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, CorruptStream, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
