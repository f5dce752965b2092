"""Frame-level orchestration: the encoder and decoder pipelines, the packet
framing and the stream file format.

Coding order inside a frame (the bitstream contract):
transient flag [+ collapse-prevention flag], intra flag, postfilter params,
coarse energies, TF flags, spread decision, allocation parameters (tilt,
boosts, intensity, dual, explicit skips), fine energies, per-band
PVQ/stereo payload interleaved with raw bits, leftover energy bits.

All decoder-visible decisions are integer eighth-bit arithmetic; floats
touch only signal-path math and the (dyadic) quantized energies.
"""

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import alloc, bands, energy_q, prefilter, pvq, transform
from .config import CODE_DURATIONS, DURATION_CODES, OVERLAP, FrameConfig
from .entropy import CorruptStream, RangeDecoder, RangeEncoder

MAGIC = b"CLT1"
VERSION = 1
HEADER_LEN = 16
MIN_PACKET_BYTES = 8
MAX_PACKET_BYTES = 65535
PCM_LIMIT = 2.0      # decoder saturation bound
SYNTH_CLAMP = 64.0   # pre-postfilter clamp against corrupt streams
DEFAULT_SEED = 0x6C7A11

_TRANSIENT_LOGP = 3
_INTRA_LOGP = 3
_SPREAD_DELTAS = (0, 5, 10, 15)
_BAND_ROOM8 = 64     # stop coding bands when this little room is left
_BAND_MARGIN8 = 32   # per-band reserve against worst-case overshoot


def _seed_base():
    env = os.environ.get("CELTLAB_SEED")
    if env:
        try:
            return int(env, 0) & 0xFFFFFFFF
        except ValueError:
            pass
    return DEFAULT_SEED


@dataclass
class StreamHeader:
    channels: int
    duration_ms: float
    vbr: bool
    bitrate: int
    sample_count: int = 0

    def pack(self):
        return struct.pack("<4sBBBBII", MAGIC, VERSION, self.channels,
                           DURATION_CODES[self.duration_ms], 1 if self.vbr else 0,
                           self.bitrate, self.sample_count)

    @classmethod
    def unpack(cls, data):
        if len(data) < HEADER_LEN:
            raise CorruptStream("stream header truncated")
        magic, ver, ch, dur, mode, rate, count = struct.unpack("<4sBBBBII", data[:HEADER_LEN])
        if magic != MAGIC:
            raise CorruptStream("bad stream magic")
        if ver != VERSION:
            raise CorruptStream(f"unsupported stream version {ver}")
        if ch not in (1, 2) or dur not in CODE_DURATIONS:
            raise CorruptStream("invalid stream parameters")
        return cls(channels=ch, duration_ms=CODE_DURATIONS[dur],
                   vbr=mode == 1, bitrate=rate, sample_count=count)

    @property
    def config(self):
        return FrameConfig(self.duration_ms, self.channels)


@dataclass
class EncoderOptions:
    bitrate: int = 64000
    vbr: bool = False
    complexity: int = 2
    inter_prediction: bool = True
    collapse_override: bool | None = None  # force the frame flag, for tests


@dataclass
class FrameInfo:
    """Per-frame side data surfaced by probe and the tests."""
    nbytes: int = 0
    transient: bool = False
    collapse_flag: bool = False
    intra: bool = False
    pitch: prefilter.PitchParams = field(default_factory=prefilter.PitchParams)
    tf_flags: tuple = ()
    tf_select: int = 0
    spread_code: int = 0
    tilt: int = 0
    boosts8: tuple = (0,) * 21
    intensity: int = 21
    dual: bool = False
    skip_flags: tuple = ()
    coded: tuple = ()
    thetas: tuple = ()
    waste8: int = 0
    energies: np.ndarray | None = None
    spectrum: np.ndarray | None = None
    masks: tuple = ()


def _base_bytes(bitrate, frame_size):
    return int(round(bitrate * frame_size / (48000.0 * 8.0)))


def _flatness(power):
    p = power[power > 1e-24]
    if len(p) < 4:
        return 1.0
    return float(np.exp(np.mean(np.log(p))) / np.mean(p))


def _tf_factor(width, B, select):
    """Per-band Hadamard factor implied by the flag and frame shape."""
    if B > 1:
        k = 1 if select == 0 else max(1, B.bit_length() - 1)
    else:
        k = 1 if select == 0 else 2
    while k > 0 and width % (1 << k):
        k -= 1
    return k


class _BandCodec:
    """Shared per-frame band loop (shape path), run by both sides."""

    def __init__(self, coder, encode, cfg, layout, B, delta, allocation, params, cap8):
        self.coder = coder
        self.encode = encode
        self.cfg = cfg
        self.layout = layout
        self.B = B
        self.delta = delta
        self.alloc = allocation
        self.params = params
        self.cap8 = cap8
        self.thetas = []

    def run(self, norm_bands, tf_flags, tf_select):
        """norm_bands: encoder-side list per channel of per-band unit
        vectors (None on decode).  Returns (shapes per channel, masks)."""
        lay = self.layout
        C = self.cfg.channels
        res = self.alloc
        shapes = [[None] * lay.nbands for _ in range(C)]
        masks = [0] * lay.nbands
        coded_list = [b for b in range(lay.nbands) if res.coded[b]]
        balance = 0
        for i, b in enumerate(coded_list):
            room = self.cap8 - self.coder.tell_frac() - _BAND_MARGIN8
            if room < _BAND_ROOM8 - _BAND_MARGIN8:
                break
            share = balance // max(1, min(3, len(coded_list) - i))
            b8 = max(0, min(res.shape8[b] + share, room))
            W = lay.width(b)
            k = _tf_factor(W, self.B, tf_select) if tf_flags[b] else 0
            t0 = self.coder.tell_frac()
            if C == 1:
                x = self._prep(norm_bands[0][b], k) if self.encode else None
                v, mask = pvq.code_band_mono(self.coder, self.encode, x, W,
                                             b8, self.B, self.delta,
                                             theta_log=self.thetas)
                shapes[0][b] = self._post(v, k)
            else:
                intens = b >= self.params.intensity
                xl = self._prep(norm_bands[0][b], k) if self.encode else None
                xr = self._prep(norm_bands[1][b], k) if self.encode else None
                vl, vr, mask = pvq.code_band_stereo(
                    self.coder, self.encode, xl, xr, W, b8, self.B,
                    self.delta, self.params.dual, intens,
                    theta_log=self.thetas)
                shapes[0][b] = self._post(vl, k)
                shapes[1][b] = self._post(vr, k)
            if k > 0 and self.B > 1:
                mask = self._expand_mask(mask, k)
            masks[b] = mask
            balance += res.shape8[b] - (self.coder.tell_frac() - t0)
        return shapes, masks

    def _prep(self, x, k):
        if x is None:
            return None
        v = bands.tf_transform(x, k) if k else np.array(x)
        if self.B > 1:
            v = bands.interleaved_to_planar(v, self.B)
        return v

    def _post(self, v, k):
        if self.B > 1:
            v = bands.planar_to_interleaved(v, self.B)
        if k:
            v = bands.tf_transform(v, k)
            n = np.linalg.norm(v)
            if n > 1e-15:
                v = v / n
        return v

    def _expand_mask(self, mask, k):
        group = 1 << min(k, max(0, self.B.bit_length() - 1))
        out = 0
        for b in range(self.B):
            if mask & (1 << b):
                g0 = (b // group) * group
                out |= ((1 << group) - 1) << g0
        return out


class Encoder:
    def __init__(self, cfg: FrameConfig, options: EncoderOptions | None = None):
        self.cfg = cfg
        self.opt = options or EncoderOptions()
        self.layout = bands.band_layout(cfg.frame_size)
        C = cfg.channels
        self.preemph = np.zeros(C)
        self.pre_tail = np.zeros((C, OVERLAP))       # pre-emphasized, for detector
        self.filt_tail = np.zeros((C, OVERLAP))      # post-prefilter, MDCT history
        self.pitch_hist = np.zeros((C, prefilter.PERIOD_MAX + 4 + cfg.frame_size))
        self.pf_state = [prefilter.FilterState() for _ in range(C)]
        self.energy_state = energy_q.EnergyPredictorState(C, self.layout.nbands)
        self.prev_transient = False
        self.prev_coded = None
        self.prev_flatness = 0.5
        self.frame_count = 0
        self.vbr_credit = 0.0

    # -- analysis helpers -------------------------------------------------

    def _budget_bytes(self, transient, flatness):
        base = _base_bytes(self.opt.bitrate, self.cfg.frame_size)
        if not self.opt.vbr:
            return max(2, min(MAX_PACKET_BYTES, base))
        f = 1.0
        if transient:
            f += 0.2
        f += 0.3 * min(1.0, max(0.0, (0.4 - flatness) / 0.4))
        budget = int(round(base * f + self.vbr_credit / 4.0))
        budget = max(base // 2, min((base * 3) // 2, budget))
        budget = max(MIN_PACKET_BYTES, min(MAX_PACKET_BYTES, budget))
        self.vbr_credit += base - budget
        return budget

    def _spread_code(self, transient_ratio):
        if transient_ratio > 128.0:
            return 0
        f = self.prev_flatness
        if f < 0.3:
            return 1
        if f <= 0.6:
            return 2
        return 3

    def _boosts(self, energies, long_energies, transient, budget8, est_grants):
        boosts = [0] * 21
        if self.opt.complexity < 2:
            return tuple(boosts)
        E = energies.max(axis=0)
        for b in range(21):
            steps = 0
            if transient and long_energies is not None:
                leak = E[b] - long_energies.max(axis=0)[b]
                if leak > 1.0:
                    steps = max(steps, 1 if leak <= 2.0 else 2)
            if 0 < b < 20:
                outlier = E[b] - 0.5 * (E[b - 1] + E[b + 1])
                if outlier >= 1.5:
                    steps = max(steps, 1 if outlier < 2.5 else 2)
            if steps:
                cap_steps = (est_grants[b] * 2 // 3) // alloc.BOOST_QUANTUM8
                boosts[b] = min(steps, cap_steps) * alloc.BOOST_QUANTUM8
        return tuple(boosts)

    def _stereo_mode(self, norm_bands, est_grants):
        """Returns (intensity_start, dual_flag)."""
        lay = self.layout
        if self.cfg.channels == 1:
            return 21, False
        corrs = []
        for b in range(lay.nbands):
            xl, xr = norm_bands[0][b], norm_bands[1][b]
            if xl is not None and xr is not None:
                corrs.append(abs(float(np.dot(xl, xr))))
        dual = bool(np.mean(corrs) < 0.3) if corrs else False
        istart = 21
        for b in range(2, 21):
            per_ch = est_grants[b] // 2
            if per_ch < 2 * (lay.width(b) + 3):
                istart = b
                break
        return istart, dual

    def _tf_decision(self, coeffs, transient, ratio):
        lay = self.layout
        flags = [False] * lay.nbands
        select = 0
        if self.opt.complexity < 2:
            return flags, select
        lf_bins = lay.start(8)
        p = np.mean([c[:lf_bins] ** 2 for c in coeffs], axis=0)
        lf_flat = _flatness(p)
        if transient and lf_flat < 0.3:
            for b in range(8):
                flags[b] = True
        elif not transient and self.cfg.max_blocks > 1 and ratio > 8.0:
            for b in range(13, lay.nbands):
                flags[b] = True
        return flags, select

    # -- main entry -------------------------------------------------------

    def encode_frame(self, pcm):
        """pcm: (channels, frame_size) in [-1, 1].  Returns (payload, info)."""
        cfg = self.cfg
        C, N = cfg.channels, cfg.frame_size
        pcm = np.asarray(pcm, dtype=np.float64).reshape(C, N)
        lay = self.layout

        # pre-emphasis and transient analysis
        pre = np.empty_like(pcm)
        for c in range(C):
            pre[c], self.preemph[c] = transform.pre_emphasis(pcm[c], self.preemph[c])
        transient = False
        ratio = 0.0
        if cfg.max_blocks > 1:
            for c in range(C):
                t, r = transform.detect_transient(pre[c], self.pre_tail[c])
                transient |= t
                ratio = max(ratio, r)
        B = cfg.blocks(transient)

        # pitch prefilter
        pp = prefilter.PitchParams()
        filt = np.empty_like(pre)
        for c in range(C):
            self.pitch_hist[c] = np.concatenate([self.pitch_hist[c][N:], pre[c]])
        if self.opt.complexity >= 1:
            mix = np.mean(self.pitch_hist, axis=0)
            pp = prefilter.pitch_analyze(mix, N, self.opt.complexity)
        for c in range(C):
            filt[c] = prefilter.apply_prefilter(pre[c], pp, self.pf_state[c])

        # transform
        coeffs = np.empty((C, N))
        long_E = None
        for c in range(C):
            coeffs[c] = transform.forward_mdct(self.filt_tail[c], filt[c], B)
        if transient:
            long_E = np.stack([
                bands.band_energy(transform.forward_mdct(self.filt_tail[c], filt[c], 1), lay)
                for c in range(C)])
        energies = np.stack([bands.band_energy(coeffs[c], lay) for c in range(C)])
        self.pre_tail = pre[:, -OVERLAP:].copy()
        self.filt_tail = filt[:, -OVERLAP:].copy()

        power = np.mean(coeffs[:, :lay.coded_bins] ** 2, axis=0)
        flatness = _flatness(power)

        # budget and coder
        nbytes = self._budget_bytes(transient, self.prev_flatness)
        cap8 = nbytes * 64
        enc = RangeEncoder(nbytes)

        # frame flags
        collapse_on = False
        if cfg.max_blocks > 1:
            enc.encode_bit(1 if transient else 0, _TRANSIENT_LOGP)
            if transient:
                collapse_on = not self.prev_transient
                if self.opt.collapse_override is not None:
                    collapse_on = self.opt.collapse_override
                enc.encode_bit(1 if collapse_on else 0, 1)
        intra = not self.opt.inter_prediction or self.frame_count == 0
        enc.encode_bit(1 if intra else 0, _INTRA_LOGP)

        # postfilter params
        if cap8 - enc.tell_frac() < 240:
            pp = prefilter.PitchParams()
        prefilter.code_pitch_params(enc, pp)

        # coarse energies
        coarse = energy_q.coarse_encode(enc, energies, intra, self.energy_state,
                                        cfg.size_index, cap8)

        # normalized band shapes
        norm_bands = [[None] * lay.nbands for _ in range(C)]
        for c in range(C):
            for b in range(lay.nbands):
                seg = coeffs[c][lay.start(b):lay.edges[b + 1]]
                v, zero = bands.normalize_band(seg)
                norm_bands[c][b] = v

        # tf flags
        tf_flags, tf_select = self._tf_decision(coeffs, transient, ratio)
        for b in range(lay.nbands):
            if cap8 - enc.tell_frac() < 64:
                tf_flags[b] = False
                continue
            enc.encode_bit(1 if tf_flags[b] else 0, 2)
        if any(tf_flags) and cap8 - enc.tell_frac() >= 8:
            enc.encode_bit(tf_select, 1)
        else:
            tf_select = 0

        # spread decision
        spread_code = self._spread_code(ratio) if not transient else (
            0 if ratio > 128.0 else self._spread_code(0.0))
        if cap8 - enc.tell_frac() >= 64:
            enc.encode_uniform(spread_code, 4)
        else:
            spread_code = 0

        # allocation parameters
        est_grants = alloc.estimate_band_grants(lay, C,
                                                max(0, cap8 - enc.tell_frac()))
        boosts = self._boosts(energies, long_E, transient, cap8, est_grants)
        istart, dual = self._stereo_mode(norm_bands, est_grants)
        params = alloc.AllocParams(tilt=self._tilt(energies), boosts8=boosts,
                                   intensity=istart, dual=dual)
        alloc.code_alloc_params(enc, params, C, cap8)
        total8 = max(0, cap8 - enc.tell_frac())
        res = alloc.compute_allocation(enc, True, lay, C, total8, params,
                                       self.prev_coded)

        # fine energies
        refined = coarse.copy()
        for b in range(lay.nbands):
            a_f = res.fine[b][0]
            for c in range(C):
                refined[c, b] = energy_q.fine_encode(enc, energies[c, b],
                                                     coarse[c, b], a_f)

        # shapes
        delta = _SPREAD_DELTAS[spread_code]
        bc = _BandCodec(enc, True, cfg, lay, B, delta, res, params, cap8)
        shapes, masks = bc.run(norm_bands, tf_flags, tf_select)

        # leftover energy bits
        refined = energy_q.final_encode(enc, energies, refined, res.fine, cap8)

        waste8 = cap8 - enc.tell_frac()
        payload = enc.finalize()

        self.prev_transient = transient
        self.prev_coded = list(res.coded)
        self.prev_flatness = flatness
        self.frame_count += 1
        info = FrameInfo(nbytes=nbytes, transient=transient,
                         collapse_flag=collapse_on, intra=intra, pitch=pp,
                         tf_flags=tuple(tf_flags), tf_select=tf_select,
                         spread_code=spread_code, tilt=params.tilt,
                         boosts8=params.boosts8, intensity=params.intensity,
                         dual=params.dual, skip_flags=tuple(res.skip_flags),
                         coded=tuple(res.coded), thetas=tuple(bc.thetas),
                         waste8=waste8, energies=refined)
        return payload, info

    def _tilt(self, energies):
        if self.opt.complexity < 2:
            return 0
        E = energies.mean(axis=0)
        lf = float(np.mean(E[:6]))
        hf = float(np.mean(E[15:]))
        d = lf - hf
        # LF-dominant content benefits from steeper LF allocation
        return max(-alloc.TILT_LIMIT, min(alloc.TILT_LIMIT, int(round(d / 3.0))))


class Decoder:
    def __init__(self, cfg: FrameConfig):
        self.cfg = cfg
        self.layout = bands.band_layout(cfg.frame_size)
        C = cfg.channels
        self.energy_state = energy_q.EnergyPredictorState(C, self.layout.nbands)
        self.ola_tail = np.zeros((C, OVERLAP))
        self.pf_state = [prefilter.FilterState() for _ in range(C)]
        self.deemph = np.zeros(C)
        self.hist_e1 = None
        self.hist_e2 = None
        self.frame_count = 0
        self.last_coeffs = np.zeros((C, cfg.frame_size))
        self.last_pitch = prefilter.PitchParams()
        self.seed_base = _seed_base()

    def decode_frame(self, payload, want_info=False):
        """payload bytes (any content) or None for packet loss.  Returns
        (pcm (C, N), FrameInfo)."""
        cfg = self.cfg
        C, N = cfg.channels, cfg.frame_size
        lay = self.layout
        if payload is None:
            return self._conceal(want_info)
        nbytes = len(payload)
        cap8 = nbytes * 64
        dec = RangeDecoder(payload)
        info = FrameInfo(nbytes=nbytes)

        transient = False
        collapse_on = False
        if cfg.max_blocks > 1:
            transient = dec.decode_bit(_TRANSIENT_LOGP) == 1
            if transient:
                collapse_on = dec.decode_bit(1) == 1
        B = cfg.blocks(transient)
        intra = dec.decode_bit(_INTRA_LOGP) == 1
        pp = prefilter.decode_pitch_params(dec)
        coarse = energy_q.coarse_decode(dec, C, lay.nbands, intra,
                                        self.energy_state, cfg.size_index, cap8)
        tf_flags = [False] * lay.nbands
        for b in range(lay.nbands):
            if cap8 - dec.tell_frac() < 64:
                continue
            tf_flags[b] = dec.decode_bit(2) == 1
        tf_select = 0
        if any(tf_flags) and cap8 - dec.tell_frac() >= 8:
            tf_select = dec.decode_bit(1)
        spread_code = 0
        if cap8 - dec.tell_frac() >= 64:
            spread_code = dec.decode_uniform(4)
        params = alloc.decode_alloc_params(dec, C, cap8)
        total8 = max(0, cap8 - dec.tell_frac())
        res = alloc.compute_allocation(dec, False, lay, C, total8, params)

        refined = coarse.copy()
        for b in range(lay.nbands):
            a_f = res.fine[b][0]
            for c in range(C):
                refined[c, b] = energy_q.fine_decode(dec, coarse[c, b], a_f)

        delta = _SPREAD_DELTAS[spread_code]
        bc = _BandCodec(dec, False, cfg, lay, B, delta, res, params, cap8)
        shapes, masks = bc.run(None, tf_flags, tf_select)

        refined = energy_q.final_decode(dec, refined, res.fine, cap8)

        # fold unfilled bands, then collapse prevention, then denormalize
        rng = bands.Lcg(self.seed_base ^ (self.frame_count * 2654435761 & 0xFFFFFFFF))
        coeffs = np.zeros((C, N))
        full_mask = (1 << B) - 1
        ch_masks = [list(masks) for _ in range(C)]
        for c in range(C):
            spec = np.zeros(lay.coded_bins)
            cursor = 0
            for b in range(lay.nbands):
                v = shapes[c][b]
                if v is None or not np.any(v):
                    v, cursor = bands.fold_band(spec, lay, b, cursor, rng)
                    shapes[c][b] = v
                # silent blocks are judged on the reconstruction itself, so
                # exact cancellations (e.g. inside the inverse Hadamard)
                # count as holes just like missing pulses
                m = 0
                for blk in range(B):
                    if np.any(v[blk::B] != 0.0):
                        m |= 1 << blk
                ch_masks[c][b] = m
                spec[lay.start(b):lay.edges[b + 1]] = v
            if transient and collapse_on and B > 1:
                h1 = self.hist_e1[c] if self.hist_e1 is not None else refined[c]
                h2 = self.hist_e2[c] if self.hist_e2 is not None else refined[c]
                bands.prevent_collapse(shapes[c], ch_masks[c], refined[c],
                                       h1, h2, lay, B, rng)
            for b in range(lay.nbands):
                seg = bands.denormalize_band(shapes[c][b], refined[c, b])
                coeffs[c][lay.start(b):lay.edges[b + 1]] = seg

        self.hist_e2 = self.hist_e1
        self.hist_e1 = refined.copy()
        self.last_coeffs = coeffs.copy()
        self.last_pitch = pp
        self.frame_count += 1

        pcm = self._synthesize(coeffs, B, pp)
        if want_info:
            info.transient = transient
            info.collapse_flag = collapse_on
            info.intra = intra
            info.pitch = pp
            info.tf_flags = tuple(tf_flags)
            info.thetas = tuple(bc.thetas)
            info.tf_select = tf_select
            info.spread_code = spread_code
            info.tilt = params.tilt
            info.boosts8 = params.boosts8
            info.intensity = params.intensity
            info.dual = params.dual
            info.skip_flags = tuple(res.skip_flags)
            info.coded = tuple(res.coded)
            info.waste8 = cap8 - dec.tell_frac()
            info.energies = refined
            info.spectrum = coeffs
            info.masks = tuple(tuple(m) for m in [ch_masks[c] for c in range(C)])
        return pcm, info

    def _synthesize(self, coeffs, B, pp):
        cfg = self.cfg
        C, N = cfg.channels, cfg.frame_size
        pcm = np.empty((C, N))
        for c in range(C):
            y, self.ola_tail[c] = transform.inverse_mdct(coeffs[c], B, self.ola_tail[c])
            np.clip(y, -SYNTH_CLAMP, SYNTH_CLAMP, out=y)
            y = prefilter.apply_postfilter(y, pp, self.pf_state[c])
            y, self.deemph[c] = transform.de_emphasis(y, self.deemph[c], limit=PCM_LIMIT)
            pcm[c] = y
        return pcm

    def _conceal(self, want_info):
        # simple concealment: repeat the previous spectrum 6 dB down
        self.last_coeffs *= 0.5
        pcm = self._synthesize(self.last_coeffs, 1, self.last_pitch)
        self.frame_count += 1
        return pcm, FrameInfo(nbytes=0)


# -- stream-level API ----------------------------------------------------


def encode_stream(pcm, cfg, options):
    """pcm: (channels, nsamples).  Returns (header, packets, infos)."""
    C, S = pcm.shape
    assert C == cfg.channels
    N = cfg.frame_size
    nframes = max(1, -(-(S + OVERLAP) // N))
    padded = np.zeros((C, nframes * N))
    padded[:, :S] = pcm
    enc = Encoder(cfg, options)
    packets, infos = [], []
    for t in range(nframes):
        payload, info = enc.encode_frame(padded[:, t * N:(t + 1) * N])
        packets.append(payload)
        infos.append(info)
    header = StreamHeader(channels=C, duration_ms=cfg.duration_ms,
                          vbr=options.vbr, bitrate=options.bitrate,
                          sample_count=S)
    return header, packets, infos


def decode_stream(header, packets, want_info=False):
    """Returns (pcm (channels, sample_count), infos); output is aligned to
    the encoder input (the OVERLAP look-ahead is stripped)."""
    cfg = header.config
    dec = Decoder(cfg)
    chunks, infos = [], []
    for payload in packets:
        pcm, info = dec.decode_frame(payload, want_info=want_info)
        chunks.append(pcm)
        infos.append(info)
    if not chunks:
        return np.zeros((cfg.channels, 0)), []
    raw = np.concatenate(chunks, axis=1)
    count = header.sample_count or max(0, raw.shape[1] - OVERLAP)
    out = raw[:, OVERLAP:OVERLAP + count]
    if out.shape[1] < count:
        out = np.pad(out, ((0, 0), (0, count - out.shape[1])))
    return out, infos


def write_stream(path, header, packets):
    with open(path, "wb") as f:
        f.write(header.pack())
        for p in packets:
            f.write(struct.pack("<H", len(p)))
            f.write(p)


def read_stream(path):
    """Returns (header, packets).  A truncated final packet is dropped with
    whatever decoded so far; a missing header is an error."""
    with open(path, "rb") as f:
        data = f.read()
    header = StreamHeader.unpack(data)
    packets = []
    pos = HEADER_LEN
    truncated = False
    while pos + 2 <= len(data):
        (n,) = struct.unpack_from("<H", data, pos)
        pos += 2
        if pos + n > len(data):
            truncated = True
            break
        packets.append(data[pos:pos + n])
        pos += n
    return header, packets, truncated
