"""OFDM numerology and waveform synthesis for an L-DACS1-style frame.

The synchronization preamble spans two OFDM symbols built on an oversampled
FFT of size n_total = 64 * n_ov:

  symbol 1  occupies every 4th subcarrier (multiples of 4 inside the used
            band), so its useful part repeats four times with period
            L = n_total / 4,
  symbol 2  occupies every 2nd subcarrier, so its useful part repeats twice
            with period 2L.

Both symbols carry PN-seeded unit-magnitude QPSK values, are normalized to
unit average power over their useful parts, and get a cyclic prefix of n_cp
samples.  Transmit shaping is windowed overlap-add: every symbol block

    [ CP | useful | cyclic suffix of n_win samples ]

is ramped up/down with a raised-cosine ramp of n_win samples and blocks are
added at a hop of n_cp + n_total, so ramps stay inside the guard interval.

Frame layout with the default numerology (all indices frame-relative):

    CP1 [0,44)  useful1 [44,300)  CP2 [300,344)  useful2 [344,600)  tail [600,632)

The timing anchor k0 = 599 is the last sample of symbol 2's useful part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import metric_arrays


# ---------------------------------------------------------------------------
# numerology


@dataclass(frozen=True)
class Numerology:
    """Concrete OFDM dimensioning.  Build through make_numerology()."""

    n_ov: int
    n_fft_base: int
    n_used: int
    subcarrier_spacing_hz: float
    n_cp: int
    n_win: int
    d_template: int
    m_consec: int
    delta_search: int

    @property
    def l_quarter(self) -> int:
        """Quarter period of preamble symbol 1."""
        return 16 * self.n_ov

    @property
    def n_total(self) -> int:
        """Oversampled FFT size (samples per useful symbol part)."""
        return 4 * self.l_quarter

    @property
    def sample_rate_hz(self) -> float:
        return self.n_fft_base * self.n_ov * self.subcarrier_spacing_hz


def make_numerology(**overrides) -> Numerology:
    """Build and validate a Numerology.

    Defaults scale with the oversampling factor n_ov (4 unless overridden):
    n_cp = 11*n_ov, n_win = 8*n_ov, d_template = 4*L, m_consec = 4*n_ov,
    delta_search = 56*n_ov.  Derived sizes (l_quarter, n_total,
    sample_rate_hz) are always recomputed and cannot be overridden.

    Raises ValueError naming the offending field when a constraint fails.
    """
    known = {
        "n_ov",
        "n_fft_base",
        "n_used",
        "subcarrier_spacing_hz",
        "n_cp",
        "n_win",
        "d_template",
        "m_consec",
        "delta_search",
    }
    unknown = set(overrides) - known
    if unknown:
        raise ValueError(f"unknown numerology override(s): {sorted(unknown)}")

    n_ov = int(overrides.get("n_ov", 4))
    if n_ov < 1:
        raise ValueError("n_ov must be >= 1")
    l_quarter = 16 * n_ov

    num = Numerology(
        n_ov=n_ov,
        n_fft_base=int(overrides.get("n_fft_base", 64)),
        n_used=int(overrides.get("n_used", 50)),
        subcarrier_spacing_hz=float(overrides.get("subcarrier_spacing_hz", 9765.625)),
        n_cp=int(overrides.get("n_cp", 11 * n_ov)),
        n_win=int(overrides.get("n_win", 8 * n_ov)),
        d_template=int(overrides.get("d_template", 4 * l_quarter)),
        m_consec=int(overrides.get("m_consec", 4 * n_ov)),
        delta_search=int(overrides.get("delta_search", 56 * n_ov)),
    )

    if num.n_fft_base != 64:
        # the 4x/2x subcarrier comb only yields L/2L periods on a base of 64
        raise ValueError("n_fft_base must be 64")
    if num.n_used < 8 or num.n_used % 2 != 0:
        raise ValueError("n_used must be an even integer >= 8")
    if num.n_used > num.n_fft_base - 2:
        raise ValueError("n_used must be <= n_fft_base - 2")
    if num.subcarrier_spacing_hz <= 0:
        raise ValueError("subcarrier_spacing_hz must be > 0")
    if num.n_cp < 1:
        raise ValueError("n_cp must be >= 1")
    if num.n_win < 0:
        raise ValueError("n_win must be >= 0")
    if num.n_win > num.n_cp:
        raise ValueError("n_win must be <= n_cp (ramps live inside the guard)")
    if num.d_template < 1:
        raise ValueError("d_template must be >= 1")
    if num.d_template > 8 * num.l_quarter:
        raise ValueError("d_template must be <= 8 * l_quarter")
    if num.m_consec < 1:
        raise ValueError("m_consec must be >= 1")
    if num.delta_search < 1:
        raise ValueError("delta_search must be >= 1")
    return num


def used_subcarriers(num: Numerology) -> np.ndarray:
    """Used subcarrier indices: +/-1 .. +/-n_used/2, DC excluded."""
    half = num.n_used // 2
    k = np.arange(1, half + 1)
    return np.concatenate([-k[::-1], k])


# ---------------------------------------------------------------------------
# waveforms


@dataclass(frozen=True)
class PreambleWaveform:
    """Synthesized preamble.

    samples            windowed overlap-add output, len = 2*(n_cp+n_total)+n_win
    samples_unwindowed rectangular CP-OFDM intermediate, len = 2*(n_cp+n_total);
                       indices align with samples[:600] and keep the exact
                       cyclic-prefix copy property
    start_useful_1/2   frame-relative starts of the useful parts
    frame_start        index of the first preamble sample (0)
    """

    samples: np.ndarray
    samples_unwindowed: np.ndarray
    start_useful_1: int
    start_useful_2: int
    frame_start: int


@dataclass(frozen=True)
class EnergyTemplate:
    """Expected preamble energy profile, anchored at the last useful sample.

    a[m] = |p[k0 - m]|^2 for m = 0..D-1 where k0 indexes the final sample of
    symbol 2's useful part.  alignment_offset maps the argmax of the weighted
    correlation metric back to the frame start; it is calibrated once by a
    noiseless loopback scan, so timing estimates are exact by construction.
    """

    a: np.ndarray
    alignment_offset: int


def _qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    re = rng.integers(0, 2, size=n) * 2 - 1
    im = rng.integers(0, 2, size=n) * 2 - 1
    return (re + 1j * im) / np.sqrt(2.0)


def _ofdm_useful(k_indices: np.ndarray, values: np.ndarray, num: Numerology) -> np.ndarray:
    """IFFT of the loaded bins, normalized to unit average power."""
    spec = np.zeros(num.n_total, dtype=np.complex128)
    spec[np.mod(k_indices, num.n_total)] = values
    x = np.fft.ifft(spec)
    power = np.mean(np.abs(x) ** 2)
    if power <= 0:
        raise ValueError("empty subcarrier allocation")
    return x / np.sqrt(power)


def _raised_cosine_ramp(n_win: int) -> np.ndarray:
    # half-sample offset keeps both ends strictly inside (0, 1)
    t = (np.arange(n_win) + 0.5) / n_win
    return 0.5 * (1.0 - np.cos(np.pi * t))


def _windowed_block(useful: np.ndarray, num: Numerology) -> np.ndarray:
    """[CP | useful | cyclic suffix], raised-cosine ramps on both ends."""
    cp = useful[-num.n_cp:]
    suffix = useful[: num.n_win]
    block = np.concatenate([cp, useful, suffix])
    if num.n_win > 0:
        ramp = _raised_cosine_ramp(num.n_win)
        block[: num.n_win] *= ramp
        block[-num.n_win:] *= ramp[::-1]
    return block


def _overlap_add(blocks: list[np.ndarray], num: Numerology) -> np.ndarray:
    hop = num.n_cp + num.n_total
    out = np.zeros(hop * len(blocks) + num.n_win, dtype=np.complex128)
    for i, b in enumerate(blocks):
        out[i * hop : i * hop + b.size] += b
    return out


def generate_preamble(num: Numerology, seed: int) -> PreambleWaveform:
    """Synthesize the two-symbol preamble for a given PN seed.

    Symbol 1 loads the used subcarriers divisible by 4, symbol 2 those
    divisible by 2; both with QPSK values drawn from the seeded generator.
    """
    rng = np.random.default_rng(seed)
    used = used_subcarriers(num)
    occ1 = used[used % 4 == 0]
    occ2 = used[used % 2 == 0]

    useful1 = _ofdm_useful(occ1, _qpsk(rng, occ1.size), num)
    useful2 = _ofdm_useful(occ2, _qpsk(rng, occ2.size), num)

    raw = np.concatenate(
        [useful1[-num.n_cp:], useful1, useful2[-num.n_cp:], useful2]
    )
    windowed = _overlap_add(
        [_windowed_block(useful1, num), _windowed_block(useful2, num)], num
    )

    return PreambleWaveform(
        samples=windowed,
        samples_unwindowed=raw,
        start_useful_1=num.n_cp,
        start_useful_2=2 * num.n_cp + num.n_total,
        frame_start=0,
    )


def energy_template(pre: PreambleWaveform, num: Numerology) -> EnergyTemplate:
    """Build the energy template and calibrate its alignment offset.

    The offset is found by running the weighted correlation metric over the
    zero-padded noiseless preamble and taking the argmax; estimate_sto()
    subtracts it, which makes the noiseless timing estimate land exactly on
    the frame start.
    """
    d = num.d_template
    k0 = pre.start_useful_2 + num.n_total - 1
    if k0 - (d - 1) < 0:
        raise ValueError("d_template anchor window exceeds preamble bounds")

    mag2 = np.abs(pre.samples) ** 2
    a = mag2[k0 - d + 1 : k0 + 1][::-1].copy()

    pad = d + 2 * num.l_quarter  # metric warm-up
    stream = np.concatenate(
        [np.zeros(pad, dtype=np.complex128), pre.samples.astype(np.complex128)]
    )
    _, _, _, xcr = metric_arrays(stream, num.l_quarter, a)
    alignment_offset = int(np.argmax(xcr)) - pad
    return EnergyTemplate(a=a, alignment_offset=alignment_offset)


def build_frame(
    num: Numerology,
    pre: PreambleWaveform,
    n_payload_symbols: int,
    lead_gap: int,
    seed: int,
) -> tuple[np.ndarray, int]:
    """Assemble lead zeros + preamble + random QPSK payload symbols.

    Payload symbols load all used subcarriers, are unit-power normalized over
    their useful parts, and join the frame by the same windowed overlap-add
    as the preamble.  Returns (samples, n0) with n0 the index of the first
    preamble sample.
    """
    if n_payload_symbols < 0:
        raise ValueError("n_payload_symbols must be >= 0")
    if lead_gap < 0:
        raise ValueError("lead_gap must be >= 0")

    rng = np.random.default_rng(seed)
    used = used_subcarriers(num)
    hop = num.n_cp + num.n_total

    total = lead_gap + (2 + n_payload_symbols) * hop + num.n_win
    out = np.zeros(total, dtype=np.complex128)
    out[lead_gap : lead_gap + pre.samples.size] += pre.samples
    for p in range(n_payload_symbols):
        useful = _ofdm_useful(used, _qpsk(rng, used.size), num)
        block = _windowed_block(useful, num)
        off = lead_gap + (2 + p) * hop
        out[off : off + block.size] += block

    n0 = lead_gap + pre.frame_start
    return out, n0


# ---------------------------------------------------------------------------
# I/O


def write_iq(path, samples: np.ndarray) -> None:
    """Dump complex samples as interleaved little-endian float32 I,Q."""
    x = np.asarray(samples, dtype=np.complex128)
    flat = np.empty(2 * x.size, dtype="<f4")
    flat[0::2] = x.real
    flat[1::2] = x.imag
    flat.tofile(path)


def read_iq(path) -> np.ndarray:
    """Read back an interleaved float32 I,Q dump."""
    flat = np.fromfile(path, dtype="<f4")
    if flat.size % 2 != 0:
        raise ValueError("IQ file has an odd number of float32 values")
    return (flat[0::2] + 1j * flat[1::2]).astype(np.complex128)
