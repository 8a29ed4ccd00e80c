"""Channel impairments: CFO, AWGN, Rician multipath, phase noise, DME pulses.

The multipath model is a tapped delay line with one line-of-sight tap and
Rician power split: the LOS tap carries K/(K+1) of the power as a constant-
amplitude rotator at a fraction of the maximum Doppler, each scattered tap
carries its share of 1/(K+1) (proportional to its dB weight) as a Jakes
sum-of-sinusoids fading process.  Tap delays are given in seconds and
rounded to whole samples at apply time.

DME interference is a stream of Gaussian-envelope pulse pairs per
interferer: Poisson pair arrivals, fixed intra-pair spacing, complex
carrier at the configured frequency offset, one random phase per pair.
Pulse width is specified at half amplitude.  Peak amplitude follows from
the interferer power relative to the (unit-power) signal reference.

Oscillator phase noise is a Wiener process with increment variance
2*pi*linewidth/sample_rate.

run_pipeline applies: multipath -> phase noise -> CFO -> DME -> AWGN, each
stage drawing from its own child generator so that enabling one stage never
shifts another stage's random stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sigmodel import Numerology


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class ChannelTap:
    delay_s: float
    power_db: float
    kind: str  # "los" | "scattered"


@dataclass(frozen=True)
class ChannelProfile:
    """Tapped-delay-line profile with a Rician LOS/scattered power split."""

    taps: tuple
    rician_k_db: float
    max_doppler_hz: float
    los_doppler_fraction: float = 0.5
    n_sinusoids: int = 16

    def __post_init__(self):
        if not self.taps:
            raise ValueError("profile needs at least one tap")
        kinds = [t.kind for t in self.taps]
        if any(k not in ("los", "scattered") for k in kinds):
            raise ValueError("tap kind must be 'los' or 'scattered'")
        if kinds.count("los") != 1:
            raise ValueError("profile must contain exactly one los tap")
        delays = [t.delay_s for t in self.taps]
        if any(d < 0 for d in delays):
            raise ValueError("tap delays must be >= 0")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            raise ValueError("tap delays must be strictly increasing")
        if math.isnan(self.rician_k_db):
            raise ValueError("rician_k_db must not be NaN")
        if self.max_doppler_hz < 0:
            raise ValueError("max_doppler_hz must be >= 0")
        if not -1.0 <= self.los_doppler_fraction <= 1.0:
            raise ValueError("los_doppler_fraction must be in [-1, 1]")
        if self.n_sinusoids < 16:
            raise ValueError("n_sinusoids must be >= 16")

    def linear_powers(self) -> np.ndarray:
        """Per-tap linear powers, normalized to sum to 1."""
        k_lin = 10.0 ** (self.rician_k_db / 10.0)
        if math.isinf(k_lin):
            p_los, p_scat = 1.0, 0.0
        else:
            p_los = k_lin / (k_lin + 1.0)
            p_scat = 1.0 / (k_lin + 1.0)
        weights = np.array(
            [
                0.0 if t.kind == "los" else 10.0 ** (t.power_db / 10.0)
                for t in self.taps
            ]
        )
        total = weights.sum()
        out = np.zeros(len(self.taps))
        for i, t in enumerate(self.taps):
            if t.kind == "los":
                out[i] = p_los
            elif total > 0:
                out[i] = p_scat * weights[i] / total
        return out


def make_enr_profile(
    rician_k_db: float = 15.0, max_doppler_hz: float = 1250.0
) -> ChannelProfile:
    """En-route: strong LOS plus two weak equal-power echoes."""
    taps = (
        ChannelTap(0.0, 0.0, "los"),
        ChannelTap(0.3e-6, 0.0, "scattered"),
        ChannelTap(15.0e-6, 0.0, "scattered"),
    )
    return ChannelProfile(taps, rician_k_db, max_doppler_hz)


def make_tma_profile(
    rician_k_db: float = 10.0, max_doppler_hz: float = 624.0
) -> ChannelProfile:
    """Terminal area: LOS plus an exponentially decaying scatter cluster
    truncated at 10 us (8 taps, decay constant max_delay/4)."""
    max_delay = 10.0e-6
    tau_c = max_delay / 4.0
    delays = np.linspace(1.25e-6, max_delay, 8)
    taps = [ChannelTap(0.0, 0.0, "los")]
    for d in delays:
        taps.append(ChannelTap(float(d), 10.0 * math.log10(math.exp(-d / tau_c)), "scattered"))
    return ChannelProfile(tuple(taps), rician_k_db, max_doppler_hz)


# ---------------------------------------------------------------------------
# DME


@dataclass(frozen=True)
class DmeInterferer:
    offset_hz: float
    power_dbm: float
    rate_pps: float  # pulse pairs per second

    def __post_init__(self):
        if self.rate_pps <= 0:
            raise ValueError("rate_pps must be > 0")


@dataclass(frozen=True)
class DmeScenario:
    interferers: tuple
    pulse_width_s: float = 3.5e-6  # half-amplitude width
    pair_spacing_s: float = 12.0e-6
    signal_power_dbm: float = -80.0

    def __post_init__(self):
        if self.pulse_width_s <= 0:
            raise ValueError("pulse_width_s must be > 0")
        if self.pair_spacing_s <= 0:
            raise ValueError("pair_spacing_s must be > 0")


def make_dme_scenario(signal_power_dbm: float = -80.0) -> DmeScenario:
    """Three ground interrogators adjacent to the signal band."""
    return DmeScenario(
        interferers=(
            DmeInterferer(-0.5e6, -67.9, 3600.0),
            DmeInterferer(+0.5e6, -74.0, 3600.0),
            DmeInterferer(+0.5e6, -90.3, 3600.0),
        ),
        signal_power_dbm=signal_power_dbm,
    )


def pulse_pair_times(duration_s: float, rate_pps: float, rng: np.random.Generator) -> np.ndarray:
    """Poisson pair arrivals, uniform over the stream duration."""
    n_pairs = rng.poisson(rate_pps * duration_s)
    return rng.uniform(0.0, duration_s, n_pairs)


def dme_interference(
    n: int, dme: DmeScenario, num: Numerology, rng: np.random.Generator
) -> np.ndarray:
    """Synthesize the summed interference waveform for n samples."""
    fs = num.sample_rate_hz
    out = np.zeros(n, dtype=np.complex128)
    duration = n / fs
    # half-amplitude width -> Gaussian sigma
    alpha = dme.pulse_width_s / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    support = 5.0 * alpha
    for intf in dme.interferers:
        if abs(intf.offset_hz) >= fs / 2.0:
            raise ValueError("interferer offset_hz must be below Nyquist")
        amp = math.sqrt(10.0 ** ((intf.power_dbm - dme.signal_power_dbm) / 10.0))
        starts = pulse_pair_times(duration, intf.rate_pps, rng)
        for t0 in starts:
            phase = rng.uniform(0.0, 2.0 * np.pi)
            for tp in (t0, t0 + dme.pair_spacing_s):
                k_lo = max(0, int(math.ceil((tp - support) * fs)))
                k_hi = min(n, int(math.floor((tp + support) * fs)) + 1)
                if k_lo >= k_hi:
                    continue
                t = np.arange(k_lo, k_hi) / fs - tp
                env = amp * np.exp(-(t**2) / (2.0 * alpha**2))
                out[k_lo:k_hi] += env * np.exp(
                    1j * (2.0 * np.pi * intf.offset_hz * t + phase)
                )
    return out


# ---------------------------------------------------------------------------
# elementary impairments


def apply_cfo(x: np.ndarray, epsilon: float, num: Numerology) -> np.ndarray:
    """Rotate by a carrier offset of epsilon subcarrier spacings."""
    x = np.asarray(x, dtype=np.complex128)
    n = np.arange(x.size)
    return x * np.exp(1j * 2.0 * np.pi * epsilon * n / num.n_total)


def apply_awgn(
    x: np.ndarray, snr_db: Optional[float], rng: np.random.Generator
) -> np.ndarray:
    """Add complex white noise of variance 10^(-snr/10) (unit-power signal
    reference).  snr_db of None or +inf passes the input through."""
    x = np.asarray(x, dtype=np.complex128)
    if snr_db is None or math.isinf(snr_db):
        return x.copy()
    var = 10.0 ** (-snr_db / 10.0)
    scale = math.sqrt(var / 2.0)
    noise = scale * (rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size))
    return x + noise


def _jakes_gain(
    n: int, fd_hz: float, fs: float, n_sin: int, rng: np.random.Generator
) -> np.ndarray:
    """Unit-power sum-of-sinusoids fading gain over n samples."""
    alphas = rng.uniform(0.0, 2.0 * np.pi, n_sin)
    phases = rng.uniform(0.0, 2.0 * np.pi, n_sin)
    omegas = 2.0 * np.pi * fd_hz * np.cos(alphas) / fs
    idx = np.arange(n)
    g = np.zeros(n, dtype=np.complex128)
    for k in range(n_sin):  # loop keeps memory flat for long streams
        g += np.exp(1j * (omegas[k] * idx + phases[k]))
    return g / math.sqrt(n_sin)


def apply_multipath(
    x: np.ndarray,
    profile: ChannelProfile,
    num: Numerology,
    rng: np.random.Generator,
    max_delay_samples: Optional[int] = None,
) -> np.ndarray:
    """Tapped-delay-line fading channel.  Tap delays round to whole samples
    and must stay within the guard interval (or an explicit maximum)."""
    x = np.asarray(x, dtype=np.complex128)
    fs = num.sample_rate_hz
    limit = num.n_cp if max_delay_samples is None else max_delay_samples
    powers = profile.linear_powers()
    y = np.zeros_like(x)
    n = x.size
    for tap, p in zip(profile.taps, powers):
        d = int(np.round(tap.delay_s * fs))
        if d > limit:
            raise ValueError(
                f"tap delay {tap.delay_s} s rounds to {d} samples, beyond the limit of {limit}"
            )
        if p == 0.0:
            # keep the generator stream stable regardless of power split
            if tap.kind == "los":
                rng.uniform(0.0, 2.0 * np.pi)
            else:
                rng.uniform(0.0, 2.0 * np.pi, 2 * profile.n_sinusoids)
            continue
        if tap.kind == "los":
            theta0 = rng.uniform(0.0, 2.0 * np.pi)
            f_los = profile.los_doppler_fraction * profile.max_doppler_hz
            gain = math.sqrt(p) * np.exp(
                1j * (2.0 * np.pi * f_los * np.arange(n) / fs + theta0)
            )
        else:
            gain = math.sqrt(p) * _jakes_gain(
                n, profile.max_doppler_hz, fs, profile.n_sinusoids, rng
            )
        if d == 0:
            y += gain * x
        else:
            y[d:] += gain[d:] * x[:-d]
    return y


def wiener_phase(
    n: int, linewidth_hz: float, num: Numerology, rng: np.random.Generator
) -> np.ndarray:
    """Phase random walk with increment variance 2*pi*linewidth/fs."""
    var = 2.0 * np.pi * linewidth_hz / num.sample_rate_hz
    inc = rng.normal(0.0, math.sqrt(var), n)
    return np.cumsum(inc)


def apply_phase_noise(
    x: np.ndarray, linewidth_hz: float, num: Numerology, rng: np.random.Generator
) -> np.ndarray:
    """Multiply by a Wiener phase process; linewidth 0 is the identity."""
    x = np.asarray(x, dtype=np.complex128)
    if linewidth_hz < 0:
        raise ValueError("linewidth_hz must be >= 0")
    if linewidth_hz == 0.0:
        return x.copy()
    return x * np.exp(1j * wiener_phase(x.size, linewidth_hz, num, rng))


def apply_dme(
    x: np.ndarray, dme: DmeScenario, num: Numerology, rng: np.random.Generator
) -> np.ndarray:
    """Add DME pulse-pair interference; empty interferer list is identity."""
    x = np.asarray(x, dtype=np.complex128)
    if not dme.interferers:
        return x.copy()
    return x + dme_interference(x.size, dme, num, rng)


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class ImpairmentConfig:
    epsilon: float = 0.0
    snr_db: Optional[float] = None  # None -> noiseless
    profile: Optional[ChannelProfile] = None
    dme: Optional[DmeScenario] = None
    phase_noise_linewidth_hz: float = 0.0
    seed: int = 0


def run_pipeline(x: np.ndarray, cfg: ImpairmentConfig, num: Numerology) -> np.ndarray:
    """multipath -> phase noise -> CFO -> DME -> AWGN, with per-stage RNGs."""
    ss = np.random.SeedSequence(cfg.seed)
    rng_mp, rng_pn, rng_dme, rng_awgn = (
        np.random.default_rng(s) for s in ss.spawn(4)
    )
    y = np.asarray(x, dtype=np.complex128)
    if cfg.profile is not None:
        y = apply_multipath(y, cfg.profile, num, rng_mp)
    if cfg.phase_noise_linewidth_hz > 0.0:
        y = apply_phase_noise(y, cfg.phase_noise_linewidth_hz, num, rng_pn)
    if cfg.epsilon != 0.0:
        y = apply_cfo(y, cfg.epsilon, num)
    if cfg.dme is not None and cfg.dme.interferers:
        y = apply_dme(y, cfg.dme, num, rng_dme)
    return apply_awgn(y, cfg.snr_db, rng_awgn)
