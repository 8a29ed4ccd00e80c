"""Monte Carlo trials and campaigns over the synchronizer.

A trial synthesizes one frame (random lead gap, preamble, payload), runs it
through the impairment pipeline for the scenario's channel, synchronizes,
and scores:

    fail       = not detected, or |sto_error| > fine_threshold
    sto_error  = sto_estimate - true frame start (detected trials)
    cfo_error  = cfo_estimate - true epsilon     (plain difference)

Seeding is hierarchical and parallel-safe: trial t of SNR point s uses
SeedSequence([master_seed, s, t]), so every trial is reproducible in
isolation and campaign statistics are independent of evaluation order.

CFO MSE aggregates the squared cfo_error over detected trials that produced
an estimate.  An infinite SNR entry in the grid means noiseless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import (
    ImpairmentConfig,
    make_dme_scenario,
    make_enr_profile,
    make_tma_profile,
    run_pipeline,
)
from .sigmodel import Numerology, build_frame, energy_template, generate_preamble, make_numerology
from .sync import synchronize

CHANNELS = ("AWGN", "ENR", "ENR_DME", "TMA")


@dataclass
class Scenario:
    name: str
    channel: str
    epsilon: float = 0.0
    snr_grid_db: tuple = (0.0, 5.0, 10.0)
    n_trials: int = 1000
    master_seed: int = 1
    lead_gap_range: tuple = (200, 800)
    fine_threshold: Optional[int] = None  # None -> floor(n_cp / 11)
    n_payload_symbols: int = 2
    preamble_seed: int = 1
    phase_noise_linewidth_hz: float = 0.0

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if not self.snr_grid_db:
            raise ValueError("snr_grid_db must not be empty")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        lo, hi = self.lead_gap_range
        if lo < 0 or hi < lo:
            raise ValueError("lead_gap_range must satisfy 0 <= lo <= hi")
        if not -2.0 < self.epsilon <= 2.0:
            raise ValueError("epsilon must lie in (-2, 2]")
        if self.fine_threshold is not None and self.fine_threshold < 0:
            raise ValueError("fine_threshold must be >= 0")
        if self.n_payload_symbols < 0:
            raise ValueError("n_payload_symbols must be >= 0")


@dataclass
class TrialRecord:
    seed: int
    snr_db: float
    true_sto: int
    true_epsilon: float
    detected: bool
    fail: bool
    sto_est: Optional[int] = None
    cfo_est: Optional[float] = None
    sto_error: Optional[int] = None
    cfo_error: Optional[float] = None
    cfo_est_ac1: Optional[float] = None
    cfo_est_ac2: Optional[float] = None


@dataclass
class CampaignStats:
    scenario: str
    snr_db: float
    fail_rate: float
    cfo_mse: float  # nan when no trial yielded an estimate
    n_trials: int
    n_detected: int


def resolve_fine_threshold(scenario: Scenario, num: Numerology) -> int:
    if scenario.fine_threshold is not None:
        return scenario.fine_threshold
    return num.n_cp // 11


def _channel_config(scenario: Scenario):
    """(profile, dme) for the scenario's channel name."""
    if scenario.channel == "AWGN":
        return None, None
    if scenario.channel == "ENR":
        return make_enr_profile(), None
    if scenario.channel == "ENR_DME":
        return make_enr_profile(), make_dme_scenario()
    return make_tma_profile(), None


def run_trial(
    scenario: Scenario,
    snr_db: float,
    rng_seed,
    num: Optional[Numerology] = None,
    pre=None,
    template=None,
) -> TrialRecord:
    """One frame through the channel and synchronizer.

    rng_seed is any SeedSequence entropy (int or sequence of ints).  num,
    pre, and template are rebuilt from the scenario when not supplied;
    campaigns pass cached ones.
    """
    if num is None:
        num = make_numerology()
    if pre is None:
        pre = generate_preamble(num, scenario.preamble_seed)
    if template is None:
        template = energy_template(pre, num)

    ss = np.random.SeedSequence(rng_seed)
    child_trial, child_payload, child_channel = ss.spawn(3)
    rng = np.random.default_rng(child_trial)
    seed_id = int(ss.generate_state(1, np.uint64)[0])

    lo, hi = scenario.lead_gap_range
    lead_gap = int(rng.integers(lo, hi + 1))
    frame, n0 = build_frame(
        num,
        pre,
        scenario.n_payload_symbols,
        lead_gap,
        seed=child_payload,
    )

    profile, dme = _channel_config(scenario)
    cfg = ImpairmentConfig(
        epsilon=scenario.epsilon,
        snr_db=None if math.isinf(snr_db) else float(snr_db),
        profile=profile,
        dme=dme,
        phase_noise_linewidth_hz=scenario.phase_noise_linewidth_hz,
        seed=int(child_channel.generate_state(1, np.uint64)[0]),
    )
    r = run_pipeline(frame, cfg, num)

    res = synchronize(r, num, template)
    threshold = resolve_fine_threshold(scenario, num)

    rec = TrialRecord(
        seed=seed_id,
        snr_db=float(snr_db),
        true_sto=n0,
        true_epsilon=scenario.epsilon,
        detected=res.detected,
        fail=True,
    )
    if res.detected and res.sto_estimate is not None:
        rec.sto_est = res.sto_estimate
        rec.sto_error = res.sto_estimate - n0
        rec.fail = abs(rec.sto_error) > threshold
        if res.cfo_estimate is not None:
            rec.cfo_est = res.cfo_estimate
            rec.cfo_error = res.cfo_estimate - scenario.epsilon
        rec.cfo_est_ac1 = res.cfo_estimate_ac1
        rec.cfo_est_ac2 = res.cfo_estimate_ac2
    return rec


def aggregate(scenario_name: str, snr_db: float, records: Sequence[TrialRecord]) -> CampaignStats:
    """Order-independent reduction of trial records."""
    n = len(records)
    n_detected = sum(1 for r in records if r.detected)
    n_fail = sum(1 for r in records if r.fail)
    sq = [r.cfo_error**2 for r in records if r.cfo_error is not None]
    mse = float(np.mean(sq)) if sq else float("nan")
    return CampaignStats(
        scenario=scenario_name,
        snr_db=float(snr_db),
        fail_rate=n_fail / n,
        cfo_mse=mse,
        n_trials=n,
        n_detected=n_detected,
    )


def run_campaign(
    scenario: Scenario,
    num: Optional[Numerology] = None,
    return_records: bool = False,
):
    """Run the scenario's full SNR grid.

    Returns a list of CampaignStats, one per grid point; with
    return_records=True, returns (stats, records) where records maps
    snr index -> list of TrialRecord.
    """
    if num is None:
        num = make_numerology()
    pre = generate_preamble(num, scenario.preamble_seed)
    template = energy_template(pre, num)

    stats: list[CampaignStats] = []
    all_records: dict[int, list] = {}
    for s_idx, snr_db in enumerate(scenario.snr_grid_db):
        records = [
            run_trial(
                scenario,
                snr_db,
                [scenario.master_seed, s_idx, t],
                num=num,
                pre=pre,
                template=template,
            )
            for t in range(scenario.n_trials)
        ]
        stats.append(aggregate(scenario.name, snr_db, records))
        if return_records:
            all_records[s_idx] = records
    if return_records:
        return stats, all_records
    return stats


# ---------------------------------------------------------------------------
# scenario files and result emitters


_SCENARIO_DEFAULTS = {
    "epsilon": "0.0",
    "snr_grid_db": "0,5,10",
    "n_trials": "1000",
    "master_seed": "1",
    "lead_gap_range": "200,800",
    "fine_threshold": "auto",
    "n_payload_symbols": "2",
    "preamble_seed": "1",
    "phase_noise_linewidth_hz": "0.0",
}
_SCENARIO_REQUIRED = ("name", "channel")


def load_scenario(path) -> Scenario:
    """Parse a flat key=value scenario file (# comments, blank lines ok).

    Keys mirror the Scenario fields; unknown keys and malformed numerics
    raise ValueError naming the field.
    """
    raw: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            known = set(_SCENARIO_DEFAULTS) | set(_SCENARIO_REQUIRED)
            if key not in known:
                raise ValueError(f"unknown scenario key: {key}")
            if key in raw:
                raise ValueError(f"duplicate scenario key: {key}")
            raw[key] = value

    for req in _SCENARIO_REQUIRED:
        if req not in raw:
            raise ValueError(f"missing scenario key: {req}")
    merged = {**_SCENARIO_DEFAULTS, **raw}

    def _float(key):
        try:
            return float(merged[key])
        except ValueError:
            raise ValueError(f"malformed number for {key}: {merged[key]!r}") from None

    def _int(key):
        try:
            return int(merged[key])
        except ValueError:
            raise ValueError(f"malformed integer for {key}: {merged[key]!r}") from None

    def _grid(key):
        try:
            vals = tuple(
                float("inf") if tok.strip().lower() in ("inf", "noiseless") else float(tok)
                for tok in merged[key].split(",")
                if tok.strip()
            )
        except ValueError:
            raise ValueError(f"malformed number list for {key}: {merged[key]!r}") from None
        return vals

    lead = merged["lead_gap_range"].split(",")
    if len(lead) != 2:
        raise ValueError(f"lead_gap_range needs two integers, got {merged['lead_gap_range']!r}")
    try:
        lead_range = (int(lead[0]), int(lead[1]))
    except ValueError:
        raise ValueError(
            f"malformed integer for lead_gap_range: {merged['lead_gap_range']!r}"
        ) from None

    ft = merged["fine_threshold"].strip().lower()
    fine = None if ft in ("auto", "none", "") else int(ft)

    return Scenario(
        name=merged["name"],
        channel=merged["channel"],
        epsilon=_float("epsilon"),
        snr_grid_db=_grid("snr_grid_db"),
        n_trials=_int("n_trials"),
        master_seed=_int("master_seed"),
        lead_gap_range=lead_range,
        fine_threshold=fine,
        n_payload_symbols=_int("n_payload_symbols"),
        preamble_seed=_int("preamble_seed"),
        phase_noise_linewidth_hz=_float("phase_noise_linewidth_hz"),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


CAMPAIGN_CSV_HEADER = "scenario,snr_db,fail_rate,cfo_mse,n_trials,n_detected"


def write_campaign_csv(path, stats: Sequence[CampaignStats]) -> None:
    lines = [CAMPAIGN_CSV_HEADER]
    for s in stats:
        lines.append(
            ",".join(
                [
                    s.scenario,
                    _fmt(s.snr_db),
                    _fmt(s.fail_rate),
                    _fmt(s.cfo_mse),
                    str(s.n_trials),
                    str(s.n_detected),
                ]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_campaign_json(path, stats: Sequence[CampaignStats]) -> None:
    def _jsonable(x):
        if isinstance(x, float) and not math.isfinite(x):
            return str(x)  # "inf" / "nan" keep the file strict-JSON parseable
        return x

    payload = [
        {k: _jsonable(v) for k, v in vars(s).items()} for s in stats
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


TRIAL_CSV_HEADER = (
    "seed,snr_db,true_sto,true_epsilon,detected,fail,"
    "sto_est,cfo_est,sto_error,cfo_error,cfo_est_ac1,cfo_est_ac2"
)


def write_trial_csv(path, records: Sequence[TrialRecord]) -> None:
    lines = [TRIAL_CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    r.seed,
                    r.snr_db,
                    r.true_sto,
                    r.true_epsilon,
                    r.detected,
                    r.fail,
                    r.sto_est,
                    r.cfo_est,
                    r.sto_error,
                    r.cfo_error,
                    r.cfo_est_ac1,
                    r.cfo_est_ac2,
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
