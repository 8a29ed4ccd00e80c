"""Command line front end.

    ldacs-sync trace     one impaired frame, timing-metric trace around the
                         preamble anchor (tau, xcr, xsig, xene CSV)
    ldacs-sync campaign  Monte Carlo fail-rate / CFO-MSE over an SNR grid
    ldacs-sync sweep     the bundled reproduction set (AWGN eps 0 / 1.5,
                         ENR, ENR+DME, TMA), one campaign CSV each

Campaigns come from a key=value scenario file (--scenario) or are assembled
from flags.  All randomness is driven by --seed; repeated runs write
byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .channel import ImpairmentConfig, run_pipeline
from .harness import (
    CHANNELS,
    Scenario,
    _channel_config,
    load_scenario,
    run_campaign,
    write_campaign_csv,
    write_campaign_json,
    write_trial_csv,
)
from .sigmodel import build_frame, energy_template, generate_preamble, make_numerology, write_iq
from .sync import baseline_xene, baseline_xsig, metric_stream


def _parse_snr_list(text: str) -> tuple:
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.lower() in ("inf", "noiseless"):
            vals.append(float("inf"))
        else:
            vals.append(float(tok))
    if not vals:
        raise ValueError("empty --snr list")
    return tuple(vals)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


# ---------------------------------------------------------------------------
# trace


def cmd_trace(args) -> int:
    num = make_numerology()
    pre = generate_preamble(num, args.preamble_seed)
    template = energy_template(pre, num)

    # no payload: at lag 2L a trailing unit-power symbol images into the
    # magnitude correlation and can shade the true peak in the dump window
    lead = 600
    frame, n0 = build_frame(num, pre, 0, lead, seed=args.seed + 1)
    frame = np.concatenate([frame, np.zeros(300, dtype=np.complex128)])

    profile = dme = None
    if args.channel != "AWGN":
        scenario = Scenario(name="trace", channel=args.channel, epsilon=args.epsilon)
        profile, dme = _channel_config(scenario)
    cfg = ImpairmentConfig(
        epsilon=args.epsilon,
        snr_db=None if args.noiseless else args.snr,
        profile=profile,
        dme=dme,
        seed=args.seed,
    )
    r = run_pipeline(frame, cfg, num)

    ac1, ac2, ene, xcr = metric_stream(r, num, template)
    xsig = baseline_xsig(r, pre, num)
    xene = baseline_xene(r, template)

    centre = n0 + template.alignment_offset
    half = num.n_total // 2
    taus = np.arange(-half, half + 1)
    idx = centre + taus
    if idx[0] < 0 or idx[-1] >= r.size:
        print("trace window exceeds the stream", file=sys.stderr)
        return 1

    cols = []
    for arr in (xcr, xsig, xene):
        seg = arr[idx]
        peak = seg.max()
        cols.append(seg / peak if peak > 0 else seg)

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "trace.csv")
    lines = ["tau,xcr,xsig,xene"]
    for i, tau in enumerate(taus):
        lines.append(
            f"{tau},{_fmt(cols[0][i])},{_fmt(cols[1][i])},{_fmt(cols[2][i])}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path}")

    if args.metrics:
        mpath = os.path.join(args.out, "metrics.csv")
        mlines = ["n,ac1,ac2,ene,xcr,xsig,xene"]
        for n in range(r.size):
            mlines.append(
                f"{n},{_fmt(abs(ac1[n]))},{_fmt(abs(ac2[n]))},"
                f"{_fmt(ene[n])},{_fmt(xcr[n])},{_fmt(xsig[n])},{_fmt(xene[n])}"
            )
        with open(mpath, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(mlines) + "\n")
        print(f"wrote {mpath}")

    if args.write_iq:
        ipath = os.path.join(args.out, "rx_iq.fc32")
        write_iq(ipath, r)
        print(f"wrote {ipath}")
    return 0


# ---------------------------------------------------------------------------
# campaign


def _scenario_from_args(args) -> Scenario:
    if args.scenario:
        scen = load_scenario(args.scenario)
        if args.epsilon is not None:
            scen.epsilon = args.epsilon
        if args.snr is not None:
            scen.snr_grid_db = _parse_snr_list(args.snr)
        if args.noiseless:
            scen.snr_grid_db = (float("inf"),)
        if args.trials is not None:
            scen.n_trials = args.trials
        if args.seed is not None:
            scen.master_seed = args.seed
        return scen
    if args.channel is None:
        raise ValueError("campaign needs --scenario or --channel")
    grid = (float("inf"),) if args.noiseless else _parse_snr_list(args.snr or "0,5,10")
    return Scenario(
        name=args.channel.lower(),
        channel=args.channel,
        epsilon=args.epsilon if args.epsilon is not None else 0.0,
        snr_grid_db=grid,
        n_trials=args.trials if args.trials is not None else 1000,
        master_seed=args.seed if args.seed is not None else 1,
    )


def cmd_campaign(args) -> int:
    try:
        scen = _scenario_from_args(args)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2

    if args.per_trial:
        stats, records = run_campaign(scen, return_records=True)
    else:
        stats = run_campaign(scen)
        records = None

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{scen.name}.csv")
    json_path = os.path.join(args.out, f"{scen.name}.json")
    write_campaign_csv(csv_path, stats)
    write_campaign_json(json_path, stats)
    for s in stats:
        print(
            f"{s.scenario} snr={_fmt(s.snr_db)} fail_rate={_fmt(s.fail_rate)} "
            f"cfo_mse={_fmt(s.cfo_mse)} ({s.n_trials} trials, {s.n_detected} detected)"
        )
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")

    if records is not None:
        flat = [r for s_idx in sorted(records) for r in records[s_idx]]
        tpath = os.path.join(args.out, f"{scen.name}_trials.csv")
        write_trial_csv(tpath, flat)
        print(f"wrote {tpath}")
    return 0


# ---------------------------------------------------------------------------
# sweep


def bundled_scenarios(n_trials: int, master_seed: int) -> list:
    awgn_grid = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    aero_grid = (0.0, 4.0, 8.0, 12.0, 16.0, 20.0, 24.0)
    common = dict(n_trials=n_trials, master_seed=master_seed)
    return [
        Scenario(name="awgn_eps0", channel="AWGN", epsilon=0.0, snr_grid_db=awgn_grid, **common),
        Scenario(name="awgn_eps1p5", channel="AWGN", epsilon=1.5, snr_grid_db=awgn_grid, **common),
        Scenario(name="enr", channel="ENR", epsilon=0.5, snr_grid_db=aero_grid, **common),
        Scenario(name="enr_dme", channel="ENR_DME", epsilon=0.5, snr_grid_db=aero_grid, **common),
        Scenario(name="tma", channel="TMA", epsilon=0.5, snr_grid_db=aero_grid, **common),
    ]


def cmd_sweep(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for scen in bundled_scenarios(args.trials, args.seed):
        stats = run_campaign(scen)
        path = os.path.join(args.out, f"{scen.name}.csv")
        write_campaign_csv(path, stats)
        for s in stats:
            print(
                f"{s.scenario} snr={_fmt(s.snr_db)} fail_rate={_fmt(s.fail_rate)} "
                f"cfo_mse={_fmt(s.cfo_mse)} ({s.n_trials} trials, {s.n_detected} detected)"
            )
        print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldacs-sync", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trace", help="single-frame timing-metric trace")
    t.add_argument("--out", default=".", help="output directory")
    t.add_argument("--snr", type=float, default=10.0, help="SNR in dB")
    t.add_argument("--noiseless", action="store_true")
    t.add_argument("--epsilon", type=float, default=0.0, help="CFO in subcarrier spacings")
    t.add_argument("--channel", choices=CHANNELS, default="AWGN")
    t.add_argument("--seed", type=int, default=1, help="noise and channel draw")
    t.add_argument("--preamble-seed", type=int, default=1, help="training sequence selector")
    t.add_argument("--metrics", action="store_true", help="also dump the full metric trace")
    t.add_argument("--write-iq", action="store_true", help="dump received IQ as float32 pairs")
    t.set_defaults(func=cmd_trace)

    c = sub.add_parser("campaign", help="Monte Carlo campaign over an SNR grid")
    c.add_argument("--scenario", help="key=value scenario file")
    c.add_argument("--out", default=".", help="output directory")
    c.add_argument("--channel", choices=CHANNELS)
    c.add_argument("--epsilon", type=float)
    c.add_argument("--snr", help="comma-separated SNR grid in dB (inf = noiseless)")
    c.add_argument("--noiseless", action="store_true")
    c.add_argument("--trials", type=int)
    c.add_argument("--seed", type=int)
    c.add_argument("--per-trial", action="store_true", help="also write per-trial records")
    c.set_defaults(func=cmd_campaign)

    w = sub.add_parser("sweep", help="bundled reproduction campaigns")
    w.add_argument("--out", default=".", help="output directory")
    w.add_argument("--trials", type=int, default=1000)
    w.add_argument("--seed", type=int, default=1)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as e:
        print(str(e), file=sys.stderr)
        return 2
    except OSError as e:
        print(str(e), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
