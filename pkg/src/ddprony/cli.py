"""Command-line interface.

Subcommands:

* genframe  - synthesize a pilot frame (optionally through a random
  multipath channel plus noise) and emit it as CSV.
* estimate  - run one or both pipelines, or the full fused method, on a
  frame read from CSV or synthesized in place.
* simulate  - Monte Carlo detection-rate sweep over path counts, SNRs,
  and methods; emits the report as CSV or JSON.
* selftest  - run quick built-in sanity checks and exit 0 on success.

The environment variable DD_PRONY_SEED, when set, overrides --seed for
every subcommand.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .channel import NoiseSpec, PathSet, add_awgn, apply_channel, sample_paths
from .fusion import EstimationMethod, FusionParams, estimate_paths
from .montecarlo import Scenario, sweep
from .sampling import fd_matrix, retained_td_matrix
from .signal_model import (
    ConfigurationError,
    ExtendedFrame,
    GridConfig,
    SignalModelKind,
    transmit_samples,
)

__all__ = ["main"]

_MODEL_CHOICES = {kind.value: kind for kind in SignalModelKind}


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    grid = parser.add_argument_group("frame geometry")
    grid.add_argument("--n", type=int, default=32,
                      help="time slots per frame (default: %(default)s)")
    grid.add_argument("--m", type=int, default=32,
                      help="subcarriers, even (default: %(default)s)")
    grid.add_argument("--slot-duration", type=float, default=1.0,
                      metavar="T",
                      help="slot duration in seconds (default: %(default)s)")
    grid.add_argument("--ut", type=int, default=2,
                      help="time-domain upsampling factor "
                           "(default: %(default)s)")
    grid.add_argument("--uf", type=int, default=2,
                      help="frequency-domain upsampling factor "
                           "(default: %(default)s)")
    grid.add_argument("--n0", type=int, default=2,
                      help="tail slots kept on each side "
                           "(default: %(default)s)")
    grid.add_argument("--model", choices=sorted(_MODEL_CHOICES),
                      default="ideal",
                      help="transmit waveform model (default: %(default)s)")


def _add_noise_flags(parser: argparse.ArgumentParser) -> None:
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", type=float, default=None,
                       help="per-sample SNR in dB (default: noiseless)")
    noise.add_argument("--noiseless", action="store_true",
                       help="disable noise (the default)")


def _add_fusion_flags(parser: argparse.ArgumentParser) -> None:
    fusion = parser.add_argument_group("fusion parameters")
    fusion.add_argument("--delta-t", type=float, default=0.1,
                        help="delay merge radius / T (default: %(default)s)")
    fusion.add_argument("--delta-f", type=float, default=0.1,
                        help="Doppler merge radius * T "
                             "(default: %(default)s)")
    fusion.add_argument("--delta-alpha", type=float, default=0.01,
                        help="relative gain prune threshold "
                             "(default: %(default)s)")


def _grid_from_args(args) -> GridConfig:
    return GridConfig(
        n_slots=args.n,
        n_subcarriers=args.m,
        slot_duration=args.slot_duration,
        upsample_time=args.ut,
        upsample_freq=args.uf,
        tail_slots=args.n0,
    )


def _seed_from_args(args) -> int:
    env = os.environ.get("DD_PRONY_SEED")
    if env is not None:
        return int(env)
    return args.seed


def _fusion_from_args(args) -> FusionParams:
    return FusionParams(delta_t=args.delta_t, delta_f=args.delta_f,
                        delta_alpha=args.delta_alpha)


def _write_text(text: str, out_path) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _synthesize(cfg: GridConfig, kind: SignalModelKind, path_count: int,
                snr_db, seed: int):
    """Pilot through a random channel; path_count=0 gives the clean tx."""
    tx = transmit_samples(cfg, kind)
    if path_count == 0:
        return tx, None
    seeds = np.random.SeedSequence([seed, 0]).generate_state(
        2, dtype=np.uint64)
    paths = sample_paths(int(seeds[0]), path_count, cfg)
    frame = apply_channel(tx, paths, cfg, kind)
    frame = add_awgn(frame, NoiseSpec(snr_db, int(seeds[1])), cfg)
    return frame, paths


def _frame_csv(frame: ExtendedFrame, cfg: GridConfig,
               kind: SignalModelKind, paths) -> str:
    lines = [
        "# config n={} m={} slot_duration={:.17g} ut={} uf={} n0={} "
        "model={}".format(cfg.n_slots, cfg.n_subcarriers, cfg.slot_duration,
                          cfg.upsample_time, cfg.upsample_freq,
                          cfg.tail_slots, kind.value)
    ]
    if paths is not None:
        for p in paths.paths:
            lines.append(
                "# path gain_re={:.17g} gain_im={:.17g} delay={:.17g} "
                "doppler={:.17g}".format(p.gain.real, p.gain.imag, p.delay,
                                         p.doppler))
    lines.append("index,t_over_T,re,im")
    times = cfg.extended_times() / cfg.slot_duration
    for i, (t, v) in enumerate(zip(times, frame.samples)):
        lines.append(f"{i},{t:.17g},{v.real:.17g},{v.imag:.17g}")
    return "\n".join(lines) + "\n"


def _read_frame(path: str, args):
    """Frame CSV reader; a '# config' header overrides the grid flags."""
    cfg_tokens = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("# config "):
                    for token in line[len("# config "):].split():
                        key, _, value = token.partition("=")
                        cfg_tokens[key] = value
                continue
            if line.startswith("index,"):
                continue
            parts = line.split(",")
            rows.append(complex(float(parts[2]), float(parts[3])))
    if cfg_tokens:
        cfg = GridConfig(
            n_slots=int(cfg_tokens["n"]),
            n_subcarriers=int(cfg_tokens["m"]),
            slot_duration=float(cfg_tokens["slot_duration"]),
            upsample_time=int(cfg_tokens["ut"]),
            upsample_freq=int(cfg_tokens["uf"]),
            tail_slots=int(cfg_tokens["n0"]),
        )
        kind = _MODEL_CHOICES[cfg_tokens["model"]]
    else:
        cfg = _grid_from_args(args)
        kind = _MODEL_CHOICES[args.model]
    samples = np.asarray(rows, dtype=complex)
    if len(samples) != cfg.extended_length:
        raise ConfigurationError(
            f"frame file holds {len(samples)} samples but the grid "
            f"requires {cfg.extended_length}")
    return ExtendedFrame(samples, cfg.origin_offset), cfg, kind


def _cmd_genframe(args) -> int:
    cfg = _grid_from_args(args)
    kind = _MODEL_CHOICES[args.model]
    snr = None if args.noiseless else args.snr_db
    frame, paths = _synthesize(cfg, kind, args.paths, snr,
                               _seed_from_args(args))
    _write_text(_frame_csv(frame, cfg, kind, paths), args.out)
    return 0


def _candidate_records(rx, cfg, method: str):
    from .estimators import delay_first, doppler_first

    records = []
    if method in ("doppler-first", "both"):
        cands, _ = doppler_first(retained_td_matrix(rx, cfg), cfg)
        records.append(cands)
    if method in ("delay-first", "both"):
        cands, _ = delay_first(fd_matrix(rx, cfg), cfg)
        records.append(cands)
    big_t = cfg.slot_duration
    out = []
    for cands in records:
        for delay, doppler in cands.pairs():
            out.append({
                "delay_over_T": delay / big_t,
                "doppler_times_T": doppler * big_t,
                "source": cands.source.value,
            })
    return out


def _cmd_estimate(args) -> int:
    if args.infile is not None:
        rx, cfg, kind = _read_frame(args.infile, args)
    else:
        cfg = _grid_from_args(args)
        kind = _MODEL_CHOICES[args.model]
        if args.paths < 1:
            raise ConfigurationError(
                "synthesized estimation needs --paths >= 1")
        snr = None if args.noiseless else args.snr_db
        rx, _ = _synthesize(cfg, kind, args.paths, snr, _seed_from_args(args))
    method = "parallel" if args.parallel else args.method
    big_t = cfg.slot_duration
    if method == "parallel":
        est = estimate_paths(rx, cfg, _fusion_from_args(args), kind,
                             EstimationMethod.PARALLEL)
        paths = [{
            "delay_over_T": p.delay / big_t,
            "doppler_times_T": p.doppler * big_t,
            "gain_re": p.gain.real,
            "gain_im": p.gain.imag,
        } for p in est.paths]
        if args.format == "json":
            text = json.dumps({
                "paths": paths,
                "count": est.count,
                "pre_prune_count": est.pre_prune_count,
                "ill_conditioned": est.ill_conditioned,
            }, indent=2) + "\n"
        else:
            lines = ["delay_over_T,doppler_times_T,gain_re,gain_im"]
            lines += [
                "{delay_over_T:.17g},{doppler_times_T:.17g},"
                "{gain_re:.17g},{gain_im:.17g}".format(**p) for p in paths]
            text = "\n".join(lines) + "\n"
    else:
        records = _candidate_records(rx, cfg, method)
        if args.format == "json":
            text = json.dumps({"candidates": records}, indent=2) + "\n"
        else:
            lines = ["source,delay_over_T,doppler_times_T"]
            lines += [
                "{source},{delay_over_T:.17g},{doppler_times_T:.17g}"
                .format(**r) for r in records]
            text = "\n".join(lines) + "\n"
    _write_text(text, args.out)
    return 0


def _parse_float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _parse_int_list(text: str):
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _cmd_simulate(args) -> int:
    cfg = _grid_from_args(args)
    kind = _MODEL_CHOICES[args.model]
    fusion = _fusion_from_args(args)
    seed = _seed_from_args(args)
    path_counts = _parse_int_list(args.paths)
    if args.noiseless or args.snr_db is None:
        snrs = [None]
    else:
        snrs = _parse_float_list(args.snr_db)
    if args.method == "all":
        methods = [EstimationMethod.DOPPLER_FIRST,
                   EstimationMethod.DELAY_FIRST,
                   EstimationMethod.PARALLEL]
    else:
        methods = [EstimationMethod(args.method)]
    scenarios = [
        Scenario(cfg=cfg, path_count=p, snr_db=snr, runs=args.runs,
                 base_seed=seed, method=method,
                 match_delta_t=args.match_dt, match_delta_f=args.match_df,
                 model=kind, fusion=fusion)
        for p in path_counts for snr in snrs for method in methods
    ]
    report = sweep(scenarios, workers=args.workers,
                   include_timing=args.timing)
    text = report.to_csv() if args.format == "csv" else report.to_json()
    _write_text(text, args.out)
    return 0


def _selftest_checks():
    from . import selftest_checks

    return selftest_checks.all_checks()


def _cmd_selftest(args) -> int:
    failures = 0
    for name, fn in _selftest_checks():
        try:
            fn()
            status = "pass"
        except Exception as exc:
            status = f"FAIL ({type(exc).__name__}: {exc})"
            failures += 1
        print(f"{name}: {status}")
    print(f"selftest: {failures} failure(s)")
    return 0 if failures == 0 else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddprony",
        description="Delay-Doppler multipath estimation from OTFS pilot "
                    "frames, plus a Monte Carlo detection-rate simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "genframe", help="synthesize a pilot frame and emit CSV")
    _add_grid_flags(gen)
    _add_noise_flags(gen)
    gen.add_argument("--paths", type=int, default=0,
                     help="random channel paths; 0 emits the clean "
                          "transmit frame (default: %(default)s)")
    gen.add_argument("--seed", type=int, default=0,
                     help="random seed (default: %(default)s)")
    gen.add_argument("--out", default=None, metavar="PATH",
                     help="output file (default: stdout)")

    est = sub.add_parser(
        "estimate", help="estimate paths from a frame CSV or a "
                         "synthesized frame")
    _add_grid_flags(est)
    _add_noise_flags(est)
    _add_fusion_flags(est)
    est.add_argument("--in", dest="infile", default=None, metavar="PATH",
                     help="frame CSV produced by genframe (default: "
                          "synthesize)")
    est.add_argument("--paths", type=int, default=1,
                     help="paths when synthesizing (default: %(default)s)")
    est.add_argument("--seed", type=int, default=0,
                     help="random seed (default: %(default)s)")
    est.add_argument("--method",
                     choices=["doppler-first", "delay-first", "both",
                              "parallel"],
                     default="parallel",
                     help="pipeline selection (default: %(default)s)")
    est.add_argument("--parallel", action="store_true",
                     help="shorthand for --method parallel")
    est.add_argument("--format", choices=["json", "csv"], default="json",
                     help="output format (default: %(default)s)")
    est.add_argument("--out", default=None, metavar="PATH",
                     help="output file (default: stdout)")

    sim = sub.add_parser(
        "simulate", help="Monte Carlo detection-rate sweep")
    _add_grid_flags(sim)
    _add_fusion_flags(sim)
    noise = sim.add_mutually_exclusive_group()
    noise.add_argument("--snr-db", default=None, metavar="DB[,DB...]",
                       help="per-sample SNR values in dB, comma separated "
                            "(default: noiseless)")
    noise.add_argument("--noiseless", action="store_true",
                       help="disable noise (the default)")
    sim.add_argument("--paths", default="2", metavar="P[,P...]",
                     help="path counts, comma separated "
                          "(default: %(default)s)")
    sim.add_argument("--runs", type=int, default=1000,
                     help="trials per scenario (default: %(default)s)")
    sim.add_argument("--seed", type=int, default=0,
                     help="base seed (default: %(default)s)")
    sim.add_argument("--method",
                     choices=["doppler-first", "delay-first", "parallel",
                              "all"],
                     default="parallel",
                     help="method, or 'all' for the three-way comparison "
                          "(default: %(default)s)")
    sim.add_argument("--match-dt", type=float, default=0.5,
                     help="detection radius for delay, units of T "
                          "(default: %(default)s)")
    sim.add_argument("--match-df", type=float, default=0.5,
                     help="detection radius for Doppler, units of 1/T "
                          "(default: %(default)s)")
    sim.add_argument("--workers", type=int, default=None,
                     help="worker processes (default: available "
                          "parallelism)")
    sim.add_argument("--timing", action="store_true",
                     help="record mean trial wall time (makes the report "
                          "nondeterministic)")
    sim.add_argument("--format", choices=["csv", "json"], default="csv",
                     help="report format (default: %(default)s)")
    sim.add_argument("--out", default=None, metavar="PATH",
                     help="output file (default: stdout)")

    sub.add_parser("selftest", help="run built-in sanity checks")
    return parser


_COMMANDS = {
    "genframe": _cmd_genframe,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
