"""``simulate`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .channel import generate_channel, write_channel_csv
from .errors import ConfigError, SimulationError
from .harness import (
    config_from_dict,
    format_csv,
    preset_dict,
    preset_names,
    run_experiment,
    write_csv,
    write_precoder_csv,
)
from .harness.presets import merge_dicts
from .mathcore import derive_stream

log = logging.getLogger("thzhbf")

ALL_METHODS = ("conventional", "reduced", "no-ici")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Monte Carlo spectral-efficiency study of ICI-aware hybrid precoders.",
    )
    p.add_argument("--config", type=Path, help="experiment JSON file")
    p.add_argument("--preset", help="named preset (a --config file is merged on top)")
    p.add_argument("--list-presets", action="store_true", help="print preset names and exit")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--realizations", type=int, help="override the realization count")
    p.add_argument("--out", type=Path, help="result CSV path (default: config 'output' or stdout)")
    p.add_argument("--method", choices=[*ALL_METHODS, "no-ici-ideal", "all"],
                   help="run a single method, or 'all' three main ones")
    p.add_argument("--ici-mode", choices=["cfo", "scalar", "none"],
                   help="override the ICI model (the configured value is reused as S or epsilon)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--trace", action="store_true", help="also write per-run optimizer traces")
    p.add_argument("--trace-dir", type=Path, help="directory for --trace (default: <out>_traces)")
    p.add_argument("--timing", action="store_true",
                   help="fill time_ms_mean (otherwise written as nan so output is reproducible)")
    debug = p.add_argument_group("debug exports (first sweep point, realization 0)")
    debug.add_argument("--dump-ici", type=Path, metavar="CSV", help="write the ICI coefficients")
    debug.add_argument("--dump-channel", type=Path, metavar="CSV", help="write the channel tensor")
    debug.add_argument("--dump-precoder", type=Path, metavar="DIR",
                       help="write W and F of every method")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _load(args) -> dict:
    if args.config is None and args.preset is None:
        raise ConfigError("give --config and/or --preset")
    data = preset_dict(args.preset) if args.preset else {}
    if args.config is not None:
        try:
            user = json.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})") from exc
        if not isinstance(user, dict):
            raise ConfigError(f"{args.config}: top level must be an object")
        data = merge_dicts(data, user)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.realizations is not None:
        data["realizations"] = args.realizations
    if args.method == "all":
        data["methods"] = list(ALL_METHODS)
    elif args.method:
        data["methods"] = [args.method]
    if args.ici_mode:
        data.setdefault("ici", {})["mode"] = args.ici_mode
    return data


def _debug_dumps(args, cfg) -> None:
    point = cfg.points()[0]
    if args.dump_ici:
        point.ici.profile(point.channel.num_subcarriers).write_csv(args.dump_ici)
    if args.dump_channel:
        stream = derive_stream(cfg.seed, 0).child(0).child(0)
        write_channel_csv(generate_channel(point.channel, stream), args.dump_channel)
    if args.dump_precoder:
        one = replace(cfg, realizations=1, sweep=replace(cfg.sweep, values=(cfg.sweep.values[0],),
                      paired={k: (v[0],) for k, v in cfg.sweep.paired.items()}))
        _, kept = run_experiment(one, keep_precoders=True)
        outcome = kept[(point.value, 0)]
        for (snr, method), pre in outcome.precoders.items():
            write_precoder_csv(pre, args.dump_precoder, prefix=f"{method}_snr{snr:g}_")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.list_presets:
        print("\n".join(preset_names()))
        return 0
    try:
        cfg = config_from_dict(_load(args))
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        out = args.out or (Path(cfg.output) if cfg.output else None)
        trace_dir = None
        if args.trace:
            trace_dir = args.trace_dir or Path(f"{out.with_suffix('')}_traces" if out else "traces")
        _debug_dumps(args, cfg)
        table = run_experiment(cfg, threads=args.threads, trace_dir=trace_dir)
        if out is None:
            sys.stdout.write(format_csv(table, include_timing=args.timing))
        else:
            write_csv(table, out, include_timing=args.timing)
            log.info("wrote %d rows to %s", len(table.rows), out)
    except ConfigError as exc:
        print(f"simulate: configuration error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"simulate: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
