"""Command-line front end: ``rmpa {sim,allocate,export-lp,hwmodel,codec}``."""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    """Invalid or inconsistent command-line configuration."""


def parse_code(text: str) -> tuple[int, int]:
    try:
        m, r = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"--code expects 'm,r', got {text!r}") from None
    if not 0 <= r <= m:
        raise ConfigError(f"invalid code RM({m},{r})")
    return m, r


def parse_sweep(text: str) -> list[float]:
    """``start:stop:step`` in dB with both ends included, or a single value."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad SNR sweep {text!r}") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise ConfigError("SNR sweep must be start:stop:step with step > 0 and stop >= start")
    count = int(np.floor((vals[1] - vals[0]) / vals[2] + 1e-9)) + 1
    return [round(vals[0] + i * vals[2], 10) for i in range(count)]


def _bits(text: str) -> np.ndarray:
    s = text.replace(",", "").replace(" ", "")
    if not s or set(s) - {"0", "1"}:
        raise ConfigError(f"expected a bit string, got {text!r}")
    return np.array([int(ch) for ch in s], dtype=np.uint8)


def _input_quant(args) -> dict:
    return {"llr_scale": args.llr_scale, "llr_rounding": args.llr_rounding}


def _make_decoder(args, m: int, r: int):
    from .estimators import CPADecoder, IPADecoder, IUPADecoder

    quant = None if args.quant.lower() == "float" else args.quant
    if args.decoder == "ipa":
        if r not in (2, 3):
            raise ConfigError("IPA supports r in {2, 3}")
        return IPADecoder(m=m, r=r, n_max=args.nmax, qformat=quant, **_input_quant(args))
    if args.decoder == "cpa":
        return CPADecoder(m=m, r=r, n_max=args.nmax, qformat=quant, pus=args.pus,
                          adder_tree=args.adder_tree, accumulator=args.accumulator,
                          **_input_quant(args))
    if r != 3:
        raise ConfigError("IUPA is defined for r = 3")
    if args.ideal == bool(args.schedule):
        raise ConfigError("iupa needs exactly one of --ideal or --schedule PATH")
    schedule = "ideal" if args.ideal else Path(args.schedule)
    if not args.ideal and not schedule.exists():
        raise ConfigError(f"schedule file {schedule} not found")
    return IUPADecoder(m=m, schedule=schedule, n_max=args.nmax, qformat=quant,
                       hw_split=args.hw_split, **_input_quant(args))


def _fit(decoder):
    try:
        return decoder.fit()
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sim(args) -> int:
    from .channel import records_to_csv, records_to_jsonl, run_fer
    from .estimators import describe

    m, r = parse_code(args.code)
    points = parse_sweep(args.snr)
    if args.workers < 1:
        raise ConfigError("--workers must be positive")
    dec = _fit(_make_decoder(args, m, r))
    recs = run_fer(dec, points, seed=args.seed, min_frames=args.min_frames,
                   min_errors=args.min_errors, max_errors=args.max_errors,
                   max_frames=args.max_frames, workers=args.workers,
                   labels=describe(dec), all_iterations=args.all_iterations)
    text = records_to_csv(recs) if args.format == "csv" else records_to_jsonl(recs)
    _emit(text, args.out)
    return EXIT_OK


def _allocation_args(args):
    m, r = parse_code(args.code)
    if r != 3:
        raise ConfigError("allocation is defined for RM(m, 3)")
    if not 4 <= m <= 8:
        raise ConfigError("allocation supports 4 <= m <= 8")
    for name, v in (("G", args.G), ("lambda", args.lam)):
        if v < 1 or v & (v - 1):
            raise ConfigError(f"{name} must be a power of two")
    return m


def cmd_allocate(args) -> int:
    from .allocation import ProjectionAllocator

    m = _allocation_args(args)
    alloc = ProjectionAllocator(m=m, G=args.G, lam=args.lam, time_limit=args.time_limit).fit()
    doc = alloc.schedule_.to_dict()
    doc["objective"] = alloc.assignment_.objective
    doc["total_pus"] = alloc.assignment_.total_pus
    doc["proven"] = alloc.assignment_.proven
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_export_lp(args) -> int:
    from .allocation import build_ilp, build_redundancy_matrix, lp_text

    m = _allocation_args(args)
    _emit(lp_text(build_ilp(build_redundancy_matrix(m), args.G, args.lam)), args.out)
    return EXIT_OK


def cmd_hwmodel(args) -> int:
    from .hw_model import cpa_model, iupa_model

    m, r = parse_code(args.code)
    try:
        if args.arch == "iupa":
            if r != 3:
                raise ConfigError("the IUPA model is for r = 3")
            est = iupa_model(m, args.G, args.lam, args.f, args.t_fod, args.iters)
        else:
            est = cpa_model(m, r, args.p, args.f, args.t_fod, args.t_add, args.iters)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(json.dumps(est.to_dict(), indent=2))
    return EXIT_OK


def cmd_codec(args) -> int:
    from .rm_code import RmCode, encode

    m, r = parse_code(args.code)
    code = RmCode(m, r)
    if args.action == "encode":
        u = _bits(args.bits)
        if u.size != code.k:
            raise ConfigError(f"RM({m},{r}) needs {code.k} message bits, got {u.size}")
        print("".join(map(str, encode(code, u))))
        return EXIT_OK
    try:
        llr = np.array([float(v) for v in args.llr.split(",")])
    except ValueError:
        raise ConfigError("--llr expects comma-separated numbers") from None
    if llr.size != code.n:
        raise ConfigError(f"RM({m},{r}) needs {code.n} LLRs, got {llr.size}")
    dec = _fit(_make_decoder(args, m, r))
    res = dec.decode(llr)
    print(json.dumps({"codeword": "".join(map(str, res.codewords[0])),
                      "iterations": int(res.iterations[0])}))
    return EXIT_OK


def _decoder_flags(p):
    p.add_argument("--decoder", choices=("ipa", "iupa", "cpa"), default="iupa")
    p.add_argument("--ideal", action="store_true", help="duplicate-free IUPA schedule")
    p.add_argument("--schedule", help="IUPA schedule JSON from 'allocate'")
    p.add_argument("--nmax", type=int, default=None, help="max iterations (default ceil(m/2))")
    p.add_argument("--quant", default="float", help="'float' or a format such as Q(3:2)")
    p.add_argument("--llr-scale", type=float, default=0.5,
                   help="channel LLR gain before quantisation (fixed point only)")
    p.add_argument("--llr-rounding", choices=("trunc", "half_away"), default="trunc")
    p.add_argument("--pus", type=int, default=7, help="CPA processing units per cycle")
    p.add_argument("--adder-tree", choices=("fp", "sat"), default="fp")
    p.add_argument("--accumulator", choices=("fp", "sat"), default="sat")
    p.add_argument("--hw-split", action="store_true",
                   help="IUPA fixed point: divider split of the right-half columns")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rmpa", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", help="Monte Carlo FER sweep over AWGN")
    p.add_argument("--code", required=True, help="m,r")
    _decoder_flags(p)
    p.add_argument("--snr", required=True, help="Eb/N0 in dB: value or start:stop:step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-frames", type=int, default=100_000)
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--max-errors", type=int, default=1000)
    p.add_argument("--max-frames", type=int, default=10_000_000)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--all-iterations", action="store_true",
                   help="emit one row per iteration budget 1..nmax")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sim)

    for name, func, helptext in (("allocate", cmd_allocate, "solve the projection allocation"),
                                 ("export-lp", cmd_export_lp, "write the allocation model as LP")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--code", required=True)
        p.add_argument("-G", type=int, required=True)
        p.add_argument("--lambda", dest="lam", type=int, required=True)
        p.add_argument("--out")
        if name == "allocate":
            p.add_argument("--time-limit", type=float, default=600.0)
        p.set_defaults(func=func)

    p = sub.add_parser("hwmodel", help="throughput/latency model")
    p.add_argument("arch", choices=("iupa", "cpa"))
    p.add_argument("--code", required=True)
    p.add_argument("-G", type=int, default=2)
    p.add_argument("--lambda", dest="lam", type=int, default=2)
    p.add_argument("-p", type=int, default=7)
    p.add_argument("-f", type=float, required=True, help="clock in MHz")
    p.add_argument("--t-fod", type=int, default=None)
    p.add_argument("--t-add", type=int, default=2)
    p.add_argument("--iters", type=int, default=2)
    p.set_defaults(func=cmd_hwmodel)

    p = sub.add_parser("codec", help="encode or decode a single vector")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("--code", required=True)
    p.add_argument("--bits", default="", help="message bits for encode")
    p.add_argument("--llr", default="", help="comma-separated LLRs for decode")
    _decoder_flags(p)
    p.set_defaults(func=cmd_codec)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"rmpa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"rmpa: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
