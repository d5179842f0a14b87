"""Command-line interface.

Exit codes: 0 success (or signal detected), 1 clean not-detected,
2 usage error, 3 runtime error.  ``--config FILE`` reads a JSON object
whose keys are long option names (dashes or underscores); flags given on
the command line override it.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional


from . import __version__
from .bench import POWER_METHODS, TRIAL_STREAM, BenchScenario, power_bench, reconstruction_bench, rows_to_csv
from .errors import StageError
from .fileio import (
    atomic_write,
    diagram_to_csv,
    diagram_to_json,
    mask_to_csv,
    read_signal,
    write_signal,
    zeros_to_json,
)
from .pipeline import AnalysisConfig, analyze
from .reconstruct import denoise_analysis
from .signal import SYNTH_KINDS, NoiseModel, TimeSeries, mix_at_snr, nsm, stft, synth, white_noise
from .stats import (
    STAT_KINDS,
    AlphaSchedule,
    TestReport,
    analysis_statistics,
    build_noise_references,
    p_values,
    sequential_hole_count,
    simultaneous_test,
)
from .tda import diagram_h0

EXIT_OK, EXIT_NOT_DETECTED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _add_signal_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("signal source (one of)")
    g.add_argument("--input", help="mono WAV or single-column CSV file")
    g.add_argument("--synth", choices=SYNTH_KINDS, help="synthetic signal kind")
    g.add_argument("--noise", action="store_true", help="pure white noise")
    p.add_argument("--n", type=int, default=1024, help="length of synthetic or noise signals")
    p.add_argument("--snr", type=float, default=None, help="add white noise at this SNR (dB) to --synth")
    p.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    p.add_argument("--sample-rate", type=float, default=1.0, help="sample rate for CSV input")


def _add_stft_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-fft", type=int, default=512)
    p.add_argument("--hop", type=int, default=1)
    p.add_argument("--margin", type=float, default=2.0, help="border band without zeros, plane units")
    p.add_argument("--non-overlapping", action="store_true", help="only components below the outer region")
    p.add_argument("--eps-max", type=float, default=0.15)


def _add_test_args(p: argparse.ArgumentParser, schedule: str) -> None:
    p.add_argument("--statistic", choices=STAT_KINDS, default="energy_sv")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--schedule", choices=("bonferroni", "polynomial", "geometric"), default=schedule)
    p.add_argument("--m", type=float, default=1.0, help="polynomial decay exponent")
    p.add_argument("--beta", type=float, default=0.5, help="geometric decay ratio")
    p.add_argument("--K", type=int, default=5, help="number of tested components")
    p.add_argument("--B", type=int, default=200, help="noise replicates in the reference")
    p.add_argument("--cache-dir", default=None, help="noise reference cache (default $ZEROTOPO_CACHE)")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerotopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON file with option values")
        return p

    p = add("detect", "test a signal for components; exit 0 if detected, 1 if not")
    _add_signal_args(p)
    _add_stft_args(p)
    _add_test_args(p, "bonferroni")
    p.add_argument("--out", help="report JSON path (default stdout)")

    p = add("reconstruct", "count components and reconstruct the signal")
    _add_signal_args(p)
    _add_stft_args(p)
    _add_test_args(p, "polynomial")
    p.add_argument("--volumes", choices=("mv", "sv"), default="sv")
    p.add_argument("--dilate", action="store_true", help="grow the mask by one cell")
    p.add_argument("--out-dir", default=".", help="directory for estimate, report and mask")
    p.add_argument("--format", choices=("wav", "csv"), default="wav")

    p = add("bench", "power or reconstruction benchmark over an SNR grid")
    p.add_argument("--kind", choices=("power", "reconstruction"), default="power")
    p.add_argument("--signal", choices=SYNTH_KINDS, default="chirp")
    p.add_argument("--snrs", type=float, nargs="+", default=[-5.0, 0.0, 5.0, 10.0])
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--methods", nargs="+", choices=tuple(POWER_METHODS), default=list(POWER_METHODS))
    p.add_argument("--alphas", type=float, nargs="+", default=[0.05, 0.15])
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--B", type=int, default=200)
    p.add_argument("--L", type=int, default=99, help="null curves for the APF test")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cache-dir", default=None)
    _add_stft_args(p)
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = add("noise-ref", "populate the noise reference cache")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--kinds", nargs="+", choices=STAT_KINDS, default=list(STAT_KINDS))
    p.add_argument("--K", type=int, default=5)
    p.add_argument("--B", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-kind", choices=("real", "complex"), default="real")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_stft_args(p)

    p = add("stratify", "normalized spectrogram maximum per file and stratum sizes")
    p.add_argument("files", nargs="*")
    p.add_argument("--sample-rate", type=float, default=1.0)
    p.add_argument("--n-fft", type=int, default=512)
    p.add_argument("--hop", type=int, default=1)
    p.add_argument("--levels", type=int, nargs="+", default=[2, 3, 4, 5, 6, 7], help="stratum thresholds i")
    p.add_argument("--out", help="CSV output path (default stdout)")

    p = add("synth", "write a synthetic signal")
    p.add_argument("--kind", choices=SYNTH_KINDS, default="chirp")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--snr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample-rate", type=float, default=1.0)
    p.add_argument("--out", required=False, help="output .wav or .csv")

    p = add("zeros", "dump the spectrogram zeros as JSON")
    _add_signal_args(p)
    _add_stft_args(p)
    p.add_argument("--out", help="JSON path (default stdout)")

    p = add("diagram", "dump the persistence diagram")
    _add_signal_args(p)
    _add_stft_args(p)
    p.add_argument("--dim", choices=("0", "1", "all"), default="1")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path (default stdout)")
    return parser


def _parse(argv: Optional[List[str]]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        values = {}
        for key, val in cfg.items():
            dest = key.replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                parser.error(f"unknown config key {key!r} for {args.command}")
            values[dest] = val
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return args


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(
        n_fft=args.n_fft, hop=args.hop, margin=args.margin,
        eps_max=args.eps_max, non_overlapping=args.non_overlapping,
    )


def _load_signal(args) -> TimeSeries:
    chosen = [bool(args.input), bool(args.synth), bool(args.noise)]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --input, --synth, --noise")
    if args.input:
        try:
            return read_signal(args.input, args.sample_rate)
        except Exception as exc:
            raise StageError("read-input", exc) from exc
    model = NoiseModel("real", 1.0, args.seed)
    if args.noise:
        return white_noise(args.n, model, stream=TRIAL_STREAM)
    f = synth(args.synth, args.n)
    if args.snr is None:
        return f
    return mix_at_snr(f, model, args.snr, stream=TRIAL_STREAM)


def _schedule(args, K: int) -> AlphaSchedule:
    return AlphaSchedule(args.alpha, args.schedule, K=K, m=args.m, beta=args.beta)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _reference(args, x: TimeSeries, config: AnalysisConfig, kinds):
    try:
        return build_noise_references(
            len(x), config, args.B, args.K, kinds, args.seed,
            noise_kind="real" if x.is_real else "complex",
            cache_dir=args.cache_dir, workers=args.workers,
        )
    except Exception as exc:
        raise StageError("noise-reference", exc) from exc


def cmd_detect(args) -> int:
    x = _load_signal(args)
    config = _config(args)
    schedule = _schedule(args, args.K)
    ref = _reference(args, x, config, (args.statistic,))[args.statistic]
    an = analyze(x, config)
    try:
        obs = analysis_statistics(an, (args.statistic,), args.K)[args.statistic]
        pv = p_values(obs, ref)
    except Exception as exc:
        raise StageError("statistics", exc) from exc
    detected = simultaneous_test(pv, schedule)
    n_hat, alphas = sequential_hole_count(pv, schedule)
    comps = an.components(args.K)
    report = TestReport(
        pvalues=[float(p) for p in pv],
        alphas=[float(a) for a in alphas],
        decision="detected" if detected else "not-detected",
        n_holes=n_hat,
        schedule=schedule.to_dict(),
        statistic=args.statistic,
        components=[
            {"birth": p.birth, "death": p.death, "distance": p.distance,
             "statistic": float(obs.values[i]), "mask_ref": i}
            for i, p in enumerate(comps)
        ],
    )
    _emit(report.to_json() + "\n", args.out)
    return EXIT_OK if detected else EXIT_NOT_DETECTED


def cmd_reconstruct(args) -> int:
    x = _load_signal(args)
    config = _config(args)
    schedule = _schedule(args, args.K)
    ref = _reference(args, x, config, (args.statistic,))[args.statistic]
    an = analyze(x, config)
    est, report, domain = denoise_analysis(
        an, ref, args.statistic, schedule, args.volumes, args.dilate, with_mask=True
    )
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_signal(out / f"estimate.{args.format}", est)
        atomic_write(out / "report.json", report.to_json() + "\n")
        atomic_write(out / "mask.csv", mask_to_csv(domain.mask))
    except Exception as exc:
        raise StageError("write-output", exc) from exc
    return EXIT_OK


def cmd_bench(args) -> int:
    sc = BenchScenario(
        snrs=tuple(args.snrs), trials=args.trials, signal=args.signal, methods=tuple(args.methods),
        N=args.n, B=args.B, K=args.K, alpha=args.alpha, L=args.L, seed=args.seed,
        config=_config(args), cache_dir=args.cache_dir,
    )
    if args.kind == "power":
        rows = power_bench(sc)
    else:
        rows = reconstruction_bench(sc, alphas=tuple(args.alphas))
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


def cmd_noise_ref(args) -> int:
    refs = build_noise_references(
        args.n, _config(args), args.B, args.K, tuple(args.kinds), args.seed,
        noise_kind=args.noise_kind, cache_dir=args.cache_dir, workers=args.workers,
    )
    for k, r in refs.items():
        state = "cached" if r.meta.get("cached") else "built"
        print(f"{k}\t{state}\tB={r.B}\tK={r.K}\thash={r.meta['hash'][:16]}")
    return EXIT_OK


def cmd_stratify(args) -> int:
    if not args.files:
        raise UsageError("no input files")
    values = []
    for path in args.files:
        try:
            x = read_signal(path, args.sample_rate)
        except Exception as exc:
            raise StageError("read-input", exc) from exc
        values.append(nsm(stft(x, hop=args.hop, n_fft=args.n_fft)))
    lines = ["file,nsm"] + [f"{f},{v!r}" for f, v in zip(args.files, values)]
    # stratum Z_i holds the signals with nsm >= i
    lines += ["", "stratum,count"] + [f"{i},{sum(v >= i for v in values)}" for i in args.levels]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_synth(args) -> int:
    f = synth(args.kind, args.n)
    if args.snr is not None:
        f = mix_at_snr(f, NoiseModel("real", 1.0, args.seed), args.snr, stream=TRIAL_STREAM)
    f = TimeSeries(f.samples, args.sample_rate)
    if args.out:
        write_signal(args.out, f)
    else:
        sys.stdout.write("\n".join(repr(float(v)) for v in f.samples) + "\n")
    return EXIT_OK


def cmd_zeros(args) -> int:
    an = analyze(_load_signal(args), _config(args))
    _emit(zeros_to_json(an.zeros, an.spec) + "\n", args.out)
    return EXIT_OK


def cmd_diagram(args) -> int:
    an = analyze(_load_signal(args), _config(args))
    pairs = []
    if args.dim in ("0", "all") and an.tree is not None:
        pairs += diagram_h0(an.tree.filtration)
    if args.dim in ("1", "all"):
        pairs += an.pairs
    text = diagram_to_csv(pairs) if args.format == "csv" else diagram_to_json(pairs) + "\n"
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "detect": cmd_detect,
    "reconstruct": cmd_reconstruct,
    "bench": cmd_bench,
    "noise-ref": cmd_noise_ref,
    "stratify": cmd_stratify,
    "synth": cmd_synth,
    "zeros": cmd_zeros,
    "diagram": cmd_diagram,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = _parse(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"zerotopo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"zerotopo {args.command}: error in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"zerotopo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
