"""Command-line interface: ingest, fit, compare, simulate, plotdata.

Data artifacts go to files under --out, human-readable summaries and verdicts
to stdout, diagnostics to stderr; exit code 0 only when nothing failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import corpus as corpus_mod
from .corpus import (
    LengthHistogram,
    bin_lengths,
    bundled_corpus,
    load_histogram,
    save_histogram,
    split_sentences,
    summary_stats,
)
from .fit import FitError, fit_min_chisq, fit_mle, pearson_residuals
from .model import MixtureParams, mixture_pmf, sample
from .selection import MODEL_PRIOR_PRESETS, PriorSpec, compare_corpora

#: Seed used by `simulate` when --seed is not given.
DEFAULT_SEED = 1965


@dataclass(frozen=True)
class RunConfig:
    """Options shared across subcommands, resolved from parsed arguments."""

    bins_width: int = 5
    max_length: int = 65
    method: str = "mle"
    variant: str = "standard"
    prior: str = "equal"
    prior_sd: float = 10.0
    seed: int = DEFAULT_SEED
    out: Path = Path(".")
    data: Path | None = None


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        bins_width=getattr(args, "bins_width", 5),
        max_length=getattr(args, "max_length", 65),
        method=getattr(args, "method", "mle"),
        variant=getattr(args, "variant", "standard"),
        prior=getattr(args, "prior", "equal"),
        prior_sd=getattr(args, "prior_sd", 10.0),
        seed=getattr(args, "seed", DEFAULT_SEED),
        out=Path(getattr(args, "out", ".")),
        data=Path(args.data) if getattr(args, "data", None) else None,
    )


def _registry(cfg: RunConfig) -> dict[str, LengthHistogram]:
    """Corpora available to fit/compare/simulate/plotdata: bundled or --data DIR."""
    if cfg.data is None:
        return bundled_corpus()
    out: dict[str, LengthHistogram] = {}
    for path in sorted(cfg.data.glob("*.csv")):
        hist = load_histogram(path)
        out[hist.label] = hist
    if not out:
        raise FileNotFoundError(f"no histogram CSVs found in {cfg.data}")
    return out


def _lookup(label: str, registry: dict[str, LengthHistogram]) -> LengthHistogram:
    if label not in registry:
        known = ", ".join(sorted(registry))
        raise KeyError(f"unknown corpus label {label!r}; known labels: {known}")
    return registry[label]


def _parse_prior(spec: str) -> dict[str, float]:
    if spec in MODEL_PRIOR_PRESETS:
        return dict(MODEL_PRIOR_PRESETS[spec])
    parts = spec.split(",")
    if len(parts) != 3:
        raise ValueError(
            f"prior must be 'equal', 'solzhenitsyn', or three comma-separated "
            f"probabilities for M0,M1,M2; got {spec!r}"
        )
    p0, p1, p2 = (float(x) for x in parts)
    return {"M0": p0, "M1": p1, "M2": p2}


def _fit_one(hist: LengthHistogram, cfg: RunConfig):
    if cfg.method == "mle":
        return fit_mle(hist)
    return fit_min_chisq(hist, variant=cfg.variant)


def _write_json(payload: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    paths = [Path(p) for p in args.files]
    labels = args.labels if args.labels else [p.stem for p in paths]
    if len(labels) != len(paths):
        print("error: number of --labels must match number of files", file=sys.stderr)
        return 1
    if len(set(labels)) != len(labels):
        print("error: labels must be unique", file=sys.stderr)
        return 1
    overflow = "fold" if args.fold_tail else "drop"
    cfg.out.mkdir(parents=True, exist_ok=True)
    for path, label in zip(paths, labels):
        if not path.exists():
            print(f"error: input file not found: {path}", file=sys.stderr)
            return 1
        dropped = 0
        if path.suffix.lower() == ".csv":
            hist = load_histogram(path).with_label(label)
        else:
            text = path.read_text(encoding="utf-8")
            lengths = split_sentences(text)
            if not lengths:
                print(f"error: {path}: no sentences found", file=sys.stderr)
                return 1
            hist, dropped = bin_lengths(
                lengths, cfg.bins_width, cfg.max_length, label=label, overflow=overflow
            )
        save_histogram(hist, cfg.out / f"{label}.csv")
        stats = summary_stats(hist)
        print(
            f"{label}: {hist.total} sentences, mean length {stats.mean_length:.2f} words, "
            f"variance {stats.variance:.2f}, dispersion ratio {stats.dispersion_ratio:.2f}"
            + (f", {dropped} sentences over {cfg.max_length} words dropped" if dropped else "")
        )
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    registry = _registry(cfg)
    hist = _lookup(args.label, registry)
    cfg.out.mkdir(parents=True, exist_ok=True)
    try:
        result = _fit_one(hist, cfg)
    except FitError as exc:
        if exc.best_effort is not None:
            payload = exc.best_effort.to_json_dict()
            payload["error"] = str(exc)
            _write_json(payload, cfg.out / f"{args.label}_fit.json")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    table = pearson_residuals(hist, result.params)
    _write_json(result.to_json_dict(), cfg.out / f"{args.label}_fit.json")
    _write_json(table.to_json_dict(), cfg.out / f"{args.label}_residuals.json")

    th = result.params
    print(
        f"corpus {hist.label} ({hist.total} sentences), {result.objective_label} fit: "
        f"objective {result.objective:.4f}, "
        f"p={th.p:.4f} xi={th.xi:.4f} a={th.a:.4f} b={th.b:.4f}"
    )
    if result.n_distinct_optima > 1:
        print(
            f"note: {result.n_distinct_optima} near-optimal solutions found; "
            "the objective surface is multimodal",
            file=sys.stderr,
        )
    print(f"{'from':>4} {'to':>4} {'observed':>9} {'predicted':>10} {'residual':>9}")
    for lo, hi, obs, pred, res in table.rows:
        print(f"{lo:>4} {hi:>4} {obs:>9} {pred:>10.1f} {res:>9.2f}")
    print(f"chi-squared {table.chi_squared:.2f} on {table.degrees_of_freedom} degrees of freedom")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    registry = _registry(cfg)
    labels = args.labels or ["Sh", "Kr", "TD"]
    hists = {lab: _lookup(lab, registry) for lab in labels}
    author, rival, disputed = labels
    model_priors = _parse_prior(cfg.prior)
    report = compare_corpora(
        hists,
        model_priors=model_priors,
        prior_spec=PriorSpec(sd=cfg.prior_sd),
        author=author,
        rival=rival,
        disputed=disputed,
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_json(report.to_json_dict(), cfg.out / "comparison.json")

    descriptions = {
        "M0": f"{author}, {rival}, {disputed} all differ",
        "M1": f"{author} and {disputed} share parameters",
        "M2": f"{rival} and {disputed} share parameters",
    }
    best = report.best
    print(
        f"verdict: {best['name']} ({descriptions[best['name']]}) "
        f"with posterior probability {best['posterior_prob']:.4f}"
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    if args.params:
        values = [float(x) for x in args.params.split(",")]
        if len(values) != 4:
            print("error: --params needs four values p,xi,a,b", file=sys.stderr)
            return 1
        params = MixtureParams(*values)
    else:
        registry = _registry(cfg)
        hist = _lookup(args.from_label, registry)
        params = _fit_one(hist, cfg).params
    label = args.label or "simulated"
    lengths = sample(params, args.n, cfg.seed)
    overflow = "fold" if args.fold_tail else "drop"
    hist, dropped = bin_lengths(
        lengths.tolist(), cfg.bins_width, cfg.max_length, label=label, overflow=overflow
    )
    cfg.out.mkdir(parents=True, exist_ok=True)
    save_histogram(hist, cfg.out / f"{label}.csv")
    _write_json(
        {
            "params": {"p": params.p, "xi": params.xi, "a": params.a, "b": params.b},
            "seed": cfg.seed,
            "n_sentences": args.n,
            "dropped": dropped,
            "bins_width": cfg.bins_width,
            "max_length": cfg.max_length,
            "overflow": overflow,
        },
        cfg.out / f"{label}_meta.json",
    )
    print(f"{label}: {hist.total} sentences written ({dropped} dropped beyond {cfg.max_length})")
    return 0


def cmd_plotdata(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    registry = _registry(cfg)
    cfg.out.mkdir(parents=True, exist_ok=True)
    for label in args.labels:
        hist = _lookup(label, registry)
        fit_path = cfg.out / f"{label}_fit.json"
        if not fit_path.exists():
            print(
                f"error: no fit result at {fit_path}; run `sentmix fit {label}` first",
                file=sys.stderr,
            )
            return 1
        with open(fit_path, encoding="utf-8") as fh:
            stored = json.load(fh)
        p = stored["params"]
        params = MixtureParams(p=p["p"], xi=p["xi"], a=p["a"], b=p["b"])

        lines = ["series\tx\tvalue"]
        n = hist.total
        for lo, hi, count in hist.bins:
            lines.append(f"observed\t{0.5 * (lo + hi)!r}\t{count / n!r}")
        curve_max = hist.bins[-1][1]
        for y in range(1, curve_max + 1):
            lines.append(f"fitted\t{y}\t{float(mixture_pmf(y, params))!r}")
        out_path = cfg.out / f"{label}_plot.tsv"
        out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"{label}: wrote {out_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sentmix",
        description=(
            "Sentence-length mixture modelling and Bayesian authorship comparison. "
            "Without --data, commands use the bundled Quiet Don corpora (labels Sh, Kr, TD)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, *, data: bool = True) -> None:
        p.add_argument("--out", default=".", help="output directory (default: current)")
        if data:
            p.add_argument(
                "--data",
                default=None,
                help="directory of histogram CSVs to use instead of the bundled corpora",
            )

    p_ingest = sub.add_parser("ingest", help="turn raw text or histogram CSVs into validated histograms")
    p_ingest.add_argument("files", nargs="+", help="UTF-8 text files or lo,hi,count CSVs")
    p_ingest.add_argument("--labels", nargs="+", default=None, help="corpus labels (default: file stems)")
    p_ingest.add_argument("--bins-width", type=int, default=5, dest="bins_width")
    p_ingest.add_argument("--max-length", type=int, default=65, dest="max_length")
    p_ingest.add_argument(
        "--fold-tail",
        action="store_true",
        help="count sentences beyond --max-length in the last bin instead of dropping them",
    )
    add_common(p_ingest, data=False)
    p_ingest.set_defaults(func=cmd_ingest)

    p_fit = sub.add_parser("fit", help="fit the length mixture to one corpus")
    p_fit.add_argument("label", help="corpus label")
    p_fit.add_argument("--method", choices=("mle", "min-chisq"), default="mle")
    p_fit.add_argument(
        "--variant",
        choices=("standard", "paper-literal"),
        default="standard",
        help="min-chisq denominator: predicted count (standard) or its square",
    )
    add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cmp = sub.add_parser("compare", help="posterior probabilities of the three authorship hypotheses")
    p_cmp.add_argument(
        "labels",
        nargs="*",
        help="three labels: AUTHOR RIVAL DISPUTED (default: Sh Kr TD)",
    )
    p_cmp.add_argument(
        "--prior",
        default="equal",
        help="'equal', 'solzhenitsyn', or p0,p1,p2 probabilities for M0,M1,M2",
    )
    p_cmp.add_argument(
        "--prior-sd",
        type=float,
        default=10.0,
        dest="prior_sd",
        help="standard deviation of the parameter prior on the transformed scale",
    )
    add_common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    p_sim = sub.add_parser("simulate", help="draw a synthetic corpus from the mixture")
    src = p_sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--params", default=None, help="p,xi,a,b mixture parameters")
    src.add_argument("--from-label", default=None, dest="from_label",
                     help="use the fitted parameters of this corpus")
    p_sim.add_argument("--n", type=int, required=True, help="number of sentences to draw")
    p_sim.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"random seed (default {DEFAULT_SEED})")
    p_sim.add_argument("--label", default=None, help="label for the synthetic corpus")
    p_sim.add_argument("--method", choices=("mle", "min-chisq"), default="mle")
    p_sim.add_argument("--variant", choices=("standard", "paper-literal"), default="standard")
    p_sim.add_argument("--bins-width", type=int, default=5, dest="bins_width")
    p_sim.add_argument("--max-length", type=int, default=65, dest="max_length")
    p_sim.add_argument("--fold-tail", action="store_true")
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_plot = sub.add_parser("plotdata", help="emit observed frequencies and fitted curves as TSV")
    p_plot.add_argument("labels", nargs="+", help="corpus labels (fit them first)")
    add_common(p_plot)
    p_plot.set_defaults(func=cmd_plotdata)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "compare" and args.labels and len(args.labels) != 3:
        parser.error("compare needs exactly three corpus labels (or none for the default trio)")
    if args.command == "simulate" and args.n < 1:
        parser.error("--n must be a positive integer")
    try:
        return args.func(args)
    except (FileNotFoundError, KeyError, ValueError, FitError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
