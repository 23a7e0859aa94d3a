"""``sortlab`` command line: bench, analyze, report, pipeline.

Exit codes: 0 ok, 1 config, 2 measurement, 3 I/O, 4 statistics, 5 parse.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import bench, factors, report
from .errors import ConfigError, FormatError, MeasurementError, StatisticsError
from .factors import MIN_ROWS_CORRELATION

log = logging.getLogger("sortlab")

EXIT_OK, EXIT_CONFIG, EXIT_MEASUREMENT, EXIT_IO, EXIT_STATS, EXIT_PARSE = range(6)
FORMATS = ("csv", "json", "svg", "text")
REPORT_TEXT = "report.txt"
REPORT_SVG = "figure1.svg"


@dataclass
class PipelineConfig:
    bench: bench.BenchConfig = field(default_factory=bench.BenchConfig)
    output_dir: Path = Path("sortlab-out")
    score_mode: str = "zscore"
    promax_kappa: float = 4.0
    formats: tuple[str, ...] = FORMATS

    def validate(self) -> "PipelineConfig":
        self.bench.validate()
        if self.score_mode not in factors.SCORE_MODES:
            raise ConfigError(f"unknown score mode {self.score_mode!r}")
        if not self.promax_kappa >= 1:
            raise ConfigError(f"kappa must be >= 1, got {self.promax_kappa}")
        if not self.formats:
            raise ConfigError("formats must be non-empty")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"unknown formats {bad}")
        return self


# --------------------------------------------------------------------------
# option parsing
# --------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _score_mode(text: str) -> str:
    return text.strip().replace("-", "_")


def _formats(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# config key -> (converter, attribute path)
_CONFIG_KEYS = {
    "sizes": (_int_list, "bench.sizes"),
    "reps": (int, "bench.reps"),
    "seed": (int, "bench.base_seed"),
    "distribution": (str.strip, "bench.distribution"),
    "warmup": (int, "bench.warmup"),
    "synthetic_time": (_bool, "bench.synthetic_time"),
    "score_mode": (_score_mode, "score_mode"),
    "kappa": (float, "promax_kappa"),
    "out": (lambda s: Path(s.strip()), "output_dir"),
    "formats": (_formats, "formats"),
}


def _assign(cfg: PipelineConfig, dotted: str, value) -> None:
    target = cfg
    *head, last = dotted.split(".")
    for part in head:
        target = getattr(target, part)
    setattr(target, last, value)


def read_config_file(path, cfg: Optional[PipelineConfig] = None) -> PipelineConfig:
    """Apply a flat ``key = value`` file to `cfg`. '#' starts a comment."""
    cfg = cfg or PipelineConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config: {e.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        conv, dotted = _CONFIG_KEYS[key]
        try:
            _assign(cfg, dotted, conv(value))
        except ValueError as e:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {e}") from None
    return cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--sizes", help="comma-separated input sizes")
    common.add_argument("--reps", type=int)
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--distribution", choices=bench.DISTRIBUTIONS)
    common.add_argument("--warmup", type=int)
    common.add_argument("--score-mode", choices=["zscore", "paper-literal", "paper_literal"])
    common.add_argument("--kappa", type=float, help="promax power (default 4)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--formats", help="subset of csv,json,svg,text")
    common.add_argument("--synthetic-time", action="store_true", default=None,
                        help="replace measured time with a deterministic model")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sortlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bench", parents=[common], help="run the benchmark matrix, write metrics CSVs")
    p = sub.add_parser("analyze", parents=[common], help="factor-analyse metrics CSVs")
    p.add_argument("files", nargs="*", help="metrics CSVs (default: metrics_*.csv in --out)")
    p = sub.add_parser("report", parents=[common], help="render tables and the bar chart")
    p.add_argument("files", nargs="*", help="factors JSONs (default: factors_*.json in --out)")
    sub.add_parser("pipeline", parents=[common], help="bench, analyze and report in one go")
    return parser


def config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if args.config:
        read_config_file(args.config, cfg)
    try:
        if args.sizes is not None:
            cfg.bench.sizes = _int_list(args.sizes)
    except ValueError as e:
        raise ConfigError(f"--sizes: {e}") from None
    if args.reps is not None:
        cfg.bench.reps = args.reps
    if args.seed is not None:
        cfg.bench.base_seed = args.seed
    if args.distribution is not None:
        cfg.bench.distribution = args.distribution
    if args.warmup is not None:
        cfg.bench.warmup = args.warmup
    if args.synthetic_time:
        cfg.bench.synthetic_time = True
    if args.score_mode is not None:
        cfg.score_mode = _score_mode(args.score_mode)
    if args.kappa is not None:
        cfg.promax_kappa = args.kappa
    if args.out is not None:
        cfg.output_dir = Path(args.out)
    if args.formats is not None:
        cfg.formats = _formats(args.formats)
    return cfg.validate()


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _ensure_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_text(path: Path, text: str) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _summary(m: bench.MetricsMatrix) -> str:
    if not m.rows:
        return f"{m.technique}: no runs"
    ns = [r.n for r in m.rows]
    t = sorted(r.time_ns for r in m.rows)
    return (
        f"{m.technique}: {len(m)} runs, n {min(ns)}..{max(ns)}, "
        f"median time {t[len(t) // 2]} ns, max total memory {max(r.total_mem_kb for r in m.rows)} KB"
    )


def cmd_bench(cfg: PipelineConfig, write: bool = True, out=None) -> dict[str, bench.MetricsMatrix]:
    out = out or sys.stdout
    matrices = bench.run_matrix(cfg.bench)
    if write:
        d = _ensure_dir(cfg.output_dir)
        for t, m in matrices.items():
            bench.write_metrics_csv(m, d / f"metrics_{t}.csv")
    for m in matrices.values():
        print(_summary(m), file=out)
    return matrices


def _ordered(paths: list[Path], prefix: str) -> list[Path]:
    def key(p: Path):
        t = p.stem[len(prefix):]
        return (bench.TECHNIQUES.index(t) if t in bench.TECHNIQUES else len(bench.TECHNIQUES), p.name)

    return sorted(paths, key=key)


def analyze_matrix(m: bench.MetricsMatrix, cfg: PipelineConfig, source: str = "") -> factors.FactorModel:
    if len(m) < MIN_ROWS_CORRELATION:
        raise factors.DegenerateInput(
            f"{source or m.technique}: insufficient rows ({len(m)} < {MIN_ROWS_CORRELATION})"
        )
    return factors.analyze(m, score_mode=cfg.score_mode, kappa=cfg.promax_kappa)


def cmd_analyze(cfg: PipelineConfig, files: Sequence = (), matrices=None, write: bool = True, out=None):
    """Analyse each metrics matrix; write ``factors_<technique>.json``."""
    out = out or sys.stdout
    if matrices is None:
        paths = [Path(f) for f in files] or _ordered(list(cfg.output_dir.glob("metrics_*.csv")), "metrics_")
        if not paths:
            raise FormatError(f"no metrics_*.csv files in {cfg.output_dir}")
        matrices = {}
        for p in paths:
            m = bench.read_metrics_csv(p)
            matrices[m.technique or p.stem.removeprefix("metrics_")] = (m, str(p))
    else:
        matrices = {t: (m, t) for t, m in matrices.items()}
    models = {}
    for t, (m, source) in matrices.items():
        fm = analyze_matrix(m, cfg, source)
        fm.technique = fm.technique or t
        models[t] = fm
        print(
            f"{t}: {fm.retained} factor(s) retained, first component {fm.percent[0]:.3f}% of variance, "
            f"KMO {fm.kmo.overall:.3f}, Bartlett chi2 {fm.bartlett.chi2:.3f} (df {fm.bartlett.df})",
            file=out,
        )
    if write:
        d = _ensure_dir(cfg.output_dir)
        for t, fm in models.items():
            _write_text(d / f"factors_{t}.json", fm.to_json())
    return models


def cmd_report(cfg: PipelineConfig, files: Sequence = (), docs=None, out=None) -> report.ReportBundle:
    out = out or sys.stdout
    if docs is None:
        paths = [Path(f) for f in files] or _ordered(list(cfg.output_dir.glob("factors_*.json")), "factors_")
        if not paths:
            raise FormatError(f"no factors_*.json files in {cfg.output_dir}")
        docs = [report.load_factors(p) for p in paths]
    bundle = report.build_report(docs)
    wanted = [f for f in cfg.formats if f in ("text", "svg")] or ["text", "svg"]
    d = _ensure_dir(cfg.output_dir)
    if "text" in wanted:
        _write_text(d / REPORT_TEXT, bundle.render_text())
        print(f"wrote {d / REPORT_TEXT}", file=out)
    if "svg" in wanted:
        _write_text(d / REPORT_SVG, bundle.render_svg())
        print(f"wrote {d / REPORT_SVG}", file=out)
    return bundle


def cmd_pipeline(cfg: PipelineConfig, out=None) -> report.ReportBundle:
    out = out or sys.stdout
    matrices = cmd_bench(cfg, write="csv" in cfg.formats, out=out)
    models = cmd_analyze(cfg, matrices=matrices, write="json" in cfg.formats, out=out)
    docs = [fm.to_json_dict() for fm in models.values()]
    if "text" in cfg.formats or "svg" in cfg.formats:
        return cmd_report(cfg, docs=docs, out=out)
    return report.build_report(docs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command == "bench":
            cmd_bench(cfg)
        elif args.command == "analyze":
            cmd_analyze(cfg, args.files)
        elif args.command == "report":
            cmd_report(cfg, args.files)
        else:
            cmd_pipeline(cfg)
    except ConfigError as e:
        print(f"sortlab: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except MeasurementError as e:
        print(f"sortlab: measurement error: {e}", file=sys.stderr)
        return EXIT_MEASUREMENT
    except FormatError as e:
        print(f"sortlab: parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except StatisticsError as e:
        print(f"sortlab: statistics error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_STATS
    except OSError as e:
        where = e.filename or ""
        print(f"sortlab: I/O error: {where}: {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
