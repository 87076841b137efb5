"""Command-line interface: exact counts, private estimates, attack tables.

Subcommands
-----------

``count-exact``   exact subgraph count of an edge-list file
``estimate``      private estimates over a budget grid, one CSV per estimator
``stage-sweep``   two-round estimators across the four ablation stages
``joint``         shared-run triangle/quadrangle/2-star estimation
``attack``        trade-off curves, confusion matrices, variance comparison
``cost``          closed-form download cost per estimator

Configuration is a flat ``key=value`` file (``--config``) with flags taking
precedence; ``--dump-config`` prints the effective configuration in the
same format, so a dumped file reproduces the run.  Exit codes: 0 success,
1 runtime failure, 2 usage or configuration error.  CSV output is UTF-8
with LF line endings and a header row; every row echoes the seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .accounting import download_cost
from .analysis import (
    AttackStrategy,
    confusion_matrix,
    pair_square_sums,
    simulate_attack,
    theoretical_mse,
    tradeoff_curve,
    trial_statistics,
)
from .estimators import BudgetSplit, EstimatorKind, StageMask
from .graphs import Graph, SubgraphKind, exact_count, load_edge_list
from .harness import (
    DEFAULT_JOINT_FRACTIONS,
    EstimatorConfig,
    TrialReport,
    run_joint_trials,
    run_trials,
)
from .mechanisms import Mechanism, MechanismKind, entry_variance
from .nam import MatMulStrategy

SEED_ENV = "NAMCOUNT_SEED"
LARGE_N = 8000
FIGURE_GRID = "linspace:0.1:2:12"
ALL_TAGS = "tri-or,tri-tr,tri-mtr,qua-tr,two-star"
TWO_ROUND_TAGS = ("tri-tr", "tri-mtr", "qua-tr")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class ConfigError(Exception):
    """Carries the full list of configuration problems."""

    def __init__(self, errors: Sequence[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass
class ExperimentConfig:
    """Flat, text-serializable experiment settings shared by subcommands."""

    dataset: str = ""
    estimators: str = ALL_TAGS
    mechanism: str = "rr"
    eps: float = 1.0
    eps_grid: str = ""
    figure: bool = False
    fractions: str = "0.1,0.8,0.1"
    alpha: int = 20
    beta: float = 0.01
    trials: int = 20
    seed: int = 0
    stage: int = 4
    strategy: str = "blocked"
    outdir: str = "."
    no_timing: bool = False
    clip_negative: bool = False
    theory: bool = True
    large: bool = False
    triangle_from_matrix: bool = False
    resolution: int = 1000
    p_grid: str = "0.001,0.01,0.1"
    mc_draws: int = 0

    # ----- parsing helpers -------------------------------------------------

    @classmethod
    def field_types(cls) -> dict[str, type]:
        return {f.name: f.type if isinstance(f.type, type) else type(f.default)
                for f in dataclasses.fields(cls)}

    @classmethod
    def from_sources(cls, file_path: Optional[str], overrides: dict,
                     defaults: Optional[dict] = None) -> "ExperimentConfig":
        """Defaults, then config file, then explicit flags (flags win)."""
        values = dataclasses.asdict(cls())
        if defaults:
            values.update(defaults)
        errors: list[str] = []
        if file_path:
            try:
                text = Path(file_path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError([f"config file: {exc}"]) from exc
            values.update(cls._parse_text(text, errors))
        for key, value in overrides.items():
            if value is not None:
                values[key] = value
        # an explicit --eps narrows a defaulted grid to that single budget
        if overrides.get("eps") is not None and \
                overrides.get("eps_grid") is None and \
                overrides.get("figure") is None:
            values["eps_grid"] = ""
            values["figure"] = False
        if errors:
            raise ConfigError(errors)
        cfg = cls(**values)
        cfg._resolve_seed(overrides, file_path)
        return cfg

    @classmethod
    def _parse_text(cls, text: str, errors: list[str]) -> dict:
        types = cls.field_types()
        out: dict = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                errors.append(f"config line {lineno}: expected key=value")
                continue
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key not in types:
                errors.append(f"config line {lineno}: unknown key {key!r}")
                continue
            try:
                out[key] = cls._coerce(value, types[key])
            except ValueError as exc:
                errors.append(f"config line {lineno}: {exc}")
        return out

    @staticmethod
    def _coerce(value: str, typ: type):
        if typ is bool:
            low = value.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        return typ(value)

    def _resolve_seed(self, overrides: dict, file_path: Optional[str]) -> None:
        """The env var supplies the seed when neither flag nor file did."""
        if overrides.get("seed") is not None:
            return
        if file_path and "seed" in self._file_keys(file_path):
            return
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                self.seed = int(env)
            except ValueError:
                raise ConfigError(
                    [f"{SEED_ENV} must be an integer, got {env!r}"]) from None

    @staticmethod
    def _file_keys(file_path: str) -> set:
        try:
            text = Path(file_path).read_text(encoding="utf-8")
        except OSError:
            return set()
        keys = set()
        for raw in text.splitlines():
            line = raw.strip()
            if line and not line.startswith("#") and "=" in line:
                keys.add(line.partition("=")[0].strip().replace("-", "_"))
        return keys

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    # ----- derived views ---------------------------------------------------

    def estimator_kinds(self) -> list[EstimatorKind]:
        kinds = []
        for tag in self.estimators.split(","):
            tag = tag.strip()
            if tag:
                kinds.append(EstimatorKind(tag))
        return kinds

    def mech_kind(self) -> MechanismKind:
        return MechanismKind(self.mechanism)

    def fraction_values(self) -> tuple[float, ...]:
        return tuple(float(part) for part in self.fractions.split(","))

    def eps_values(self) -> list[float]:
        spec = self.eps_grid
        if self.figure and not spec:
            spec = FIGURE_GRID
        if not spec:
            return [self.eps]
        if spec.startswith("linspace:"):
            _, lo, hi, num = spec.split(":")
            return [float(x) for x in
                    np.linspace(float(lo), float(hi), int(num))]
        return [float(part) for part in spec.split(",")]

    def stage_mask(self) -> StageMask:
        return StageMask.stage(self.stage)

    def matmul_strategy(self) -> MatMulStrategy:
        if self.strategy == "blocked":
            return MatMulStrategy.blocked()
        if self.strategy == "naive":
            return MatMulStrategy.naive()
        raise ValueError(f"unknown multiply strategy {self.strategy!r}")

    def p_values(self) -> list[float]:
        return [float(part) for part in self.p_grid.split(",")]

    # ----- validation ------------------------------------------------------

    def validate(self, need_dataset: bool) -> list[str]:
        errors: list[str] = []
        if need_dataset:
            if not self.dataset:
                errors.append("a dataset path is required (--dataset)")
            elif not Path(self.dataset).exists():
                errors.append(f"dataset not found: {self.dataset}")
        try:
            kinds = self.estimator_kinds()
            if not kinds:
                errors.append("no estimator selected")
        except ValueError as exc:
            errors.append(f"estimators: {exc}")
        try:
            self.mech_kind()
        except ValueError:
            errors.append(f"mechanism must be rr or laplace, "
                          f"got {self.mechanism!r}")
        try:
            values = self.eps_values()
            if any(math.isnan(v) or v <= 0 for v in values):
                errors.append("privacy budgets must be positive")
        except ValueError:
            errors.append(f"bad eps grid spec {self.eps_grid!r}")
        try:
            fractions = self.fraction_values()
            if len(fractions) not in (3, 4) or any(f < 0 for f in fractions):
                errors.append("fractions need 3 or 4 non-negative entries")
        except ValueError:
            errors.append(f"bad fractions {self.fractions!r}")
        if self.alpha < 0:
            errors.append("alpha must be non-negative")
        if not 0.0 < self.beta < 1.0:
            errors.append("beta must lie in (0, 1)")
        if self.trials < 1:
            errors.append("trials must be at least 1")
        if self.stage not in (1, 2, 3, 4):
            errors.append("stage must be 1..4")
        if self.strategy not in ("blocked", "naive"):
            errors.append(f"unknown multiply strategy {self.strategy!r}")
        if self.resolution < 2:
            errors.append("resolution must be at least 2")
        try:
            ps = self.p_values()
            if not ps or any(not 0.0 < p < 1.0 for p in ps):
                errors.append("edge densities must lie in (0, 1)")
        except ValueError:
            errors.append(f"bad p grid {self.p_grid!r}")
        if self.mc_draws < 0:
            errors.append("mc_draws must be non-negative")
        return errors


# ---------------------------------------------------------------------------
# CSV plumbing
# ---------------------------------------------------------------------------

def _write_csv(path: Path, header: Sequence[str],
               rows: Sequence[Sequence[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _fmt(value: float, digits: int = 10) -> str:
    return f"{value:.{digits}g}"


def _fmt_re(value: Optional[float]) -> str:
    return "" if value is None else _fmt(value, 8)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _load_graph(cfg: ExperimentConfig) -> Graph:
    graph, stats = load_edge_list(cfg.dataset)
    if stats.self_loops_dropped or stats.duplicate_edges_merged:
        print(f"note: dropped {stats.self_loops_dropped} self-loops, "
              f"merged {stats.duplicate_edges_merged} duplicate edges",
              file=sys.stderr)
    return graph


def _check_large(n: int, cfg: ExperimentConfig) -> None:
    if n > LARGE_N and not cfg.large:
        raise ConfigError(
            [f"graph has {n} nodes; dense n x n work above {LARGE_N} "
             f"requires --large"])


def _clipped_stats(report: TrialReport, clip: bool):
    if not clip:
        return report.stats, report.values
    values = tuple(max(0.0, v) for v in report.values)
    return trial_statistics(values, report.truth), values


def _theory_total(kind: EstimatorKind, g: Graph, cfg: ExperimentConfig,
                  eps: float, sums) -> Optional[float]:
    if not cfg.theory:
        return None
    if kind is EstimatorKind.TWO_STAR:
        return theoretical_mse(kind, g, 0.0, eps0=eps).total
    mask = cfg.stage_mask()
    split = BudgetSplit.from_total(eps, cfg.fraction_values())
    eps1 = split.eps1 if mask.reduce_eps1 else split.total
    sigma2 = entry_variance(cfg.mech_kind(), eps1)
    return theoretical_mse(kind, g, sigma2, sums=sums).total


def cmd_count_exact(args) -> int:
    path = Path(args.path)
    if not path.exists():
        print(f"error: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    kind = SubgraphKind(args.kind)
    graph, _ = load_edge_list(path)
    if kind is SubgraphKind.QUADRANGLE and graph.n > LARGE_N and not args.large:
        print(f"error: quadrangle counting is dense; n={graph.n} needs "
              f"--large", file=sys.stderr)
        return EXIT_USAGE
    print(exact_count(graph, kind))
    return EXIT_OK


def _estimate_rows(g: Graph, cfg: ExperimentConfig, kind: EstimatorKind,
                   stages: Sequence[int]) -> list[list[str]]:
    sums = pair_square_sums(g) if (
        cfg.theory and kind is not EstimatorKind.TWO_STAR) else None
    rows = []
    for stage in stages:
        stage_cfg = dataclasses.replace(cfg, stage=stage)
        for eps in cfg.eps_values():
            started = time.perf_counter()
            econf = EstimatorConfig(
                kind=kind, eps=eps, mech_kind=cfg.mech_kind(),
                fractions=cfg.fraction_values(), alpha=cfg.alpha,
                beta=cfg.beta, mask=stage_cfg.stage_mask(),
                strategy=cfg.matmul_strategy())
            report = run_trials(g, econf, cfg.trials, cfg.seed)
            seconds = 0.0 if cfg.no_timing else time.perf_counter() - started
            stats, _ = _clipped_stats(report, cfg.clip_negative)
            theory = _theory_total(kind, g, stage_cfg, eps, sums)
            row = [kind.value]
            if len(stages) > 1:
                row.append(str(stage))
            row.extend([
                _fmt(eps, 6),
                _fmt(stats.mean),
                _fmt_re(stats.median_re),
                _fmt(stats.mse, 8),
                "" if theory is None else _fmt(theory, 8),
                str(report.cost.cost_dl),
                f"{seconds:.3f}",
                str(cfg.seed),
            ])
            rows.append(row)
    return rows


ESTIMATE_HEADER = ["estimator", "eps", "mean", "median_re", "empirical_mse",
                   "theoretical_mse", "cost_dl", "seconds", "seed"]
SWEEP_HEADER = ["estimator", "stage", "eps", "mean", "median_re",
                "empirical_mse", "theoretical_mse", "cost_dl", "seconds",
                "seed"]


def cmd_estimate(cfg: ExperimentConfig) -> int:
    g = _load_graph(cfg)
    kinds = cfg.estimator_kinds()
    if any(k is not EstimatorKind.TWO_STAR for k in kinds):
        _check_large(g.n, cfg)
    outdir = Path(cfg.outdir)
    for kind in kinds:
        rows = _estimate_rows(g, cfg, kind, stages=[cfg.stage])
        path = outdir / f"estimate-{kind.value}.csv"
        _write_csv(path, ESTIMATE_HEADER, rows)
        print(path)
    return EXIT_OK


def cmd_stage_sweep(cfg: ExperimentConfig) -> int:
    g = _load_graph(cfg)
    _check_large(g.n, cfg)
    requested = [k for k in cfg.estimator_kinds()
                 if k.value in TWO_ROUND_TAGS]
    if not requested:
        raise ConfigError(["stage-sweep needs at least one two-round "
                           f"estimator ({', '.join(TWO_ROUND_TAGS)})"])
    outdir = Path(cfg.outdir)
    for kind in requested:
        rows = _estimate_rows(g, cfg, kind, stages=[1, 2, 3, 4])
        path = outdir / f"stage-sweep-{kind.value}.csv"
        _write_csv(path, SWEEP_HEADER, rows)
        print(path)
    return EXIT_OK


JOINT_HEADER = ["target", "estimator", "eps", "mean", "median_re",
                "empirical_mse", "theoretical_mse", "cost_dl", "seconds",
                "seed"]


def cmd_joint(cfg: ExperimentConfig) -> int:
    g = _load_graph(cfg)
    _check_large(g.n, cfg)
    fractions = cfg.fraction_values()
    if len(fractions) != 4:
        raise ConfigError(["the joint run needs four budget fractions, "
                           f"got {cfg.fractions!r}"])
    sums = pair_square_sums(g) if cfg.theory else None
    rows = []
    for eps in cfg.eps_values():
        started = time.perf_counter()
        joint = run_joint_trials(
            g, eps, fractions, cfg.trials, cfg.seed, cfg.alpha, cfg.beta,
            cfg.mech_kind(), cfg.matmul_strategy(),
            cfg.triangle_from_matrix)
        seconds = 0.0 if cfg.no_timing else time.perf_counter() - started
        split = BudgetSplit.from_total(eps, fractions)
        sigma2 = entry_variance(cfg.mech_kind(), split.eps1)
        for report in joint.reports:
            stats, _ = _clipped_stats(report, cfg.clip_negative)
            if not cfg.theory:
                theory = None
            elif report.kind is EstimatorKind.TWO_STAR:
                theory = theoretical_mse(report.kind, g, 0.0,
                                         eps0=split.eps0).total
            else:
                theory = theoretical_mse(report.kind, g, sigma2,
                                         sums=sums).total
            rows.append([
                report.kind.target.value,
                report.kind.value,
                _fmt(eps, 6),
                _fmt(stats.mean),
                _fmt_re(stats.median_re),
                _fmt(stats.mse, 8),
                "" if theory is None else _fmt(theory, 8),
                str(report.cost.cost_dl),
                f"{seconds:.3f}",
                str(cfg.seed),
            ])
    path = Path(cfg.outdir) / "joint.csv"
    _write_csv(path, JOINT_HEADER, rows)
    print(path)
    return EXIT_OK


def cmd_attack(cfg: ExperimentConfig) -> int:
    outdir = Path(cfg.outdir)
    eps_values = cfg.eps_values()

    curve_rows = []
    for mech_kind in (MechanismKind.RR, MechanismKind.LAPLACE):
        for eps in eps_values:
            for x, y in tradeoff_curve(Mechanism(mech_kind, eps),
                                       cfg.resolution):
                curve_rows.append([mech_kind.value, _fmt(eps, 6),
                                   _fmt(x, 8), _fmt(y, 8), str(cfg.seed)])
    curve_path = outdir / "attack-tradeoff.csv"
    _write_csv(curve_path, ["mechanism", "eps", "type1", "type2", "seed"],
               curve_rows)
    print(curve_path)

    header = ["strategy", "eps", "p", "true_positive", "false_negative",
              "false_positive", "true_negative", "type1", "type2",
              "precision", "recall"]
    if cfg.mc_draws > 0:
        header += ["mc_true_positive", "mc_false_negative",
                   "mc_false_positive", "mc_true_negative"]
    header.append("seed")
    matrix_rows = []
    for strategy in AttackStrategy:
        for eps in eps_values:
            for p in cfg.p_values():
                cm = confusion_matrix(strategy, eps, p)
                row = [strategy.value, _fmt(eps, 6), _fmt(p, 6)]
                row += [_fmt(c, 8) for c in cm.cells()]
                row += [_fmt(cm.type1, 8), _fmt(cm.type2, 8),
                        _fmt(cm.precision, 8), _fmt(cm.recall, 8)]
                if cfg.mc_draws > 0:
                    mc = simulate_attack(strategy, eps, p, cfg.mc_draws,
                                         cfg.seed)
                    row += [_fmt(c, 8) for c in mc.cells()]
                row.append(str(cfg.seed))
                matrix_rows.append(row)
    matrix_path = outdir / "attack-confusion.csv"
    _write_csv(matrix_path, header, matrix_rows)
    print(matrix_path)

    var_rows = []
    for eps in eps_values:
        rr = entry_variance(MechanismKind.RR, eps)
        lap = entry_variance(MechanismKind.LAPLACE, eps)
        var_rows.append([_fmt(eps, 6), _fmt(rr, 8), _fmt(lap, 8),
                         _fmt(2.0 * rr, 8), str(cfg.seed)])
    var_path = outdir / "attack-variance.csv"
    _write_csv(var_path, ["eps", "var_rr", "var_laplace", "var_rr_doubled",
                          "seed"], var_rows)
    print(var_path)
    return EXIT_OK


COST_TAGS = ("tri-or", "tri-tr", "tri-mtr", "qua-tr", "two-star", "joint")


def cmd_cost(cfg: ExperimentConfig, n_override: Optional[int]) -> int:
    if n_override is not None:
        n = n_override
    else:
        if not cfg.dataset:
            raise ConfigError(["cost needs --n or --dataset"])
        n = _load_graph(cfg).n
    if n <= 0:
        raise ConfigError(["n must be positive"])
    rows = []
    for tag in COST_TAGS:
        nbytes = download_cost(tag, n)
        rows.append([tag, str(n), str(nbytes),
                     _fmt(nbytes / 1e6, 8), _fmt(nbytes / 2**20, 8),
                     str(cfg.seed)])
    path = Path(cfg.outdir) / "cost.csv"
    _write_csv(path, ["estimator", "n", "bytes", "decimal_mb", "binary_mib",
                      "seed"], rows)
    for row in rows:
        print(f"{row[0]}: {row[2]} bytes")
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common_flags(sub: argparse.ArgumentParser, *, dataset: bool) -> None:
    sub.add_argument("--config", help="key=value configuration file")
    sub.add_argument("--dump-config", action="store_true",
                     help="print the effective configuration and exit")
    if dataset:
        sub.add_argument("--dataset", help="edge-list file")
    sub.add_argument("--seed", type=int, help=f"random seed "
                     f"(default: ${SEED_ENV} or 0)")
    sub.add_argument("--outdir", help="output directory (default: .)")


def _add_estimate_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--estimator", dest="estimators",
                     help=f"comma list from: {ALL_TAGS}")
    sub.add_argument("--mechanism", choices=["rr", "laplace"])
    sub.add_argument("--eps", type=float, help="total privacy budget")
    sub.add_argument("--eps-grid", dest="eps_grid",
                     help="comma list or linspace:LO:HI:NUM")
    sub.add_argument("--figure", action="store_true", default=None,
                     help=f"sweep the reference grid {FIGURE_GRID}")
    sub.add_argument("--fractions", help="budget split fractions")
    sub.add_argument("--alpha", type=int)
    sub.add_argument("--beta", type=float)
    sub.add_argument("--trials", type=int)
    sub.add_argument("--stage", type=int, choices=[1, 2, 3, 4])
    sub.add_argument("--strategy", choices=["blocked", "naive"])
    sub.add_argument("--no-timing", dest="no_timing", action="store_true",
                     default=None, help="write 0 in the seconds column")
    sub.add_argument("--clip-negative", dest="clip_negative",
                     action="store_true", default=None,
                     help="post-process estimates with max(0, value)")
    sub.add_argument("--no-theory", dest="theory", action="store_false",
                     default=None, help="skip the closed-form MSE column")
    sub.add_argument("--large", action="store_true", default=None,
                     help=f"allow dense runs beyond {LARGE_N} nodes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="namcount",
        description="Differentially private subgraph counting over noisy "
                    "adjacency matrices.")
    subs = parser.add_subparsers(dest="command", required=True)

    p_count = subs.add_parser("count-exact", help="exact subgraph count")
    p_count.add_argument("path", help="edge-list file")
    p_count.add_argument("--kind", required=True,
                         choices=[k.value for k in SubgraphKind])
    p_count.add_argument("--large", action="store_true",
                         help=f"allow dense work beyond {LARGE_N} nodes")
    p_count.set_defaults(func=cmd_count_exact, needs_config=False)

    p_est = subs.add_parser("estimate", help="private estimates to CSV")
    _add_common_flags(p_est, dataset=True)
    _add_estimate_flags(p_est)
    p_est.set_defaults(runner=cmd_estimate, needs_dataset=True)

    p_sweep = subs.add_parser("stage-sweep",
                              help="two-round estimators across stages 1-4")
    _add_common_flags(p_sweep, dataset=True)
    _add_estimate_flags(p_sweep)
    p_sweep.set_defaults(runner=cmd_stage_sweep, needs_dataset=True,
                         config_defaults={"estimators":
                                          ",".join(TWO_ROUND_TAGS)})

    p_joint = subs.add_parser("joint", help="joint three-count estimation")
    _add_common_flags(p_joint, dataset=True)
    _add_estimate_flags(p_joint)
    p_joint.add_argument("--triangle-from-matrix", dest="triangle_from_matrix",
                         action="store_true", default=None,
                         help="estimate triangles from the noisy matrix "
                              "instead of its square")
    p_joint.set_defaults(runner=cmd_joint, needs_dataset=True,
                         config_defaults={"fractions": ",".join(
                             str(f) for f in DEFAULT_JOINT_FRACTIONS)})

    p_attack = subs.add_parser("attack", help="attack curves and matrices")
    _add_common_flags(p_attack, dataset=False)
    p_attack.add_argument("--eps", type=float)
    p_attack.add_argument("--eps-grid", dest="eps_grid")
    p_attack.add_argument("--figure", action="store_true", default=None)
    p_attack.add_argument("--p-grid", dest="p_grid",
                          help="comma list of edge densities")
    p_attack.add_argument("--resolution", type=int,
                          help="points per trade-off curve")
    p_attack.add_argument("--mc-draws", dest="mc_draws", type=int,
                          help="Monte-Carlo verification draws (0 = off)")
    p_attack.set_defaults(runner=cmd_attack, needs_dataset=False,
                          config_defaults={"figure": True})

    p_cost = subs.add_parser("cost", help="closed-form download costs")
    _add_common_flags(p_cost, dataset=True)
    p_cost.add_argument("--n", type=int, help="user count (skips dataset)")
    p_cost.set_defaults(runner=cmd_cost, needs_dataset=False)

    return parser


_CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _overrides_from_args(args: argparse.Namespace) -> dict:
    return {key: value for key, value in vars(args).items()
            if key in _CONFIG_KEYS}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "needs_config", True) is False:
        try:
            return args.func(args)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME

    try:
        cfg = ExperimentConfig.from_sources(
            getattr(args, "config", None),
            _overrides_from_args(args),
            getattr(args, "config_defaults", None))
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE

    needs_dataset = getattr(args, "needs_dataset", False)
    if args.runner is cmd_cost and getattr(args, "n", None) is not None:
        needs_dataset = False
    errors = cfg.validate(need_dataset=needs_dataset)
    if errors:
        for err in errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE

    if getattr(args, "dump_config", False):
        sys.stdout.write(cfg.to_text())
        return EXIT_OK

    try:
        if args.runner is cmd_cost:
            return cmd_cost(cfg, getattr(args, "n", None))
        return args.runner(cfg)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
