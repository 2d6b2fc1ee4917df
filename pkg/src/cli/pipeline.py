"""Command-line pipeline: kernel, construct, select, simulate, tradeoff, estimate-mu, figures"""
import argparse
import json
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from src import __version__
from src.analysis.curves import curve_emit, kernel_region, triangle_points
from src.analysis.region import region_hull
from src.construction.tree_builder import check_conventions
from src.export.csv_exporter import CSVExporter
from src.kernels.kernel import Kernel
from src.kernels.kernel_analyzer import analyze_kernel, kernel_dice
from src.models.simulation import SimConfig
from src.selection.certificates import (certify_disposable, certify_grafted, certify_recyclable,
                                        verify_disjoint)
from src.selection.disposable import disposable_params, select_disposable
from src.selection.grafted import select_on_grafted
from src.selection.mu_estimator import estimate_mu_star
from src.selection.recyclable import recyclable_params, select_recyclable
from src.selection.threshold import quasi_polynomial_ln_threshold, select_threshold
from src.simulation.sc_simulator import check_union_bound, simulate
from src.storage.config_manager import ConfigManager
from src.storage.file_formats import (build_from_recipe, load_leaf_set, load_recipe,
                                      resolve_kernel, save_kernel)
from src.storage.presets import (MU_STAR_PRESETS, TRADEOFF_PRESETS, citations_for, get_kernel,
                                 get_mu_star, get_tradeoff_preset)
from src.utils.errors import (BudgetExceededError, InfeasibleTargetError, InvariantViolation,
                              ValidationError)
from src.utils.helpers import format_real
from src.utils.logger import StageLogger, set_debug
from src.utils.logger import default_logger as logger

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2


def parse_mu_star(value: str) -> Tuple[float, List[str]]:
    """
    A number or a preset name (bec, bdmc, awgn).

    Raises:
        ValidationError: neither, or not above 2
    """
    if value in MU_STAR_PRESETS:
        preset = get_mu_star(value)
        return preset.mu_star, [preset.citation]
    try:
        mu = float(value)
    except ValueError:
        raise ValidationError(f"--mu-star must be a number or one of "
                              f"{', '.join(sorted(MU_STAR_PRESETS))}, got {value!r}")
    if not mu >= 2.0:
        raise ValidationError(f"mu* must be >= 2, got {mu}")
    return mu, citations_for(mu)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _unit_open(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (0.0 < value < 1.0):
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarforge", description="Polar-like codes over q-ary erasure channels")
    parser.add_argument('--version', action='version', version=f"polarforge {__version__}")
    parser.add_argument('--seed', type=int, default=0, help='Seed for every random step')
    parser.add_argument('--budget-nodes', type=_positive_int, default=None,
                        help='Maximum explicit tree size')
    parser.add_argument('--budget-trials', type=_positive_int, default=None,
                        help='Maximum trials times block length')
    parser.add_argument('--out-dir', type=Path, default=Path('.'),
                        help='Directory for relative output paths')
    parser.add_argument('--config-dir', type=Path, default=None, help='Configuration directory')
    parser.add_argument('--debug', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    kernel = sub.add_parser('kernel', help='Analyze or export a kernel')
    kernel_sub = kernel.add_subparsers(dest='action', required=True)
    analyze = kernel_sub.add_parser('analyze', help='Partial distances, exponents and flags')
    analyze.add_argument('kernel', help='Kernel file or preset name')
    analyze.add_argument('--out', type=Path, default=None, help='CSV output (stdout if omitted)')
    export = kernel_sub.add_parser('export', help='Write a preset kernel file')
    export.add_argument('preset')
    export.add_argument('--out', type=Path, required=True)

    construct = sub.add_parser('construct', help='Build a tree from a recipe')
    construct.add_argument('--recipe', type=Path, required=True)
    construct.add_argument('--out', type=Path, default=Path('tree.csv'))

    select = sub.add_parser('select', help='Choose information leaves')
    select.add_argument('--recipe', type=Path, required=True)
    select.add_argument('--mode', choices=['threshold', 'recyclable', 'disposable', 'graft'],
                        default='threshold')
    select.add_argument('--beta-p', type=_unit_open, default=None)
    select.add_argument('--inv-mu-p', type=_unit_open, default=None)
    select.add_argument('--mu-star', default=None, help='Number or preset (bec, bdmc, awgn)')
    select.add_argument('--ln-threshold', type=float, default=None,
                        help='Threshold mode: ln Z cutoff (default -n^(2/3))')
    select.add_argument('--out', type=Path, default=Path('A.csv'))
    select.add_argument('--diag', type=Path, default=Path('diag.csv'))

    sim = sub.add_parser('simulate', help='Monte Carlo SC decoding')
    sim.add_argument('--recipe', type=Path, required=True)
    sim.add_argument('--A', dest='leaf_set', type=Path, required=True)
    sim.add_argument('--trials', type=_positive_int, required=True)
    sim.add_argument('--shards', type=_positive_int, default=1)
    sim.add_argument('--out', type=Path, default=Path('sim.csv'))

    tradeoff = sub.add_parser('tradeoff', help='Achievable (beta\', 1/mu\') region')
    source = tradeoff.add_mutually_exclusive_group(required=True)
    source.add_argument('--kernel', help='Kernel file or preset name')
    source.add_argument('--preset', choices=sorted(TRADEOFF_PRESETS))
    tradeoff.add_argument('--mu-star', default=None)
    tradeoff.add_argument('--out', type=Path, default=Path('region.csv'))
    tradeoff.add_argument('--svg', type=Path, default=None)
    tradeoff.add_argument('--hull-check', action='store_true')
    tradeoff.add_argument('--hull-tolerance', type=float, default=1e-3)

    estimate = sub.add_parser('estimate-mu', help='Finite-depth mu* estimate')
    estimate.add_argument('--kernel', required=True, help='Kernel file or preset name')
    estimate.add_argument('--eps', type=_unit_open, nargs='+', default=[0.3, 0.5, 0.7])
    estimate.add_argument('--n-min', type=_positive_int, default=10)
    estimate.add_argument('--n-max', type=_positive_int, default=16)
    estimate.add_argument('--out', type=Path, default=Path('mu.csv'))

    figures = sub.add_parser('figures', help='Reproduce the reference curve sets')
    figures.add_argument('--dir', type=Path, default=Path('figures'))
    return parser


class Pipeline:
    """Runs one parsed command with configuration and budgets resolved."""

    def __init__(self, args: argparse.Namespace, config: Optional[ConfigManager] = None):
        self.args = args
        self.config = config or ConfigManager(args.config_dir)
        self.stages = StageLogger("PolarForge")
        self.node_budget = args.budget_nodes or self.config.get_number(
            'budgets.nodes', 1 << 22, minimum=1, integer=True)
        self.trial_budget = args.budget_trials or self.config.get_number(
            'budgets.trials', 1 << 34, minimum=1, integer=True)

    def out(self, path: Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else Path(self.args.out_dir) / path

    def exporter(self, citations: Sequence[str] = (), extra: Optional[dict] = None) -> CSVExporter:
        return CSVExporter(seed=self.args.seed, citations=citations, extra=extra)

    def _wrote(self, ok: bool, path: Path) -> int:
        if not ok:
            raise OSError(f"could not write {path}")
        self.stages.log_stage(self.args.command, "write", {"path": str(path)})
        return EXIT_OK

    def _mu_star(self, value: Optional[str]) -> Tuple[float, List[str]]:
        return parse_mu_star(value or self.config.get('presets.mu_star', 'bec'))

    def run(self) -> int:
        handler = getattr(self, "cmd_" + self.args.command.replace('-', '_'))
        try:
            return handler()
        finally:
            self.stages.flush()

    def cmd_kernel(self) -> int:
        if self.args.action == 'export':
            kernel = get_kernel(self.args.preset)
            path = self.out(self.args.out)
            return self._wrote(save_kernel(kernel, path), path)
        kernel = resolve_kernel(self.args.kernel)
        info = analyze_kernel(kernel)
        row = [info["name"], info["q"], info["ell"],
               " ".join(str(d) for d in info["partial_distances"]),
               info["beta_star"], info["op_norm"], len(info["dice"]), info["p_zero"],
               info["powerful"], info["bounded"]]
        columns = ["name", "q", "ell", "partial_distances", "beta_star", "op_norm",
                   "dice_support", "p_zero", "powerful", "bounded"]
        self.stages.log_stage("kernel", "analyze", {"name": kernel.name, "ell": kernel.ell})
        if self.args.out is None:
            print(",".join(columns))
            print(",".join(format_real(v) if isinstance(v, float) else str(v) for v in row))
            return EXIT_OK
        path = self.out(self.args.out)
        return self._wrote(self.exporter().export_rows(path, columns, [row]), path)

    def cmd_construct(self) -> int:
        recipe = load_recipe(self.args.recipe)
        tree, grafted = build_from_recipe(recipe, self.node_budget, merge=True)
        if not tree.merged:
            check_conventions(tree)
        self.stages.log_stage("construct", "build", {"tree": repr(tree)})
        extra = {"recipe": Path(self.args.recipe).name}
        if grafted is not None:
            extra["graft"] = json.dumps(grafted.to_dict(), sort_keys=True)
        path = self.out(self.args.out)
        return self._wrote(self.exporter(extra=extra).export_tree(path, tree), path)

    def cmd_select(self) -> int:
        args = self.args
        recipe = load_recipe(args.recipe)
        mode = args.mode
        if mode == 'graft' and recipe.graft is None:
            raise ValidationError("--mode graft needs a recipe with a [graft] section")
        if mode == 'disposable' and (args.beta_p is None or args.inv_mu_p is None):
            raise ValidationError("--mode disposable needs --beta-p and --inv-mu-p")
        if mode == 'graft' and args.beta_p is None:
            raise ValidationError("--mode graft needs --beta-p (mu' comes from the recipe)")
        citations: List[str] = []
        diag = None

        if mode == 'threshold':
            tree, _ = build_from_recipe(recipe, self.node_budget, merge=False)
            n = tree.max_depth
            ln_threshold = (args.ln_threshold if args.ln_threshold is not None else
                            quasi_polynomial_ln_threshold(
                                n, self.config.get('selection.threshold_exponent', 2.0 / 3.0)))
            A = select_threshold(tree, ln_threshold=ln_threshold)
        elif mode == 'graft':
            _, grafted = build_from_recipe(recipe, self.node_budget)
            g = recipe.graft
            tree = grafted.tree
            citations = citations_for(g.mu_star_rat)
            params = disposable_params(g.error_kernel, g.n, g.mu_star_rat, args.beta_p, g.mu_p,
                                       mode="graft")
            A, diag = select_on_grafted(grafted, params)
            certify_grafted(grafted, A, params)
            verify_disjoint(tree, {m: v for m, v in diag.recruits.items()})
        else:
            T = recipe.rate_kernel
            if any(not isinstance(e, Kernel) or e != T for e in recipe.schedule):
                raise ValidationError(f"--mode {mode} needs a perfect single-kernel schedule")
            n = len(recipe.schedule)
            tree, _ = build_from_recipe(recipe, self.node_budget, merge=False)
            mu_star, citations = self._mu_star(args.mu_star)
            if mode == 'recyclable':
                params = recyclable_params(T, n, mu_star)
                A, diag = select_recyclable(recipe.root, T, params, tree=tree)
                certify_recyclable(tree, A, params)
                verify_disjoint(tree, diag.retained)
            else:
                params = disposable_params(T, n, mu_star, args.beta_p, 1.0 / args.inv_mu_p)
                A, diag = select_disposable(recipe.root, T, params, tree=tree)
                certify_disposable(tree, A, params)
                verify_disjoint(tree, diag.recruits)
        self.stages.log_stage("select", mode, {"selected": int(A.size)})

        exporter = self.exporter(citations, {"mode": mode})
        path = self.out(args.out)
        self._wrote(exporter.export_selection(path, tree, A), path)
        if diag is not None:
            diag_path = self.out(args.diag)
            self._wrote(exporter.export_diagnostics(diag_path, diag), diag_path)
        return EXIT_OK

    def cmd_simulate(self) -> int:
        args = self.args
        recipe = load_recipe(args.recipe)
        tree, _ = build_from_recipe(recipe, self.node_budget, merge=False)
        A = load_leaf_set(args.leaf_set)
        cfg = SimConfig(trials=args.trials, seed=args.seed, shards=args.shards,
                        block_trials=self.config.get_number('simulation.block_trials', 1024,
                                                            minimum=1, integer=True),
                        z=self.config.get_number('simulation.z', 4.0, minimum=0.0),
                        check_conservation=bool(self.config.get('simulation.check_conservation',
                                                                False)),
                        trial_budget=self.trial_budget)
        report = simulate(tree, A, cfg)
        self.stages.log_stage("simulate", "run", report.to_dict())
        path = self.out(args.out)
        extra = {"trials": cfg.trials, "z": format_real(cfg.z)}
        status = self._wrote(self.exporter(extra=extra).export_simulation(path, report), path)
        union = check_union_bound(report, cfg.z)
        self.stages.log_stage("simulate", "union_bound", union.to_dict())
        if union.flagged:
            raise InvariantViolation(
                f"simulated BLER {union.bler:.4g} exceeds the union bound "
                f"{union.union_bound:.4g} + {cfg.z} sigma")
        return status

    def cmd_tradeoff(self) -> int:
        args = self.args
        if args.preset:
            preset = get_tradeoff_preset(args.preset)
            kernel = get_kernel(preset.kernel)
            mu_value = args.mu_star or preset.mu_star
        else:
            kernel = resolve_kernel(args.kernel)
            mu_value = args.mu_star
        mu_star, _ = self._mu_star(mu_value)
        pi_grid = self.config.get_number('tradeoff.pi_grid', 1024, minimum=2, integer=True)
        steps = self.config.get_number('tradeoff.bisection_iterations', 40, minimum=1, integer=True)
        region = kernel_region(kernel, mu_star, pi_grid_size=pi_grid, steps=steps)
        regions = [region]
        if args.hull_check:
            hull = region_hull(kernel_dice(kernel), kernel.ell, mu_star, beta_grid=region.betas,
                               label=f"{kernel.name} hull")
            distance = region.sup_distance(hull)
            logger.info(f"Hull check sup-distance {distance:.3g}")
            if distance > args.hull_tolerance:
                raise InvariantViolation(
                    f"scanned and hull boundaries differ by {distance:.3g} > {args.hull_tolerance}")
            regions.append(hull)
        self.stages.log_stage("tradeoff", "region", {"beta_intercept": region.beta_intercept,
                                                     "inv_mu_intercept": region.inv_mu_intercept})
        svg = self.out(args.svg) if args.svg is not None else None
        path = self.out(args.out)
        return self._wrote(curve_emit(regions, path, svg, seed=args.seed,
                                      points=triangle_points() if svg else ()), path)

    def cmd_estimate_mu(self) -> int:
        args = self.args
        if args.n_min > args.n_max:
            raise ValidationError(f"--n-min {args.n_min} exceeds --n-max {args.n_max}")
        kernel = resolve_kernel(args.kernel)
        frame, summary = estimate_mu_star(kernel, args.eps, range(args.n_min, args.n_max + 1))
        logger.info(f"mu* {summary['kind']}: {summary['mu_star_estimate']:.4g}")
        extra = {"mu_star_estimate": format_real(summary['mu_star_estimate']),
                 "kind": summary['kind']}
        path = self.out(args.out)
        return self._wrote(self.exporter(extra=extra).export_frame(path, frame), path)

    def cmd_figures(self) -> int:
        from src.cli.figures import reproduce_figures
        written = reproduce_figures(self.out(self.args.dir), seed=self.args.seed)
        self.stages.log_stage("figures", "write", {"files": len(written)})
        return EXIT_OK


def run_pipeline(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse argv and run one command.

    Returns:
        0 on success, 1 for rejected input, budgets, infeasible targets and
        I/O failures, 2 for a failed invariant or certificate
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    if args.debug:
        set_debug(True)
    if args.seed < 0 or args.seed >= 1 << 64:
        logger.error(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
        return EXIT_INPUT
    try:
        return Pipeline(args).run()
    except InvariantViolation as exc:
        logger.error(f"Invariant violated: {exc}")
        return EXIT_INVARIANT
    except (ValidationError, BudgetExceededError, InfeasibleTargetError, OSError) as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
