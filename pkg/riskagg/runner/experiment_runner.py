"""
Experiment Runner
=================

Runs the experiments behind the CLI: non-risk-region probability curves, the
effective-sample-size check, one-shot scenario generation and the
optimality-gap stability study.
"""

import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..cones import conic_hull_of_simplex
from ..distributions import EllipticalDist, SampleStream, chi2_cdf, derive_seed, std_normal_quantile
from ..errors import DomainError, InfeasibleProblemError
from ..metrics import StabilityMetrics
from ..regions import (
    ConeEllipticalRegion,
    EllipsoidRegion,
    MonotonicRegion,
    Orientation,
    RiskRegion,
    WholeSpaceRegion,
    orthant_nonrisk_probability,
)
from ..scenario_set import ScenarioSet
from ..scenarios import (
    AggSamplingReport,
    aggregate_discrete,
    aggregation_sampling,
    effective_size_stats,
    effective_size_variance,
)
from ..tail_risk import (
    ExactSolution,
    PortfolioProblem,
    cvar_normal_analytic,
    optimality_gap,
    solve_cvar_portfolio,
    solve_exact_normal,
)
from .config import REGION_CHOICES, ExperimentConfig, ExperimentKind, MethodKind

logger = logging.getLogger(__name__)

# Stream tags keep the seed families of different experiments disjoint
_TAG_PROB_CURVES = 1
_TAG_STABILITY = 2
_TAG_EFFSIZE = 3
_TAG_MARKET = 5
_TAG_SURVIVOR = 6

# Consecutive infeasible scenario sets tolerated per replication
MAX_DISCARDS = 100

PROB_CURVE_COLUMNS = ['d', 'beta', 'region_kind', 'rho', 'q_estimate', 'std_error']

EFFSIZE_COLUMNS = [
    'n', 'q', 'mean_N_empirical', 'mean_N_formula', 'z_score',
    'q_std_error', 'var_empirical', 'var_formula', 'var_z_score',
    'mean_effective_size', 'region_kind', 'replications',
]


@dataclass
class ExperimentResult:
    """Tabular experiment output with a JSON summary"""
    experiment: ExperimentKind
    rows: pd.DataFrame
    summary: Dict[str, Any]
    trace: List[Dict[str, Any]] = field(default_factory=list)


@dataclass
class ReplicationOutcome:
    """One scenario set solved and scored in the stability study"""
    method: str
    scenario_size: int
    replication: int
    seed: int
    gap: float
    raw_gap: float
    return_shortfall: float
    objective: float
    n_scenarios: int
    effective_sample_size: int
    n_aggregated: int
    discards: int
    return_violation: bool

    def to_json_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class MethodSizeStats:
    """Optimality-gap statistics for one (method, scenario size) cell"""
    method: str
    scenario_size: int
    mean_gap: float
    std_error: float
    ci95: float
    sd: float
    gap_samples: List[float]
    mean_scenarios: float
    mean_effective_sample_size: float
    return_violations: int
    discards: int


@dataclass
class StabilityReport:
    """Stability study result: per-cell gap statistics and per-method q estimates"""
    config: Dict[str, Any]
    problem: Dict[str, Any]
    exact: Dict[str, Any]
    cells: List[MethodSizeStats]
    q_estimates: Dict[str, Dict[str, float]]
    trace: List[Dict[str, Any]] = field(default_factory=list)

    def cell(self, method: Union[str, MethodKind], scenario_size: int) -> MethodSizeStats:
        method = MethodKind(method).value
        for c in self.cells:
            if c.method == method and c.scenario_size == scenario_size:
                return c
        raise KeyError((method, scenario_size))

    def mean_gaps(self, method: Union[str, MethodKind]) -> List[float]:
        method = MethodKind(method).value
        return [c.mean_gap for c in self.cells if c.method == method]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            'experiment': ExperimentKind.STABILITY.value,
            'config': self.config,
            'problem': self.problem,
            'exact': self.exact,
            'cells': [asdict(c) for c in self.cells],
            'q_estimates': self.q_estimates,
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{
            'method': c.method,
            'scenario_size': c.scenario_size,
            'mean_gap': c.mean_gap,
            'std_error': c.std_error,
            'ci95_low': c.mean_gap - c.ci95,
            'ci95_high': c.mean_gap + c.ci95,
            'sd': c.sd,
            'mean_scenarios': c.mean_scenarios,
            'mean_effective_sample_size': c.mean_effective_sample_size,
            'return_violations': c.return_violations,
            'discards': c.discards,
        } for c in self.cells])


def synthetic_market(d: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded monthly-return model: correlation from normalized random factors
    blended with the identity, volatilities in [0.04, 0.10] and means in
    [0, 0.02] with the largest mean set to 0.02.
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    factors = rng.standard_normal((d, max(2, d // 2)))
    factors /= np.linalg.norm(factors, axis=1, keepdims=True)
    corr = 0.8 * factors @ factors.T + 0.2 * np.eye(d)
    vols = rng.uniform(0.04, 0.10, size=d)
    sigma = corr * np.outer(vols, vols)
    mu = rng.uniform(0.0, 0.02, size=d)
    mu[int(np.argmax(mu))] = 0.02
    return mu, sigma


def load_returns(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Sample mean and covariance of a returns CSV (rows = months, columns = assets)"""
    frame = pd.read_csv(path)
    if frame.shape[0] < 2 or frame.shape[1] < 1:
        raise DomainError(f"{path}: need at least two rows of returns, got shape {frame.shape}")
    try:
        values = frame.astype(float)
    except ValueError as e:
        raise DomainError(f"{path}: non-numeric returns ({e})") from e
    if values.isna().to_numpy().any():
        raise DomainError(f"{path}: missing values in returns")
    return values.mean().to_numpy(), values.cov().to_numpy(), [str(c) for c in frame.columns]


def build_region(kind: str, dist: EllipticalDist, beta: float,
                 orientation: Orientation = Orientation.INCREASING,
                 survivor_samples: int = 200_000, survivor_seed: int = 0) -> RiskRegion:
    """Region named by a config region kind, for decisions in the no-short-selling simplex"""
    if kind == "ellipsoid":
        return EllipsoidRegion.from_dist(dist, beta)
    if kind == "orthant":
        return ConeEllipticalRegion.from_dist(dist, conic_hull_of_simplex(dist.dim), beta, orientation)
    if kind == "monotonic":
        return MonotonicRegion(dist, beta, orientation, survivor_samples, survivor_seed)
    if kind == "whole":
        return WholeSpaceRegion(dist.dim, beta)
    raise DomainError(f"unknown region kind '{kind}'")


class ExperimentRunner:
    """
    Runs one configured experiment.

    Every output is a pure function of the config: per-task seeds are derived
    from the master seed and task indices, and parallel results are stored in
    indexed slots.
    """

    def __init__(self, config: ExperimentConfig, verbose: bool = False):
        self.config = config.validate()
        self.verbose = verbose

    def run(self):
        """Dispatch on the configured experiment kind"""
        kind = self.config.experiment
        if kind is ExperimentKind.PROB_CURVES:
            return self.run_prob_curves()
        if kind is ExperimentKind.STABILITY:
            return self.run_stability()
        if kind is ExperimentKind.EFFSIZE:
            return self.run_effsize_check()
        return self.run_generate()

    # -- execution helpers -------------------------------------------------

    def _map(self, fn: Callable, items: Sequence, desc: str) -> list:
        results = [None] * len(items)
        with tqdm(total=len(items), desc=desc, disable=not self.verbose, file=sys.stderr) as bar:
            if self.config.workers == 1:
                for i, item in enumerate(items):
                    results[i] = fn(item)
                    bar.update()
            else:
                with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                    futures = {pool.submit(fn, item): i for i, item in enumerate(items)}
                    for future in as_completed(futures):
                        results[futures[future]] = future.result()
                        bar.update()
        return results

    def _survivor_seed(self) -> int:
        return derive_seed(self.config.master_seed, _TAG_SURVIVOR)

    def _normal(self, d: int, rho: float) -> EllipticalDist:
        if rho == 0.0:
            return EllipticalDist.standard_normal(d)
        return EllipticalDist.equicorrelated_normal(d, rho)

    # -- probability curves ------------------------------------------------

    def run_prob_curves(self) -> ExperimentResult:
        """
        Non-risk-region probability q per (d, beta, region[, rho]).

        The ellipsoid value is the exact chi-squared probability; the orthant
        and monotonic values are Monte Carlo estimates under standard or
        equicorrelated Normals.
        """
        cfg = self.config
        tasks = []
        for d in range(1, cfg.d_max + 1):
            for bi, beta in enumerate(cfg.betas):
                for region in cfg.region_kinds:
                    rhos = cfg.rhos if region == "monotonic" else [0.0]
                    for ri, rho in enumerate(rhos):
                        tasks.append((d, bi, beta, region, ri, rho))

        rows = self._map(self._prob_curve_row, tasks, "prob-curves")
        frame = pd.DataFrame(rows, columns=PROB_CURVE_COLUMNS)
        summary = {
            'experiment': ExperimentKind.PROB_CURVES.value,
            'master_seed': cfg.master_seed,
            'mc_samples': cfg.mc_samples,
            'n_rows': int(frame.shape[0]),
            'config': cfg.to_json_dict(),
        }
        return ExperimentResult(ExperimentKind.PROB_CURVES, frame, summary)

    def _prob_curve_row(self, task) -> list:
        d, bi, beta, region_kind, ri, rho = task
        cfg = self.config
        if region_kind == "ellipsoid":
            alpha = std_normal_quantile(beta)
            q = chi2_cdf(alpha * alpha, d) if alpha > 0.0 else 0.0
            return [d, beta, region_kind, 0.0, q, 0.0]
        if region_kind == "whole":
            return [d, beta, region_kind, 0.0, 0.0, 0.0]

        dist = self._normal(d, rho)
        region = build_region(region_kind, dist, beta, Orientation.INCREASING,
                              cfg.survivor_samples, self._survivor_seed())
        seed = derive_seed(cfg.master_seed, _TAG_PROB_CURVES, d, bi, ri, REGION_CHOICES.index(region_kind))
        draws = dist.draw(np.random.default_rng(seed), cfg.mc_samples)
        q = float(np.mean(~region.contains_many(draws)))
        return [d, beta, region_kind, rho, q, math.sqrt(q * (1.0 - q) / cfg.mc_samples)]

    # -- effective sample size -----------------------------------------------

    def _region_probability(self, region_kind: str, dist: EllipticalDist, region: RiskRegion,
                            beta: float, rho: float) -> Tuple[float, float]:
        """Aggregation-region probability and its standard error (0 when exact)"""
        cfg = self.config
        if region_kind == "whole":
            return 0.0, 0.0
        if region_kind == "ellipsoid":
            alpha = dist.marginal_quantile(beta)
            return (chi2_cdf(alpha * alpha, dist.dim) if alpha > 0.0 else 0.0), 0.0
        if region_kind == "orthant" and rho == 0.0:
            return orthant_nonrisk_probability(dist.dim, beta), 0.0
        seed = derive_seed(cfg.master_seed, _TAG_EFFSIZE, 0)
        draws = dist.draw(np.random.default_rng(seed), cfg.mc_samples)
        q = float(np.mean(~region.contains_many(draws)))
        return q, math.sqrt(q * (1.0 - q) / cfg.mc_samples)

    def run_effsize_check(self) -> ExperimentResult:
        """
        Empirical effective sample size of aggregation sampling against
        n + n q / (1 - q) and the negative binomial variance n q / (1 - q)^2.

        N(n) counts the draws needed to collect n risk scenarios. Standard
        errors combine the replication noise with the uncertainty of q.
        """
        cfg = self.config
        beta = cfg.betas[0]
        region_kind = cfg.region_kinds[0]
        dist = self._normal(cfg.d, cfg.rho)
        region = build_region(region_kind, dist, beta, Orientation.INCREASING,
                              cfg.survivor_samples, self._survivor_seed())
        q, q_se = self._region_probability(region_kind, dist, region, beta, cfg.rho)
        logger.info("effsize: region=%s q=%.6g (se %.2g)", region_kind, q, q_se)

        def replicate(task):
            n, rep = task
            stream = SampleStream(dist, derive_seed(cfg.master_seed, _TAG_EFFSIZE, n, rep))
            return aggregation_sampling(stream, region, n, cfg.draw_cap)

        tasks = [(n, rep) for n in cfg.scenario_sizes for rep in range(cfg.n_replications)]
        reports = self._map(replicate, tasks, "effsize")

        rows, trace = [], []
        for i, n in enumerate(cfg.scenario_sizes):
            batch = reports[i * cfg.n_replications:(i + 1) * cfg.n_replications]
            draws = np.array([r.effective_sample_size - int(r.extra_draw) for r in batch], dtype=float)
            extras = draws - n
            reps = len(batch)

            mean_formula, _ = effective_size_stats(n, q)
            var_formula = effective_size_variance(n, q)
            mean_se = math.sqrt(var_formula / reps + (n / (1.0 - q) ** 2 * q_se) ** 2)
            var_empirical = float(np.var(extras, ddof=1))
            var_se = math.hypot(StabilityMetrics.variance_standard_error(extras),
                                n * (1.0 + q) / (1.0 - q) ** 3 * q_se)

            rows.append([
                n, q, float(draws.mean()), mean_formula,
                StabilityMetrics.z_score(float(draws.mean()), mean_formula, mean_se),
                q_se, var_empirical, var_formula,
                StabilityMetrics.z_score(var_empirical, var_formula, var_se),
                float(np.mean([r.effective_sample_size for r in batch])), region_kind, reps,
            ])
            trace.extend({'n': n, 'replication': j, **r.to_json_dict()} for j, r in enumerate(batch))

        frame = pd.DataFrame(rows, columns=EFFSIZE_COLUMNS)
        summary = {
            'experiment': ExperimentKind.EFFSIZE.value,
            'master_seed': cfg.master_seed,
            'region_kind': region_kind,
            'beta': beta,
            'q': q,
            'q_std_error': q_se,
            'config': cfg.to_json_dict(),
        }
        return ExperimentResult(ExperimentKind.EFFSIZE, frame, summary, trace)

    # -- one-shot generation -------------------------------------------------

    def run_generate(self) -> AggSamplingReport:
        """Aggregation sampling of n_risk scenarios, seeded directly by master_seed"""
        cfg = self.config
        dist = self._normal(cfg.d, cfg.rho)
        region = build_region(cfg.region_kinds[0], dist, cfg.betas[0], Orientation.INCREASING,
                              cfg.survivor_samples, self._survivor_seed())
        report = aggregation_sampling(SampleStream(dist, cfg.master_seed), region, cfg.n_risk, cfg.draw_cap)
        logger.info("generated %d scenarios (effective sample size %d)",
                    report.scenario_set.n, report.effective_sample_size)
        return report

    # -- stability study -------------------------------------------------------

    def build_problem(self) -> PortfolioProblem:
        """Problem (P) from the returns file when given, else a synthetic market"""
        cfg = self.config
        if cfg.returns_path:
            mu, sigma, assets = load_returns(cfg.returns_path)
            logger.info("fitted %d assets from %s", len(assets), cfg.returns_path)
        else:
            mu, sigma = synthetic_market(cfg.d, derive_seed(cfg.master_seed, _TAG_MARKET))
        return PortfolioProblem(mu, sigma, cfg.betas[0], cfg.target_return, cfg.budget)

    def _stability_regions(self, dist: EllipticalDist, beta: float) -> Dict[MethodKind, RiskRegion]:
        """Risk regions of the configured aggregation methods (portfolio loss decreases in y)"""
        regions = {}
        if MethodKind.AGG_MONOTONIC in self.config.methods:
            regions[MethodKind.AGG_MONOTONIC] = build_region(
                "monotonic", dist, beta, Orientation.DECREASING,
                self.config.survivor_samples, self._survivor_seed())
        if {MethodKind.AGG_CONE, MethodKind.AGG_REDUCTION} & set(self.config.methods):
            cone = build_region("orthant", dist, beta, Orientation.DECREASING)
            regions[MethodKind.AGG_CONE] = regions[MethodKind.AGG_REDUCTION] = cone
        return regions

    def _scenario_set(self, method: MethodKind, stream: SampleStream, size: int,
                      regions: Dict[MethodKind, RiskRegion]) -> Tuple[ScenarioSet, int, int]:
        """(scenario set, draws used, draws aggregated) with final cardinality <= size"""
        if method is MethodKind.SAMPLING:
            return ScenarioSet.equiprobable(stream.sample(size)), size, 0
        if method is MethodKind.AGG_REDUCTION:
            sample = ScenarioSet.equiprobable(stream.sample(size))
            mask = regions[method].contains_many(sample.points)
            return aggregate_discrete(sample, mask), size, int((~mask).sum())
        report = aggregation_sampling(stream, regions[method], size - 1, self.config.draw_cap)
        return report.scenario_set, report.effective_sample_size, 0 if report.extra_draw else report.n_agg

    def _stability_replication(self, problem: PortfolioProblem, exact: ExactSolution,
                               regions: Dict[MethodKind, RiskRegion], task) -> ReplicationOutcome:
        method, size, rep = task
        cfg = self.config
        dist = problem.dist()
        method_index = list(MethodKind).index(method)

        discards = 0
        while True:
            seed = derive_seed(cfg.master_seed, _TAG_STABILITY, size, method_index, rep, discards)
            scens, draws, n_agg = self._scenario_set(method, SampleStream(dist, seed), size, regions)
            if not (problem.budget and problem.t is not None and scens.mean().max() < problem.t):
                try:
                    solution = solve_cvar_portfolio(scens, problem.beta, problem.t, budget=problem.budget)
                    break
                except InfeasibleProblemError:
                    pass
            discards += 1
            logger.warning("discarding infeasible %s scenario set (size %d, replication %d)",
                           method.value, size, rep)
            if discards > MAX_DISCARDS:
                raise InfeasibleProblemError(
                    f"{discards} consecutive infeasible scenario sets for {method.value} at size {size}",
                    problem.t, problem.mu)

        # target misses carry the return-multiplier penalty
        gap = optimality_gap(solution.x, problem, exact, require_feasible=False)
        shortfall = problem.violations(solution.x)['return']
        return ReplicationOutcome(
            method=method.value, scenario_size=size, replication=rep, seed=seed, gap=gap,
            raw_gap=cvar_normal_analytic(solution.x, problem) - exact.v_star, return_shortfall=shortfall,
            objective=solution.objective, n_scenarios=scens.n, effective_sample_size=draws,
            n_aggregated=n_agg, discards=discards,
            return_violation=not problem.is_feasible_portfolio(solution.x),
        )

    def run_stability(self) -> StabilityReport:
        """
        Optimality gaps of scenario-based CVaR portfolios against the exact
        Normal optimum, per method and final scenario-set size.
        """
        cfg = self.config
        problem = self.build_problem()
        exact = solve_exact_normal(problem)
        logger.info("exact optimum v*=%.10g (certificate gap %.2e)", exact.v_star, exact.certificate_gap)
        regions = self._stability_regions(problem.dist(), problem.beta)

        tasks = [(method, size, rep)
                 for size in cfg.scenario_sizes
                 for method in cfg.methods
                 for rep in range(cfg.n_replications)]
        outcomes = self._map(lambda task: self._stability_replication(problem, exact, regions, task),
                             tasks, "stability")

        cells = []
        for method in cfg.methods:
            for size in cfg.scenario_sizes:
                batch = [o for o in outcomes if o.method == method.value and o.scenario_size == size]
                summary = StabilityMetrics.calculate_gap_summary([o.gap for o in batch])
                cells.append(MethodSizeStats(
                    method=method.value,
                    scenario_size=size,
                    mean_gap=summary['mean'],
                    std_error=summary['std_error'],
                    ci95=summary['ci95'],
                    sd=summary['sd'],
                    gap_samples=[o.gap for o in batch],
                    mean_scenarios=float(np.mean([o.n_scenarios for o in batch])),
                    mean_effective_sample_size=float(np.mean([o.effective_sample_size for o in batch])),
                    return_violations=sum(o.return_violation for o in batch),
                    discards=sum(o.discards for o in batch),
                ))

        q_estimates = {}
        for method in cfg.methods:
            if method is MethodKind.SAMPLING:
                continue
            batch = [o for o in outcomes if o.method == method.value]
            q_estimates[method.value] = StabilityMetrics.calculate_q_estimate(
                sum(o.n_aggregated for o in batch), sum(o.effective_sample_size for o in batch))

        return StabilityReport(
            config=cfg.to_json_dict(),
            problem={
                'mu': problem.mu.tolist(),
                'sigma': problem.sigma.tolist(),
                'beta': problem.beta,
                't': problem.t,
                'budget': problem.budget,
            },
            exact={
                'x_star': exact.x_star.tolist(),
                'v_star': exact.v_star,
                'certificate_gap': exact.certificate_gap,
                'return_multiplier': exact.return_multiplier,
            },
            cells=cells,
            q_estimates=q_estimates,
            trace=[o.to_json_dict() for o in outcomes],
        )


def run_prob_curves(cfg: ExperimentConfig) -> ExperimentResult:
    return ExperimentRunner(cfg).run_prob_curves()


def run_stability(cfg: ExperimentConfig) -> StabilityReport:
    return ExperimentRunner(cfg).run_stability()


def run_effsize_check(cfg: ExperimentConfig) -> ExperimentResult:
    return ExperimentRunner(cfg).run_effsize_check()


def run_generate(cfg: ExperimentConfig) -> AggSamplingReport:
    return ExperimentRunner(cfg).run_generate()
