"""
Monte Carlo replication of the core-membership study.

Random TC situations are drawn on a discrete parameter grid with Nash
equilibrium prices; every allocation rule is evaluated on the resulting game
and checked for core membership. Trial i always draws from its own PCG64
stream, so results do not depend on the number of worker processes.
"""

import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from django.conf import settings
from tqdm import tqdm

from .allocation import CORE_TOLERANCE, EXPERIMENT_RULES, AllocationRule, allocate, core_check
from .exceptions import ConvergenceError, DegenerateAllocationError, DomainError, ExperimentAbortedError
from .games import build_game, is_superadditive
from .numerics import SolverConfig
from .serializers import ExperimentReportSerializer
from .situations import TcSituation, nash_prices

logger = logging.getLogger('tcgame')

_CHUNK_SIZE = 250


def _half_steps():
    return tuple(k / 2 for k in range(1, 31))


def _tenth_steps():
    return tuple(k / 10 for k in range(1, 11))


@dataclass(frozen=True)
class GridSpec:
    """Parameter grids; each parameter is drawn uniformly from its grid points."""
    cost_grid: tuple = field(default_factory=_half_steps)
    alpha_grid: tuple = field(default_factory=_half_steps)
    beta_grid: tuple = field(default_factory=_tenth_steps)

    def __post_init__(self):
        for name in ('cost_grid', 'alpha_grid', 'beta_grid'):
            points = tuple(float(x) for x in getattr(self, name))
            if not points:
                raise DomainError(f"{name} must not be empty")
            object.__setattr__(self, name, points)
        if min(self.beta_grid) <= 0:
            raise DomainError("beta_grid must hold positive values only")


class RuleOutcome(NamedTuple):
    evaluated: int
    in_core: int
    undefined: int
    fraction: float


class TrialResult(NamedTuple):
    index: int
    outcomes: dict
    nash_retries: int
    superadditive: bool
    situation: dict


@dataclass
class ExperimentReport:
    n_players: int
    trials: int
    seed: int
    grid: GridSpec
    outcomes: dict
    nash_retries: int = 0
    superadditivity_violations: int = 0
    failures: dict = field(default_factory=dict)

    def fraction(self, rule):
        return self.outcomes[AllocationRule(rule).value].fraction

    def csv_rows(self):
        return [
            [rule, self.n_players, self.trials, outcome.in_core, outcome.undefined, outcome.fraction]
            for rule, outcome in self.outcomes.items()
        ]


CSV_HEADERS = ['rule', 'n', 'trials', 'in_core', 'undefined', 'fraction']


def trial_generator(seed, index):
    """PCG64 generator of trial ``index``, split deterministically from ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def random_situation(rng, n, grid=None, config=None):
    """
    One random situation: c, alpha and beta drawn uniformly from the grid
    points, prices set to the Nash equilibrium.

    Raises ConvergenceError when the equilibrium solver fails for this draw.
    """
    if n < 2:
        raise DomainError(f"random situations need at least 2 operators, got {n}")
    grid = grid or GridSpec()

    c = rng.choice(np.array(grid.cost_grid), size=n)
    alpha = rng.choice(np.array(grid.alpha_grid), size=n)
    beta = float(rng.choice(np.array(grid.beta_grid)))
    prices = nash_prices(n, c, alpha, beta, config)
    return TcSituation(p=prices, c=c, alpha=alpha, beta=beta, equilibrium=True)


def _draw_situation(rng, n, grid, config, max_failures):
    failures = 0
    while True:
        try:
            return random_situation(rng, n, grid, config), failures
        except (ConvergenceError, DomainError) as e:
            failures += 1
            logger.warning(f"random_situation: Nash prices failed ({e}), retry {failures}/{max_failures}")
            if failures >= max_failures:
                raise ExperimentAbortedError(
                    f"{failures} consecutive situation draws failed; aborting the experiment"
                ) from e


def _run_trial(index, seed, n_players, grid, rules, config, tolerance, max_failures):
    rng = trial_generator(seed, index)
    theta, retries = _draw_situation(rng, n_players, grid, config, max_failures)
    game = build_game(theta)

    outcomes = {}
    for rule in rules:
        try:
            allocation = allocate(rule, theta, game)
        except DegenerateAllocationError:
            outcomes[rule.value] = None
            continue
        outcomes[rule.value] = core_check(game, allocation, tolerance).in_core

    return TrialResult(
        index=index,
        outcomes=outcomes,
        nash_retries=retries,
        superadditive=is_superadditive(game),
        situation=theta.to_dict(),
    )


def _run_chunk(indices, *args):
    return [_run_trial(index, *args) for index in indices]


class ExperimentService:
    """Runs the core-membership experiment; unset options come from settings.TC_EXPERIMENT."""

    def __init__(self, seed=None, workers=None, failure_samples=None, max_failures=None,
                 config=None, tolerance=None, progress=False):
        defaults = getattr(settings, 'TC_EXPERIMENT', {})
        solver = getattr(settings, 'TC_SOLVER', {})

        self.seed = int(defaults.get('SEED', 0) if seed is None else seed)
        self.workers = int(defaults.get('WORKERS', 1) if workers is None else workers)
        self.failure_samples = int(defaults.get('FAILURE_SAMPLES', 5) if failure_samples is None else failure_samples)
        self.max_failures = int(
            defaults.get('MAX_CONSECUTIVE_FAILURES', 100) if max_failures is None else max_failures
        )
        self.config = config or SolverConfig(
            tolerance=solver.get('TOLERANCE', 1e-10),
            max_iterations=solver.get('MAX_ITERATIONS', 10_000),
            damping=solver.get('DAMPING', 1.0),
        )
        self.tolerance = getattr(settings, 'TC_CORE_TOLERANCE', CORE_TOLERANCE) if tolerance is None else tolerance
        self.progress = progress

        if self.seed < 0:
            raise DomainError(f"seed must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise DomainError(f"workers must be at least 1, got {self.workers}")

    def run(self, n_players, trials, rules=None, grid=None):
        rules = self._resolve_rules(rules)
        grid = grid or GridSpec()
        if trials < 1:
            raise DomainError(f"trials must be at least 1, got {trials}")
        if n_players < 2:
            raise DomainError(f"experiments need at least 2 players, got {n_players}")

        logger.info(
            f"ExperimentService: n={n_players}, trials={trials}, seed={self.seed}, "
            f"rules={[rule.value for rule in rules]}, workers={self.workers}"
        )
        args = (self.seed, n_players, grid, rules, self.config, self.tolerance, self.max_failures)
        results = self._execute(trials, args, desc=f"n={n_players}")
        report = self._aggregate(results, n_players, trials, grid, rules)

        fractions = ', '.join(f"{rule}={outcome.fraction:.4f}" for rule, outcome in report.outcomes.items())
        logger.info(f"ExperimentService: n={n_players} finished, {fractions}")
        if report.superadditivity_violations:
            logger.warning(
                f"ExperimentService: {report.superadditivity_violations} generated games were not superadditive"
            )
        return report

    def _resolve_rules(self, rules):
        if rules is None:
            return EXPERIMENT_RULES
        resolved = tuple(AllocationRule(rule) for rule in rules)
        unsupported = [rule.value for rule in resolved if rule not in EXPERIMENT_RULES]
        if unsupported:
            raise DomainError(f"experiments cannot evaluate {', '.join(unsupported)}")
        return tuple(dict.fromkeys(resolved))

    def _execute(self, trials, args, desc):
        chunks = [range(start, min(start + _CHUNK_SIZE, trials)) for start in range(0, trials, _CHUNK_SIZE)]
        results = []
        with tqdm(total=trials, desc=desc, unit='trial', file=sys.stderr, disable=not self.progress) as bar:
            if self.workers == 1:
                for chunk in chunks:
                    results.extend(_run_chunk(chunk, *args))
                    bar.update(len(chunk))
                return results

            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                futures = [pool.submit(_run_chunk, chunk, *args) for chunk in chunks]
                # Merge in submission order, which is trial order.
                for future, chunk in zip(futures, chunks):
                    results.extend(future.result())
                    bar.update(len(chunk))
        return results

    def _aggregate(self, results, n_players, trials, grid, rules):
        outcomes = {}
        failures = {}
        for rule in rules:
            verdicts = [result.outcomes[rule.value] for result in results]
            undefined = sum(verdict is None for verdict in verdicts)
            in_core = sum(verdict is True for verdict in verdicts)
            outcomes[rule.value] = RuleOutcome(
                evaluated=trials - undefined,
                in_core=in_core,
                undefined=undefined,
                fraction=in_core / trials,
            )
            samples = [
                {'trial': result.index, 'situation': result.situation}
                for result in results if result.outcomes[rule.value] is False
            ]
            if samples:
                failures[rule.value] = samples[:self.failure_samples]

        return ExperimentReport(
            n_players=n_players,
            trials=trials,
            seed=self.seed,
            grid=grid,
            outcomes=outcomes,
            nash_retries=sum(result.nash_retries for result in results),
            superadditivity_violations=sum(not result.superadditive for result in results),
            failures=failures,
        )


def run_experiment(n_players, trials, rules=None, seed=None, grid=None, **options):
    """Single-size experiment with ``ExperimentService`` defaults for anything not given."""
    return ExperimentService(seed=seed, **options).run(n_players, trials, rules, grid)


def render_csv(reports):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_HEADERS)
    for report in reports:
        writer.writerows(report.csv_rows())
    return buffer.getvalue()


def render_json(reports):
    data = ExperimentReportSerializer(reports, many=True).data
    return json.dumps(data, indent=2) + '\n'


def write_reports(reports, path, fmt='csv'):
    """Write ``reports`` as CSV or JSON; returns the text written."""
    text = render_csv(reports) if fmt == 'csv' else render_json(reports)
    with open(path, 'w', newline='') as f:
        f.write(text)
    logger.info(f"ExperimentService: saved {len(reports)} report(s) to '{path}'")
    return text

