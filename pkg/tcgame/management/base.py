"""
Shared plumbing for the tcgame management commands.

Every command reads a scenario file (or experiment options), calls the
library, and prints 3-decimal tables or full-precision JSON. Library and
input errors become ``CommandError`` with exit code 1; argument errors are
argparse errors and exit with code 2.
"""

import argparse
import json
import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework.exceptions import ValidationError

from tcgame.allocation import AllocationRule, allocate
from tcgame.exceptions import TcGameError
from tcgame.games import build_delta_game
from tcgame.serializers import ScenarioSerializer

logger = logging.getLogger('tcgame')

USAGE_ERROR = 2
DATA_ERROR = 1

RULE_CHOICES = ['i-prop', 'm-prop', 'shapley', 'mse', 'mse-delta']


def positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def open_unit_interval(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a number")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"delta must lie strictly between 0 and 1, got {value}")
    return value


def fmt(value):
    if abs(value) < 5e-4:
        value = 0.0
    return f"{value:.3f}"


def fmt_vector(values):
    return '(' + ', '.join(fmt(value) for value in values) + ')'


def _flatten_errors(detail):
    if isinstance(detail, dict):
        return '; '.join(f"{key}: {_flatten_errors(value)}" for key, value in detail.items())
    if isinstance(detail, list):
        return '; '.join(_flatten_errors(item) for item in detail)
    return str(detail)


class TcCommand(BaseCommand):
    """Base class: subclasses implement ``run`` instead of ``handle``."""

    def add_scenario_argument(self, parser):
        parser.add_argument('--scenario', required=True, help='Path to a scenario JSON file')

    def add_format_argument(self, parser, choices=('table', 'json')):
        parser.add_argument('--format', choices=list(choices), default=choices[0], help='Output format')

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except CommandError:
            raise
        except (TcGameError, ValidationError, OSError, json.JSONDecodeError) as e:
            message = self._describe(e)
            logger.error(f"{self.__class__.__module__.rsplit('.', 1)[-1]}: {message}", exc_info=True)
            raise CommandError(message, returncode=DATA_ERROR)

    def run(self, *args, **options):
        raise NotImplementedError('subclasses of TcCommand must provide a run() method')

    @staticmethod
    def _describe(error):
        if isinstance(error, ValidationError):
            return f"invalid input: {_flatten_errors(error.detail)}"
        if isinstance(error, json.JSONDecodeError):
            return f"malformed JSON: {error}"
        if isinstance(error, OSError) and error.filename:
            return f"cannot access '{error.filename}': {error.strerror}"
        return str(error)

    def load_scenario(self, path):
        with open(path) as f:
            data = json.load(f)
        serializer = ScenarioSerializer(data=data)
        serializer.is_valid(raise_exception=True)
        scenario = serializer.save()
        logger.debug(f"load_scenario: {path} has {scenario.situation.n} operators")
        return scenario

    @staticmethod
    def resolve_delta(option, scenario):
        """--delta wins over the scenario's own delta."""
        return option if option is not None else scenario.delta

    @staticmethod
    def resolve_rules(option, scenario):
        """--rule wins; without it every rule the scenario lists is evaluated in order."""
        if option is not None:
            return [option]
        if not scenario.rules:
            raise CommandError('give --rule or list "rules" in the scenario', returncode=USAGE_ERROR)
        return list(scenario.rules)

    @staticmethod
    def evaluate_rule(rule_name, theta, game, delta):
        """
        Allocation of ``rule_name`` and the game it is meant for. Only
        MSE-DELTA uses ``delta``; its allocation belongs to the delta game.
        """
        rule = AllocationRule.from_name(rule_name)
        if rule is not AllocationRule.MSE_DELTA:
            return allocate(rule, theta, game), game
        if delta is None:
            raise CommandError('--rule mse-delta needs --delta', returncode=USAGE_ERROR)
        return allocate(rule, theta, game, delta), build_delta_game(game, delta)

    def write_core_report(self, report, verbose=False):
        if report.in_core:
            self.stdout.write('in core: yes')
        else:
            self.stdout.write(f"in core: no (worst coalition {report.worst_violation})")
        self.stdout.write(f"efficiency gap: {report.efficiency_gap:.3e}")
        self.stdout.write(f"individually rational: {'yes' if report.individually_rational else 'no'}")
        if verbose:
            for violation in report.violations:
                self.stdout.write(f"  violated: {violation}")

    def write_json(self, data):
        self.stdout.write(json.dumps(data, indent=2))

    def print_table(self, headers, rows):
        """Writes a list of lists as an aligned table."""
        rows = [[str(item) for item in row] for row in rows]
        widths = [max(len(str(item)) for item in column) for column in zip(*([headers] + rows))]
        self.stdout.write(' | '.join(f"{h:<{w}}" for h, w in zip(headers, widths)))
        self.stdout.write('-+-'.join('-' * w for w in widths))
        for row in rows:
            self.stdout.write(' | '.join(f"{item:<{w}}" for item, w in zip(row, widths)))
