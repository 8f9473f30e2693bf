import math
from typing import NamedTuple, Optional

from rest_framework import serializers

from .allocation import AllocationRule
from .coalitions import MAX_PLAYERS, format_coalition
from .exceptions import TcGameError
from .games import Game, GameKind
from .situations import TcSituation


class TcSituationSerializer(serializers.Serializer):
    p = serializers.ListField(child=serializers.FloatField(), min_length=1)
    c = serializers.ListField(child=serializers.FloatField(), min_length=1)
    alpha = serializers.ListField(child=serializers.FloatField(), min_length=1)
    beta = serializers.FloatField()

    def validate_beta(self, value):
        if not (math.isfinite(value) and value > 0):
            raise serializers.ValidationError("beta must be a positive number")
        return value

    def validate(self, data):
        """Vectors must have one entry per operator"""
        if not len(data['p']) == len(data['c']) == len(data['alpha']):
            raise serializers.ValidationError("p, c and alpha must have the same length")
        try:
            TcSituation(p=data['p'], c=data['c'], alpha=data['alpha'], beta=data['beta'])
        except TcGameError as e:
            raise serializers.ValidationError(str(e))
        return data

    def create(self, validated_data):
        return TcSituation(**validated_data)


class Scenario(NamedTuple):
    situation: TcSituation
    delta: Optional[float]
    rules: tuple


class ScenarioSerializer(serializers.Serializer):
    situation = TcSituationSerializer()
    delta = serializers.FloatField(required=False, allow_null=True)
    rules = serializers.ListField(child=serializers.CharField(), required=False)

    def to_internal_value(self, data):
        # A scenario may also be a bare situation object.
        if isinstance(data, dict) and 'situation' not in data and 'p' in data:
            data = {'situation': data}
        return super().to_internal_value(data)

    def validate_delta(self, value):
        if value is not None and not 0.0 < value < 1.0:
            raise serializers.ValidationError("delta must lie strictly between 0 and 1")
        return value

    def validate_rules(self, value):
        try:
            rules = [AllocationRule.from_name(name) for name in value]
        except TcGameError as e:
            raise serializers.ValidationError(str(e))
        if AllocationRule.CUSTOM in rules:
            raise serializers.ValidationError("custom payoffs are given with --payoffs, not as a scenario rule")
        return [rule.value for rule in rules]

    def create(self, validated_data):
        return Scenario(
            situation=TcSituationSerializer().create(validated_data['situation']),
            delta=validated_data.get('delta'),
            rules=tuple(validated_data.get('rules', ())),
        )


class GameSerializer(serializers.Serializer):
    """
    {"n": 3, "kind": "plain", "values": {"0b0": 0.0, "0b1": -0.44, ...}}

    Coalition masks are binary literals; delta appears only for delta games.
    """
    n = serializers.IntegerField(min_value=1, max_value=MAX_PLAYERS)
    kind = serializers.ChoiceField(choices=[kind.value for kind in GameKind])
    delta = serializers.FloatField(required=False, allow_null=True)
    values = serializers.DictField(child=serializers.FloatField())
    situation = TcSituationSerializer(required=False)

    def to_representation(self, game):
        data = {
            'n': game.n,
            'kind': game.kind.value,
            'values': {bin(mask): float(value) for mask, value in enumerate(game.values)},
        }
        if game.delta is not None:
            data['delta'] = game.delta
        if game.source is not None:
            data['situation'] = TcSituationSerializer(game.source).data
        return data

    def validate(self, data):
        size = 1 << data['n']
        try:
            values = {int(key, 2): value for key, value in data['values'].items()}
        except ValueError:
            raise serializers.ValidationError("value keys must be binary coalition masks such as '0b101'")
        if sorted(values) != list(range(size)):
            raise serializers.ValidationError(f"a {data['n']}-player game needs exactly {size} coalition values")
        data['values'] = [values[mask] for mask in range(size)]
        return data

    def create(self, validated_data):
        source = None
        if 'situation' in validated_data:
            source = TcSituationSerializer().create(validated_data['situation'])
        try:
            return Game(
                n=validated_data['n'],
                values=validated_data['values'],
                kind=validated_data['kind'],
                delta=validated_data.get('delta'),
                source=source,
            )
        except TcGameError as e:
            raise serializers.ValidationError(str(e))


class AllocationSerializer(serializers.Serializer):
    rule = serializers.CharField(source='rule.value')
    payoffs = serializers.ListField(child=serializers.FloatField())
    metadata = serializers.DictField()


class CoreReportSerializer(serializers.Serializer):
    in_core = serializers.BooleanField()
    worst_violation = serializers.SerializerMethodField()
    tolerance = serializers.FloatField()
    efficiency_gap = serializers.FloatField()
    individually_rational = serializers.BooleanField()
    violations = serializers.SerializerMethodField()

    @staticmethod
    def _violation(violation):
        return {
            'coalition': format_coalition(violation.mask),
            'mask': bin(violation.mask),
            'deficit': violation.deficit,
        }

    def get_worst_violation(self, obj):
        return self._violation(obj.worst_violation)

    def get_violations(self, obj):
        return [self._violation(violation) for violation in obj.violations]


class ExperimentReportSerializer(serializers.Serializer):
    n_players = serializers.IntegerField()
    trials = serializers.IntegerField()
    seed = serializers.IntegerField()
    grid = serializers.SerializerMethodField()
    rules = serializers.SerializerMethodField()
    nash_retries = serializers.IntegerField()
    superadditivity_violations = serializers.IntegerField()
    failures = serializers.DictField()

    def get_grid(self, obj):
        return {
            'cost_grid': list(obj.grid.cost_grid),
            'alpha_grid': list(obj.grid.alpha_grid),
            'beta_grid': list(obj.grid.beta_grid),
        }

    def get_rules(self, obj):
        return {rule: outcome._asdict() for rule, outcome in obj.outcomes.items()}
