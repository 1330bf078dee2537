from rest_framework import serializers

from .exceptions import ShrinkerError
from .integrator import IntegratorConfig
from .linear_analysis import Variant
from .models import GoldenValue, ProfileRun, RunStateHistory

SCHEMA_VERSION = 1

INTEGRATOR_FIELDS = (
    'rel_tol', 'abs_tol', 'h_init', 'h_max', 't_max', 'eps_axis', 'eps_origin', 'event_tol', 'axis_band',
)


class SymmetryParamsSerializer(serializers.Serializer):
    m = serializers.IntegerField(min_value=2)
    n = serializers.IntegerField(min_value=2)


class CertificateSerializer(serializers.Serializer):
    embedded = serializers.BooleanField()
    ell_contacts = serializers.IntegerField(min_value=0)
    max_residual = serializers.FloatField()
    closure_gap = serializers.FloatField()
    spacing = serializers.FloatField()


class ProfileDocumentSerializer(serializers.Serializer):
    """On-disk form of a closed profile; key order here is the key order in the file."""
    schema_version = serializers.IntegerField()
    params = SymmetryParamsSerializer()
    r_star = serializers.FloatField()
    generation = serializers.DictField(required=False, default=dict)
    certificates = CertificateSerializer()
    points = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        min_length=4,
    )

    def validate_schema_version(self, value):
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(f"Unsupported schema version {value}, expected {SCHEMA_VERSION}")
        return value

    def validate(self, data):
        first, last = data['points'][0], data['points'][-1]
        if first != last:
            raise serializers.ValidationError("Profile points must close up (first point == last point)")
        return data


class RunConfigSerializer(serializers.Serializer):
    """Options shared by the management commands; only the ones a command passes are checked."""
    m = serializers.IntegerField(min_value=2, required=False)
    n = serializers.IntegerField(min_value=2, required=False)
    radius = serializers.FloatField(required=False)
    tol = serializers.FloatField(required=False)
    bracket = serializers.CharField(required=False)
    variant = serializers.ChoiceField(choices=[v.value for v in Variant], required=False)
    resample_h = serializers.FloatField(required=False)
    counts = serializers.IntegerField(min_value=1, required=False)
    seed = serializers.IntegerField(min_value=0, required=False)
    size = serializers.IntegerField(min_value=50, required=False)
    margin = serializers.FloatField(min_value=0.0, max_value=0.45, required=False)
    tmax = serializers.FloatField(required=False)

    rel_tol = serializers.FloatField(required=False)
    abs_tol = serializers.FloatField(required=False)
    h_max = serializers.FloatField(required=False)
    eps_axis = serializers.FloatField(required=False)
    eps_origin = serializers.FloatField(required=False)
    axis_band = serializers.FloatField(required=False)

    def validate_bracket(self, value):
        try:
            lo, hi = (float(part) for part in value.split(':'))
        except ValueError:
            raise serializers.ValidationError("Bracket must look like LO:HI")
        if not 0 < lo < hi:
            raise serializers.ValidationError("Bracket needs 0 < LO < HI")
        return (lo, hi)

    def validate(self, data):
        for name in ('radius', 'tol', 'resample_h', 'tmax'):
            if name in data and not data[name] > 0:
                raise serializers.ValidationError({name: "Must be strictly positive"})
        if self.context.get('symmetric') and 'm' in data and 'n' in data and data['m'] != data['n']:
            raise serializers.ValidationError("This command needs m == n")
        try:
            data['integrator'] = IntegratorConfig.from_settings(
                **{name: data.get(name) for name in INTEGRATOR_FIELDS},
            )
        except ShrinkerError as exc:
            raise serializers.ValidationError({'integrator': exc.messages})
        return data


class GoldenValueSerializer(serializers.ModelSerializer):
    class Meta:
        model = GoldenValue
        fields = ['key', 'm', 'n', 'value', 'tolerance', 'provenance', 'config_hash']

    def validate_tolerance(self, value):
        if not value > 0:
            raise serializers.ValidationError("Tolerance must be strictly positive")
        return value


class RunStateHistorySerializer(serializers.ModelSerializer):
    class Meta:
        model = RunStateHistory
        fields = ['from_state', 'to_state', 'notes', 'created_at']


class ProfileRunSerializer(serializers.ModelSerializer):
    state_history = RunStateHistorySerializer(many=True, read_only=True)

    class Meta:
        model = ProfileRun
        fields = [
            'reference', 'm', 'n', 'state', 'bracket_lo', 'bracket_hi', 'solve_tol',
            'config_hash', 'r_star', 'orthogonality_residual', 's_residual',
            'max_residual', 'closure_gap', 'embedded', 'ell_contacts', 'candidates', 'output_path',
            'created_at', 'solved_at', 'certified_at', 'state_history',
        ]
        read_only_fields = fields
