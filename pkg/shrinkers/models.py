from django.db import models
from django.core.exceptions import ValidationError
from django.utils import timezone


class GoldenValue(models.Model):
    """Reference numbers the acceptance checks compare against."""
    key = models.CharField(max_length=64, unique=True)
    m = models.PositiveSmallIntegerField()
    n = models.PositiveSmallIntegerField()
    value = models.FloatField()
    tolerance = models.FloatField()
    provenance = models.TextField(blank=True)
    config_hash = models.CharField(max_length=64, blank=True)

    class Meta:
        db_table = 'golden_values'
        ordering = ['key']

    def __str__(self):
        return f"{self.key} = {self.value!r} (m={self.m}, n={self.n})"

    def matches(self, value):
        return abs(value - self.value) <= self.tolerance


class ProfileRun(models.Model):
    STATE_CHOICES = [
        ('PENDING', 'Pending'),
        ('BRACKETED', 'Bracketed'),
        ('SOLVED', 'Solved'),
        ('CERTIFIED', 'Certified'),
        ('REJECTED', 'Rejected'),
        ('FAILED', 'Failed'),
    ]

    # state transitions
    STATE_TRANSITIONS = {
        'PENDING': ['BRACKETED', 'FAILED'],
        'BRACKETED': ['SOLVED', 'FAILED'],
        'SOLVED': ['CERTIFIED', 'REJECTED', 'FAILED'],
        'CERTIFIED': [],
        'REJECTED': [],
        'FAILED': [],
    }

    reference = models.CharField(max_length=20, unique=True, db_index=True)
    m = models.PositiveSmallIntegerField()
    n = models.PositiveSmallIntegerField()
    state = models.CharField(max_length=20, choices=STATE_CHOICES, default='PENDING', db_index=True)
    bracket_lo = models.FloatField(null=True, blank=True)
    bracket_hi = models.FloatField(null=True, blank=True)
    solve_tol = models.FloatField()
    config_hash = models.CharField(max_length=64, blank=True)

    r_star = models.FloatField(null=True, blank=True)
    orthogonality_residual = models.FloatField(null=True, blank=True)
    s_residual = models.FloatField(null=True, blank=True)
    max_residual = models.FloatField(null=True, blank=True)
    closure_gap = models.FloatField(null=True, blank=True)
    embedded = models.BooleanField(null=True, blank=True)
    ell_contacts = models.PositiveIntegerField(null=True, blank=True)
    # one entry per sign change of the pre-scan, polished independently
    candidates = models.JSONField(default=list, blank=True)
    output_path = models.CharField(max_length=500, blank=True)

    # Timestamps
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)
    bracketed_at = models.DateTimeField(null=True, blank=True)
    solved_at = models.DateTimeField(null=True, blank=True)
    certified_at = models.DateTimeField(null=True, blank=True)
    rejected_at = models.DateTimeField(null=True, blank=True)
    failed_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = 'profile_runs'
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['m', 'n', 'state'], name='profile_run_m_a1f3c2_idx'),
        ]

    def __str__(self):
        return f"{self.reference} - m={self.m}, n={self.n} ({self.state})"

    def can_transition_to(self, new_state):
        return new_state in self.STATE_TRANSITIONS.get(self.state, [])

    def transition_to(self, new_state, notes=''):
        """Move to a new state, stamping its timestamp and recording the history row."""
        if not self.can_transition_to(new_state):
            raise ValidationError(
                f"Cannot transition from {self.state} to {new_state}. "
                f"Allowed transitions: {self.STATE_TRANSITIONS.get(self.state, [])}"
            )

        old_state = self.state
        self.state = new_state

        timestamp_field_map = {
            'BRACKETED': 'bracketed_at',
            'SOLVED': 'solved_at',
            'CERTIFIED': 'certified_at',
            'REJECTED': 'rejected_at',
            'FAILED': 'failed_at',
        }
        setattr(self, timestamp_field_map[new_state], timezone.now())
        self.save()

        RunStateHistory.objects.create(
            run=self,
            from_state=old_state,
            to_state=new_state,
            notes=notes or f"Transitioned from {old_state} to {new_state}",
        )

    @property
    def finished(self):
        return not self.STATE_TRANSITIONS.get(self.state)


class RunStateHistory(models.Model):
    run = models.ForeignKey(ProfileRun, on_delete=models.CASCADE, related_name='state_history')
    from_state = models.CharField(max_length=20)
    to_state = models.CharField(max_length=20)
    notes = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'run_state_history'
        ordering = ['created_at', 'id']

    def __str__(self):
        return f"{self.run.reference}: {self.from_state} -> {self.to_state}"
