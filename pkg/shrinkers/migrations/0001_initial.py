from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='GoldenValue',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('key', models.CharField(max_length=64, unique=True)),
                ('m', models.PositiveSmallIntegerField()),
                ('n', models.PositiveSmallIntegerField()),
                ('value', models.FloatField()),
                ('tolerance', models.FloatField()),
                ('provenance', models.TextField(blank=True)),
                ('config_hash', models.CharField(blank=True, max_length=64)),
            ],
            options={
                'db_table': 'golden_values',
                'ordering': ['key'],
            },
        ),
        migrations.CreateModel(
            name='ProfileRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('reference', models.CharField(db_index=True, max_length=20, unique=True)),
                ('m', models.PositiveSmallIntegerField()),
                ('n', models.PositiveSmallIntegerField()),
                ('state', models.CharField(choices=[('PENDING', 'Pending'), ('BRACKETED', 'Bracketed'), ('SOLVED', 'Solved'), ('CERTIFIED', 'Certified'), ('REJECTED', 'Rejected'), ('FAILED', 'Failed')], db_index=True, default='PENDING', max_length=20)),
                ('bracket_lo', models.FloatField(blank=True, null=True)),
                ('bracket_hi', models.FloatField(blank=True, null=True)),
                ('solve_tol', models.FloatField()),
                ('config_hash', models.CharField(blank=True, max_length=64)),
                ('r_star', models.FloatField(blank=True, null=True)),
                ('orthogonality_residual', models.FloatField(blank=True, null=True)),
                ('s_residual', models.FloatField(blank=True, null=True)),
                ('max_residual', models.FloatField(blank=True, null=True)),
                ('closure_gap', models.FloatField(blank=True, null=True)),
                ('embedded', models.BooleanField(blank=True, null=True)),
                ('ell_contacts', models.PositiveIntegerField(blank=True, null=True)),
                ('output_path', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('bracketed_at', models.DateTimeField(blank=True, null=True)),
                ('solved_at', models.DateTimeField(blank=True, null=True)),
                ('certified_at', models.DateTimeField(blank=True, null=True)),
                ('rejected_at', models.DateTimeField(blank=True, null=True)),
                ('failed_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'db_table': 'profile_runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='RunStateHistory',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('from_state', models.CharField(max_length=20)),
                ('to_state', models.CharField(max_length=20)),
                ('notes', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='state_history', to='shrinkers.profilerun')),
            ],
            options={
                'db_table': 'run_state_history',
                'ordering': ['created_at', 'id'],
            },
        ),
        migrations.AddIndex(
            model_name='profilerun',
            index=models.Index(fields=['m', 'n', 'state'], name='profile_run_m_a1f3c2_idx'),
        ),
    ]
