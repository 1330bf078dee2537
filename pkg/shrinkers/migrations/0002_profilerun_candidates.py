from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('shrinkers', '0001_initial'),
    ]

    operations = [
        migrations.AddField(
            model_name='profilerun',
            name='candidates',
            field=models.JSONField(blank=True, default=list),
        ),
    ]
