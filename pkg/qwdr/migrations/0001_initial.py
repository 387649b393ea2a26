import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='Scenario',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=200)),
                ('slug', models.SlugField(blank=True, max_length=250, unique=True)),
                ('document', models.JSONField()),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Сценарий',
                'verbose_name_plural': 'Сценарии',
                'ordering': ['name'],
            },
        ),
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario_name', models.CharField(max_length=200)),
                ('mode', models.CharField(choices=[('qwdr', 'QWDR'), ('unweighted', 'Без весов')], default='qwdr', max_length=20)),
                ('seed', models.IntegerField(blank=True, null=True)),
                ('horizon', models.IntegerField()),
                ('max_total_queue', models.IntegerField(default=0)),
                ('mean_total_queue', models.FloatField(default=0.0)),
                ('metrics', models.JSONField()),
                ('wall_time', models.FloatField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('scenario', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='runs', to='qwdr.scenario')),
            ],
            options={
                'verbose_name': 'Прогон',
                'verbose_name_plural': 'Прогоны',
                'ordering': ['-created_at', '-id'],
            },
        ),
        migrations.CreateModel(
            name='FlowResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('flow_id', models.IntegerField()),
                ('name', models.CharField(max_length=50)),
                ('arrival_rate', models.FloatField()),
                ('delay_target', models.FloatField(blank=True, null=True)),
                ('mean_delay', models.FloatField(blank=True, null=True)),
                ('reported_delay', models.IntegerField(blank=True, null=True)),
                ('delivered', models.IntegerField(default=0)),
                ('throughput', models.FloatField(default=0.0)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='flow_results', to='qwdr.experimentrun')),
            ],
            options={
                'verbose_name': 'Результат потока',
                'verbose_name_plural': 'Результаты потоков',
                'ordering': ['run', 'flow_id'],
            },
        ),
    ]
