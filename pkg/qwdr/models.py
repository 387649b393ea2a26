from django.db import models, transaction
from django.urls import reverse

from .utils import scenario_slug


# Модель сценария
class Scenario(models.Model):
    name = models.CharField(max_length=200)
    slug = models.SlugField(unique=True, max_length=250, blank=True)
    document = models.JSONField()
    created_at = models.DateTimeField(auto_now_add=True)

    def save(self, *args, **kwargs):
        if not self.slug:
            self.slug = scenario_slug(self.name, Scenario.objects.exclude(pk=self.pk))
        super().save(*args, **kwargs)

    def to_config(self, overrides=None):
        from .scenarios import scenario_from_document
        return scenario_from_document(self.document, overrides)

    def __str__(self):
        return self.name

    class Meta:
        verbose_name = "Сценарий"
        verbose_name_plural = "Сценарии"
        ordering = ['name']


# Модель прогона симуляции
class ExperimentRun(models.Model):
    MODE_CHOICES = [('qwdr', 'QWDR'), ('unweighted', 'Без весов')]

    scenario = models.ForeignKey(
        Scenario, related_name='runs', on_delete=models.SET_NULL, null=True, blank=True
    )
    scenario_name = models.CharField(max_length=200)
    mode = models.CharField(max_length=20, choices=MODE_CHOICES, default='qwdr')
    seed = models.IntegerField(null=True, blank=True)
    horizon = models.IntegerField()
    max_total_queue = models.IntegerField(default=0)
    mean_total_queue = models.FloatField(default=0.0)
    metrics = models.JSONField()
    wall_time = models.FloatField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    @classmethod
    def from_metrics(cls, metrics, scenario=None, wall_time=None):
        """
        Сохранение прогона и результатов по потокам.

        :param metrics: RunMetrics
        :param scenario: Scenario (если сценарий сохранён в базе)
        :param wall_time: время выполнения, секунды (в metrics.json не пишется)
        """
        with transaction.atomic():
            run = cls.objects.create(
                scenario=scenario,
                scenario_name=metrics.scenario,
                mode=metrics.mode,
                seed=metrics.seeds[0] if metrics.seeds else None,
                horizon=metrics.horizon,
                max_total_queue=metrics.max_total_queue,
                mean_total_queue=metrics.mean_total_queue,
                metrics=metrics.to_dict(),
                wall_time=wall_time,
            )
            FlowResult.objects.bulk_create([
                FlowResult(
                    run=run,
                    flow_id=flow.flow_id,
                    name=flow.name,
                    arrival_rate=flow.arrival_rate,
                    delay_target=flow.delay_target,
                    mean_delay=flow.mean_delay,
                    reported_delay=flow.reported_delay,
                    delivered=flow.delivered,
                    throughput=flow.throughput,
                )
                for flow in metrics.flows
            ])
        return run

    def get_absolute_url(self):
        return reverse('run_detail', args=[self.pk])

    def __str__(self):
        return f"{self.scenario_name} [{self.mode}] seed={self.seed}"

    class Meta:
        verbose_name = "Прогон"
        verbose_name_plural = "Прогоны"
        ordering = ['-created_at', '-id']


# Результаты по потокам
class FlowResult(models.Model):
    run = models.ForeignKey(ExperimentRun, related_name='flow_results', on_delete=models.CASCADE)
    flow_id = models.IntegerField()
    name = models.CharField(max_length=50)
    arrival_rate = models.FloatField()
    delay_target = models.FloatField(null=True, blank=True)
    mean_delay = models.FloatField(null=True, blank=True)
    reported_delay = models.IntegerField(null=True, blank=True)
    delivered = models.IntegerField(default=0)
    throughput = models.FloatField(default=0.0)

    @property
    def met(self):
        if self.delay_target is None or self.reported_delay is None:
            return None
        return self.reported_delay <= self.delay_target

    def __str__(self):
        return f"{self.name}: {self.reported_delay}"

    class Meta:
        verbose_name = "Результат потока"
        verbose_name_plural = "Результаты потоков"
        ordering = ['run', 'flow_id']
