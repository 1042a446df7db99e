from .documents import (
    ClusteringReport,
    HSuggestion,
    MonitorCell,
    MonitorGrid,
    MonitorGridSpec,
    ResultDocument,
    StudyReport,
    TrialRecord,
)
from .options import DetectionRule, FitConfig, KernelSpec, RafSpec, RunConfig
from .simulation import SimScenario, StudySpec

__all__ = [
    'ClusteringReport', 'HSuggestion', 'MonitorCell', 'MonitorGrid', 'MonitorGridSpec',
    'ResultDocument', 'StudyReport', 'TrialRecord', 'DetectionRule', 'FitConfig',
    'KernelSpec', 'RafSpec', 'RunConfig', 'SimScenario', 'StudySpec',
]
