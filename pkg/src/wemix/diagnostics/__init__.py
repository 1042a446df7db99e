from .detection import OUTLIER, classify, detect_outliers, detection_errors
from .metrics import clustering_report, downweighting_level, mce, rand_index

__all__ = [
    'OUTLIER', 'classify', 'detect_outliers', 'detection_errors',
    'clustering_report', 'downweighting_level', 'mce', 'rand_index',
]
