from .generators import contaminate, example4_truth, gen_example4, gen_m5, m5_truth
from .study import accuracy_metrics, label_align, run_study

__all__ = [
    'contaminate', 'example4_truth', 'gen_example4', 'gen_m5', 'm5_truth',
    'accuracy_metrics', 'label_align', 'run_study',
]
