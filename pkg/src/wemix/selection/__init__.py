from .criteria import classical_ic, complexity_penalty, n_free_parameters, weighted_ic
from .monitor import monitor, suggest_h

__all__ = ['classical_ic', 'complexity_penalty', 'n_free_parameters', 'weighted_ic', 'monitor', 'suggest_h']
