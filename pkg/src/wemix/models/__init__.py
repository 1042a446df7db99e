from .mixture import MixtureModel
from .fit_result import FitResult

__all__ = ['MixtureModel', 'FitResult']
