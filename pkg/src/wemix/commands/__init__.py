from .fit import cmd_fit
from .monitor import cmd_monitor
from .simulate import cmd_simulate

__all__ = ['cmd_fit', 'cmd_monitor', 'cmd_simulate']
