"""Stochastic online shortest-path routing with end-to-end feedback."""

from .errors import (BudgetExceeded, CapExceeded, CycleDetected, DegenerateInstance,
                     DisconnectedLink, NoPath, NoSecondPath, NotIdentifiable,
                     PathMismatch, RoutingError, SingularMatrix)
from .kernels import BACKEND
from .network import (Network, NetworkStats, PathVector, Sense, build_network,
                      count_paths, enumerate_paths, extremal_path, grid_network,
                      load_network, network_stats, save_network)

__version__ = "0.1.0"
