"""smartran: multi-cell OFDMA downlink simulator with a learned switch
between centralized and distributed resource allocation.

A discrete-time engine draws channels, runs deep-RL allocators in both
coordination modes every slot, scores them on throughput, signaling
overhead, and training complexity (the TOC objective), and lets a
soft actor-critic controller pick the mode to execute.
"""

__version__ = "0.1.0"

from .config import ConfigError, ScenarioConfig, load_config, parse_config, serialize_config
from .metrics import Allocation, BitBudget, ComplexityShape, Mode, TocWeights
from .netmodel import ChannelTensor, PathLossModel, Topology, UserSet

__all__ = [
    "__version__",
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "parse_config",
    "serialize_config",
    "Allocation",
    "BitBudget",
    "ComplexityShape",
    "Mode",
    "TocWeights",
    "ChannelTensor",
    "PathLossModel",
    "Topology",
    "UserSet",
]
