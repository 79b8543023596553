"""Ensemble deep-RL trading strategies for a cryptocurrency portfolio.

Pipeline: hourly OHLCV features -> portfolio MDP environment -> PPO-trained
LSTM policy -> multi-period validation model selection -> mixture of
tanh-Gaussian policies -> rolling-window granular backtests and reports.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, EnsembleTraderError, ModelError

__all__ = [
    "ConfigError",
    "DataError",
    "EnsembleTraderError",
    "ModelError",
    "__version__",
]
