"""Event-driven limit order book simulator and reinforcement-learning market maker."""

from .config import ExperimentConfig
from .errors import LobError
from .feed import TradingDay, generate_synthetic_day, generate_synthetic_days, load_day
from .harness import DailyResult, aggregate, evaluate, run_benchmark, run_episode, train
from .lob import OrderBook, Side

__version__ = "0.1.0"

__all__ = [
    "DailyResult", "ExperimentConfig", "LobError", "OrderBook", "Side", "TradingDay",
    "aggregate", "evaluate", "generate_synthetic_day", "generate_synthetic_days", "load_day",
    "run_benchmark", "run_episode", "train",
]
