from .engine import (EngineError, Network, PayloadTooLarge, Protocol, RoundLimitExceeded, RoundStats,
                     SimConfig, edge_load_histogram, run_protocol)
from .messages import Kind, Message, default_budget, payload_bits

__all__ = ["EngineError", "Kind", "Message", "Network", "PayloadTooLarge", "Protocol", "RoundLimitExceeded",
           "RoundStats", "SimConfig", "default_budget", "edge_load_histogram", "payload_bits", "run_protocol"]
