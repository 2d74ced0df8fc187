"""scanforge: prefix scans over expensive approximately-associative
operators.

Five scan algorithms as direct executors and explicit circuits, closed
form span/work accounting, four distributed strategies on message
passing workers, a deterministic cost simulator, and rigid image
registration as the canonical costly operator.
"""
from .ops import Operator, PARALLEL_KINDS, ScanKind, float_add, int_add, \
    string_concat
from .scans import (EmptyInputError, WidthError, blelloch_inclusive,
                    blelloch_scan, brent_kung_scan, exclusive_to_inclusive,
                    inclusive_scan, inclusive_to_exclusive, kogge_stone_scan,
                    run_scan, serial_scan, sklansky_scan)
from .networks import (MalformedNetworkError, NetworkReport, Node, PadReport,
                       ScanNetwork, build_network, execute_network,
                       padded_scan, parse_network, scan_via_network,
                       serialize_network, to_dot, verify_network)
from .strategy import Partition, PartitionError, StrategyVariant, partition
from .distributed import (DeadlockError, DistributedError, WorkerError,
                          global_stage, run_distributed)
from .simulate import (Constant, CostModel, LogNormal, SimReport, Trace,
                       Uniform, simulate)
from . import costs, registration, scaling

__version__ = "0.1.0"

__all__ = [
    "Operator", "PARALLEL_KINDS", "ScanKind", "float_add", "int_add",
    "string_concat", "EmptyInputError", "WidthError", "blelloch_inclusive",
    "blelloch_scan", "brent_kung_scan", "exclusive_to_inclusive",
    "inclusive_scan", "inclusive_to_exclusive", "kogge_stone_scan",
    "run_scan", "serial_scan", "sklansky_scan", "MalformedNetworkError",
    "NetworkReport", "Node", "PadReport", "ScanNetwork", "build_network",
    "execute_network", "padded_scan", "parse_network", "scan_via_network",
    "serialize_network", "to_dot", "verify_network", "Partition",
    "PartitionError", "StrategyVariant", "partition", "DeadlockError",
    "DistributedError", "WorkerError", "global_stage", "run_distributed",
    "Constant", "CostModel", "LogNormal", "SimReport", "Trace", "Uniform",
    "simulate", "costs", "registration", "scaling",
]
