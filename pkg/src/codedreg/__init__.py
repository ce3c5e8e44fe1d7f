"""codedreg: erasure-coded MWMR register emulations over crash-prone shared
memory — deterministic simulator, adversarial scheduler, and consistency /
storage-bound checkers."""

from .codec import Piece, Value, decode, encode, piece_size_bits
from .core import TS_ZERO, Chunk, History, OperationRecord, TimeStamp
from .sim import Config, RunResult, StorageTrace, run

__version__ = "0.1.0"

__all__ = [
    "Chunk",
    "Config",
    "History",
    "OperationRecord",
    "Piece",
    "RunResult",
    "StorageTrace",
    "TS_ZERO",
    "TimeStamp",
    "Value",
    "decode",
    "encode",
    "piece_size_bits",
    "run",
    "__version__",
]
