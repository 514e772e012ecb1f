from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..bytecode.model import ModuleId

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


class Check(Enum):
    RESOURCE_LEAK = "resource-leak"
    UNCHECKED_RETURN = "unchecked-return"
    ARITH_OVERFLOW = "arith-overflow"
    CROSS_MODULE = "cross-module"
    CAPABILITY_LEAK = "capability-leak"
    DIAGNOSTIC = "diagnostic"


DETECTOR_CHECKS = tuple(c for c in Check if c is not Check.DIAGNOSTIC)


class Severity(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"
    INFO = "info"

    @property
    def rank(self) -> int:
        return {"info": 0, "low": 1, "medium": 2, "high": 3}[self.value]


class Confidence(Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"


@dataclass(frozen=True)
class Finding:
    check: Check
    severity: Severity
    module: ModuleId
    function: str
    instruction_index: int
    message: str
    confidence: Confidence = Confidence.HIGH
    witness_path: tuple[int, ...] | None = None
    id: str = field(init=False)

    def __post_init__(self) -> None:
        key = f"{self.check.value}|{self.module}|{self.function}|{self.instruction_index}"
        object.__setattr__(self, "id", f"{fnv1a_64(key.encode('utf-8')):016x}")

    @property
    def sort_key(self) -> tuple:
        return (str(self.module), self.function, self.instruction_index, self.check.value)
