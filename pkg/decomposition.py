"""
Zariski-type decompositions shared by the toric and surface models.

A decomposition is D = P + N with N a nonnegative combination of named prime
divisors (toric rays are named "D0", "D1", ...; surface curves by their name).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Tuple

from exactgeom import QVector, fmt_q


class DecompositionKind(str, Enum):
    SIGMA = "sigma"
    S = "s"
    GOOD = "good"


@dataclass(frozen=True)
class ZariskiDecomposition:
    positive: QVector
    negative: Tuple[Tuple[str, Fraction], ...]
    kind: DecompositionKind = DecompositionKind.SIGMA
    semiample: bool = False
    assumptions: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name, coeff in self.negative:
            if coeff <= 0:
                raise ValueError(f"negative part coefficient of {name} must be positive, got {coeff}")

    @property
    def support(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.negative)

    def coefficient(self, name: str) -> Fraction:
        return dict(self.negative).get(name, Fraction(0))

    def negative_map(self) -> Dict[str, Fraction]:
        return dict(self.negative)

    def same_parts(self, other: "ZariskiDecomposition") -> bool:
        """Equal positive class and negative coefficients, whatever the kind tag."""
        return self.positive == other.positive and dict(self.negative) == dict(other.negative)

    def to_json(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "P": [fmt_q(x) for x in self.positive],
            "N": [{"curve": name, "coeff": fmt_q(c)} for name, c in self.negative],
            "kind": self.kind.value,
        }
        if self.kind is DecompositionKind.GOOD:
            out["semiample"] = self.semiample
        if self.assumptions:
            out["assumptions"] = list(self.assumptions)
        return out
