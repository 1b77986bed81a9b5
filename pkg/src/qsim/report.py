"""Shot histograms and their JSON/CSV renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Optional


def round_sig(x: float, digits: int = 12) -> float:
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class CountsReport:
    """Outcome histogram of a sampled run.

    Bitstrings are printed MSB-first: classical bit ``k`` is character ``k``
    counted from the right.
    """

    shots: int
    seed: int
    counts: Mapping[str, int]
    exact_probabilities: Optional[Mapping[str, float]] = None
    circuit_digest: str = ""
    num_clbits: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "counts", dict(sorted(self.counts.items())))
        if self.exact_probabilities is not None:
            object.__setattr__(
                self, "exact_probabilities", dict(sorted(self.exact_probabilities.items()))
            )

    def probability(self, bitstring: str) -> float:
        """Sampled frequency of ``bitstring``."""
        return self.counts.get(bitstring, 0) / self.shots

    def to_dict(self) -> dict:
        exact = None
        if self.exact_probabilities is not None:
            exact = {k: round_sig(v) for k, v in self.exact_probabilities.items()}
        return {
            "shots": int(self.shots),
            "seed": int(self.seed),
            "counts": {k: int(v) for k, v in self.counts.items()},
            "exact_probabilities": exact,
            "circuit_digest": self.circuit_digest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        lines = ["bitstring,count,probability"]
        for key, c in self.counts.items():
            lines.append(f"{key},{c},{round_sig(c / self.shots)!r}")
        return "\n".join(lines) + "\n"

    def to_text(self, width: int = 40) -> str:
        if not self.counts:
            return "(no counts)\n"
        top = max(self.counts.values())
        keylen = max(len(k) for k in self.counts)
        lines = []
        for key, c in self.counts.items():
            bar = "#" * round(width * c / top) if top else ""
            lines.append(f"{key:>{keylen}}  {c:>8d}  {c / self.shots:7.4f}  {bar}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CountsReport":
        d = json.loads(text)
        return cls(
            shots=d["shots"],
            seed=d["seed"],
            counts=d["counts"],
            exact_probabilities=d.get("exact_probabilities"),
            circuit_digest=d.get("circuit_digest", ""),
        )
