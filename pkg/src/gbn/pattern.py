"""Binary sampling patterns over graph nodes."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class SamplingPattern:
    """A set of sampling nodes ``S`` on a graph with ``n`` nodes.

    ``support`` is stored sorted and duplicate-free; ``s`` gives the binary
    indicator vector.
    """

    n: int
    support: tuple[int, ...]

    def __post_init__(self):
        supp = tuple(sorted(int(i) for i in self.support))
        if len(set(supp)) != len(supp):
            raise ValueError("support contains duplicate nodes")
        if supp and (supp[0] < 0 or supp[-1] >= self.n):
            raise ValueError(f"support index out of range for n={self.n}")
        object.__setattr__(self, "support", supp)

    @classmethod
    def from_support(cls, n: int, support: Iterable[int]) -> "SamplingPattern":
        return cls(int(n), tuple(int(i) for i in support))

    @classmethod
    def from_vector(cls, s: np.ndarray) -> "SamplingPattern":
        s = np.asarray(s)
        if not np.all((s == 0) | (s == 1)):
            raise ValueError("pattern vector must be binary")
        return cls(len(s), tuple(np.flatnonzero(s).tolist()))

    @property
    def m(self) -> int:
        return len(self.support)

    @property
    def density(self) -> float:
        return self.m / self.n

    @property
    def indices(self) -> np.ndarray:
        return np.asarray(self.support, dtype=np.int64)

    @property
    def s(self) -> np.ndarray:
        vec = np.zeros(self.n)
        vec[list(self.support)] = 1.0
        return vec

    def complement(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.support)] = False
        return np.flatnonzero(mask)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "support": list(self.support)})

    @classmethod
    def from_json(cls, text: str) -> "SamplingPattern":
        obj = json.loads(text)
        try:
            return cls.from_support(obj["n"], obj["support"])
        except KeyError as exc:
            raise ValueError(f"pattern JSON missing field {exc}") from None


def write_pattern(p: SamplingPattern, path: str | Path) -> None:
    Path(path).write_text(p.to_json() + "\n", encoding="utf-8")


def read_pattern(path: str | Path) -> SamplingPattern:
    return SamplingPattern.from_json(Path(path).read_text(encoding="utf-8"))
