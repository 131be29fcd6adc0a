"""Persistence pairs and diagrams."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np


@dataclass(frozen=True)
class PersistencePair:
    dim: int
    birth: float
    death: float
    birth_simplex: tuple[int, ...]
    death_simplex: tuple[int, ...]

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def zero_persistence(self) -> bool:
        return self.death == self.birth

    @property
    def essential(self) -> bool:
        return self.death == np.inf

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "birth": self.birth,
            # strict JSON has no infinity
            "death": None if self.essential else self.death,
            "birth_simplex": list(self.birth_simplex),
            "death_simplex": list(self.death_simplex),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PersistencePair":
        death = obj["death"]
        return cls(
            dim=int(obj["dim"]),
            birth=float(obj["birth"]),
            death=np.inf if death is None else float(death),
            birth_simplex=tuple(obj["birth_simplex"]),
            death_simplex=tuple(obj["death_simplex"]),
        )


def _simplex(row: np.ndarray) -> tuple[int, ...]:
    return tuple(int(x) for x in row if x >= 0)


@dataclass(frozen=True, eq=False)
class PersistenceDiagram:
    """Column-oriented diagram.

    Each row ``m`` is one pair.  Simplex arrays are padded with ``-1``:
    ``birth_simplex`` holds one vertex (dim 0) or the birth edge (dim 1),
    ``death_simplex`` holds the merging edge (dim 0) or the killing triangle
    (dim 1).  ``birth_edge`` / ``death_edge`` are the edges whose lengths equal
    the birth / death values, ``-1`` where no such edge exists.
    """

    dims: np.ndarray
    births: np.ndarray
    deaths: np.ndarray
    birth_simplex: np.ndarray
    death_simplex: np.ndarray
    birth_edge: np.ndarray
    death_edge: np.ndarray
    n_points: int
    includes_essential: bool = True

    def __len__(self) -> int:
        return len(self.dims)

    @property
    def persistence(self) -> np.ndarray:
        return self.deaths - self.births

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.deaths)

    @property
    def zero_persistence(self) -> np.ndarray:
        """Flags pairs born and killed at the same filtration value."""
        return self.deaths == self.births

    def mask(self, dim: int, finite_only: bool = True) -> np.ndarray:
        m = self.dims == dim
        if finite_only:
            m &= self.finite
        return m

    def select(self, dim: int, finite_only: bool = True) -> np.ndarray:
        """``(k, 2)`` array of (birth, death) for one dimension."""
        m = self.mask(dim, finite_only)
        return np.column_stack([self.births[m], self.deaths[m]])

    def pair(self, m: int) -> PersistencePair:
        return PersistencePair(
            dim=int(self.dims[m]),
            birth=float(self.births[m]),
            death=float(self.deaths[m]),
            birth_simplex=_simplex(self.birth_simplex[m]),
            death_simplex=_simplex(self.death_simplex[m]),
        )

    @property
    def pairs(self) -> list[PersistencePair]:
        return [self.pair(m) for m in range(len(self))]

    def triples(self, include_essential: bool = False) -> list[tuple[int, float, float]]:
        """Sorted ``(dim, birth, death)`` multiset, handy for comparisons."""
        keep = np.ones(len(self), dtype=bool) if include_essential else self.finite
        return sorted(
            (int(d), float(b), float(x))
            for d, b, x in zip(self.dims[keep], self.births[keep], self.deaths[keep])
        )

    def write_jsonl(self, fh: IO[str]) -> None:
        for p in self.pairs:
            fh.write(json.dumps(p.to_json(), sort_keys=False) + "\n")

    def to_jsonl(self) -> str:
        return "".join(json.dumps(p.to_json()) + "\n" for p in self.pairs)


def read_jsonl(lines: Iterable[str]) -> list[PersistencePair]:
    return [PersistencePair.from_json(json.loads(line)) for line in lines if line.strip()]
