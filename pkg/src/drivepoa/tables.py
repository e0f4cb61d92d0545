"""Exact cost arrays over the full product space of a finite game.

With binary loads, any function of a resource's load is a polynomial in the
occupancy indicators of the players.  Writing ``J(1 + m)`` (m = number of
other occupants) through forward differences,

    J(1 + m) = sum_k  D^k J(1) * C(m, k),

and ``C(m, k)`` counts the k-subsets of other players that cover the
resource.  Summing over resources turns each term into an intersection count
``|S_i ∩ S_j ∩ ...|`` between strategies, so every player's congestion cost
(and the potential) is a sum of small broadcast tensors.  Values are kept as
integers scaled by the common denominator of all cost coefficients.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import TYPE_CHECKING

import numpy as np


if TYPE_CHECKING:
    from .game import GameInstance

_ROW_CHUNK = 4096
_INT64_SAFE = 2**62


def forward_differences(values: list[Fraction]) -> list[Fraction]:
    """``[D^0 f(0), D^1 f(0), ...]`` for samples ``f(0), f(1), ...``."""
    out = []
    row = list(values)
    while row:
        out.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    return out


def _lcm_denominators(values) -> int:
    den = 1
    for v in values:
        den = math.lcm(den, Fraction(v).denominator)
    return den


class ProfileTables:
    """Per-player congestion and personal costs for every profile.

    ``cg[i]`` has the full product shape; ``per[i]`` is 1-D over player i's
    strategies.  All arrays hold integers equal to the true cost times
    ``scale``.
    """

    def __init__(self, game: "GameInstance"):
        self.game = game
        self.shape = tuple(len(p.strategies) for p in game.players)
        n = len(self.shape)
        levels = game.levels

        self.scale = _lcm_denominators(
            [c for p in levels.polys for c in p.coefficients]
            + [s.personal for p in game.players for s in p.strategies]
        )
        bound = self._magnitude_bound()
        self.dtype = np.int64 if bound < _INT64_SAFE else object

        self._index = self._resource_index()
        self._counts: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
        self._by_level: dict[tuple[int, int], list[set]] = {}

        self.per = [
            np.array([_scaled(s.personal, self.scale) for s in p.strategies], dtype=self.dtype)
            for p in game.players
        ]
        self.cg = []
        for i in range(n):
            others = [j for j in range(n) if j != i]
            acc = np.zeros(self.shape, dtype=self.dtype)
            for h, poly in enumerate(levels.polys):
                diffs = forward_differences([poly(1 + m) for m in range(n)])
                for k, coeff in enumerate(diffs):
                    if coeff == 0:
                        continue
                    c = _scaled(coeff, self.scale)
                    for subset in itertools.combinations(others, k):
                        acc = acc + c * self._broadcast(h, tuple(sorted((i,) + subset)))
            self.cg.append(acc)

    def _magnitude_bound(self) -> int:
        n = len(self.game.players)
        total = 0
        for p in self.game.players:
            worst = 0
            for s in p.strategies:
                v = s.personal + sum(
                    self.game.levels[r.level](n) for r in s.footprint
                )
                worst = max(worst, v)
            total += worst
        return int(total * self.scale) * 4 + 1

    def _resource_index(self):
        """Per level: column index of every resource used by any strategy."""
        index: list[dict] = [dict() for _ in range(len(self.game.levels))]
        for p in self.game.players:
            for s in p.strategies:
                for r in s.footprint:
                    if r.level >= len(index):
                        raise ValueError(
                            f"resource at level {r.level} but only {len(index)} level costs given"
                        )
                    index[r.level].setdefault(r, len(index[r.level]))
        return index

    def _level_sets(self, player: int, level: int) -> list[set]:
        key = (player, level)
        if key not in self._by_level:
            self._by_level[key] = [
                {r for r in s.footprint if r.level == level}
                for s in self.game.players[player].strategies
            ]
        return self._by_level[key]

    def _membership(self, player: int, level: int, columns: dict) -> np.ndarray:
        sets = self._level_sets(player, level)
        m = np.zeros((len(sets), len(columns)), dtype=np.float64)
        for a, rs in enumerate(sets):
            m[a, [columns[r] for r in rs if r in columns]] = 1.0
        return m

    def intersection_counts(self, level: int, players: tuple[int, ...]) -> np.ndarray:
        """``|S_{p0}[a0] ∩ S_{p1}[a1] ∩ ...|`` at ``level`` for all strategy tuples."""
        key = (level, players)
        if key in self._counts:
            return self._counts[key]
        used = [set().union(*self._level_sets(j, level)) for j in players]
        common = set.intersection(*used)
        dims = tuple(self.shape[j] for j in players)
        if not common:
            out = np.zeros(dims, dtype=np.int64)
        else:
            columns = {r: c for c, r in enumerate(sorted(common))}
            mats = [self._membership(j, level, columns) for j in players]
            out = np.rint(_overlap(mats)).astype(np.int64).reshape(dims)
        self._counts[key] = out
        return out

    def _broadcast(self, level: int, players: tuple[int, ...]) -> np.ndarray:
        counts = self.intersection_counts(level, players)
        view = [1] * len(self.shape)
        for j in players:
            view[j] = self.shape[j]
        arr = counts.reshape(view)
        return arr.astype(object) if self.dtype is object else arr

    def total(self, i: int) -> np.ndarray:
        view = [1] * len(self.shape)
        view[i] = self.shape[i]
        return self.cg[i] + self.per[i].reshape(view)

    def social(self) -> np.ndarray:
        acc = np.zeros(self.shape, dtype=self.dtype)
        for i in range(len(self.shape)):
            acc = acc + self.total(i)
        return acc

    def potential(self) -> np.ndarray:
        """Rosenthal potential over the product space, scaled."""
        n = len(self.shape)
        acc = np.zeros(self.shape, dtype=self.dtype)
        for h, poly in enumerate(self.game.levels.polys):
            cumulative = [Fraction(0)]
            for load in range(1, n + 1):
                cumulative.append(cumulative[-1] + poly(load))
            diffs = forward_differences(cumulative)
            for k, coeff in enumerate(diffs):
                if k == 0 or coeff == 0:
                    continue
                c = _scaled(coeff, self.scale)
                for subset in itertools.combinations(range(n), k):
                    acc = acc + c * self._broadcast(h, subset)
        for i in range(n):
            view = [1] * n
            view[i] = self.shape[i]
            acc = acc + self.per[i].reshape(view)
        return acc

    def nash_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        for i in range(len(self.shape)):
            tot = self.total(i)
            best = tot.min(axis=i, keepdims=True)
            mask &= np.asarray(tot == best, dtype=bool)
        return mask

    def unscale(self, value) -> Fraction:
        return Fraction(int(value), self.scale)


def _overlap(mats: list[np.ndarray]) -> np.ndarray:
    """Sum over columns of the product of one row from each 0/1 matrix."""
    if len(mats) == 1:
        return mats[0].sum(axis=1)
    if len(mats) == 2:
        a, b = mats
        return np.concatenate([a[c : c + _ROW_CHUNK] @ b.T for c in range(0, len(a), _ROW_CHUNK)])
    first, second, rest = mats[0], mats[1], mats[2:]
    return np.stack([_overlap([second * row] + rest) for row in first])


def _scaled(value: Fraction, scale: int) -> int:
    v = value * scale
    if v.denominator != 1:
        raise ArithmeticError("cost value not representable at the common scale")
    return int(v)
