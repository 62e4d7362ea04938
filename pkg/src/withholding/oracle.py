"""Brute-force ground truth by walking the full binary draw tree.

Every block sequence up to a length bound is fed through the same state
machines the simulator uses (:func:`withholding.cycles.step`). Weights are
kept as exponent pairs and evaluated on demand, so ``Fraction`` parameters
give exact rational results.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from numbers import Real

import numpy as np

from .analytics import MinerParams, Strategy
from .cycles import adoption_z, step
from .errors import DomainError, RangeError

MAX_BLOCKS = 14


@dataclass(frozen=True)
class WeightedCycle:
    sequence: str
    l: int
    attacker_wins: bool

    @property
    def n_s(self) -> int:
        return self.sequence.count("S")

    @property
    def n_h(self) -> int:
        return self.sequence.count("H")

    @property
    def n_flips(self) -> int:
        return 0 if self.attacker_wins else self.l - 1

    def probability(self, params: MinerParams) -> Real:
        return params.q**self.n_s * params.p**self.n_h

    def z_given_flips(self) -> dict[tuple[bool, ...], int]:
        """``Z`` for every adoption-flip pattern the cycle can see."""
        if self.attacker_wins:
            return {(): self.l}
        return {f: adoption_z(f) for f in itertools.product((False, True), repeat=self.n_flips)}

    def expected_z(self, gamma: Real) -> Real:
        """Exact ``E[Z | sequence]`` by summing over flip patterns."""
        total = 0
        for flips, z in self.z_given_flips().items():
            k = sum(flips)
            total += z * gamma**k * (1 - gamma) ** (len(flips) - k)
        return total


@functools.lru_cache(maxsize=64)
def _walk(strategy: Strategy, max_blocks: int) -> tuple[tuple[WeightedCycle, ...], tuple[str, ...]]:
    if not 0 <= max_blocks <= MAX_BLOCKS:
        raise RangeError(f"max_blocks must lie in [0, {MAX_BLOCKS}], got {max_blocks}")
    found: list[WeightedCycle] = []
    prefixes = [""]
    s = np.zeros(1, dtype=np.int64)
    h = np.zeros(1, dtype=np.int64)
    for _ in range(max_blocks):
        # children in S-then-H order keep each depth lexicographic
        s, h = np.repeat(s, 2), np.repeat(h, 2)
        letters = np.tile([True, False], len(prefixes))
        prefixes = [p + c for p in prefixes for c in "SH"]
        done, length, wins = step(strategy, s, h, letters)
        for i in np.flatnonzero(done):
            found.append(WeightedCycle(prefixes[i], int(length[i]), bool(wins[i])))
        keep = ~done
        s, h = s[keep], h[keep]
        prefixes = [p for p, k in zip(prefixes, keep) if k]
        if not prefixes:
            break
    return tuple(found), tuple(prefixes)


def enumerate_cycles(strategy: Strategy, max_blocks: int) -> list[WeightedCycle]:
    """Every terminating cycle with at most ``max_blocks`` draws, shortest first."""
    return list(_walk(strategy, max_blocks)[0])


def residual_mass(strategy: Strategy, params: MinerParams, max_blocks: int) -> Real:
    """Probability that a cycle is still running after ``max_blocks`` draws."""
    open_prefixes = _walk(strategy, max_blocks)[1]
    q, p = params.q, params.p
    return sum(q ** w.count("S") * p ** w.count("H") for w in open_prefixes)


def _cycles_of_length(strategy: Strategy, n: int) -> list[WeightedCycle]:
    if n < 1:
        raise DomainError(f"cycle length must be >= 1, got {n}")
    # every strategy needs exactly 2n - 1 draws for L = n (HM: one draw)
    bound = 2 * n - 1
    if bound > MAX_BLOCKS:
        raise RangeError(f"L = {n} needs {bound} draws, above the enumeration bound {MAX_BLOCKS}")
    return [c for c in enumerate_cycles(strategy, bound) if c.l == n]


def exact_pmf(strategy: Strategy, params: MinerParams, n: int) -> Real:
    """``P[L = n]`` summed over the enumerated cycles."""
    return sum((c.probability(params) for c in _cycles_of_length(strategy, n)), 0 * params.q)


def exact_conditional_z(strategy: Strategy, params: MinerParams, n: int) -> Real:
    """``E[Z | L = n]`` over all cycles of length n and all their flip patterns."""
    cycles = _cycles_of_length(strategy, n)
    mass = sum(c.probability(params) for c in cycles)
    if not mass:
        raise DomainError(f"L = {n} has probability zero at these parameters")
    return sum(c.probability(params) * c.expected_z(params.gamma) for c in cycles) / mass
