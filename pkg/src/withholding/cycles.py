"""Fork-choice state machines for one attack cycle, vectorized over many cycles.

A cycle's state is the pair ``(s, h)``: attacker and honest blocks drawn so
far in the cycle. Each strategy's transition rule is chosen so that the set of
terminating draw sequences is exactly the cycle language of that strategy:

* SM: ``H`` | ``SHS`` | ``SHH`` | ``SS . dyck . H``. A lone lead of one
  after ``SH`` triggers a race decided by the next block. With a lead of two
  or more the attacker waits until an honest block cuts the lead to one,
  then publishes everything, so ``Z = L`` = attacker block count.
* EFSM: ``dyck . H``. The attacker only ever matches the public height and
  the cycle ends when honest miners get one block ahead.
* LSM: ``H`` | ``S . dyck . H . Y``. Once honest miners catch up to an equal
  height, one more block ``Y`` settles the race.
* HM: every block is its own cycle.

All cycles end either with the attacker's fork winning outright (``Z = L``)
or with the honest chain kept. In the second case honest blocks at heights
``2..L`` each built on the attacker's equal-height block with probability
gamma, giving ``L - 1`` adoption flips, and ``Z`` is the highest adopting
flip index (heights below the last adoption belong to the attacker). For SM
this reduces to the single ``SHH`` race flip.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .analytics import Strategy


def step(strategy: Strategy, s: np.ndarray, h: np.ndarray, attacker_block: np.ndarray):
    """Feed one block to each cycle in the batch.

    ``s`` and ``h`` are updated in place. Returns ``(done, length, attacker_wins)``;
    the last two are only meaningful where ``done`` is set.
    """
    a = attacker_block.astype(bool)
    ai = a.astype(s.dtype)
    if strategy is Strategy.HM:
        s += ai
        h += 1 - ai
        return np.ones_like(a), np.ones_like(s), a.copy()

    if strategy is Strategy.SM:
        race = (s == 1) & (h == 1)
        s += ai
        h += 1 - ai
        honest_first = (s == 0) & (h == 1)
        publish = ~a & (s >= 2) & (s - h == 1)
        done = race | honest_first | publish
        length = np.where(race, 2, np.where(publish, s, 1))
        wins = (race & a) | publish
        return done, length, wins

    if strategy is Strategy.EFSM:
        s += ai
        h += 1 - ai
        done = h == s + 1
        return done, h.copy(), np.zeros_like(a)

    if strategy is Strategy.LSM:
        tie = (s >= 1) & (s == h)
        length = np.where(tie, s + 1, 1)
        s += ai
        h += 1 - ai
        honest_first = (s == 0) & (h == 1)
        done = tie | honest_first
        return done, length, tie & a

    raise ValueError(f"unsupported strategy {strategy}")


def adoption_z(flips: Sequence[bool]) -> int:
    """Attacker blocks kept when the honest chain wins, given per-height adoption flips."""
    for i in range(len(flips), 0, -1):
        if flips[i - 1]:
            return i
    return 0


def expected_adoption_z(m, gamma: float):
    """Mean of :func:`adoption_z` over ``m`` independent flips with success ``gamma``.

    Equals ``m - sum_{j=1..m} (1 - gamma)^j``. Accepts scalars or arrays for ``m``.
    """
    m = np.asarray(m, dtype=float)
    if gamma == 0:
        return np.zeros_like(m)
    if gamma == 1:
        return m.copy()
    a = 1.0 - gamma
    return m + a * np.expm1(m * np.log1p(-gamma)) / gamma


def dyck_segment(strategy: Strategy, sequence: str) -> str | None:
    """Middle part of a cycle that must be a Dyck word, or None if the template has none."""
    n = len(sequence)
    if strategy is Strategy.SM and n >= 3 and sequence.startswith("SS"):
        return sequence[2:-1]
    if strategy is Strategy.EFSM and n >= 1:
        return sequence[:-1]
    if strategy is Strategy.LSM and n >= 3:
        return sequence[1:-2]
    return None
