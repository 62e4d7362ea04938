"""Closed-form cycle laws and apparent hashrates for HM, SM, EFSM and LSM.

An attack cycle adds ``L`` blocks to the official chain, ``Z`` of which belong
to the attacker. The long-run apparent hashrate is ``E[Z] / E[L]``; a strategy
pays off when it exceeds the attacker's raw share ``q``.

Cycle-length PMFs and ``E[L]`` are rational in ``q`` and accept
``fractions.Fraction`` parameters for exact evaluation. Expressions involving
the Catalan series go through floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational, Real

from .catalan import catalan_number
from .errors import DomainError, NumericError


class Strategy(Enum):
    """Mining strategies. Definition order is the tie-break order."""

    HM = "hm"
    SM = "sm"
    EFSM = "efsm"
    LSM = "lsm"

    @property
    def label(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError(f"unknown strategy {text!r}; expected one of hm, sm, efsm, lsm") from None


ATTACK_STRATEGIES = (Strategy.SM, Strategy.EFSM, Strategy.LSM)


@dataclass(frozen=True)
class MinerParams:
    """Attacker share ``q`` (honest share ``p = 1 - q``) and connectivity ``gamma``."""

    q: Real
    gamma: Real = 0.0

    def __post_init__(self):
        if not (0 <= self.q < Fraction(1, 2)):
            raise DomainError(f"attacker share q must satisfy 0 <= q < 1/2, got {self.q}")
        if not (0 <= self.gamma <= 1):
            raise DomainError(f"connectivity gamma must lie in [0, 1], got {self.gamma}")

    @property
    def p(self) -> Real:
        return 1 - self.q


@dataclass(frozen=True)
class CycleLaw:
    strategy: Strategy
    params: MinerParams


@dataclass(frozen=True)
class HashrateBreakdown:
    expected_l: float
    expected_z: float
    apparent_hashrate: float


def _scaled_catalan(index: int, x: Real, power: int) -> Real:
    """``C_index * x**power``, exact for rational x and overflow-safe for floats."""
    c = catalan_number(index)
    if isinstance(x, Rational):
        return c * x**power
    if x == 0:
        return 0.0 if power > 0 else float(c)
    if index <= 500:
        return float(c) * x**power
    return math.exp(math.log(c) + power * math.log(x))


def cycle_length_pmf(law: CycleLaw, n: int) -> Real:
    """``P[L = n]`` for the strategy's attack cycle."""
    if n < 1:
        raise DomainError(f"cycle length must be >= 1, got {n}")
    strategy, p, q = law.strategy, law.params.p, law.params.q
    if strategy is Strategy.HM:
        return 1 if n == 1 else 0
    if strategy is Strategy.SM:
        if n == 1:
            return p
        if n == 2:
            return p * q + p * q * q
        # SS, a Dyck word of length 2(n-2), then H
        return p * q * q * _scaled_catalan(n - 2, p * q, n - 2)
    if strategy is Strategy.EFSM:
        # Dyck word of length 2(n-1), then H
        return p * _scaled_catalan(n - 1, p * q, n - 1)
    if strategy is Strategy.LSM:
        if n == 1:
            return p
        # S, Dyck word of length 2(n-2), H, one resolving block
        return _scaled_catalan(n - 2, p * q, n - 1)
    raise DomainError(f"unsupported strategy {strategy}")


def expected_cycle_length(law: CycleLaw) -> Real:
    strategy, p, q = law.strategy, law.params.p, law.params.q
    if strategy is Strategy.HM:
        return 1
    if strategy is Strategy.SM:
        return 1 + p * p * q / (p - q)
    if strategy is Strategy.EFSM:
        return p / (p - q)
    if strategy is Strategy.LSM:
        return (p - q + p * q) / (p - q)
    raise DomainError(f"unsupported strategy {strategy}")


def _tie_root(p: float, q: float, gamma: float) -> float:
    # sqrt(1 - 4(1-gamma)pq), using 1 - 4pq = (p-q)^2 to keep it exact at gamma = 0
    return math.sqrt((p - q) ** 2 + 4.0 * gamma * p * q)


def expected_attacker_blocks(law: CycleLaw) -> Real:
    """``E[Z]``, the attacker's expected number of official blocks per cycle.

    The stubborn strategies are written without the ``(1 - gamma) / gamma``
    factor. With ``x = (1 - gamma) p q`` and ``D = sqrt(1 - 4x)`` we have
    ``C(x) = 2 / (1 + D)``, ``1 - D^2 = 4 p q (1 - gamma)`` and
    ``D - (p - q) = 4 gamma p q / (D + p - q)``. Substituting,

        q/(p-q) - (1-gamma)/gamma * (1 - p C(x)) = 4 gamma p^2 q / ((p-q) (D+p-q)^2)

    which is regular on all of [0, 1] and vanishes at gamma = 0, the
    analytic limit. The lead-stubborn term splits the same way since
    ``(1-gamma)/gamma * (1 - p(1-gamma)C(x))`` equals the bracket above plus
    ``p (1-gamma) C(x)``.
    """
    strategy, params = law.strategy, law.params
    p, q, gamma = params.p, params.q, params.gamma
    if strategy is Strategy.HM:
        return q
    if strategy is Strategy.SM:
        # E[L] - (p + p^2 q + p^2 q (1 - gamma)) with the leading q factored out
        return q * (1 + p * p / (p - q) - p * p * (2 - gamma))
    p, q, gamma = float(p), float(q), float(gamma)
    d = _tie_root(p, q, gamma)
    efsm_z = 4.0 * gamma * p * p * q / ((p - q) * (d + p - q) ** 2)
    if strategy is Strategy.EFSM:
        return efsm_z
    if strategy is Strategy.LSM:
        return q * (p - q * q) / (p - q) + p * q * efsm_z - 2.0 * p * p * q * (1.0 - gamma) / (1.0 + d)
    raise DomainError(f"unsupported strategy {strategy}")


def apparent_hashrate(law: CycleLaw) -> HashrateBreakdown:
    """``E[L]``, ``E[Z]`` and their ratio.

    For SM the ratio carries denominator ``p^2 q + p - q``, i.e. ``(p - q) E[L]``.
    """
    el = float(expected_cycle_length(law))
    ez = float(expected_attacker_blocks(law))
    if law.strategy is Strategy.HM:
        return HashrateBreakdown(el, ez, float(law.params.q))
    return HashrateBreakdown(el, ez, ez / el)


def qtilde(strategy: Strategy, q: Real, gamma: Real = 0.0) -> float:
    """Shorthand for ``apparent_hashrate(...).apparent_hashrate``."""
    return apparent_hashrate(CycleLaw(strategy, MinerParams(q, gamma))).apparent_hashrate


def dominant_strategy(params: MinerParams) -> tuple[Strategy, dict[Strategy, float]]:
    """Most profitable strategy at ``params`` with all four apparent hashrates.

    Exact ties go to the earlier strategy in HM, SM, EFSM, LSM order.
    """
    values = {s: apparent_hashrate(CycleLaw(s, params)).apparent_hashrate for s in Strategy}
    best = Strategy.HM
    for s in Strategy:
        if values[s] > values[best]:
            best = s
    return best, values


# Probe interval for the threshold search; q = 0 and q = 1/2 are excluded.
_THRESHOLD_LO = 1e-9
_THRESHOLD_HI = 0.5 - 1e-9
_THRESHOLD_MAX_ITER = 200


def profitability_threshold(strategy: Strategy, gamma: float, tol: float = 1e-10) -> float:
    """Smallest attacker share at which ``strategy`` beats honest mining.

    Bisects the sign of ``qtilde(q) - q``. Returns 0.0 when the strategy is
    already ahead at the lower probe ``q = 1e-9``. Raises ``NumericError``
    when it never gets ahead below ``q = 1/2`` or the bisection stalls.
    """
    if strategy not in ATTACK_STRATEGIES:
        raise DomainError("threshold is only defined for SM, EFSM and LSM")
    if not 0 <= gamma <= 1:
        raise DomainError(f"connectivity gamma must lie in [0, 1], got {gamma}")
    if not tol > 0:
        raise DomainError("tolerance must be positive")

    def advantage(q: float) -> float:
        return qtilde(strategy, q, gamma) - q

    lo, hi = _THRESHOLD_LO, _THRESHOLD_HI
    if advantage(lo) > 0:
        return 0.0
    if advantage(hi) <= 0:
        raise NumericError(f"{strategy.label} never beats honest mining at gamma={gamma}")
    for _ in range(_THRESHOLD_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if advantage(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            root = 0.5 * (lo + hi)
            if abs(advantage(root)) <= tol:
                return root
        if hi - lo <= 4 * math.ulp(hi):
            break
    raise NumericError(f"threshold search for {strategy.label} at gamma={gamma} did not converge")
