"""Seeded Monte Carlo engine for attack cycles.

Cycles are simulated in fixed-size chunks. Chunk ``i`` draws from the
sub-stream ``(seed, i)``, and chunk statistics are merged in chunk order, so
a report depends only on ``(strategy, params, cycles, seed, mode)``, never
on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .analytics import MinerParams, Strategy
from .cycles import adoption_z, expected_adoption_z, step
from .errors import DomainError

SAMPLED_Z = "sampled-z"
EXPECTED_Z = "expected-z"
MODES = (SAMPLED_Z, EXPECTED_Z)

CHUNK_SIZE = 1 << 16
_SEED_LIMIT = 1 << 64


@dataclass(frozen=True)
class RngStream:
    """Independent random stream keyed by a 64-bit root seed and a sub-stream label."""

    seed: int
    label: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed < _SEED_LIMIT:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.label,))
        object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(ss)))

    def letters(self, n: int, q: float) -> np.ndarray:
        """``n`` block discoveries; True means the attacker found the block."""
        return self._gen.random(n) < q

    def flips(self, n: int, gamma: float) -> np.ndarray:
        """``n`` adoption coin flips; True means the honest block built on the attacker's."""
        return self._gen.random(n) < gamma


class ScriptedDraws:
    """Replays a fixed block sequence and adoption flips in place of a random stream."""

    def __init__(self, letters: str, flips: Sequence[bool] = ()):
        self._letters = [c == "S" for c in letters.upper()]
        if any(c not in "SH" for c in letters.upper()):
            raise ValueError(f"scripted letters must be S or H, got {letters!r}")
        self._flips = [bool(f) for f in flips]

    def letters(self, n: int, q: float) -> np.ndarray:
        if n > len(self._letters):
            raise ValueError("scripted block sequence exhausted")
        out, self._letters = self._letters[:n], self._letters[n:]
        return np.array(out, dtype=bool)

    def flips(self, n: int, gamma: float) -> np.ndarray:
        if n > len(self._flips):
            raise ValueError("scripted adoption flips exhausted")
        out, self._flips = self._flips[:n], self._flips[n:]
        return np.array(out, dtype=bool)

    @property
    def remaining(self) -> tuple[int, int]:
        return len(self._letters), len(self._flips)


@dataclass(frozen=True)
class CycleOutcome:
    l: int
    z: float
    sequence: str | None = None


def _check(params: MinerParams, mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    if not params.q > 0:
        raise DomainError("simulation needs a positive attacker share q")


def simulate_cycle(strategy: Strategy, params: MinerParams, rng, mode: str = SAMPLED_Z,
                   record: bool = True) -> CycleOutcome:
    """Run one attack cycle, drawing blocks (and flips) from ``rng``.

    ``rng`` is an :class:`RngStream` or a :class:`ScriptedDraws`.
    """
    _check(params, mode)
    q, gamma = float(params.q), float(params.gamma)
    s = np.zeros(1, dtype=np.int64)
    h = np.zeros(1, dtype=np.int64)
    letters = []
    while True:
        a = rng.letters(1, q)
        letters.append("S" if a[0] else "H")
        done, length, wins = step(strategy, s, h, a)
        if done[0]:
            break
    l = int(length[0])
    if wins[0]:
        z = float(l)
    elif mode == SAMPLED_Z:
        z = float(adoption_z(rng.flips(l - 1, gamma)))
    else:
        z = float(expected_adoption_z(l - 1, gamma))
    return CycleOutcome(l, z, "".join(letters) if record else None)


def simulate_batch(strategy: Strategy, params: MinerParams, n: int, rng: RngStream,
                   mode: str = SAMPLED_Z) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``n`` independent cycles; returns arrays ``(l, z)``.

    All block draws happen first (one per still-running cycle per round),
    then all adoption flips, in cycle order.
    """
    _check(params, mode)
    q, gamma = float(params.q), float(params.gamma)
    out_l = np.zeros(n, dtype=np.int64)
    out_win = np.zeros(n, dtype=bool)
    idx = np.arange(n)
    s = np.zeros(n, dtype=np.int64)
    h = np.zeros(n, dtype=np.int64)
    while idx.size:
        done, length, wins = step(strategy, s, h, rng.letters(idx.size, q))
        fin = idx[done]
        out_l[fin] = length[done]
        out_win[fin] = wins[done]
        keep = ~done
        idx, s, h = idx[keep], s[keep], h[keep]

    z = out_l.astype(float)
    lost = ~out_win
    m = out_l[lost] - 1
    if mode == EXPECTED_Z:
        z[lost] = expected_adoption_z(m, gamma)
    else:
        z[lost] = _sampled_adoption_z(m, rng.flips(int(m.sum()), gamma))
    return out_l, z


def _sampled_adoption_z(m: np.ndarray, flips: np.ndarray) -> np.ndarray:
    """Vectorized :func:`adoption_z` over consecutive flip segments of lengths ``m``."""
    z = np.zeros(m.size, dtype=float)
    has = m > 0
    if not has.any():
        return z
    starts = np.concatenate(([0], np.cumsum(m)[:-1]))
    # 1-based position of each flip inside its segment
    pos = np.arange(flips.size) - np.repeat(starts, m) + 1
    score = np.where(flips, pos, 0)
    z[has] = np.maximum.reduceat(score, starts[has])
    return z


@dataclass
class _Moments:
    n: int
    mean_l: float
    mean_z: float
    m2_l: float
    m2_z: float
    c_lz: float

    @classmethod
    def of(cls, l: np.ndarray, z: np.ndarray) -> "_Moments":
        lf = l.astype(float)
        ml, mz = lf.mean(), z.mean()
        dl, dz = lf - ml, z - mz
        return cls(l.size, ml, mz, float(dl @ dl), float(dz @ dz), float(dl @ dz))

    def merge(self, o: "_Moments") -> "_Moments":
        n = self.n + o.n
        dl, dz = o.mean_l - self.mean_l, o.mean_z - self.mean_z
        w = self.n * o.n / n
        return _Moments(
            n,
            self.mean_l + dl * o.n / n,
            self.mean_z + dz * o.n / n,
            self.m2_l + o.m2_l + dl * dl * w,
            self.m2_z + o.m2_z + dz * dz * w,
            self.c_lz + o.c_lz + dl * dz * w,
        )


@dataclass(frozen=True)
class SimulationReport:
    strategy: Strategy
    params: MinerParams
    cycles: int
    seed: int
    mode: str
    mean_l: float
    mean_z: float
    q_tilde_hat: float
    stderr_l: float
    stderr_z: float
    stderr_q_tilde: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["strategy"] = self.strategy.value
        d.pop("params")
        return {"strategy": d.pop("strategy"), "q": float(self.params.q),
                "gamma": float(self.params.gamma), **d}


def _chunks(cycles: int, chunk_size: int):
    return [(i, min(chunk_size, cycles - start)) for i, start in enumerate(range(0, cycles, chunk_size))]


def run_simulation(strategy: Strategy, params: MinerParams, cycles: int, seed: int,
                   mode: str = EXPECTED_Z, workers: int = 1,
                   chunk_size: int = CHUNK_SIZE) -> SimulationReport:
    """Estimate ``E[L]``, ``E[Z]`` and the apparent hashrate from ``cycles`` cycles.

    The hashrate is the ratio estimator ``sum z / sum l`` with a delta-method
    standard error.
    """
    if cycles < 1:
        raise DomainError("need at least one cycle")
    _check(params, mode)

    def run(chunk):
        label, size = chunk
        return _Moments.of(*simulate_batch(strategy, params, size, RngStream(seed, label), mode))

    chunks = _chunks(cycles, chunk_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    mom = parts[0]
    for part in parts[1:]:
        mom = mom.merge(part)

    n = mom.n
    dof = max(n - 1, 1)
    var_l, var_z, cov = mom.m2_l / dof, mom.m2_z / dof, mom.c_lz / dof
    ratio = mom.mean_z / mom.mean_l
    var_ratio = max(var_z - 2 * ratio * cov + ratio * ratio * var_l, 0.0) / n / mom.mean_l**2
    return SimulationReport(
        strategy=strategy,
        params=params,
        cycles=n,
        seed=seed,
        mode=mode,
        mean_l=mom.mean_l,
        mean_z=mom.mean_z,
        q_tilde_hat=ratio,
        stderr_l=math.sqrt(var_l / n),
        stderr_z=math.sqrt(var_z / n),
        stderr_q_tilde=math.sqrt(var_ratio),
    )


def sample_cycles(strategy: Strategy, params: MinerParams, cycles: int, seed: int,
                  mode: str = SAMPLED_Z, chunk_size: int = CHUNK_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Per-cycle ``(l, z)`` arrays drawn from the same streams as :func:`run_simulation`."""
    ls, zs = [], []
    for label, size in _chunks(cycles, chunk_size):
        l, z = simulate_batch(strategy, params, size, RngStream(seed, label), mode)
        ls.append(l)
        zs.append(z)
    return np.concatenate(ls), np.concatenate(zs)
