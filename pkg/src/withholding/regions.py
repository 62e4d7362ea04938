"""Dominance map over the (q, gamma) rectangle, with CSV and PPM writers."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .analytics import MinerParams, Strategy, dominant_strategy
from .errors import DomainError

ORDER = tuple(Strategy)
COLORS = {
    Strategy.HM: (255, 255, 255),
    Strategy.SM: (255, 0, 0),
    Strategy.EFSM: (0, 0, 255),
    Strategy.LSM: (0, 255, 0),
}
CSV_HEADER = ["q", "gamma", "dominant", "qtilde_hm", "qtilde_sm", "qtilde_efsm", "qtilde_lsm"]


@dataclass(frozen=True)
class RegionMap:
    """Grid of dominant strategies.

    ``dominant[i, j]`` is an index into :data:`ORDER` for ``gamma_axis[i]`` and
    ``q_axis[j]``; ``qtilde[i, j]`` holds the four apparent hashrates in that order.
    """

    q_axis: np.ndarray
    gamma_axis: np.ndarray
    dominant: np.ndarray
    qtilde: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.dominant.shape

    def strategy_at(self, i_gamma: int, j_q: int) -> Strategy:
        return ORDER[self.dominant[i_gamma, j_q]]

    def cells(self):
        """Yield ``(q, gamma, dominant, qtildes)`` row-major, gamma outer."""
        for i, g in enumerate(self.gamma_axis):
            for j, q in enumerate(self.q_axis):
                yield float(q), float(g), ORDER[self.dominant[i, j]], self.qtilde[i, j]


def compute_region_map(q_steps: int = 101, gamma_steps: int = 101, q_max: float = 0.499) -> RegionMap:
    if q_steps < 2 or gamma_steps < 2:
        raise DomainError("grid needs at least 2 steps per axis")
    if not 0 < q_max < 0.5:
        raise DomainError(f"q_max must lie in (0, 1/2), got {q_max}")
    q_axis = np.linspace(0.0, q_max, q_steps)
    gamma_axis = np.linspace(0.0, 1.0, gamma_steps)
    dominant = np.zeros((gamma_steps, q_steps), dtype=np.int8)
    qtilde = np.zeros((gamma_steps, q_steps, len(ORDER)))
    for i, g in enumerate(gamma_axis):
        for j, q in enumerate(q_axis):
            best, values = dominant_strategy(MinerParams(float(q), float(g)))
            dominant[i, j] = ORDER.index(best)
            qtilde[i, j] = [values[s] for s in ORDER]
    return RegionMap(q_axis, gamma_axis, dominant, qtilde)


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def write_region_csv(rmap: RegionMap, destination) -> None:
    """Write one row per cell; ``destination`` is a path or a text stream."""
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", newline="") as fh:
            write_region_csv(rmap, fh)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for q, g, best, values in rmap.cells():
        writer.writerow([_fmt(q), _fmt(g), best.label, *(_fmt(v) for v in values)])


def region_ppm_bytes(rmap: RegionMap) -> bytes:
    """Binary PPM with q increasing rightward and gamma increasing upward."""
    n_gamma, n_q = rmap.shape
    header = io.BytesIO()
    header.write(b"P6\n")
    header.write(b"# " + " ".join(f"{s.label}={n}" for s, n in
                                   zip(ORDER, ("white", "red", "blue", "green"))).encode() + b"\n")
    header.write(f"{n_q} {n_gamma}\n255\n".encode())
    palette = np.array([COLORS[s] for s in ORDER], dtype=np.uint8)
    raster = palette[rmap.dominant[::-1]]
    return header.getvalue() + raster.tobytes()


def write_region_image(rmap: RegionMap, destination) -> None:
    """Write the PPM raster; ``destination`` is a path or a binary stream."""
    data = region_ppm_bytes(rmap)
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(data)
    else:
        destination.write(data)


def read_ppm(data: bytes) -> tuple[int, int, np.ndarray]:
    """Parse a P6 image as written here; returns ``(width, height, pixels[h, w, 3])``."""
    lines = data.split(b"\n", 4)
    if lines[0] != b"P6":
        raise ValueError("not a binary PPM")
    body = [ln for ln in lines[1:] if not ln.startswith(b"#")]
    w, h = map(int, body[0].split())
    raster = data[-w * h * 3:]
    return w, h, np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3)
