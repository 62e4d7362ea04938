"""Catalan numbers, Dyck words over the {S, H} alphabet, and the Catalan series.

Block sequences are plain strings: ``"S"`` is a block found by the attacker,
``"H"`` one found by the honest network. Read as brackets (S = "(", H = ")"),
the cycles of the withholding strategies are built around Dyck words.
"""

from __future__ import annotations

import functools
import math

from .errors import DomainError, RangeError

ATTACKER = "S"
HONEST = "H"

#: Largest index accepted by :func:`catalan_number`.
CATALAN_CAP = 10_000
#: Largest half-length accepted by :func:`enumerate_dyck_words` by default.
DYCK_ENUMERATION_CAP = 12

# Below this argument the Catalan series is summed directly.
_SERIES_SWITCH = 1e-4
_SERIES_TERMS = 8


def check_sequence(w: str) -> str:
    """Return ``w`` unchanged, raising ``ValueError`` on letters other than S/H."""
    bad = set(w) - {ATTACKER, HONEST}
    if bad:
        raise ValueError(f"block sequence may only contain 'S' and 'H', got {sorted(bad)}")
    return w


@functools.lru_cache(maxsize=4096, typed=True)
def catalan_number(n: int) -> int:
    """Exact n-th Catalan number ``(2n)! / (n! (n+1)!)``."""
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError("catalan index must be an int")
    if n < 0:
        raise DomainError(f"catalan index must be nonnegative, got {n}")
    if n > CATALAN_CAP:
        raise RangeError(f"catalan index {n} exceeds cap {CATALAN_CAP}")
    return math.comb(2 * n, n) // (n + 1)


def catalan_gf(x: float) -> float:
    """Evaluate the Catalan generating series ``C(x) = sum C_k x^k`` on [0, 1/4].

    Equivalent to ``(1 - sqrt(1 - 4x)) / (2x)``, with value 1 at x = 0.
    """
    if not 0.0 <= x <= 0.25:
        raise DomainError(f"catalan_gf needs 0 <= x <= 1/4, got {x}")
    if x < _SERIES_SWITCH:
        # 8 terms leave a remainder below C_8 * 1e-32
        total = 0.0
        for k in reversed(range(_SERIES_TERMS)):
            total = total * x + catalan_number(k)
        return total
    # rationalized closed form, no subtraction of nearly equal terms
    return 2.0 / (1.0 + math.sqrt(1.0 - 4.0 * x))


def is_dyck_word(w: str) -> bool:
    """True when every prefix of ``w`` has at least as many S as H and the totals match."""
    depth = 0
    for letter in check_sequence(w):
        depth += 1 if letter == ATTACKER else -1
        if depth < 0:
            return False
    return depth == 0


def enumerate_dyck_words(n: int, cap: int = DYCK_ENUMERATION_CAP) -> list[str]:
    """All Dyck words of length 2n in lexicographic order with S < H."""
    if n < 0:
        raise DomainError(f"half-length must be nonnegative, got {n}")
    if n > cap:
        raise RangeError(f"half-length {n} exceeds enumeration cap {cap}")

    out: list[str] = []
    buf: list[str] = []

    def extend(opened: int, closed: int) -> None:
        if closed == n:
            out.append("".join(buf))
            return
        if opened < n:
            buf.append(ATTACKER)
            extend(opened + 1, closed)
            buf.pop()
        if closed < opened:
            buf.append(HONEST)
            extend(opened, closed + 1)
            buf.pop()

    extend(0, 0)
    return out
