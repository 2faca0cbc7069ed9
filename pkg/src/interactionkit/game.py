"""Cooperative games: value functions over coalitions, plus budget accounting.

Every game exposes ``n``, ``value(mask) -> float`` and the vectorised
``values(masks) -> ndarray``. Games are immutable once built; a
:class:`BudgetedOracle` is the single-owner mutable wrapper an estimator
talks to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .coalitions import (
    all_coalitions,
    check_coalition,
    check_players,
    from_bitstring,
    to_bitstring,
)
from .errors import BudgetExceededError, GameFormatError, ParameterError

# SOUM evaluation materialises a (chunk, D) containment matrix
_EVAL_CHUNK = 1 << 16


class Game(Protocol):
    n: int

    def value(self, mask: int) -> float: ...

    def values(self, masks: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class SoumGame:
    """Sum of unanimity models: ``v(S) = sum_d c_d [T_d subset of S]``."""

    n: int
    subsets: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        check_players(self.n)
        subsets = np.asarray(self.subsets, dtype=np.int64).reshape(-1)
        coefs = np.asarray(self.coefficients, dtype=np.float64).reshape(-1)
        if subsets.shape != coefs.shape:
            raise ParameterError("one coefficient per term subset is required")
        if subsets.size and (subsets.min() < 0 or (subsets >> self.n).any()):
            raise ParameterError(f"term subset outside players 0..{self.n - 1}")
        subsets.setflags(write=False)
        coefs.setflags(write=False)
        object.__setattr__(self, "subsets", subsets)
        object.__setattr__(self, "coefficients", coefs)

    @property
    def num_terms(self) -> int:
        return int(self.subsets.size)

    def value(self, mask: int) -> float:
        # same arithmetic as the batched path, so both agree to the last bit
        return float(self.values([check_coalition(mask, self.n)])[0])

    def values(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        out = np.empty(masks.size, dtype=np.float64)
        if not self.num_terms:
            out[:] = 0.0
            return out
        for lo in range(0, masks.size, _EVAL_CHUNK):
            chunk = masks[lo : lo + _EVAL_CHUNK]
            contained = (chunk[:, None] & self.subsets[None, :]) == self.subsets[None, :]
            # row-wise reduction: a row's sum does not depend on the batch size
            out[lo : lo + _EVAL_CHUNK] = np.where(contained, self.coefficients, 0.0).sum(axis=1)
        return out

    def terms(self) -> list[tuple[int, float]]:
        return [(int(s), float(c)) for s, c in zip(self.subsets, self.coefficients)]


@dataclass(frozen=True, eq=False)
class TabularGame:
    """Dense table of ``2**n`` coalition values indexed by mask."""

    n: int
    table: np.ndarray

    def __post_init__(self):
        check_players(self.n)
        table = np.array(self.table, dtype=np.float64).reshape(-1)
        if table.size != 1 << self.n:
            raise ParameterError(f"table needs exactly 2**{self.n} entries, got {table.size}")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def value(self, mask: int) -> float:
        return float(self.table[check_coalition(mask, self.n)])

    def values(self, masks) -> np.ndarray:
        return self.table[np.asarray(masks, dtype=np.int64)]

    @classmethod
    def from_game(cls, game) -> "TabularGame":
        """Enumerate any game into a table (``2**n`` evaluations)."""
        if game.n > 24:
            raise ParameterError(f"refusing to tabulate 2**{game.n} coalitions")
        return cls(game.n, game.values(all_coalitions(game.n)))

    @classmethod
    def from_function(cls, n: int, fn: Callable[[int], float]) -> "TabularGame":
        n = check_players(n)
        return cls(n, [fn(m) for m in range(1 << n)])


@dataclass(eq=False)
class BudgetedOracle:
    """Counts every evaluation of ``game`` and refuses to exceed ``budget``."""

    game: Game
    budget: int
    calls_used: int = field(default=0)

    def __post_init__(self):
        if int(self.budget) < 0:
            raise ParameterError(f"budget must be non-negative, got {self.budget}")
        self.budget = int(self.budget)

    @property
    def n(self) -> int:
        return self.game.n

    @property
    def remaining(self) -> int:
        return self.budget - self.calls_used

    def value(self, mask: int) -> float:
        if self.calls_used >= self.budget:
            raise BudgetExceededError(
                f"budget of {self.budget} evaluations exhausted"
            )
        v = self.game.value(mask)
        self.calls_used += 1
        return v

    __call__ = value

    def values(self, masks) -> np.ndarray:
        """Evaluate a batch; all-or-nothing with respect to the budget."""
        masks = np.asarray(masks, dtype=np.int64).reshape(-1)
        if masks.size > self.remaining:
            raise BudgetExceededError(
                f"batch of {masks.size} evaluations exceeds the {self.remaining} remaining"
            )
        out = self.game.values(masks)
        self.calls_used += int(masks.size)
        return out


def soum_generate(n: int, num_terms: int, seed: int) -> SoumGame:
    """Draw ``num_terms`` subsets uniformly from the power set (empty set and N
    included) with coefficients uniform on [0, 1)."""
    n = check_players(n)
    if num_terms < 0:
        raise ParameterError(f"num_terms must be non-negative, got {num_terms}")
    rng = np.random.default_rng(seed)
    subsets = rng.integers(0, 1 << n, size=num_terms, dtype=np.int64)
    coefficients = rng.random(num_terms)
    return SoumGame(n, subsets, coefficients)


def _read_header(lines: list[str], path) -> int:
    if not lines:
        raise GameFormatError(f"{path}: empty file")
    head = lines[0].strip()
    if not head.startswith("n="):
        raise GameFormatError(f"{path}: malformed header {head!r}, expected 'n=<int>'")
    try:
        n = int(head[2:])
    except ValueError:
        raise GameFormatError(f"{path}: malformed header {head!r}") from None
    try:
        return check_players(n)
    except ParameterError as exc:
        raise GameFormatError(f"{path}: {exc}") from None


def _parse_rows(lines: list[str], n: int, path) -> list[tuple[int, float]]:
    rows = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise GameFormatError(f"{path}:{lineno}: expected '<bitstring>,<real>'")
        bits, num = parts[0].strip(), parts[1].strip()
        if len(bits) != n or any(c not in "01" for c in bits):
            raise GameFormatError(f"{path}:{lineno}: bad coalition {bits!r} for n={n}")
        try:
            val = float(num)
        except ValueError:
            raise GameFormatError(f"{path}:{lineno}: unparsable real {num!r}") from None
        if not math.isfinite(val):
            raise GameFormatError(f"{path}:{lineno}: non-finite value {num!r}")
        rows.append((from_bitstring(bits), val))
    return rows


def tabular_load(path) -> TabularGame:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    n = _read_header(lines, path)
    rows = _parse_rows(lines, n, path)
    table = np.full(1 << n, np.nan)
    seen = np.zeros(1 << n, dtype=bool)
    for mask, val in rows:
        if seen[mask]:
            raise GameFormatError(f"{path}: duplicate coalition {to_bitstring(mask, n)}")
        seen[mask] = True
        table[mask] = val
    if len(rows) != 1 << n:
        raise GameFormatError(
            f"{path}: incomplete table, {len(rows)} rows for 2**{n} = {1 << n} coalitions"
        )
    return TabularGame(n, table)


def tabular_dump(game, path) -> None:
    """Write all ``2**n`` values; ``repr`` floats make the round trip exact."""
    table = game.table if isinstance(game, TabularGame) else TabularGame.from_game(game).table
    n = game.n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={n}\n")
        for mask in range(1 << n):
            fh.write(f"{to_bitstring(mask, n)},{float(table[mask])!r}\n")


def soum_load(path) -> SoumGame:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    n = _read_header(lines, path)
    rows = _parse_rows(lines, n, path)
    return SoumGame(n, [m for m, _ in rows], [c for _, c in rows])


def soum_dump(game: SoumGame, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={game.n}\n")
        for mask, coef in game.terms():
            fh.write(f"{to_bitstring(mask, game.n)},{coef!r}\n")


def load_game(path, fmt: str | None = None):
    """Load a SOUM file (``.soum`` or ``fmt='soum'``) or a tabular game."""
    if fmt is None:
        fmt = "soum" if str(path).endswith(".soum") else "tabular"
    if fmt == "soum":
        return soum_load(path)
    if fmt == "tabular":
        return tabular_load(path)
    raise ParameterError(f"unknown game format {fmt!r}")


def derive_seed(master_seed: int, run: int) -> int:
    """Independent 64-bit stream seed for run ``run`` of a sweep.

    Mixes ``(master_seed, run)`` through numpy's ``SeedSequence`` hash, so
    nearby run indices yield unrelated generator states.
    """
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(run)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])
