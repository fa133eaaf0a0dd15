"""Corridor tiling instances, a row-graph solver, the binary-counter tile family
and the word encoding of tilings."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .automata import BudgetExceeded

FORALL = "A"
ROW_OPEN = "["
ROW_CLOSE = "]"
CELL_OPEN = "<"
CELL_CLOSE = ">"
MARKS = (FORALL, ROW_OPEN, ROW_CLOSE, CELL_OPEN, CELL_CLOSE)


class Tile(NamedTuple):
    top: int
    right: int
    bottom: int
    left: int


@dataclass(frozen=True)
class CorridorInstance:
    tiles: tuple
    top_left: int
    bottom_right: int
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "tiles", tuple(Tile(*t) for t in self.tiles))
        for idx in (self.top_left, self.bottom_right):
            if self.tiles and not 0 <= idx < len(self.tiles):
                raise ValueError(f"corner index {idx} out of range")
        if self.n < 1:
            raise ValueError("n must be at least 1")

    @property
    def width(self) -> int:
        return 2 ** self.n

    def colours(self) -> list[int]:
        return sorted({c for t in self.tiles for c in t})

    def tile_atom(self, idx: int) -> str:
        return f"t{idx}"

    def tile_atoms(self) -> tuple:
        return tuple(self.tile_atom(i) for i in range(len(self.tiles)))

    def digits(self) -> tuple:
        return tuple(range(self.n + 1))

    def sigma(self) -> tuple:
        """The instance alphabet: tiles, digits 0..n, then the five markers."""
        return self.tile_atoms() + self.digits() + MARKS

    def tile_of(self, atom) -> int | None:
        if isinstance(atom, str) and atom.startswith("t") and atom[1:].isdigit():
            idx = int(atom[1:])
            if idx < len(self.tiles):
                return idx
        return None

    def below(self, idx: int) -> list[int]:
        """Tiles whose top colour matches the bottom colour of tile ``idx``."""
        bottom = self.tiles[idx].bottom
        return [j for j, t in enumerate(self.tiles) if t.top == bottom]


Tiling = tuple  # tuple of rows, each a tuple of tile indices


class Check(NamedTuple):
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_valid_tiling(inst: CorridorInstance, tiling: Sequence[Sequence[int]]) -> Check:
    rows = [tuple(r) for r in tiling]
    if not rows or not rows[0]:
        return Check(False, "empty tiling")
    width = len(rows[0])
    tiles = inst.tiles
    for i, row in enumerate(rows, 1):
        if len(row) != width:
            return Check(False, f"row {i} has width {len(row)}, expected {width}")
        for j, t in enumerate(row, 1):
            if not 0 <= t < len(tiles):
                return Check(False, f"invalid tile index at ({i},{j})")
    for i, row in enumerate(rows, 1):
        for j in range(1, width):
            if tiles[row[j - 1]].right != tiles[row[j]].left:
                return Check(False, f"horizontal mismatch at ({i},{j})-({i},{j + 1})")
    for i in range(1, len(rows)):
        for j in range(width):
            if tiles[rows[i - 1][j]].bottom != tiles[rows[i][j]].top:
                return Check(False, f"vertical mismatch at ({i},{j + 1})-({i + 1},{j + 1})")
    if rows[0][0] != inst.top_left:
        return Check(False, "top-left corner is not the designated tile")
    if rows[-1][-1] != inst.bottom_right:
        return Check(False, "bottom-right corner is not the designated tile")
    return Check(True)


def horizontal_rows(inst: CorridorInstance, width: int, budget: int | None = None) -> list[tuple]:
    """All rows of the given width whose neighbours match, in lexicographic order."""
    by_left: dict[int, list[int]] = {}
    for i, t in enumerate(inst.tiles):
        by_left.setdefault(t.left, []).append(i)
    rows: list[tuple] = []

    def extend(prefix):
        if len(prefix) == width:
            rows.append(tuple(prefix))
            if budget is not None and len(rows) > budget:
                raise BudgetExceeded(f"more than {budget} horizontally valid rows")
            return
        for t in by_left.get(inst.tiles[prefix[-1]].right, ()):
            prefix.append(t)
            extend(prefix)
            prefix.pop()

    if width < 1:
        raise ValueError("width must be positive")
    for t in range(len(inst.tiles)):
        extend([t])
    return rows


class _RowGraph:
    def __init__(self, inst: CorridorInstance, width: int, budget: int | None):
        self.inst = inst
        self.rows = horizontal_rows(inst, width, budget)
        self.by_top: dict[tuple, list[tuple]] = {}
        for r in self.rows:
            self.by_top.setdefault(self.tops(r), []).append(r)

    def tops(self, row):
        return tuple(self.inst.tiles[t].top for t in row)

    def bottoms(self, row):
        return tuple(self.inst.tiles[t].bottom for t in row)

    def starts(self):
        return [r for r in self.rows if r[0] == self.inst.top_left]

    def is_last(self, row) -> bool:
        return row[-1] == self.inst.bottom_right

    def successors(self, row):
        return self.by_top.get(self.bottoms(row), [])


def solve_corridor(inst: CorridorInstance, width: int | None = None,
                   budget: int | None = 1_000_000) -> Tiling | None:
    """A shortest valid tiling of the given width (default 2^n), or None."""
    width = inst.width if width is None else width
    g = _RowGraph(inst, width, budget)
    parent: dict = {}
    queue = deque()
    for r in g.starts():
        parent[r] = None
        queue.append(r)
    while queue:
        row = queue.popleft()
        if g.is_last(row):
            path = [row]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return tuple(reversed(path))
        for nxt in g.successors(row):
            if nxt not in parent:
                parent[nxt] = row
                queue.append(nxt)
    return None


def enumerate_tilings(inst: CorridorInstance, width: int, max_height: int,
                      budget: int | None = 1_000_000) -> list[Tiling]:
    """Every valid tiling with at most ``max_height`` rows, ordered by height then rows."""
    if not inst.tiles:
        return []
    g = _RowGraph(inst, width, budget)
    found: list[Tiling] = []

    def walk(path):
        if g.is_last(path[-1]):
            found.append(tuple(path))
        if len(path) < max_height:
            for nxt in g.successors(path[-1]):
                path.append(nxt)
                walk(path)
                path.pop()

    for r in g.starts():
        walk([r])
    return sorted(found, key=lambda t: (len(t), t))


def monochrome_instance(n: int) -> CorridorInstance:
    return CorridorInstance((Tile(0, 0, 0, 0),), 0, 0, n)


def toy_instance() -> CorridorInstance:
    """Four tiles whose only tiling of width 2 is the 2x2 square [[0, 1], [2, 3]]."""
    return CorridorInstance(((0, 20, 30, 0), (0, 0, 31, 20), (30, 21, 0, 0), (31, 0, 0, 21)),
                            0, 3, 1)


# colours of the counter family
_NORTH, _WEST, _EAST, _ZERO_ROW, _LEFT, _RIGHT, _END = 9, 8, 3, 4, 5, 6, 7


def _carry(c: int, f: int) -> int:
    return 10 + 2 * c + f


def counter_instance(width: int) -> CorridorInstance:
    """Tile set whose only valid tiling of this width counts from 0 to 2^(width-2) - 1.

    Columns 1 and ``width`` are borders; the bit columns between them hold the
    counter, most significant bit first, read from the bottom colours. Each
    row adds one: the carry enters at the right border and moves left, while
    an "all ones so far" flag moves right and lets the bottom-right corner
    close the tiling once the counter is full.
    """
    if width < 3:
        raise ValueError("width must be at least 3")
    tiles = [
        Tile(_NORTH, _ZERO_ROW, _LEFT, _WEST),        # 0: top-left corner
        Tile(_NORTH, _ZERO_ROW, 0, _ZERO_ROW),         # 1: first-row bit
        Tile(_NORTH, _EAST, _RIGHT, _ZERO_ROW),       # 2: top-right corner
        Tile(_LEFT, _carry(0, 1), _LEFT, _WEST),      # 3: left border
    ]
    for b in (0, 1):
        for c in (0, 1):
            for f in (0, 1):
                nb = b ^ c
                tiles.append(Tile(b, _carry(c, f & nb), nb, _carry(b & c, f)))
    tiles.append(Tile(_RIGHT, _EAST, _RIGHT, _carry(1, 0)))  # right border
    tiles.append(Tile(_RIGHT, _EAST, _END, _carry(1, 1)))    # bottom-right corner
    n = max(1, (width - 1).bit_length())
    return CorridorInstance(tuple(tiles), 0, len(tiles) - 1, n)


def counter_values(inst: CorridorInstance, tiling: Tiling) -> list[int]:
    """Value held by each row's bit columns (bottom colours, MSB first)."""
    out = []
    for row in tiling:
        bits = [inst.tiles[t].bottom for t in row[1:-1]]
        out.append(int("".join(str(b) for b in bits), 2))
    return out


def comb_prime(i: int) -> tuple:
    word: tuple = (0,)
    for k in range(1, i + 1):
        word = word + (k,) + word
    return word


def comb(n: int) -> tuple:
    """The ruler word n, c', n of length 2^n + 1 (digits as ints)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return (n,) + comb_prime(n - 1) + (n,)


def digits_text(word: Sequence[int]) -> str:
    return "".join(str(d) for d in word)


def encode_cell(inst: CorridorInstance, tiling: Tiling, i: int, j: int) -> tuple:
    """Cell (i, j), 1-based: the comb split after its j-th digit around the tile."""
    c = comb(inst.n)
    return (CELL_OPEN,) + c[:j] + (inst.tile_atom(tiling[i - 1][j - 1]),) + c[j:] \
        + (FORALL, CELL_CLOSE)


def encode_row(inst: CorridorInstance, tiling: Tiling, i: int) -> tuple:
    out = [ROW_OPEN]
    for j in range(1, len(tiling[i - 1]) + 1):
        out.extend(encode_cell(inst, tiling, i, j))
    out.append(ROW_CLOSE)
    return tuple(out)


def encode_tiling(inst: CorridorInstance, tiling: Tiling) -> tuple:
    tiling = tuple(tuple(r) for r in tiling)
    for r in tiling:
        if len(r) != inst.width:
            raise ValueError(f"row width {len(r)} differs from 2^n = {inst.width}")
    out = [FORALL]
    for i in range(1, len(tiling) + 1):
        out.extend(encode_row(inst, tiling, i))
    return tuple(out)
