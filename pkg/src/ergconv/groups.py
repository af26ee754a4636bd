"""Discrete group models: finite Cayley tables, integer lattices and free groups.

Elements are plain hashable Python values so that measures and vectors can be
stored in dicts:

* finite group of order n: an ``int`` index in ``range(n)``
* lattice Z^d: a ``tuple`` of ``d`` ints
* free group F_k: a reduced ``tuple`` of letter codes, ``2*i`` for the
  generator x_i and ``2*i + 1`` for its inverse (generators numbered from 1).
  The inverse of a letter is ``c ^ 1`` and the integer order of codes is the
  letter order x1 < x1^-1 < x2 < ...  Signed notation (``+i`` / ``-i``) is
  accepted by :func:`word`.  Codes avoid -1, whose hash equals that of -2 and
  would make dicts of long words collide.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import limits
from .errors import StructuralError

FINITE, LATTICE, FREE = "finite", "lattice", "free"


@dataclass(frozen=True)
class GroupHandle:
    kind: str
    label: str = ""
    table: tuple = ()
    rank: int = 0
    _np_table: np.ndarray | None = field(default=None, compare=False, repr=False)

    # ---- construction -------------------------------------------------
    def __post_init__(self):
        if self.kind == FINITE:
            arr = np.asarray(self.table, dtype=np.int64)
            object.__setattr__(self, "_np_table", arr)
        elif self.kind in (LATTICE, FREE):
            if self.rank < 1:
                raise StructuralError(f"{self.kind} rank must be >= 1, got {self.rank}")
        else:
            raise StructuralError(f"unknown group model {self.kind!r}")

    @property
    def order(self) -> int | None:
        return len(self.table) if self.kind == FINITE else None

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @cached_property
    def identity(self):
        if self.kind == FINITE:
            n = len(self.table)
            row0 = self._np_table
            for e in range(n):
                if np.array_equal(row0[e], np.arange(n)):
                    return e
            raise StructuralError("table has no identity")
        if self.kind == LATTICE:
            return (0,) * self.rank
        return ()

    @cached_property
    def _inverses(self) -> tuple:
        t = self._np_table
        e = self.identity
        inv = []
        for a in range(len(self.table)):
            hits = np.nonzero(t[a] == e)[0]
            if len(hits) != 1:
                raise StructuralError(f"element {a} has no unique inverse")
            inv.append(int(hits[0]))
        return tuple(inv)

    @cached_property
    def is_abelian(self) -> bool:
        if self.kind == FINITE:
            return bool(np.array_equal(self._np_table, self._np_table.T))
        if self.kind == LATTICE:
            return True
        return False

    # ---- element arithmetic -------------------------------------------
    def _mul(self, a, b):
        """Unchecked product used by inner loops."""
        if self.kind == FINITE:
            return self.table[a][b]
        if self.kind == LATTICE:
            return tuple(x + y for x, y in zip(a, b))
        return _free_mul(a, b)

    def _inv(self, a):
        if self.kind == FINITE:
            return self._inverses[a]
        if self.kind == LATTICE:
            return tuple(-x for x in a)
        return tuple(x ^ 1 for x in reversed(a))

    def mul(self, a, b):
        self.check(a)
        self.check(b)
        return self._mul(a, b)

    def inverse(self, a):
        self.check(a)
        return self._inv(a)

    def check(self, a) -> None:
        if self.kind == FINITE:
            if not isinstance(a, (int, np.integer)) or not 0 <= a < len(self.table):
                raise StructuralError(f"{a!r} is not an element of {self.label or 'finite group'}")
        elif self.kind == LATTICE:
            if not isinstance(a, tuple) or len(a) != self.rank:
                raise StructuralError(f"{a!r} is not a vector of length {self.rank}")
        else:
            if not isinstance(a, tuple):
                raise StructuralError(f"{a!r} is not a free word")
            for i, x in enumerate(a):
                if not isinstance(x, (int, np.integer)) or not 2 <= x <= 2 * self.rank + 1:
                    raise StructuralError(f"letter code {x!r} outside F_{self.rank}")
                if i and a[i - 1] == x ^ 1:
                    raise StructuralError(f"word {a!r} is not reduced")

    def length(self, a) -> int:
        """Word length for free groups, l1 norm for lattices, 0/1 for finite."""
        if self.kind == FINITE:
            return 0 if a == self.identity else 1
        if self.kind == LATTICE:
            return sum(abs(x) for x in a)
        return len(a)

    def sort_key(self, a):
        """Length-lexicographic key; the identity always sorts first."""
        if self.kind == FINITE:
            return (0 if a == self.identity else 1, a)
        if self.kind == LATTICE:
            return (sum(abs(x) for x in a), a)
        return (len(a), a)

    def sorted(self, elements: Iterable) -> list:
        return sorted(elements, key=self.sort_key)

    def standard_generators(self) -> list:
        if self.kind == FINITE:
            return [a for a in range(len(self.table)) if a != self.identity]
        if self.kind == LATTICE:
            return [tuple(1 if j == i else 0 for j in range(self.rank)) for i in range(self.rank)]
        return [(2 * i,) for i in range(1, self.rank + 1)]

    def elements(self) -> list:
        if self.kind != FINITE:
            raise StructuralError("only finite groups can list their elements")
        return list(range(len(self.table)))

    # ---- text encoding -------------------------------------------------
    def format(self, a) -> str:
        if self.kind == FINITE:
            return str(a)
        if self.kind == LATTICE:
            return "[" + ",".join(map(str, a)) + "]"
        if not a:
            return "e"
        return " ".join(f"x{x >> 1}" + ("^-1" if x & 1 else "") for x in a)

    def to_json(self, a):
        if self.kind == FINITE:
            return int(a)
        if self.kind == LATTICE:
            return list(a)
        return self.format(a)

    def parse(self, obj):
        """Decode a JSON element; free words are reduced on the way in."""
        if self.kind == FINITE:
            if isinstance(obj, bool) or not isinstance(obj, (int, np.integer)):
                raise StructuralError(f"finite elements are indices, got {obj!r}")
            a = int(obj)
        elif self.kind == LATTICE:
            if isinstance(obj, (int, np.integer)) and self.rank == 1:
                a = (int(obj),)
            elif isinstance(obj, (list, tuple)) and all(isinstance(x, (int, np.integer)) for x in obj):
                a = tuple(int(x) for x in obj)
            else:
                raise StructuralError(f"lattice elements are integer arrays, got {obj!r}")
        else:
            if not isinstance(obj, str):
                raise StructuralError(f"free words are strings, got {obj!r}")
            a = parse_word(obj)
        self.check(a)
        return a

    def to_json_spec(self) -> dict:
        if self.kind == FINITE:
            return {"type": "finite_cayley", "table": [list(r) for r in self.table]}
        if self.kind == LATTICE:
            return {"type": "lattice", "d": self.rank}
        return {"type": "free", "k": self.rank}


# ---- free words -----------------------------------------------------------

def letter(i: int, inverse: bool = False) -> int:
    """Code of x_i or x_i^-1."""
    if i < 1:
        raise StructuralError(f"generators are numbered from 1, got {i}")
    return 2 * i + bool(inverse)


def word(*signed: int) -> tuple:
    """Reduced word from signed letters: ``word(1, -2)`` is x1 x2^-1."""
    for x in signed:
        if x == 0:
            raise StructuralError("0 is not a letter")
    return reduce_word(letter(abs(x), x < 0) for x in signed)


def signed_letters(a: tuple) -> tuple:
    """Inverse of :func:`word`."""
    return tuple(-(x >> 1) if x & 1 else x >> 1 for x in a)


def _free_mul(a: tuple, b: tuple) -> tuple:
    i, n, la = 0, min(len(a), len(b)), len(a)
    while i < n and a[la - 1 - i] == b[i] ^ 1:
        i += 1
    return a[: la - i] + b[i:]


def reduce_word(letters: Iterable[int]) -> tuple:
    """Cancel adjacent inverse pairs in a sequence of letter codes."""
    out: list[int] = []
    for x in letters:
        if out and out[-1] == x ^ 1:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


_TOKEN = re.compile(r"^x(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str) -> tuple:
    """Parse ``"x1 x2^-1 x3^2"``; ``"e"`` or ``""`` is the identity."""
    letters: list[int] = []
    for tok in text.replace("*", " ").split():
        if tok in ("e", "1"):
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise StructuralError(f"bad token {tok!r} in word {text!r}")
        gen, exp = int(m.group(1)), int(m.group(2) or 1)
        if gen < 1:
            raise StructuralError(f"generators are numbered from 1: {tok!r}")
        letters.extend([letter(gen, exp < 0)] * abs(exp))
    return reduce_word(letters)


# ---- constructors ---------------------------------------------------------

def finite_cayley(table: Sequence[Sequence[int]], label: str = "") -> GroupHandle:
    """Build and validate a finite group from its multiplication table."""
    arr = np.asarray(table, dtype=np.int64)
    n = arr.shape[0] if arr.ndim == 2 else 0
    if arr.ndim != 2 or arr.shape != (n, n) or n == 0:
        raise StructuralError("multiplication table must be a nonempty square array")
    full = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(arr[i]), full) or not np.array_equal(np.sort(arr[:, i]), full):
            raise StructuralError(f"row/column {i} is not a permutation")
    g = GroupHandle(FINITE, label or f"finite group of order {n}", tuple(tuple(int(x) for x in r) for r in arr))
    g.identity  # noqa: B018  raises if absent
    g._inverses  # noqa: B018
    if n <= 64:
        lhs = arr[arr]  # lhs[a, b, c] = (ab)c
        rhs = arr[:, arr]  # rhs[a, b, c] = a(bc)
        if not np.array_equal(lhs, rhs):
            raise StructuralError("multiplication table is not associative")
    return g


def cyclic(n: int) -> GroupHandle:
    if n < 1:
        raise StructuralError("cyclic order must be >= 1")
    idx = np.arange(n)
    return finite_cayley((idx[:, None] + idx[None, :]) % n, label=f"Z_{n}")


def abelian(*orders: int) -> GroupHandle:
    """Direct product of cyclic groups, elements in mixed-radix order."""
    if not orders or any(o < 1 for o in orders):
        raise StructuralError("orders must be positive")
    tuples = list(itertools.product(*[range(o) for o in orders]))
    index = {t: i for i, t in enumerate(tuples)}
    table = [[index[tuple((x + y) % o for x, y, o in zip(s, t, orders))] for t in tuples] for s in tuples]
    return finite_cayley(table, label=" x ".join(f"Z_{o}" for o in orders))


def dihedral(n: int) -> GroupHandle:
    """Symmetries of the n-gon; r^i is index i and s r^i is index n + i."""
    def mul(a, b):
        fa, ia = divmod(a, n)
        fb, ib = divmod(b, n)
        # (s^fa r^ia)(s^fb r^ib) = s^(fa+fb) r^((-1)^fb ia + ib)
        sign = -1 if fb else 1
        return ((fa + fb) % 2) * n + (sign * ia + ib) % n

    table = [[mul(a, b) for b in range(2 * n)] for a in range(2 * n)]
    return finite_cayley(table, label=f"D_{n}")


def lattice(d: int) -> GroupHandle:
    return GroupHandle(LATTICE, f"Z^{d}" if d > 1 else "Z", rank=d)


def free(k: int) -> GroupHandle:
    return GroupHandle(FREE, f"F_{k}", rank=k)


def from_spec(spec: dict) -> GroupHandle:
    """Decode the JSON group block."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise StructuralError("group block needs a 'type'")
    t = spec["type"]
    try:
        if t == "cyclic":
            return cyclic(int(spec["n"]))
        if t == "abelian":
            return abelian(*[int(o) for o in spec["orders"]])
        if t == "dihedral":
            return dihedral(int(spec["n"]))
        if t == "finite_cayley":
            return finite_cayley(spec["table"], spec.get("label", ""))
        if t == "lattice":
            return lattice(int(spec["d"]))
        if t == "free":
            return free(int(spec["k"]))
    except KeyError as exc:
        raise StructuralError(f"group block of type {t!r} is missing {exc}") from None
    raise StructuralError(f"unknown group type {t!r}")


# ---- structural queries ---------------------------------------------------

@dataclass(frozen=True)
class SubgroupInfo:
    generators: tuple
    is_finite: bool
    is_trivial: bool
    amenable: str  # "yes" | "no" | "unknown"
    finite_elements: tuple | None = None
    reason: str = ""


def generated_subgroup(g: GroupHandle, gens: Sequence, cap: int = 100_000) -> SubgroupInfo:
    """The subgroup generated by ``gens`` (taken to be trivial when empty)."""
    gens = tuple(gens)
    for a in gens:
        g.check(a)
    e = g.identity
    if g.kind == FINITE:
        seen = {e}
        queue = deque([e])
        steps = [a for a in gens] + [g._inv(a) for a in gens]
        while queue:
            x = queue.popleft()
            for s in steps:
                y = g._mul(x, s)
                if y not in seen:
                    seen.add(y)
                    if len(seen) > cap or len(seen) > len(g.table):
                        raise StructuralError("closure exceeded its cap; table is inconsistent")
                    queue.append(y)
        elems = tuple(g.sorted(seen))
        return SubgroupInfo(gens, True, len(elems) == 1, "yes", elems, "finite groups are amenable")
    nontrivial = [a for a in gens if a != e]
    if not nontrivial:
        return SubgroupInfo(gens, True, True, "yes", (e,), "trivial subgroup")
    if g.kind == LATTICE:
        return SubgroupInfo(gens, False, False, "yes", None, "abelian groups are amenable")
    # Subgroups of a free group are free; two elements commute exactly when they
    # are powers of a common element, so pairwise commutation decides whether the
    # subgroup is cyclic (amenable) or contains a free subgroup of rank 2.
    for a, b in itertools.combinations(nontrivial, 2):
        if _free_mul(a, b) != _free_mul(b, a):
            return SubgroupInfo(
                gens, False, False, "no",
                None, f"{g.format(a)} and {g.format(b)} do not commute; they generate a free group of rank 2",
            )
    return SubgroupInfo(gens, False, False, "yes", None, "generators pairwise commute, so the subgroup is infinite cyclic")


def ball(g: GroupHandle, radius: int, gens: Sequence | None = None, max_size: int | None = None) -> list:
    """All products of at most ``radius`` factors from gens and their inverses."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    gens = g.standard_generators() if gens is None else list(gens)
    for a in gens:
        g.check(a)
    cap = limits.max_atoms() if max_size is None else max_size
    steps = list(dict.fromkeys(gens + [g._inv(a) for a in gens]))
    seen = {g.identity}
    frontier = [g.identity]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for s in steps:
                y = g._mul(x, s)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        if len(seen) > cap:
            limits.check(len(seen), "ball enumeration")
        if not nxt:
            break
        frontier = nxt
    return g.sorted(seen)
