"""Dense and sparse back ends for repeated convolution with a fixed measure.

A ``Stepper`` holds the atoms of one measure and applies ``f -> mu * f`` (left)
or ``f -> f * mu~`` (right, the operator rho) to an opaque state.  Finite
groups use a dense |G| x |G| matrix, lattices a numpy array with an integer
origin that grows by the support box every step, and free groups a dict.
Nothing is truncated; the atom budget in :mod:`limits` aborts runaway growth.
"""
from __future__ import annotations

import math

import numpy as np

from . import limits
from .groups import FINITE, LATTICE, GroupHandle


def lp_norm_array(values: np.ndarray, p: float) -> float:
    a = np.abs(np.asarray(values, dtype=complex)).ravel()
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return math.fsum(a.tolist())
    m = a.max()
    if m == 0:
        return 0.0
    return float(m * math.fsum(((a / m) ** p).tolist()) ** (1.0 / p))


class Stepper:
    """Repeated application of one convolution operator."""

    def __init__(self, g: GroupHandle, atoms: dict, side: str = "left"):
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        self.g = g
        self.atoms = dict(atoms)
        self.side = side
        if g.kind == FINITE:
            self._matrix = self._finite_matrix()
        elif g.kind == LATTICE:
            d = g.rank
            if side == "right":
                # rho(mu) f(s) = sum_u f(s+u) mu(u): a left shift by -u
                self.atoms = {tuple(-v for v in x): c for x, c in self.atoms.items()}
            if self.atoms:
                pts = np.array(list(self.atoms), dtype=np.int64).reshape(-1, d)
                self._lo = pts.min(axis=0)
                self._hi = pts.max(axis=0)
            else:
                self._lo = self._hi = np.zeros(d, dtype=np.int64)

    # ---- finite ---------------------------------------------------------
    def _finite_matrix(self) -> np.ndarray:
        g = self.g
        n = g.order
        t = g._np_table
        m = np.zeros((n, n), dtype=complex)
        cols = np.arange(n)
        for x, c in self.atoms.items():
            if self.side == "left":
                # (mu*f)(x s) picks up mu(x) f(s)
                m[t[x, cols], cols] += c
            else:
                # (f mu~)(t u^-1) picks up f(t) mu(u)
                m[t[cols, g._inverses[x]], cols] += c
        return m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    # ---- state conversion -----------------------------------------------
    def from_dict(self, f: dict):
        g = self.g
        if g.kind == FINITE:
            v = np.zeros(g.order, dtype=complex)
            for x, c in f.items():
                v[x] += c
            return v
        if g.kind == LATTICE:
            d = g.rank
            if not f:
                return (np.zeros((1,) * d, dtype=complex), np.zeros(d, dtype=np.int64))
            pts = np.array(list(f), dtype=np.int64).reshape(-1, d)
            lo = pts.min(axis=0)
            shape = tuple(pts.max(axis=0) - lo + 1)
            limits.check_bytes(48 * int(np.prod(shape)), "lattice vector")
            arr = np.zeros(shape, dtype=complex)
            for x, c in f.items():
                arr[tuple(np.array(x) - lo)] += c
            return (arr, lo)
        return {x: complex(c) for x, c in f.items() if c != 0}

    def to_dict(self, state, eps: float = 0.0) -> dict:
        g = self.g
        if g.kind == FINITE:
            return {int(i): complex(state[i]) for i in np.nonzero(np.abs(state) > eps)[0]}
        if g.kind == LATTICE:
            arr, lo = state
            idx = np.argwhere(np.abs(arr) > eps)
            return {tuple(int(v) for v in (row + lo)): complex(arr[tuple(row)]) for row in idx}
        return {x: c for x, c in state.items() if abs(c) > eps}

    def zeros_like(self, state=None):
        return self.from_dict({})

    # ---- the step -------------------------------------------------------
    def step(self, state):
        g = self.g
        if g.kind == FINITE:
            return self._matrix @ state
        if g.kind == LATTICE:
            arr, lo = state
            new_lo = lo + self._lo
            shape = tuple(np.array(arr.shape) + (self._hi - self._lo))
            limits.check_bytes(48 * int(np.prod(shape)), "lattice iterate")
            out = np.zeros(shape, dtype=complex)
            for x, c in self.atoms.items():
                off = np.array(x) - self._lo
                sl = tuple(slice(o, o + s) for o, s in zip(off, arr.shape))
                out[sl] += c * arr
            return (out, new_lo)
        out: dict = {}
        mul = g._mul
        if self.side == "left":
            items = [(x, c) for x, c in self.atoms.items()]
            for s, v in state.items():
                for x, c in items:
                    y = mul(x, s)
                    out[y] = out.get(y, 0) + c * v
        else:
            items = [(g._inv(u), c) for u, c in self.atoms.items()]
            for t, v in state.items():
                for ui, c in items:
                    y = mul(t, ui)
                    out[y] = out.get(y, 0) + c * v
        limits.check(len(out), "free-group iterate")
        # drop cancellation residue far below working precision
        if out:
            top = max(abs(v) for v in out.values())
            cut = 1e-15 * top
            out = {k: v for k, v in out.items() if abs(v) > cut}
        return out

    # ---- linear algebra on states ------------------------------------------
    def axpy(self, a: complex, x, y):
        """Return a*x + y without mutating either."""
        g = self.g
        if g.kind == FINITE:
            return a * x + y
        if g.kind == LATTICE:
            (ax, lx), (ay, ly) = x, y
            lo = np.minimum(lx, ly)
            hi = np.maximum(lx + np.array(ax.shape), ly + np.array(ay.shape))
            out = np.zeros(tuple(hi - lo), dtype=complex)
            sx = tuple(slice(o, o + s) for o, s in zip(lx - lo, ax.shape))
            sy = tuple(slice(o, o + s) for o, s in zip(ly - lo, ay.shape))
            out[sy] += ay
            out[sx] += a * ax
            return (out, lo)
        out = dict(y)
        for k, v in x.items():
            out[k] = out.get(k, 0) + a * v
        return out

    def scale(self, a: complex, x):
        if self.g.kind == FINITE:
            return a * x
        if self.g.kind == LATTICE:
            return (a * x[0], x[1])
        return {k: a * v for k, v in x.items()}

    def norm(self, state, p: float) -> float:
        if self.g.kind == FINITE:
            return lp_norm_array(state, p)
        if self.g.kind == LATTICE:
            return lp_norm_array(state[0], p)
        return lp_norm_array(np.fromiter(state.values(), dtype=complex, count=len(state)), p)

    def total(self, state) -> complex:
        if self.g.kind == FINITE:
            return complex(state.sum())
        if self.g.kind == LATTICE:
            return complex(state[0].sum())
        return complex(sum(state.values()))

    def coeff(self, state, x) -> complex:
        g = self.g
        if g.kind == FINITE:
            return complex(state[x])
        if g.kind == LATTICE:
            arr, lo = state
            idx = np.array(x) - lo
            if np.any(idx < 0) or np.any(idx >= arr.shape):
                return 0j
            return complex(arr[tuple(idx)])
        return complex(state.get(x, 0))

    def size(self, state) -> int:
        if self.g.kind == FINITE:
            return int(state.size)
        if self.g.kind == LATTICE:
            return int(state[0].size)
        return len(state)
