"""Convolution operators on l^p(G) and an empirical Cesaro-mean engine."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import limits
from .engine import Stepper, lp_norm_array
from .errors import StructuralError
from .groups import FINITE, FREE, LATTICE, GroupHandle, ball
from .measure import DEDUP_EPS, Measure

YES, NO, UNDETERMINED = "yes", "no", "undetermined"


class SupportedVector:
    """A finitely supported function on a group."""

    __slots__ = ("group", "entries")

    def __init__(self, group: GroupHandle, entries: dict | Iterable = (), check: bool = True):
        self.group = group
        items = entries.items() if isinstance(entries, dict) else entries
        out: dict = {}
        for x, c in items:
            if check:
                group.check(x)
            out[x] = out.get(x, 0) + complex(c)
        thr = DEDUP_EPS * max((abs(c) for c in out.values()), default=0.0)
        self.entries = {x: c for x, c in out.items() if abs(c) > thr}

    @classmethod
    def delta(cls, group, x=None, c=1.0):
        return cls(group, {group.identity if x is None else x: c})

    @classmethod
    def from_measure(cls, mu: Measure):
        return cls(mu.group, mu.atoms, check=False)

    def norm(self, p: float = 2) -> float:
        return lp_norm_array(np.fromiter(self.entries.values(), dtype=complex, count=len(self.entries)), p)

    def total(self) -> complex:
        return complex(math.fsum(c.real for c in self.entries.values()), math.fsum(c.imag for c in self.entries.values()))

    def __getitem__(self, x):
        return self.entries.get(x, 0j)

    def __sub__(self, other: "SupportedVector") -> "SupportedVector":
        out = dict(self.entries)
        for x, c in other.entries.items():
            out[x] = out.get(x, 0) - c
        return SupportedVector(self.group, out, check=False)

    def scaled(self, a) -> "SupportedVector":
        return SupportedVector(self.group, {x: a * c for x, c in self.entries.items()}, check=False)

    def reflect(self) -> "SupportedVector":
        """U f(s) = f(s^-1)."""
        g = self.group
        return SupportedVector(g, {g._inv(x): c for x, c in self.entries.items()}, check=False)

    def support(self) -> list:
        return self.group.sorted(self.entries)

    def __repr__(self):
        return f"SupportedVector<{self.group.label}>({len(self.entries)} atoms)"


@dataclass
class ConvOperator:
    measure: Measure
    p: float = 2.0
    side: str = "left"

    def __post_init__(self):
        if not (self.p >= 1):
            raise ValueError(f"p must lie in [1, inf], got {self.p}")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")

    @property
    def group(self) -> GroupHandle:
        return self.measure.group

    @property
    def max_step_growth(self) -> int:
        return self.measure.max_step()

    def apply(self, f: SupportedVector) -> SupportedVector:
        return apply(self, f)

    def stepper(self) -> Stepper:
        return Stepper(self.group, self.measure.atoms, self.side)


def apply(T: ConvOperator, f: SupportedVector) -> SupportedVector:
    """Exact image of a finitely supported vector."""
    g = T.group
    if f.group is not g and f.group != g:
        raise StructuralError("vector and operator live on different groups")
    limits.check(len(f.entries) * max(1, len(T.measure.atoms)), "operator application")
    mul = g._mul
    out: dict = {}
    if T.side == "left":
        # (mu * f)(x s) collects mu(x) f(s)
        for s, v in f.entries.items():
            for x, c in T.measure.atoms.items():
                y = mul(x, s)
                out[y] = out.get(y, 0) + c * v
    else:
        inv = [(g._inv(u), c) for u, c in T.measure.atoms.items()]
        for t, v in f.entries.items():
            for ui, c in inv:
                y = mul(t, ui)
                out[y] = out.get(y, 0) + c * v
    return SupportedVector(g, out, check=False)


# ---- norms ------------------------------------------------------------------

@dataclass
class NormInterval:
    lo: float
    hi: float
    method: str
    note: str = ""

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol


def structural_upper_bounds(mu: Measure) -> list:
    """Closed-form l^2 operator-norm facts for special measures on free groups.

    Returns ``(value, name, formula, exact)`` tuples; ``exact`` marks equalities.
    """
    g = mu.group
    out = []
    if g.kind != FREE or not mu.atoms:
        return out
    coeffs = list(mu.atoms.values())
    c0 = coeffs[0]
    equal_positive = c0.real > 0 and all(abs(c - c0) <= 1e-15 * max(1.0, abs(c0)) for c in coeffs)
    words = list(mu.atoms)
    if equal_positive and all(len(w) == 1 for w in words):
        letters = [w[0] for w in words]
        gens = {x >> 1 for x in letters}
        n = len(letters)
        c = c0.real
        if len(gens) == n and n >= 2:
            # letters on distinct generators form a free basis
            out.append((c * 2 * math.sqrt(n - 1), "free-basis", "|lambda2(sum_i delta_xi)| = 2 sqrt(n-1)", True))
        if set(letters) == {2 * x + e for x in gens for e in (0, 1)}:
            k = len(gens)
            out.append((c * 2 * math.sqrt(2 * k - 1), "symmetric-generators", "|lambda2(sum delta_xi + delta_xi^-1)| = 2 sqrt(2k-1)", True))
    lengths = {len(w) for w in words}
    if len(lengths) == 1 and not any(x & 1 for w in words for x in w):
        L = lengths.pop()
        val = math.e * math.sqrt(L + 1) * mu.lp_norm(2)
        out.append((val, "holomorphic-haagerup", "|lambda2(f)| <= e sqrt(L+1) |f|_2 for f on positive words of length L", False))
    return out


def _dual(y: np.ndarray, p: float) -> np.ndarray:
    """Unit-norm dual vector z with <y, z> = |y|_p in the q-norm, q = p/(p-1)."""
    a = np.abs(y)
    ny = lp_norm_array(y, p)
    if ny == 0:
        return np.zeros_like(y)
    phase = np.where(a > 0, np.exp(1j * np.angle(y)), 0)
    return phase * (a / ny) ** (p - 1)


def boyd_lower(A, p: float, starts: Sequence[np.ndarray], iters: int = 100) -> tuple:
    """Power-type ascent for |A|_p; every returned value is attained by a unit vector."""
    if p == 1 or math.isinf(p):
        raise ValueError("use exact column/row sums for p in {1, inf}")
    q = p / (p - 1)
    best, best_x = 0.0, None
    AH = A.conj().T
    for x0 in starts:
        x = np.asarray(x0, dtype=complex)
        nx = lp_norm_array(x, p)
        if nx == 0:
            continue
        x = x / nx
        prev = -1.0
        for _ in range(iters):
            y = A @ x
            est = lp_norm_array(y, p)
            if est > best:
                best, best_x = est, x.copy()
            if est <= prev * (1 + 1e-14) or est == 0:
                break
            prev = est
            z = AH @ _dual(y, p)
            nz = lp_norm_array(z, q)
            if nz <= abs(np.vdot(x, z)) * (1 + 1e-14):
                break
            x = _dual(z, q)
    return best, best_x


def _witness_z3(p: float, n: int = 3) -> list:
    if n != 3:
        return []
    a = 6 ** (-1 / p)
    b = (1.5) ** (-1 / p)
    base = np.array([a, a, -b], dtype=complex)
    return [np.roll(base, k) for k in range(3)]


def _random_starts(n: int, rng: np.random.Generator, k: int = 8) -> list:
    return [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(k)]


def exact_matrix(T: ConvOperator) -> np.ndarray:
    if T.group.kind != FINITE:
        raise StructuralError("exact_matrix needs a finite group")
    return T.stepper().matrix


def window_matrix(T: ConvOperator, radius: int, gens=None):
    """Sparse matrix of the operator with input restricted to ball(radius).

    Rows cover the exact image support, so the matrix norm is a lower bound for
    the operator norm that can only grow with the radius.
    """
    g = T.group
    cols = ball(g, radius, gens)
    col_index = {x: i for i, x in enumerate(cols)}
    row_index: dict = {}
    mul = g._mul
    r, c, v = [], [], []
    atoms = list(T.measure.atoms.items())
    if T.side == "right":
        atoms = [(g._inv(u), a) for u, a in atoms]
    # ~400 bytes per nonzero while the COO lists and row index are alive
    limits.check_bytes(400 * len(cols) * max(1, len(atoms)), "window matrix")
    for s, j in col_index.items():
        for x, a in atoms:
            y = mul(x, s) if T.side == "left" else mul(s, x)
            i = row_index.get(y)
            if i is None:
                i = row_index[y] = len(row_index)
            r.append(i)
            c.append(j)
            v.append(a)
    A = sp.csr_matrix((np.array(v, dtype=complex), (r, c)), shape=(len(row_index), len(cols)))
    A.sum_duplicates()
    return A, cols


def _top_singular_lower(A) -> float:
    """Certified lower bound |A v| / |v| for an approximate top right singular vector."""
    m, n = A.shape
    if min(m, n) == 0 or A.nnz == 0:
        return 0.0
    if n <= 400:
        dense = A.toarray()
        _, s, vh = np.linalg.svd(dense, full_matrices=False)
        v = vh[0].conj()
    else:
        try:
            _, s, vh = spla.svds(A, k=1, tol=1e-10, random_state=0)
            v = vh[0].conj()
        except Exception:
            v = np.ones(n, dtype=complex)
            for _ in range(500):
                w = A.conj().T @ (A @ v)
                nw = np.linalg.norm(w)
                if nw == 0:
                    break
                v = w / nw
    nv = np.linalg.norm(v)
    return float(np.linalg.norm(A @ v) / nv) if nv else 0.0


def operator_norm(
    T: ConvOperator,
    method: str = "exact_matrix",
    window: int = 4,
    seed: int = 0,
    starts: Sequence | None = None,
) -> NormInterval:
    """Certified interval [lo, hi] for the l^p operator norm."""
    mu, p, g = T.measure, T.p, T.group
    tv = mu.norm
    hi = tv
    note = "upper bound |mu|"
    if p == 2:
        for val, name, _, _ in structural_upper_bounds(mu):
            if val < hi:
                hi, note = val, f"upper bound from {name}"
    if p == 1:
        # |lambda_1(mu)| = |mu| (attained on the unit at the identity)
        return NormInterval(tv, tv, method, "p=1 norm equals total variation")
    rng = np.random.default_rng(seed)

    if method == "exact_matrix":
        M = exact_matrix(T)
        if p == 2:
            s = float(np.linalg.svd(M, compute_uv=False)[0]) if M.size else 0.0
            return NormInterval(s, s, method, "largest singular value")
        if math.isinf(p):
            s = float(np.abs(M).sum(axis=1).max())
            return NormInterval(s, s, method, "max row sum")
        n = M.shape[0]
        init = _random_starts(n, rng) + [np.eye(n)[g.identity]] + _witness_z3(p, n) + list(starts or [])
        lo, _ = boyd_lower(M, p, init)
        return NormInterval(min(lo, hi), hi, method, "p-norm ascent lower bound; " + note)

    if method == "power2":
        if p != 2:
            raise StructuralError("power2 needs p = 2")
        A = exact_matrix(T) if g.kind == FINITE else window_matrix(T, window)[0]
        v = np.ones(A.shape[1], dtype=complex) + 0.1 * rng.standard_normal(A.shape[1])
        lo = 0.0
        for _ in range(300):
            w = A @ v
            nv = np.linalg.norm(v)
            lo = max(lo, float(np.linalg.norm(w) / nv))
            v = A.conj().T @ w
            if np.linalg.norm(v) == 0:
                break
            v = v / np.linalg.norm(v)
        if g.kind == FINITE:
            s = float(np.linalg.svd(A, compute_uv=False)[0])
            return NormInterval(min(lo, s), s, method, "power iteration; exact singular value as upper bound")
        return NormInterval(min(lo, hi), hi, method, "power iteration on window; " + note)

    if method == "boyd_p":
        if not (1 < p < math.inf):
            raise StructuralError("boyd_p needs 1 < p < inf")
        if g.kind == FINITE:
            A = exact_matrix(T)
            n = A.shape[0]
            init = _random_starts(n, rng) + [np.eye(n)[g.identity]] + _witness_z3(p, n)
        else:
            A, cols = window_matrix(T, window)
            n = A.shape[1]
            e = np.zeros(n, dtype=complex)
            e[0] = 1
            init = _random_starts(n, rng) + [e, np.ones(n, dtype=complex)]
        init += list(starts or [])
        lo, _ = boyd_lower(A, p, init)
        return NormInterval(min(lo, hi), hi, method, "p-norm ascent lower bound; " + note)

    if method == "window_lower":
        A, cols = window_matrix(T, window)
        if math.isinf(p):
            lo = float(abs(A).sum(axis=1).max()) if A.nnz else 0.0
        elif p == 2:
            lo = _top_singular_lower(A)
        else:
            n = A.shape[1]
            e = np.zeros(n, dtype=complex)
            e[0] = 1
            lo, _ = boyd_lower(A, p, _random_starts(n, rng, 4) + [e, np.ones(n, dtype=complex)])
        return NormInterval(min(lo, hi), hi, method, f"window radius {window}; " + note)

    raise StructuralError(f"unknown norm method {method!r}")


def window_norm_lower(mu: Measure, p: float, radius: int) -> float:
    return operator_norm(ConvOperator(mu, p), "window_lower", window=radius).lo


# ---- Cesaro iteration ---------------------------------------------------------

@dataclass
class VectorTrace:
    n: list = field(default_factory=list)  # dyadic n with a (n, 2n) gap
    gap: list = field(default_factory=list)  # |T_[n] f - T_[2n] f|_p
    power_norm_over_n: list = field(default_factory=list)  # |T^n f|_p / n
    cesaro_norm: list = field(default_factory=list)  # |T_[n] f|_p
    verdict: str = UNDETERMINED
    reason: str = ""
    fixed_point_is_zero: str = UNDETERMINED
    limit: SupportedVector | None = None
    tail_bound: float = math.inf


@dataclass
class IterationReport:
    horizon: int
    p: float
    tol: float
    traces: list
    sot_converges: str = UNDETERMINED
    fixed_point_is_zero: str = UNDETERMINED

    @property
    def limit_vectors(self):
        if self.sot_converges != YES:
            return None
        return [t.limit for t in self.traces]

    def csv_rows(self) -> list:
        rows = []
        for k, t in enumerate(self.traces):
            for n, gap, pn in zip(t.n, t.gap, t.power_norm_over_n):
                rows.append((k, n, gap, pn))
        return rows


# decay-rate thresholds for dyadic evidence
MIN_DECAY_EXPONENT = 0.1
FLAT_RATIO = 0.999
DECAY_WINDOW = 5
ESCAPE = 1e12


def _loglog_slope(ns, vals) -> float:
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.maximum(np.asarray(vals, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def _judge(tr: VectorTrace, fnorm: float, tol: float) -> None:
    scale = max(1.0, fnorm)
    gaps = tr.gap
    if not gaps:
        tr.reason = "horizon too short for a dyadic pair"
        return
    final = gaps[-1]
    if final <= tol * scale:
        tr.verdict = YES
        tr.tail_bound = final
        tr.reason = f"final dyadic gap {final:.3g} <= tol"
        return
    pn = tr.power_norm_over_n
    if len(pn) >= 3 and pn[-1] > scale and all(b > 1.5 * a for a, b in zip(pn[-3:-1], pn[-2:])):
        tr.verdict = NO
        tr.reason = f"|T^n f|/n grows geometrically ({pn[-1]:.3g} at n={2 * tr.n[-1]})"
        return
    if len(gaps) >= DECAY_WINDOW:
        ns, tail = tr.n[-DECAY_WINDOW:], gaps[-DECAY_WINDOW:]
        slope = _loglog_slope(ns, tail)
        steady = all(b <= a * 1.02 for a, b in zip(tail, tail[1:]))
        if slope <= -MIN_DECAY_EXPONENT and steady:
            # Cesaro means of a non-telescoping orbit settle no faster than 1/n, and
            # periodic orbits make single gaps misleading: extrapolate the envelope
            s = min(-slope, 1.0)
            ratio = 2.0 ** -s
            env = max(gv * (nv / ns[-1]) ** s for nv, gv in zip(ns, tail))
            tr.verdict = YES
            tr.tail_bound = env * (1 + ratio / (1 - ratio))
            tr.reason = f"dyadic gaps decay like n^{slope:.3f}; estimated remaining distance {tr.tail_bound:.3g}"
            return
    if len(gaps) >= DECAY_WINDOW + 1:
        tail = gaps[-(DECAY_WINDOW + 1):]
        if min(tail) > 0.05 * scale and all(b >= FLAT_RATIO * a for a, b in zip(tail, tail[1:])):
            tr.verdict = NO
            tr.reason = f"dyadic gaps stay flat near {final:.3g}"
            return
    tr.reason = f"final gap {final:.3g} above tol without a clear trend"


def iterate_cesaro(T: ConvOperator, tests: Sequence[SupportedVector], horizon: int = 1024, tol: float = 1e-8) -> IterationReport:
    """Follow T_[n] f for the test vectors and judge the dyadic Cauchy gaps."""
    if horizon < 4:
        raise ValueError("horizon must be >= 4")
    if not tests:
        raise ValueError("need at least one test vector")
    if math.isinf(T.p):
        raise StructuralError("no iteration engine on l^inf")
    st = T.stepper()
    p = T.p
    traces = []
    for f in tests:
        tr = VectorTrace()
        state = st.from_dict(f.entries)
        acc = st.zeros_like()
        prev_avg = None
        next_dyadic = 1
        for n in range(1, horizon + 1):
            state = st.step(state)
            acc = st.axpy(1.0, state, acc)
            if n == next_dyadic:
                avg = st.scale(1.0 / n, acc)
                tr.cesaro_norm.append(st.norm(avg, p))
                if prev_avg is not None:
                    tr.n.append(n // 2)
                    tr.gap.append(st.norm(st.axpy(-1.0, prev_avg, avg), p))
                    tr.power_norm_over_n.append(st.norm(state, p) / n)
                prev_avg = avg
                next_dyadic *= 2
                pn = tr.power_norm_over_n
                if len(pn) >= 3 and pn[-1] > ESCAPE * max(1.0, f.norm(p)) and all(b > 1.5 * a for a, b in zip(pn[-3:-1], pn[-2:])):
                    break  # geometric blow-up is already certain; stop before overflow
        _judge(tr, f.norm(p), tol)
        if prev_avg is not None:
            tr.limit = SupportedVector(T.group, st.to_dict(prev_avg), check=False)
            lim = tr.cesaro_norm[-1]
            cn = tr.cesaro_norm
            decaying = len(cn) >= DECAY_WINDOW and _loglog_slope(range(len(cn) - DECAY_WINDOW, len(cn)), cn[-DECAY_WINDOW:]) <= -MIN_DECAY_EXPONENT
            if lim < tol * max(1.0, f.norm(p)):
                tr.fixed_point_is_zero = YES
            elif tr.verdict == YES and lim > 2 * tr.tail_bound and not decaying:
                tr.fixed_point_is_zero = NO
            elif decaying and all(b <= a * 1.02 for a, b in zip(cn[-DECAY_WINDOW:], cn[-DECAY_WINDOW + 1:])):
                tr.fixed_point_is_zero = YES
        traces.append(tr)
    rep = IterationReport(horizon, p, tol, traces)
    verdicts = [t.verdict for t in traces]
    if NO in verdicts:
        rep.sot_converges = NO
    elif all(v == YES for v in verdicts):
        rep.sot_converges = YES
    fz = [t.fixed_point_is_zero for t in traces]
    if NO in fz:
        rep.fixed_point_is_zero = NO
    elif all(v == YES for v in fz):
        rep.fixed_point_is_zero = YES
    return rep


def unitary_intertwine_check(mu: Measure, p: float, tests: Sequence[SupportedVector], tol: float = 1e-12) -> bool:
    """Check lambda(mu) U = U rho(mu) with U f(s) = f(s^-1)."""
    if not (1 < p < math.inf):
        raise ValueError("intertwining check needs 1 < p < inf")
    lam = ConvOperator(mu, p, "left")
    rho = ConvOperator(mu, p, "right")
    for f in tests:
        lhs = apply(lam, f.reflect())
        rhs = apply(rho, f).reflect()
        if (lhs - rhs).norm(p) > tol * max(1.0, f.norm(p) * mu.norm):
            return False
    return True
