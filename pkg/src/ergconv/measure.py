"""Finitely supported complex measures on a discrete group."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import limits
from .engine import Stepper
from .errors import ResourceError, StructuralError
from .groups import FINITE, LATTICE, GroupHandle, ball

DEDUP_EPS = 1e-15
POSITIVE_EPS = 1e-15
PROBABILITY_EPS = 1e-12


class Measure:
    """A complex measure with finite support, stored as ``{element: coefficient}``."""

    __slots__ = ("group", "atoms", "_tv")

    def __init__(self, group: GroupHandle, atoms: dict | Iterable = (), check: bool = True):
        self.group = group
        items = atoms.items() if isinstance(atoms, dict) else atoms
        clean: dict = {}
        for x, c in items:
            if check:
                group.check(x)
            clean[x] = clean.get(x, 0) + complex(c)
        # cancellation residue is judged relative to the largest atom
        thr = DEDUP_EPS * max((abs(c) for c in clean.values()), default=0.0)
        self.atoms = {x: c for x, c in clean.items() if abs(c) > thr}
        self._tv = None

    # ---- constructors ---------------------------------------------------
    @classmethod
    def delta(cls, group: GroupHandle, x=None, c: complex = 1.0) -> "Measure":
        return cls(group, {group.identity if x is None else x: c})

    @classmethod
    def zero(cls, group: GroupHandle) -> "Measure":
        return cls(group, {})

    @classmethod
    def from_json(cls, group: GroupHandle, block: list) -> "Measure":
        if not isinstance(block, list):
            raise StructuralError("measure block must be a list of atoms")
        atoms = []
        for item in block:
            if not isinstance(item, dict) or "element" not in item:
                raise StructuralError(f"bad atom {item!r}")
            x = group.parse(item["element"])
            atoms.append((x, complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))))
        return cls(group, atoms)

    def to_json(self) -> list:
        g = self.group
        return [
            {"element": g.to_json(x), "re": c.real, "im": c.imag}
            for x, c in ((x, self.atoms[x]) for x in self.support())
        ]

    # ---- basic queries --------------------------------------------------
    def support(self) -> list:
        return self.group.sorted(self.atoms)

    def __getitem__(self, x) -> complex:
        return self.atoms.get(x, 0j)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        body = " + ".join(f"({c:.6g})d[{self.group.format(x)}]" for x, c in zip(self.support(), self._sorted_coeffs()))
        return f"Measure<{self.group.label}>({body or '0'})"

    def _sorted_coeffs(self):
        return [self.atoms[x] for x in self.support()]

    @property
    def norm(self) -> float:
        """Total variation norm."""
        if self._tv is None:
            self._tv = math.fsum(abs(c) for c in self.atoms.values())
        return self._tv

    def lp_norm(self, p: float) -> float:
        from .engine import lp_norm_array
        return lp_norm_array(np.fromiter(self.atoms.values(), dtype=complex, count=len(self.atoms)), p)

    def mass(self) -> complex:
        """mu(G); multiplicative under convolution."""
        return complex(math.fsum(c.real for c in self.atoms.values()), math.fsum(c.imag for c in self.atoms.values()))

    def max_step(self) -> int:
        return max((self.group.length(x) for x in self.atoms), default=0)

    def is_positive(self) -> bool:
        return all(abs(c.imag) <= POSITIVE_EPS and c.real >= -POSITIVE_EPS for c in self.atoms.values())

    def is_probability(self) -> bool:
        return self.is_positive() and abs(self.norm - 1.0) <= PROBABILITY_EPS

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return (self - involution(self)).norm <= tol

    def is_operator_normal(self, tol: float = 1e-12) -> bool:
        return is_operator_normal(self, tol)

    def digest(self) -> str:
        payload = json.dumps(
            {"group": self.group.to_json_spec(), "atoms": [[a["element"], repr(a["re"]), repr(a["im"])] for a in self.to_json()]},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def distance(self, other: "Measure") -> float:
        return (self - other).norm

    # ---- algebra --------------------------------------------------------
    def _same(self, other: "Measure"):
        if not isinstance(other, Measure):
            raise TypeError("expected a Measure")
        if other.group is not self.group and other.group != self.group:
            raise StructuralError("measures live on different groups")

    def __add__(self, other: "Measure") -> "Measure":
        self._same(other)
        out = dict(self.atoms)
        for x, c in other.atoms.items():
            out[x] = out.get(x, 0) + c
        return Measure(self.group, out, check=False)

    def __neg__(self):
        return Measure(self.group, {x: -c for x, c in self.atoms.items()}, check=False)

    def __sub__(self, other: "Measure") -> "Measure":
        return self + (-other)

    def __mul__(self, a) -> "Measure":
        if isinstance(a, Measure):
            return convolve(self, a)
        return Measure(self.group, {x: a * c for x, c in self.atoms.items()}, check=False)

    def __rmul__(self, a) -> "Measure":
        return self.__mul__(a)

    def __truediv__(self, a) -> "Measure":
        return self * (1.0 / a)

    def __eq__(self, other):
        return isinstance(other, Measure) and self.group == other.group and self.atoms == other.atoms

    __hash__ = None

    def convolve(self, other: "Measure") -> "Measure":
        return convolve(self, other)

    def involution(self) -> "Measure":
        return involution(self)

    def power(self, n: int) -> "Measure":
        return power(self, n)

    def cesaro(self, n: int) -> "Measure":
        return cesaro(self, n)


def convolve(mu: Measure, nu: Measure) -> Measure:
    """(mu * nu)(s) = sum over xy = s of mu(x) nu(y)."""
    mu._same(nu)
    g = mu.group
    bound = len(mu.atoms) * len(nu.atoms)
    if g.kind == FINITE:
        bound = min(bound, g.order)
    limits.check(bound, "convolution")
    out: dict = {}
    mul = g._mul
    nu_items = list(nu.atoms.items())
    for x, a in mu.atoms.items():
        for y, b in nu_items:
            s = mul(x, y)
            out[s] = out.get(s, 0) + a * b
    return Measure(g, out, check=False)


def involution(mu: Measure) -> Measure:
    """mu*(s) = conj(mu(s^-1))."""
    g = mu.group
    return Measure(g, {g._inv(x): c.conjugate() for x, c in mu.atoms.items()}, check=False)


def is_operator_normal(mu: Measure, tol: float = 1e-12) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if mu.group.is_abelian:
        return True
    star = involution(mu)
    return (convolve(mu, star) - convolve(star, mu)).norm <= tol


def power(mu: Measure, n: int) -> Measure:
    """mu^n by binary exponentiation."""
    if n < 1:
        raise ValueError("power needs n >= 1")
    result = None
    base = mu
    while n:
        if n & 1:
            result = base if result is None else convolve(result, base)
        n >>= 1
        if n:
            base = convolve(base, base)
    return result


def powers(mu: Measure, n: int) -> list:
    """[mu, mu^2, ..., mu^n] by repeated multiplication."""
    out = [mu]
    for _ in range(n - 1):
        out.append(convolve(out[-1], mu))
    return out


def cesaro(mu: Measure, n: int) -> Measure:
    """mu_[n] = (mu + ... + mu^n) / n."""
    if n < 1:
        raise ValueError("cesaro needs n >= 1")
    acc: dict = {}
    cur = mu
    for k in range(1, n + 1):
        if k > 1:
            cur = convolve(cur, mu)
        for x, c in cur.atoms.items():
            acc[x] = acc.get(x, 0) + c
    return Measure(mu.group, {x: c / n for x, c in acc.items()}, check=False)


# ---- vague probe ------------------------------------------------------------

@dataclass
class CesaroRecord:
    n: int
    cesaro_norm: float
    power_norm_over_n: float
    exact: bool = True  # False once only the mass lower bound is available
    coefficients: dict = field(default_factory=dict)


@dataclass
class CesaroTrace:
    horizon: int
    records: list
    monitored: list
    cesaro_bounded: str = "unknown"
    cesaro_bounded_witness: str = ""
    power_bounded: str = "unknown"
    power_bounded_witness: str = ""
    vague_limit: Measure | None = None
    tol: float = 1e-3
    note: str = ""

    @property
    def computed_horizon(self) -> int:
        return self.records[-1].n if self.records else 0


def _monitor_set(mu: Measure, user: Iterable, radius: int) -> list:
    g = mu.group
    if g.kind == FINITE:
        return g.elements()
    base = set(ball(g, radius, max_size=10_000)) if radius >= 0 else set()
    base.update(user)
    return g.sorted(base)


def vague_probe(
    mu: Measure,
    horizon: int = 1024,
    monitor: Iterable = (),
    tol: float = 1e-3,
    blowup_factor: float = 10.0,
    monitor_radius: int = 3,
) -> CesaroTrace:
    """Follow mu_[n] for n <= horizon and look for a vague limit or blow-up.

    Powers are expanded exactly while they fit the atom budget.  Past that
    point only |mu_[n](G)| is tracked; it is a lower bound for the norm
    and equals it for positive measures, which is enough to certify blow-up.
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    g = mu.group
    monitored = _monitor_set(mu, [g.parse(m) if not _is_elem(g, m) else m for m in monitor], monitor_radius)
    threshold = blowup_factor * max(1.0, mu.norm)
    m = mu.mass()
    positive = mu.is_positive()

    trace = CesaroTrace(horizon=horizon, records=[], monitored=monitored, tol=tol)
    stepper = Stepper(g, mu.atoms)
    state = stepper.from_dict(mu.atoms)
    acc = stepper.zeros_like()
    exact = True
    mass_sum = 0j
    mpow = 1 + 0j
    pb_witness = None

    for n in range(1, horizon + 1):
        mpow *= m
        mass_sum += mpow
        if exact and n > 1:
            try:
                state = stepper.step(state)
            except ResourceError as exc:
                exact = False
                trace.note = f"exact expansion stopped at n={n}: {exc}"
        if exact:
            acc = stepper.axpy(1.0, state, acc)
            pn = stepper.norm(state, 1)
            cn = stepper.norm(acc, 1) / n
            coeffs = {x: stepper.coeff(acc, x) / n for x in monitored}
            if pb_witness is None and pn <= 1.0 + PROBABILITY_EPS:
                pb_witness = n
            trace.records.append(CesaroRecord(n, cn, pn / n, True, coeffs))
        else:
            cn = abs(mass_sum) / n
            pn = abs(mpow)
            trace.records.append(CesaroRecord(n, cn, pn / n, False, {}))
        if cn > threshold:
            trace.cesaro_bounded = "no"
            trace.cesaro_bounded_witness = (
                f"|mu_[{n}]| {'=' if (exact or positive) else '>='} {cn:.6g} > blow-up threshold {threshold:.6g}"
            )
            trace.power_bounded = "no"
            trace.power_bounded_witness = "power bounded implies Cesaro bounded"
            return trace
        if not exact and not positive and abs(m) <= 1 + PROBABILITY_EPS:
            # nothing further can be certified without exact expansion
            break

    if pb_witness is not None:
        trace.power_bounded = "yes"
        trace.power_bounded_witness = f"|mu^{pb_witness}| <= 1, so all powers are bounded by max_(k<{pb_witness}) |mu^k|"
        trace.cesaro_bounded = "yes"
        trace.cesaro_bounded_witness = trace.power_bounded_witness
    elif abs(m) > 1 + PROBABILITY_EPS:
        trace.power_bounded = "no"
        trace.power_bounded_witness = f"|mu^n| >= |mu(G)|^n with |mu(G)| = {abs(m):.6g} > 1"

    exact_recs = [r for r in trace.records if r.exact]
    if trace.cesaro_bounded != "no" and exact_recs and exact_recs[-1].n >= max(8, horizon // 2):
        last = exact_recs[-1]
        tail = [r for r in exact_recs if r.n >= (3 * last.n) // 4]
        cauchy = all(abs(r.coefficients[x] - last.coefficients[x]) <= tol for r in tail for x in monitored)
        bounded = max(r.cesaro_norm for r in exact_recs) <= threshold
        if cauchy and bounded:
            final = stepper.to_dict(acc)
            keep = [x for x in monitored if x in final or g.kind == FINITE]
            # Richardson step against the O(1/n) transient: L ~ 2 c(n) - c(n/2)
            half = next((r for r in exact_recs if r.n == last.n // 2), None)
            est = {x: last.coefficients[x] if half is None else 2 * last.coefficients[x] - half.coefficients[x] for x in keep}
            atoms = {x: est[x] for x in keep if abs(est[x]) > tol}
            trace.vague_limit = Measure(g, atoms, check=False)
            trace.monitored = keep
    return trace


def _is_elem(g: GroupHandle, x) -> bool:
    try:
        g.check(x)
        return True
    except StructuralError:
        return False
