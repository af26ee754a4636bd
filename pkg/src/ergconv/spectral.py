"""Fourier-Stieltjes transforms, spectra, spectral radii and the gap at 1."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from . import limits
from .errors import ResourceError, StructuralError
from .groups import FINITE, FREE, LATTICE, GroupHandle, generated_subgroup
from .measure import Measure, convolve, is_operator_normal
from .operator import ConvOperator, NormInterval, exact_matrix, operator_norm, structural_upper_bounds

ROOT_TOL = 1e-12  # |mu^(theta) - 1| below this counts as a located root
FFT_SLACK = 1e-12  # rounding allowance added to certified bounds


# ---- characters of finite abelian groups --------------------------------------

@dataclass(frozen=True)
class Character:
    """chi(x) = exp(2 pi i k_x / m) with integer exponents ``k``."""

    exponents: tuple
    modulus: int

    def __call__(self, x: int) -> complex:
        return complex(np.exp(2j * np.pi * self.exponents[x] / self.modulus))

    def values(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.asarray(self.exponents) / self.modulus)


def _element_order(g: GroupHandle, x: int) -> int:
    e, y, k = g.identity, x, 1
    while y != e:
        y = g._mul(y, x)
        k += 1
    return k


def character_table(g: GroupHandle, max_candidates: int = 2_000_000) -> list:
    """All characters of a finite abelian group, exact as root-of-unity exponents."""
    if g.kind != FINITE or not g.is_abelian:
        raise StructuralError("character tables need a finite abelian group")
    n = g.order
    e = g.identity
    orders = [_element_order(g, x) for x in range(n)]
    m = math.lcm(*orders)
    # greedy generating set
    gens: list = []
    span = {e}
    for x in sorted(range(n), key=lambda x: -orders[x]):
        if x not in span:
            gens.append(x)
            span = set(generated_subgroup(g, gens).finite_elements)
        if len(span) == n:
            break
    choices = [[a for a in range(m) if (a * orders[x]) % m == 0] for x in gens]
    total = math.prod(len(c) for c in choices)
    if total > max_candidates:
        raise ResourceError(f"character enumeration needs {total} candidates")
    chars = []
    for assign in itertools.product(*choices):
        k = [-1] * n
        k[e] = 0
        queue = [e]
        ok = True
        while queue and ok:
            x = queue.pop()
            for gi, a in zip(gens, assign):
                y = g._mul(x, gi)
                v = (k[x] + a) % m
                if k[y] < 0:
                    k[y] = v
                    queue.append(y)
                elif k[y] != v:
                    ok = False
                    break
        if ok:
            chars.append(Character(tuple(k), m))
    if len(chars) != n:
        raise StructuralError(f"found {len(chars)} characters for a group of order {n}")
    # exact multiplicativity on generators
    for ch in chars:
        for x in range(n):
            for gi in gens:
                if ch.exponents[g._mul(x, gi)] != (ch.exponents[x] + ch.exponents[gi]) % m:
                    raise StructuralError("character table failed the homomorphism check")
    # trivial character first, then lexicographic in exponents
    chars.sort(key=lambda c: (any(c.exponents), c.exponents))
    return chars


# ---- dual sampler -------------------------------------------------------------

@dataclass
class DualSampler:
    group: GroupHandle
    resolution: int = 0  # torus grid points per axis
    refine: int = 3
    refine_factor: int = 16
    characters: list | None = None

    @classmethod
    def for_group(cls, g: GroupHandle, grid: int | None = None, refine: int = 3) -> "DualSampler":
        if g.kind == FINITE:
            if not g.is_abelian:
                return cls(g, 0, refine)
            return cls(g, 0, refine, characters=character_table(g))
        if g.kind == LATTICE:
            if grid is None:
                grid = 2 ** 14 if g.rank == 1 else (512 if g.rank == 2 else 64)
            limits.check_bytes(64 * grid ** g.rank, "torus grid")
            return cls(g, int(grid), refine)
        raise StructuralError("free groups have no abelian dual to sample")

    @property
    def is_torus(self) -> bool:
        return self.group.kind == LATTICE

    @property
    def spacing(self) -> float:
        return 2 * math.pi / self.resolution

    def angles(self) -> np.ndarray:
        return self.spacing * np.arange(self.resolution)

    def grid_points(self) -> np.ndarray:
        d = self.group.rank
        ax = self.angles()
        return np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)


def lipschitz_bound(mu: Measure) -> float:
    """L = sum |mu(n)| |n|_1, a Lipschitz constant of mu^ in the sup metric on angles."""
    return math.fsum(abs(c) * sum(abs(v) for v in x) for x, c in mu.atoms.items())


def _check_abelian(mu: Measure):
    g = mu.group
    if g.kind == FREE or (g.kind == FINITE and not g.is_abelian):
        raise StructuralError(f"Fourier-Stieltjes transform needs an abelian group, got {g.label}")


def fourier_stieltjes(mu: Measure, chi) -> complex:
    """mu^(chi) = sum_t mu(t) chi(t).

    ``chi`` is a :class:`Character` on finite abelian groups and an angle
    (or tuple of angles) on Z^d, standing for n -> exp(i n . theta).
    """
    _check_abelian(mu)
    if isinstance(chi, Character):
        return complex(sum(c * chi(x) for x, c in mu.atoms.items()))
    theta = np.atleast_1d(np.asarray(chi, dtype=float))
    if mu.group.kind != LATTICE or theta.shape != (mu.group.rank,):
        raise StructuralError("angles must match the lattice rank")
    return complex(sum(c * np.exp(1j * float(np.dot(x, theta))) for x, c in mu.atoms.items()))


def transform_at(mu: Measure, thetas: np.ndarray) -> np.ndarray:
    """Vectorised mu^ at arbitrary angle points of shape (P, d)."""
    if not mu.atoms:
        return np.zeros(len(thetas), dtype=complex)
    pts = np.array(list(mu.atoms), dtype=float)
    c = np.array(list(mu.atoms.values()), dtype=complex)
    out = np.zeros(len(thetas), dtype=complex)
    step = max(1, 2_000_000 // max(1, len(c)))
    for i in range(0, len(thetas), step):
        out[i:i + step] = np.exp(1j * (thetas[i:i + step] @ pts.T)) @ c
    return out


def transform_grid(mu: Measure, sampler: DualSampler) -> np.ndarray:
    """mu^ on the full finite dual (character order) or the torus grid (C-order)."""
    _check_abelian(mu)
    g = mu.group
    if g.kind == FINITE:
        tab = np.array([ch.values() for ch in sampler.characters])
        v = np.zeros(g.order, dtype=complex)
        for x, c in mu.atoms.items():
            v[x] = c
        return tab @ v
    m, d = sampler.resolution, g.rank
    arr = np.zeros((m,) * d, dtype=complex)
    for x, c in mu.atoms.items():
        arr[tuple(v % m for v in x)] += c
    # exact at grid points: sum_n mu(n) w^(n j) only depends on n mod m
    return (np.fft.ifftn(arr) * m ** d).reshape(-1)


# ---- certified minimisation -----------------------------------------------------

@dataclass
class CertifiedMin:
    lower: float  # certified lower bound of the true minimum
    upper: float  # attained value
    argmin: np.ndarray
    candidates: list  # angle points that may sit near minimisers
    lipschitz_ok: bool


def certified_minimum(fn, grid_values, sampler: DualSampler, L: float, max_cells: int = 2048) -> CertifiedMin:
    """Lipschitz branch-and-bound over the torus grid.

    Each grid point owns the sup-ball of radius h/2 around it; ``fn`` may exceed
    its grid value by at most L h/2 on that cell.  Cells whose lower bound is
    below the best attained value are subdivided ``refine`` times.
    """
    d = sampler.group.rank
    h = sampler.spacing
    vals = np.asarray(grid_values, dtype=float)
    pts_all = None
    r = h / 2
    lower_cells = vals - L * r - FFT_SLACK
    best = float(vals.min())
    best_pt = sampler.grid_points()[int(vals.argmin())] if d > 1 else np.array([sampler.angles()[int(vals.argmin())]])
    # Lipschitz self-check along axis 0 of the grid
    shaped = vals.reshape((sampler.resolution,) * d)
    diffs = np.abs(np.diff(shaped, axis=0))
    lip_ok = bool(diffs.size == 0 or diffs.max() <= L * h * (1 + 1e-9) + 1e-9)

    active = np.nonzero(lower_cells < best)[0]
    frozen_lower = float(lower_cells[np.setdiff1d(np.arange(vals.size), active)].min()) if active.size < vals.size else math.inf
    if active.size > max_cells:
        order = np.argsort(lower_cells[active])
        frozen_lower = min(frozen_lower, float(lower_cells[active[order[max_cells:]]].min()))
        active = active[order[:max_cells]]
    if d == 1:
        centres = sampler.angles()[active][:, None]
    else:
        pts_all = sampler.grid_points()
        centres = pts_all[active]
    lows = lower_cells[active]
    f = sampler.refine_factor
    for _ in range(sampler.refine):
        if len(centres) == 0:
            break
        sub_r = r / f
        offs = (np.arange(f) - (f - 1) / 2) * (2 * sub_r)
        grid_off = np.stack(np.meshgrid(*([offs] * d), indexing="ij"), axis=-1).reshape(-1, d)
        new_c = (centres[:, None, :] + grid_off[None, :, :]).reshape(-1, d)
        new_v = fn(new_c)
        i = int(np.argmin(new_v))
        if new_v[i] < best:
            best, best_pt = float(new_v[i]), new_c[i]
        new_low = new_v - L * sub_r - FFT_SLACK
        keep = new_low < best
        frozen_lower = min(frozen_lower, float(new_low[~keep].min()) if (~keep).any() else math.inf)
        centres, lows, r = new_c[keep], new_low[keep], sub_r
        if len(centres) > max_cells:
            order = np.argsort(lows)
            frozen_lower = min(frozen_lower, float(lows[order[max_cells:]].min()))
            centres, lows = centres[order[:max_cells]], lows[order[:max_cells]]
    lower = min(best, frozen_lower, float(lows.min()) if len(lows) else math.inf)
    cands = [c for c in centres[np.argsort(lows)[:16]]] if len(centres) else [best_pt]
    return CertifiedMin(lower, best, np.asarray(best_pt), cands, lip_ok)


# ---- gap at one -----------------------------------------------------------------

@dataclass
class GapVerdict:
    kind: str  # "gap" | "accumulation" | "undetermined"
    delta: float = 0.0  # certified distance from 1 of the spectrum minus its exact 1-values
    min_distance: float = math.nan  # smallest measured |value - 1| over values != 1
    A_mu: str = "empty"  # "empty" | "all" | "nonempty"
    roots: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)  # (parameter, value) pairs approaching 1
    note: str = ""

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "delta": "inf" if math.isinf(self.delta) else self.delta,
            "min_distance": None if math.isnan(self.min_distance) else self.min_distance,
            "A_mu": self.A_mu,
            "roots": [list(map(float, np.atleast_1d(r))) if not isinstance(r, (int, str)) else r for r in self.roots],
            "witnesses": [[str(p), [complex(v).real, complex(v).imag]] for p, v in self.witnesses],
            "note": self.note,
        }


def gap_from_values(values: Sequence[complex], tol: float = 1e-9) -> GapVerdict:
    """Gap verdict for a finite spectrum (given as a list of points)."""
    vals = np.asarray(values, dtype=complex)
    dist = np.abs(vals - 1)
    ones = dist <= tol
    rest = dist[~ones]
    if ones.all():
        a = "all"
    elif ones.any():
        a = "nonempty"
    else:
        a = "empty"
    delta = float(rest.min()) if rest.size else math.inf
    return GapVerdict(
        "gap", delta, delta if rest.size else math.nan, a,
        roots=[int(i) for i in np.nonzero(ones)[0]],
        note="finite spectrum: 1 cannot be an accumulation point",
    )


def orbit_accumulation(x: float, K: int = 10 ** 6, tol: float = 1e-3, need: int = 5) -> GapVerdict:
    """Values s^k, s = exp(2 pi i x), for k <= K: look for ``need`` returns near 1."""
    k = np.arange(1, K + 1, dtype=np.float64)
    frac = np.mod(k * x, 1.0)
    frac = np.minimum(frac, 1 - frac)
    dist = 2 * np.abs(np.sin(np.pi * frac))
    hits = np.nonzero((dist < tol) & (dist > 0))[0]
    wit = []
    seen = set()
    for i in hits:
        v = np.exp(2j * np.pi * float(np.mod((i + 1) * x, 1.0)))
        key = round(v.real, 15), round(v.imag, 15)
        if key in seen:
            continue
        seen.add(key)
        wit.append((int(i + 1), complex(v)))
    # strictly approaching 1: keep a subsequence with decreasing distance
    chain = []
    for kk, v in wit:
        if not chain or abs(v - 1) < abs(chain[-1][1] - 1):
            chain.append((kk, v))
    if len(chain) >= need:
        return GapVerdict("accumulation", 0.0, float(abs(chain[-1][1] - 1)), "empty", witnesses=chain,
                          note=f"{len(chain)} powers s^k with 0 < |s^k - 1| < {tol} and decreasing distance")
    md = float(dist.min()) if dist.size else math.nan
    return GapVerdict("undetermined", 0.0, md, "empty", witnesses=chain, note="too few returns near 1")


def _root_polish(mu: Measure, start: np.ndarray) -> tuple:
    def obj(t):
        return abs(transform_at(mu, np.atleast_2d(t))[0] - 1) ** 2
    res = optimize.minimize(obj, start, method="Nelder-Mead", options={"xatol": 1e-14, "fatol": 1e-30, "maxiter": 4000})
    t = np.asarray(res.x, dtype=float)
    return t, math.sqrt(max(obj(t), 0.0))


def _approach_witnesses(mu: Measure, root: np.ndarray, tol: float, count: int = 5) -> list:
    """Points near a root whose values are != 1 and approach 1 within tol."""
    d = mu.group.rank
    rng = np.random.default_rng(12345)
    dirs = [np.eye(d)[i] for i in range(d)] + [rng.standard_normal(d) for _ in range(4)]
    floor = 1e3 * np.finfo(float).eps * max(1.0, mu.norm)
    targets = [tol * 10 ** (-k / 2) for k in range(1, count + 1)]
    for u in dirs:
        u = u / np.linalg.norm(u)

        def dist(eps):
            return abs(transform_at(mu, np.atleast_2d(root + eps * u))[0] - 1)

        if dist(1e-2) <= floor and dist(1e-4) <= floor:
            continue  # this direction stays inside the level set
        out = []
        for tgt in targets:
            if tgt <= floor:
                break
            lo, hi = 0.0, 1e-1
            if dist(hi) < tgt:
                continue
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if dist(mid) < tgt:
                    lo = mid
                else:
                    hi = mid
            val = transform_at(mu, np.atleast_2d(root + hi * u))[0]
            if floor < abs(val - 1) <= tol:
                out.append((tuple(float(v) for v in root + hi * u), complex(val)))
        if len(out) >= count:
            return out
    return []


def gap_at_one(mu: Measure, sampler: DualSampler | None = None, tol: float = 1e-9, grid_values=None) -> GapVerdict:
    """Is 1 an isolated point (or absent) in the spectrum of lambda_2(mu)?"""
    g = mu.group
    if g.kind == FREE:
        raise StructuralError("no spectrum model for free groups")
    if g.kind == FINITE:
        if g.is_abelian:
            sampler = sampler or DualSampler.for_group(g)
            vals = transform_grid(mu, sampler)
        else:
            vals = np.linalg.eigvals(exact_matrix(ConvOperator(mu, 2)))
        return gap_from_values(vals, tol)
    sampler = sampler or DualSampler.for_group(g)
    delta0 = Measure.delta(g)
    if (mu - delta0).norm <= 1e-15:
        return GapVerdict("gap", math.inf, math.nan, "all", note="mu^ is identically 1; no value differs from 1")
    if grid_values is None:
        grid_values = transform_grid(mu, sampler)
    L = lipschitz_bound(mu)
    fn = lambda th: np.abs(transform_at(mu, th) - 1)  # noqa: E731
    cm = certified_minimum(fn, np.abs(grid_values - 1), sampler, L)
    if cm.lower > tol:
        return GapVerdict("gap", cm.lower, cm.upper, "empty",
                          note=f"certified min |mu^ - 1| >= {cm.lower:.6g} (Lipschitz {L:.6g}, grid {sampler.resolution})")
    # look for an actual root of mu^ - 1
    best_t, best_d = cm.argmin, cm.upper
    if best_d > ROOT_TOL:
        for start in [cm.argmin] + list(cm.candidates[:8]):
            t, dd = _root_polish(mu, np.asarray(start, dtype=float))
            if dd < best_d:
                best_t, best_d = t, dd
            if best_d <= ROOT_TOL:
                break
    if best_d <= ROOT_TOL:
        wit = _approach_witnesses(mu, np.atleast_1d(best_t), tol)
        if len(wit) >= 5:
            return GapVerdict(
                "accumulation", 0.0, float(abs(wit[-1][1] - 1)), "nonempty",
                roots=[np.atleast_1d(best_t)], witnesses=wit,
                note="mu^ - 1 vanishes on a proper subset of the connected torus; values != 1 approach 1",
            )
    return GapVerdict("undetermined", 0.0, float(cm.upper), "unknown",
                      note=f"certified lower bound {cm.lower:.3g} below tol but no root located")


# ---- spectra --------------------------------------------------------------------

@dataclass
class SpectralReport:
    p: float
    norm2: NormInterval
    radius: NormInterval
    gap_at_one: GapVerdict | None = None
    A_mu: str = ""
    values: np.ndarray | None = None  # exact spectrum points when finite
    samples: np.ndarray | None = None  # (angle, value) rows on request
    lipschitz: float = math.nan
    lipschitz_ok: bool = True
    note: str = ""

    def to_json(self) -> dict:
        out = {
            "p": self.p,
            "norm2": [self.norm2.lo, self.norm2.hi],
            "radius": [self.radius.lo, self.radius.hi],
            "gap_at_one": self.gap_at_one.to_json() if self.gap_at_one else None,
            "A_mu": self.A_mu,
            "lipschitz": None if math.isnan(self.lipschitz) else self.lipschitz,
            "lipschitz_ok": self.lipschitz_ok,
            "note": self.note,
        }
        if self.values is not None:
            vs = sorted(np.asarray(self.values).tolist(), key=lambda z: (round(z.real, 12), round(z.imag, 12)))
            out["spectrum"] = [[v.real, v.imag] for v in vs]
        return out


def spectrum2(mu: Measure, sampler: DualSampler | None = None, samples: bool = False, tol: float = 1e-9) -> SpectralReport:
    """Spectrum data of lambda_2(mu) on abelian or finite groups."""
    g = mu.group
    if g.kind == FREE:
        raise StructuralError("free-group spectra are not computed; use radius_estimate")
    if g.kind == FINITE and not g.is_abelian:
        M = exact_matrix(ConvOperator(mu, 2))
        eig = np.linalg.eigvals(M)
        s = float(np.linalg.svd(M, compute_uv=False)[0])
        r = float(np.abs(eig).max())
        gap = gap_from_values(eig, tol)
        return SpectralReport(2, NormInterval(s, s, "svd"), NormInterval(r, r, "eigenvalues"), gap, gap.A_mu, eig,
                              note="finite non-abelian group: exact matrix")
    sampler = sampler or DualSampler.for_group(g)
    vals = transform_grid(mu, sampler)
    if g.kind == FINITE:
        s = float(np.abs(vals).max()) if vals.size else 0.0
        gap = gap_from_values(vals, tol)
        return SpectralReport(2, NormInterval(s, s, "characters"), NormInterval(s, s, "characters"), gap, gap.A_mu, vals,
                              note="exact finite dual")
    L = lipschitz_bound(mu)
    absval = np.abs(vals)
    # maximise |mu^| by minimising its negative
    fn = lambda th: -np.abs(transform_at(mu, th))  # noqa: E731
    cm = certified_minimum(fn, -absval, sampler, L)
    lo = -cm.upper
    hi = min(-cm.lower, mu.norm)
    lo = min(lo, hi)
    gap = gap_at_one(mu, sampler, tol, grid_values=vals)
    rep = SpectralReport(2, NormInterval(lo, hi, "torus grid"), NormInterval(lo, hi, "torus grid"), gap, gap.A_mu,
                         lipschitz=L, lipschitz_ok=cm.lipschitz_ok,
                         note=f"grid {sampler.resolution}^{g.rank}, refine {sampler.refine}x{sampler.refine_factor}")
    if samples:
        pts = sampler.grid_points() if g.rank > 1 else sampler.angles()[:, None]
        rep.samples = np.column_stack([pts, vals])
    return rep


def contains_one(mu: Measure, sampler: DualSampler | None = None, tol: float = 1e-9) -> bool:
    """1 lies in the spectrum (within the grid's certified accuracy)."""
    g = mu.group
    sampler = sampler or (DualSampler.for_group(g) if g.kind != FREE else None)
    if g.kind == FINITE:
        vals = transform_grid(mu, sampler) if g.is_abelian else np.linalg.eigvals(exact_matrix(ConvOperator(mu, 2)))
        return bool((np.abs(vals - 1) <= tol).any())
    vals = transform_grid(mu, sampler)
    L = lipschitz_bound(mu)
    fn = lambda th: np.abs(transform_at(mu, th) - 1)  # noqa: E731
    cm = certified_minimum(fn, np.abs(vals - 1), sampler, L)
    return cm.upper <= max(tol, L * sampler.spacing / sampler.refine_factor ** sampler.refine)


@dataclass
class SquareRelation:
    multiplicative_error: float
    plus_one: str  # gap kind for mu
    minus_one: str  # gap kind for -mu
    symmetric: bool | None

    @property
    def ok(self) -> bool:
        # the +-1 symmetry is reported as evidence only: it fails for (delta_0 + delta_1)/2 on Z
        return self.multiplicative_error <= 1e-11


def square_spectrum_relation(mu: Measure, sampler: DualSampler | None = None, npts: int = 1024) -> SquareRelation:
    """Check (mu*mu)^ = (mu^)^2 on samples and the +-1 accumulation symmetry for positive mu."""
    _check_abelian(mu)
    g = mu.group
    sampler = sampler or DualSampler.for_group(g)
    sq = convolve(mu, mu)
    if g.kind == FINITE:
        a, b = transform_grid(mu, sampler), transform_grid(sq, sampler)
    else:
        rng = np.random.default_rng(0)
        pts = rng.uniform(0, 2 * np.pi, size=(npts, g.rank))
        a, b = transform_at(mu, pts), transform_at(sq, pts)
    err = float(np.abs(b - a * a).max()) / max(1.0, mu.norm ** 2)
    plus = gap_at_one(mu, sampler).kind
    minus = gap_at_one(-mu, sampler).kind
    sym = None
    if mu.is_positive():
        sym = (plus == "accumulation") == (minus == "accumulation")
        if "undetermined" in (plus, minus):
            sym = None
    return SquareRelation(err, plus, minus, sym)


# ---- spectral radius ------------------------------------------------------------

def _homogeneous_positive(mu: Measure) -> int | None:
    words = list(mu.atoms)
    if mu.group.kind != FREE or not words:
        return None
    lengths = {len(w) for w in words}
    if len(lengths) == 1 and not any(x & 1 for w in words for x in w):
        L = lengths.pop()
        return L if L > 0 else None
    return None


def radius_estimate(mu: Measure, p: float = 2, depth: int = 12, sampler: DualSampler | None = None,
                    window: int = 0, max_terms: int = 200_000) -> NormInterval:
    """Interval for the spectral radius of lambda_p(mu)."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    g = mu.group
    if not mu.atoms:
        return NormInterval(0.0, 0.0, "zero measure")
    if g.kind == FINITE:
        # finite-dimensional: the spectrum does not depend on p
        eig = np.linalg.eigvals(exact_matrix(ConvOperator(mu, 2)))
        r = float(np.abs(eig).max())
        return NormInterval(r, r, "eigenvalues", "exact finite matrix")
    if g.kind == LATTICE:
        rep = spectrum2(mu, sampler)
        return NormInterval(rep.radius.lo, rep.radius.hi, "sup |mu^|",
                            "abelian group: spectrum is the closed range of mu^ for every p")
    # free groups
    tv = mu.norm
    hi, hi_note = tv, "|mu|"
    lo, lo_note = 0.0, "trivial"
    L = _homogeneous_positive(mu)
    if p == 1:
        m = abs(mu.mass())
        if m > lo:
            lo, lo_note = m, "|mu(G)| lies in the l1 spectrum"
    positive = mu.is_positive()
    if L is not None:
        n2 = mu.lp_norm(2)
        for n in range(1, depth + 1):
            if p == 2:
                val = (math.e * math.sqrt(n * L + 1)) ** (1 / n) * n2
                if val < hi:
                    hi, hi_note = val, f"holomorphic Haagerup bound for mu^{n}, nth root"
        if p in (1, 2) and n2 > lo:
            lo, lo_note = n2, "|mu^n|_2 = |mu|_2^n for positive words of one length, and |mu^n|_2 <= |lambda2(mu^n)|"
        if p == 2:
            # the nth roots of the Haagerup bound tend to |mu|_2, so r = |mu|_2
            finite_depth = hi
            hi, hi_note = n2, f"limit of nth roots of the holomorphic Haagerup bound (depth {depth}: {finite_depth:.10g})"
    else:
        normal = is_operator_normal(mu)
        cur = mu
        for n in range(1, depth + 1):
            if n > 1:
                if len(cur.atoms) * len(mu.atoms) > max_terms:
                    break
                try:
                    cur = convolve(cur, mu)
                except ResourceError:
                    break
            if p == 2 or p == 1:
                te = abs(cur[g.identity])
                if te > 0 and te ** (1 / n) > lo:
                    lo, lo_note = te ** (1 / n), f"|mu^{n}(e)|^(1/{n}) (trace moment)"
                if p == 2 and normal:
                    v = cur.lp_norm(2) ** (1 / n)
                    if v > lo:
                        lo, lo_note = v, f"|mu^{n}|_2^(1/{n}) for a normal operator"
            v = cur.norm ** (1 / n)
            if v < hi:
                hi, hi_note = v, f"|mu^{n}|^(1/{n})"
            if p == 2:
                for val, name, _, _ in structural_upper_bounds(cur):
                    if val ** (1 / n) < hi:
                        hi, hi_note = val ** (1 / n), f"{name} bound for mu^{n}"
        if p == 2 and normal and window > 0:
            w = operator_norm(ConvOperator(mu, 2), "window_lower", window=window).lo
            if w > lo:
                lo, lo_note = w, f"window lower bound (normal operator, radius {window})"
        if p == 2 and normal:
            for val, name, _, exact in structural_upper_bounds(mu):
                if exact and val > lo:
                    lo, lo_note = val, f"{name} norm of a normal operator"
    lo = min(lo, hi)
    return NormInterval(lo, hi, "gelfand sandwich", f"lower: {lo_note}; upper: {hi_note}")
