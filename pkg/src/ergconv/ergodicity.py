"""Rule-based classifier for the ergodic behaviour of convolution operators.

Every verdict is yes / no / unknown and carries a trace of the rules that set
it.  Rules encode known equivalences for measures on discrete groups; since
they cannot disagree, a conflicting firing raises :class:`ConsistencyError`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, ResourceError, StructuralError
from .limits import atom_limit, max_atoms
from .groups import FINITE, FREE, LATTICE, generated_subgroup
from .measure import Measure, convolve, is_operator_normal, vague_probe
from .operator import (
    ConvOperator,
    NormInterval,
    SupportedVector,
    apply,
    iterate_cesaro,
    exact_matrix,
)
from .spectral import DualSampler, radius_estimate, spectrum2, transform_grid

YES, NO, UNKNOWN = "yes", "no", "unknown"
VERDICT_TOL = 1e-9  # |x - 1| within this counts as x = 1
AMBIGUOUS = 1e-6  # eigenvalue moduli in (1 + tol, 1 + this] are not trusted either way

PB, CB, WME, ME, UME, VE = (
    "power_bounded",
    "cesaro_bounded",
    "weakly_mean_ergodic",
    "mean_ergodic",
    "uniformly_mean_ergodic",
    "vague_ergodic",
)
MCB, POW = "measure_cesaro_bounded", "powers_converge"
VERDICTS = (PB, CB, WME, ME, UME, VE, MCB, POW)
OPERATOR_VERDICTS = (PB, CB, WME, ME, UME, POW)

# implications a => b; the contrapositive (not b => not a) is applied as well
IMPLICATIONS = [
    (UME, ME, "uniform convergence implies strong convergence"),
    (ME, WME, "strong convergence implies weak convergence"),
    (WME, CB, "weakly convergent Cesaro means are bounded (uniform boundedness)"),
    (PB, CB, "bounded powers give bounded averages"),
    (VE, MCB, "a vaguely convergent sequence of measures is bounded"),
    (MCB, CB, "|lambda_p(mu_[n])| <= |mu_[n]|"),
    (POW, PB, "norm convergent powers are bounded"),
]


def _cmp1(x: float) -> int:
    """-1, 0, +1 for x below, at, above 1 within VERDICT_TOL."""
    if x < 1 - VERDICT_TOL:
        return -1
    if x > 1 + VERDICT_TOL:
        return 1
    return 0


@dataclass
class TraceEntry:
    verdict: str
    value: str
    rule: str
    cite: str
    premises: list

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "value": self.value, "rule": self.rule, "cite": self.cite, "premises": list(self.premises)}


@dataclass
class ErgodicityReport:
    group: str
    digest: str
    p: float
    facts: dict
    verdicts: dict
    trace: list
    radius: NormInterval | None = None
    spectral: object | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "inputs": {"group": self.group, "measure_digest": self.digest, "p": "inf" if math.isinf(self.p) else self.p},
            "facts": self.facts,
            "verdicts": dict(self.verdicts),
            "trace": [t.to_json() for t in self.trace],
            "radius": None if self.radius is None else [self.radius.lo, self.radius.hi],
            "spectral": None if self.spectral is None else self.spectral.to_json(),
            "notes": list(self.notes),
        }

    def entries_for(self, name: str) -> list:
        return [t for t in self.trace if t.verdict == name]


class _Verdicts:
    def __init__(self):
        self.values = {v: UNKNOWN for v in VERDICTS}
        self.trace: list = []
        self.blocked: dict = {v: [] for v in VERDICTS}

    def set(self, name: str, value: str, rule: str, cite: str, premises: Sequence[str]):
        cur = self.values[name]
        if cur != UNKNOWN and cur != value:
            prior = [t.rule for t in self.trace if t.verdict == name]
            raise ConsistencyError(f"{name}: rule {rule} says {value} but {prior} said {cur}")
        self.trace.append(TraceEntry(name, value, rule, cite, list(premises)))
        self.values[name] = value

    def block(self, names: Sequence[str], reason: str):
        for n in names:
            if reason not in self.blocked[n]:
                self.blocked[n].append(reason)

    def get(self, name):
        return self.values[name]

    def close(self):
        changed = True
        while changed:
            changed = False
            for a, b, why in IMPLICATIONS:
                if self.values[a] == YES and self.values[b] == UNKNOWN:
                    self.set(b, YES, "implication", f"{a} => {b}", [why])
                    changed = True
                elif self.values[b] == NO and self.values[a] == UNKNOWN:
                    self.set(a, NO, "implication", f"not {b} => not {a}", [why])
                    changed = True
                elif self.values[a] == YES and self.values[b] == NO:
                    raise ConsistencyError(f"{a}=yes but {b}=no")


def validate(report: ErgodicityReport) -> list:
    """Implication-lattice violations and verdicts lacking a trace."""
    problems = []
    v = report.verdicts
    for a, b, _ in IMPLICATIONS:
        if v.get(a) == YES and v.get(b) == NO:
            problems.append(f"{a}=yes but {b}=no")
    for name, val in v.items():
        if not report.entries_for(name):
            problems.append(f"{name}={val} has no trace entry")
    return problems


# ---- finite-dimensional analysis ------------------------------------------------

def subgroup_matrix(mu: Measure, elements: Sequence) -> np.ndarray:
    """lambda(mu) restricted to l^p(H) for a finite subgroup H containing supp(mu)."""
    g = mu.group
    idx = {x: i for i, x in enumerate(elements)}
    n = len(elements)
    A = np.zeros((n, n), dtype=complex)
    for s, j in idx.items():
        for x, c in mu.atoms.items():
            A[idx[g._mul(x, s)], j] += c
    return A


@dataclass
class MatrixDynamics:
    rho: float
    ambiguous: bool
    defective_at_one: bool
    defective_elsewhere: bool
    unimodular_not_one: bool
    all_unimodular_one: bool
    note: str = ""


def matrix_dynamics(A: np.ndarray) -> MatrixDynamics:
    eig = np.linalg.eigvals(A)
    n = A.shape[0]
    mod = np.abs(eig)
    rho = float(mod.max()) if n else 0.0
    ambiguous = bool(np.any((np.abs(mod - 1) > VERDICT_TOL) & (np.abs(mod - 1) <= AMBIGUOUS)))
    uni = eig[np.abs(mod - 1) <= VERDICT_TOL]
    normal = np.linalg.norm(A @ A.conj().T - A.conj().T @ A) <= 1e-10 * max(1.0, np.linalg.norm(A)) ** 2
    d1 = delse = False
    if not normal and uni.size:
        done = []
        scale = max(1.0, np.linalg.norm(A, 2))
        for lam in uni:
            if any(abs(lam - d) <= 1e-6 for d in done):
                continue
            done.append(lam)
            alg = int(np.sum(np.abs(eig - lam) <= 1e-6))
            geom = n - np.linalg.matrix_rank(A - lam * np.eye(n), tol=1e-8 * scale)
            if alg > geom:
                if abs(lam - 1) <= 1e-6:
                    d1 = True
                else:
                    delse = True
    not_one = bool(np.any(np.abs(uni - 1) > 1e-6))
    return MatrixDynamics(rho, ambiguous, d1, delse, not_one, bool(uni.size) and not not_one,
                          "normal matrix" if normal else "rank test for unimodular eigenvalues")


# ---- the classifier ------------------------------------------------------------------

@dataclass
class ClassifyOptions:
    spectral: bool = True  # compute torus spectra for lattices
    grid: int | None = None
    refine: int = 3
    gap_tol: float = 1e-9
    radius_depth: int = 12
    power_depth: int = 16
    max_terms: int = 50_000  # cap on |mu^n| * |mu| when expanding free-group powers


def _power_norms(mu: Measure, depth: int, max_terms: int = 50_000) -> list:
    """[|mu|, |mu^2|, ...] as far as the atom budget and ``depth`` allow."""
    if mu.is_positive():
        return [mu.norm ** k for k in range(1, depth + 1)]
    out = [mu.norm]
    cur = mu
    for _ in range(depth - 1):
        if len(cur.atoms) * max(1, len(mu.atoms)) > max_terms:
            break
        try:
            cur = convolve(cur, mu)
        except ResourceError:
            break
        out.append(cur.norm)
    return out


def structural_facts(mu: Measure) -> dict:
    g = mu.group
    supp = mu.support()
    H = generated_subgroup(g, supp) if supp else generated_subgroup(g, [g.identity])
    tv = mu.norm
    normal = is_operator_normal(mu, 1e-12 * max(1.0, tv) ** 2)
    return {
        "group": g.label,
        "abelian": g.is_abelian,
        "norm": tv,
        "mass": [mu.mass().real, mu.mass().imag],
        "positive": mu.is_positive(),
        "probability": mu.is_probability(),
        "hermitian": mu.is_hermitian(),
        "operator_normal": normal,
        "H_finite": H.is_finite,
        "H_order": len(H.finite_elements) if H.is_finite else None,
        "H_amenable": H.amenable,
        "H_reason": H.reason,
        "support_size": len(supp),
        "_H": H,
    }


def classify(mu: Measure, p: float, opts: ClassifyOptions | None = None) -> ErgodicityReport:
    """Fire every applicable rule and resolve the verdicts for lambda_p(mu)."""
    opts = opts or ClassifyOptions()
    if not (p >= 1):
        raise StructuralError(f"p must lie in [1, inf], got {p}")
    g = mu.group
    facts = structural_facts(mu)
    H = facts.pop("_H")
    V = _Verdicts()
    tv = facts["norm"]
    pos, prob, normal = facts["positive"], facts["probability"], facts["operator_normal"]
    Hfin, amen = H.is_finite, H.amenable
    reflexive = 1 < p < math.inf
    pinf = math.isinf(p)
    notes = []

    # ---- measure-level data ------------------------------------------------
    pn = _power_norms(mu, opts.power_depth, opts.max_terms)
    facts["power_norms"] = pn
    k_small = next((k + 1 for k, v in enumerate(pn) if v <= 1 + VERDICT_TOL), None)
    m_abs = abs(mu.mass())

    # spectral data
    sampler = None
    spec = None
    if g.kind == LATTICE and opts.spectral:
        sampler = DualSampler.for_group(g, opts.grid, opts.refine)
        spec = spectrum2(mu, sampler, tol=opts.gap_tol)
    elif g.kind == FINITE:
        sampler = DualSampler.for_group(g)
        spec = spectrum2(mu, sampler, tol=opts.gap_tol)

    def radius_for(q: float) -> NormInterval | None:
        if g.kind == FINITE or g.kind == LATTICE:
            if spec is None:
                return None
            # one spectrum for every p on abelian or finite-dimensional models
            return NormInterval(spec.radius.lo, spec.radius.hi, spec.radius.method, "spectrum independent of p")
        if math.isinf(q):
            # |lambda_inf(nu)| = |nu| for every nu, so Gelfand's formula gives the l1 radius
            r_one = radius_estimate(mu, 1, opts.radius_depth, max_terms=opts.max_terms)
            return NormInterval(r_one.lo, r_one.hi, r_one.method, "r(lambda_inf(mu)) = r(lambda_1(mu)); " + r_one.note)
        return radius_estimate(mu, q, opts.radius_depth, max_terms=opts.max_terms)

    r = radius_for(p)
    r1 = r if (g.kind != FREE or p == 1) else radius_for(1)
    if pos and not pinf and amen == YES:
        # positive measure, amenable H: r(lambda_p(mu)) = |mu|
        if r is not None and not r.contains(tv, 1e-6):
            raise ConsistencyError(f"radius interval [{r.lo}, {r.hi}] excludes |mu| = {tv} for a positive measure with amenable H")
        r = NormInterval(tv, tv, "amenable positive", "r(lambda_p(mu)) = |mu| when H_mu is amenable")
        r1 = NormInterval(tv, tv, "amenable positive", r.note)
    if pos and r1 is not None and g.kind == FREE:
        # r(lambda_1(mu)) = |mu| for positive mu: mu(G) lies in the l1 spectrum
        r1 = NormInterval(tv, tv, "positive l1", "mu(G) = |mu| lies in the l1 spectrum")
    facts["radius"] = None if r is None else [r.lo, r.hi]
    facts["radius_p1"] = None if r1 is None else [r1.lo, r1.hi]

    # ---- measure-level verdicts -----------------------------------------------
    if k_small is not None:
        prem = [f"|mu^{k_small}| = {pn[k_small - 1]:.10g} <= 1", "sup_n |mu^n| <= max_(j<k) |mu^j| by submultiplicativity"]
        V.set(VE, YES, "bounded-powers-vague", "sup_n |mu^n| < inf => mu vague-ergodic", prem)
        V.set(MCB, YES, "bounded-powers-vague", "sup_n |mu^n| < inf => mu Cesaro bounded", prem)
    if pos:
        if _cmp1(tv) <= 0:
            V.set(MCB, YES, "positive-mass", "|mu_[n]| = (1/n) sum |mu|^k", [f"mu >= 0, |mu| = {tv:.10g} <= 1"])
        else:
            V.set(MCB, NO, "positive-mass", "|mu_[n]| = (1/n) sum |mu|^k -> inf", [f"mu >= 0, |mu| = {tv:.10g} > 1"])
    elif _cmp1(m_abs) > 0:
        V.set(MCB, NO, "mass-growth", "|mu_[n]| >= |(1/n) sum mu(G)^k| -> inf", [f"|mu(G)| = {m_abs:.10g} > 1"])
    if r1 is not None and _cmp1(r1.hi) < 0:
        prem = [f"r(lambda_1(mu)) <= {r1.hi:.10g} < 1", "|mu^n| = |lambda_1(mu^n)| -> 0"]
        V.set(VE, YES, "l1-radius-below-one", "r(lambda_1(mu)) < 1 => sup |mu^n| < inf => vague-ergodic", prem)
        V.set(MCB, YES, "l1-radius-below-one", "r(lambda_1(mu)) < 1 => |mu^n| -> 0", prem)
    if r is not None and _cmp1(r.lo) > 0 and not pinf:
        V.set(MCB, NO, "radius-above-one", "sigma(lambda_p) in sigma(lambda_1); Cesaro bounded => r <= 1",
              [f"r(lambda_p(mu)) >= {r.lo:.10g} > 1"])
    if pos and Hfin and not pinf:
        val = YES if _cmp1(tv) <= 0 else NO
        V.set(VE, val, "positive-finite-H", "mu >= 0, H_mu finite: vague-ergodic <=> |mu| <= 1",
              [f"|mu| = {tv:.10g}", f"H_mu finite of order {len(H.finite_elements)}"])
    if pos and amen == YES and not Hfin:
        val = YES if _cmp1(tv) <= 0 else NO
        V.set(VE, val, "positive-amenable", "mu >= 0, H_mu amenable: vague-ergodic <=> |mu| <= 1",
              [f"|mu| = {tv:.10g}", "H_mu amenable"])
    if V.get(MCB) == NO:
        V.set(VE, NO, "vague-needs-cesaro-bound", "vague-ergodic => Cesaro bounded measure", ["measure not Cesaro bounded"])
    if p == 1:
        # |lambda_1(nu)| = |nu|, so operator and measure Cesaro boundedness coincide
        if V.get(MCB) != UNKNOWN:
            V.set(CB, V.get(MCB), "l1-isometric", "|lambda_1(mu_[n])| = |mu_[n]|", [f"measure Cesaro bounded = {V.get(MCB)}"])

    # ---- operator-level rules ----------------------------------------------------
    if k_small is not None:
        V.set(PB, YES, "young-powers", "|lambda_p(mu^n)| <= |mu^n|", [f"|mu^{k_small}| <= 1"])
    if p == 1 and V.get(PB) == UNKNOWN and pos:
        V.set(PB, YES if _cmp1(tv) <= 0 else NO, "l1-powers", "|lambda_1(mu^n)| = |mu|^n for mu >= 0", [f"|mu| = {tv:.10g}"])
    if reflexive and V.get(PB) == YES:
        V.set(ME, YES, "reflexive-mean-ergodic", "power bounded on a reflexive space => mean ergodic", [f"1 < p = {p} < inf"])

    if r is not None:
        if _cmp1(r.hi) < 0:
            prem = [f"r(lambda_p(mu)) <= {r.hi:.10g} < 1 ({r.note})"]
            V.set(UME, YES, "radius-below-one", "r(T) < 1 => T^n -> 0 and T_[n] -> 0 in norm", prem)
            V.set(PB, YES, "radius-below-one", "r(T) < 1 => sup |T^n| < inf", prem)
            V.set(POW, YES, "radius-below-one", "r(T) < 1 => T^n -> 0 in norm", prem)
        elif _cmp1(r.lo) > 0:
            prem = [f"r(lambda_p(mu)) >= {r.lo:.10g} > 1"]
            V.set(CB, NO, "radius-above-one", "Cesaro bounded => r(T) <= 1", prem)
        else:
            V.block(OPERATOR_VERDICTS, f"spectral radius interval [{r.lo:.6g}, {r.hi:.6g}] straddles 1")

    # finite H_mu: exact finite-dimensional analysis, valid on every l^p(G) with p < inf
    if Hfin and not pinf:
        A = subgroup_matrix(mu, H.finite_elements)
        dyn = matrix_dynamics(A)
        facts["H_matrix_radius"] = dyn.rho
        pre = [f"H_mu finite (order {A.shape[0]}); l^p(G) splits into copies of l^p(H_mu)", f"spectral radius {dyn.rho:.10g}"]
        if dyn.rho > 1 + AMBIGUOUS:
            for v in (CB,):
                V.set(v, NO, "finite-H-dynamics", "r(T) > 1 => not Cesaro bounded", pre)
        elif dyn.ambiguous:
            V.block(OPERATOR_VERDICTS, "eigenvalue modulus within 1e-6 of 1 but not within 1e-9")
        elif dyn.rho < 1 - VERDICT_TOL:
            V.set(UME, YES, "finite-H-dynamics", "r(T) < 1 => T_[n] -> 0 in norm", pre)
            V.set(PB, YES, "finite-H-dynamics", "r(T) < 1 => bounded powers", pre)
            V.set(POW, YES, "finite-H-dynamics", "r(T) < 1 => T^n -> 0", pre)
        elif dyn.defective_at_one:
            V.set(CB, NO, "finite-H-dynamics", "Jordan block at 1 => |T_[n]| grows like n", pre + [dyn.note])
        elif dyn.defective_elsewhere:
            V.set(CB, YES, "finite-H-dynamics", "Jordan blocks only at unimodular eigenvalues != 1 keep T_[n] bounded", pre + [dyn.note])
            V.set(PB, NO, "finite-H-dynamics", "Jordan block at a unimodular eigenvalue => |T^n| grows like n", pre + [dyn.note])
            V.set(ME, NO, "finite-H-dynamics", "Jordan block at unimodular eigenvalue != 1 => T_[n] oscillates", pre + [dyn.note])
        else:
            pre2 = pre + ["unimodular eigenvalues semisimple", dyn.note]
            V.set(PB, YES, "finite-H-dynamics", "r(T) <= 1 with semisimple unimodular eigenvalues => bounded powers", pre2)
            V.set(UME, YES, "finite-H-dynamics", "finite dimension: power bounded => uniformly mean ergodic", pre2)
            V.set(POW, NO if dyn.unimodular_not_one else YES, "finite-H-dynamics",
                  "T^n converges iff every unimodular eigenvalue equals 1", pre2)

    # Hilbert space, normal operator
    if p == 2 and normal:
        n2 = None
        if spec is not None:
            n2 = spec.norm2
        elif g.kind == FREE and r is not None:
            n2 = r  # r = |T| for normal T
        if n2 is not None:
            pre = [f"mu operator-normal, |lambda_2(mu)| in [{n2.lo:.10g}, {n2.hi:.10g}]"]
            if _cmp1(n2.hi) <= 0:
                for v in (PB, ME, WME, CB):
                    V.set(v, YES, "hilbert-normal", "normal T: ME <=> WME <=> PB <=> CB <=> |T| = r(T) <= 1", pre)
            elif _cmp1(n2.lo) > 0:
                for v in (PB, ME, WME, CB):
                    V.set(v, NO, "hilbert-normal", "normal T: ME <=> WME <=> PB <=> CB <=> |T| = r(T) <= 1", pre)
            else:
                V.block((PB, ME, WME, CB, UME), "|lambda_2(mu)| not separated from 1")
            gap = spec.gap_at_one if spec is not None else None
            if _cmp1(n2.hi) <= 0 and gap is not None:
                if gap.kind == "gap":
                    V.set(UME, YES, "hilbert-normal-gap", "normal T: UME <=> |T| <= 1 and 1 not an accumulation point of sigma(T)",
                          pre + [f"gap at 1: delta >= {gap.delta:.6g}" if not math.isinf(gap.delta) else "no spectral value differs from 1"])
                elif gap.kind == "accumulation":
                    V.set(UME, NO, "hilbert-normal-gap", "normal T: UME => 1 not an accumulation point of sigma(T)",
                          pre + [f"spectral values != 1 within {gap.min_distance:.3g} of 1"])
                else:
                    V.block((UME,), "gap at 1 undetermined")
            if gap is not None and _cmp1(n2.lo) > 0:
                V.set(UME, NO, "hilbert-normal-gap", "UME => |T| <= 1 for normal T", pre)
        else:
            V.block((PB, ME, WME, CB, UME), "no norm data for lambda_2(mu)")
    elif p == 2:
        V.block((ME, WME, UME), "lambda_2(mu) is not normal")

    # abelian: nonempty proper level set {mu^ = 1} on a connected dual
    if g.kind == LATTICE and p == 2 and spec is not None and spec.gap_at_one.A_mu == "nonempty":
        V.set(UME, NO, "level-set-not-clopen", "UME => A_mu = {mu^ = 1} open and closed; the torus is connected",
              [f"A_mu contains {spec.gap_at_one.roots[0].tolist()} and is not the whole torus"])

    # powers of a normal operator with unimodular spectrum other than 1
    if p == 2 and normal and spec is not None:
        vals = spec.values
        if vals is not None and np.any((np.abs(np.abs(vals) - 1) <= VERDICT_TOL) & (np.abs(vals - 1) > 1e-6)):
            V.set(POW, NO, "unimodular-spectrum", "|T^n - T^(n+1)| >= |z^n (1 - z)| for z in sigma(T)",
                  ["a spectral value z with |z| = 1, z != 1"])
        elif g.kind == LATTICE:
            wit = _unimodular_witness(mu, sampler)
            if wit is not None:
                V.set(POW, NO, "unimodular-spectrum", "|T^n - T^(n+1)| >= |mu^(t)|^n |1 - mu^(t)|",
                      [f"|mu^({wit[0]:.6g})| = 1 with mu^ = {wit[1]:.6g}"])

    # positive measures
    if pos and not pinf:
        if p == 1:
            if _cmp1(tv) < 0:
                V.set(UME, YES, "positive-l1-contraction", "mu >= 0, |mu| < 1 => |lambda_1(mu^n)| = |mu|^n -> 0",
                      [f"|mu| = {tv:.10g} < 1"])
            elif _cmp1(tv) > 0:
                V.set(ME, NO, "positive-l1-expansion", "mu >= 0, |mu| > 1 => |lambda_1(mu^n)|/n unbounded",
                      [f"|mu| = {tv:.10g} > 1"])
            if prob:
                V.set(ME, YES if Hfin else NO, "probability-l1", "probability mu: lambda_1(mu) ME <=> H_mu finite",
                      [f"H_mu {'finite' if Hfin else 'infinite'}"])
        if amen == YES and reflexive:
            val = YES if _cmp1(tv) <= 0 else NO
            pre = [f"mu >= 0, H_mu amenable, |mu| = {tv:.10g}", f"1 < p = {p} < inf"]
            for v in (PB, ME, WME, CB):
                V.set(v, val, "positive-amenable", "PB <=> ME <=> WME <=> CB <=> |mu| <= 1 <=> vague-ergodic", pre)
            V.set(VE, val, "positive-amenable", "PB <=> ME <=> WME <=> CB <=> |mu| <= 1 <=> vague-ergodic", pre)
            if not Hfin:
                V.set(UME, YES if _cmp1(tv) < 0 else NO, "positive-amenable-infinite",
                      "mu >= 0, H_mu amenable and infinite: UME <=> |mu| < 1", pre)
        elif amen == UNKNOWN:
            V.block((PB, ME, WME, CB, VE), "amenability of H_mu unknown")
        if Hfin:
            val = YES if _cmp1(tv) <= 0 else NO
            V.set(ME, val, "positive-finite-H", "mu >= 0, H_mu finite: ME <=> |mu| <= 1 <=> vague-ergodic",
                  [f"|mu| = {tv:.10g}", "H_mu finite"])
        if _cmp1(tv) <= 0:
            # positive l1 density with norm <= 1
            if Hfin:
                V.set(UME, YES, "positive-l1-density", "f >= 0, |f| <= 1: UME <=> supp in a finite subgroup or r < 1",
                      [f"|mu| = {tv:.10g} <= 1", "H_mu finite"])
            elif p == 1:
                V.set(UME, YES if _cmp1(tv) < 0 else NO, "positive-l1-density",
                      "f >= 0, |f| <= 1: UME <=> supp in a finite subgroup or r < 1",
                      [f"|mu| = {tv:.10g}", "H_mu infinite", "r(lambda_1(mu)) = mu(G) = |mu| (trivial character)"])
            elif amen == NO:
                V.set(UME, YES, "positive-l1-density", "f >= 0, |f| <= 1: UME <=> supp in a finite subgroup or r < 1",
                      [f"|mu| = {tv:.10g} <= 1", "H_mu not amenable, so r(lambda_p(mu)) < |mu| <= 1"])
            elif amen == YES:
                V.set(UME, YES if _cmp1(tv) < 0 else NO, "positive-l1-density",
                      "f >= 0, |f| <= 1: UME <=> supp in a finite subgroup or r < 1",
                      [f"|mu| = {tv:.10g}", "H_mu amenable and infinite, so r(lambda_p(mu)) = |mu|"])
            if prob and not Hfin and reflexive and amen != UNKNOWN:
                V.set(UME, YES if amen == NO else NO, "probability-noncompact",
                      "probability, H_mu infinite: UME <=> r < 1 <=> H_mu not amenable", [f"H_mu amenable = {amen}"])

    # |mu| <= 1 with infinite H_mu: UME <=> 1 not in the spectrum
    if _cmp1(tv) <= 0 and not Hfin and not pinf and g.kind == LATTICE and spec is not None:
        gap = spec.gap_at_one
        pre = [f"|mu| = {tv:.10g} <= 1", "H_mu infinite", "abelian: sigma(lambda_p(mu)) = closure of mu^(dual) for all p"]
        if gap.kind == "gap" and gap.A_mu == "empty":
            V.set(UME, YES, "contraction-noncompact", "|mu| <= 1, H_mu noncompact: UME <=> 1 not in sigma(lambda_p(mu))",
                  pre + [f"min |mu^ - 1| >= {gap.delta:.6g}"])
        elif gap.kind == "accumulation" or gap.A_mu == "nonempty":
            V.set(UME, NO, "contraction-noncompact", "|mu| <= 1, H_mu noncompact: UME <=> 1 not in sigma(lambda_p(mu))",
                  pre + ["mu^ takes the value 1"])

    # abelian p != 2: spectrum equals the closed range of mu^ for every p
    if g.kind == LATTICE and pos and normal and amen == YES and spec is not None and not pinf and _cmp1(tv) <= 0:
        gap = spec.gap_at_one
        pre = [f"mu >= 0, |mu| = {tv:.10g} <= 1", "abelian: sigma(lambda_p(mu)) = closure of mu^(dual)"]
        if gap.kind == "gap":
            V.set(UME, YES, "positive-normal-gap", "mu >= 0 normal, H_mu amenable: UME <=> |mu| <= 1 and 1 not accumulation point", pre)
        elif gap.kind == "accumulation":
            V.set(UME, NO, "positive-normal-gap", "mu >= 0 normal, H_mu amenable: UME <=> |mu| <= 1 and 1 not accumulation point", pre)

    # non-reflexive endpoints
    if p in (1, math.inf) and pos and normal:
        if _cmp1(tv) < 0 or (_cmp1(tv) == 0 and Hfin):
            val = YES
        elif _cmp1(tv) > 0 or (_cmp1(tv) == 0 and not Hfin):
            val = NO
        pre = [f"mu >= 0 operator-normal, |mu| = {tv:.10g}", f"H_mu {'finite (finite spectrum)' if Hfin else 'infinite'}"]
        cite = "p in {1, inf}: UME <=> |mu| < 1, or |mu| = 1 with H_mu compact and 1 isolated in sigma(mu)"
        V.set(UME, val, "nonreflexive-positive", cite, pre)
        if pinf:
            V.set(ME, val, "nonreflexive-positive", "on l^inf: ME <=> UME for these operators", pre)
    elif pinf:
        V.block((ME, WME, UME), "p = inf handled only for positive operator-normal measures")

    # l^1 has the Schur property: weak and strong mean ergodicity agree
    if p == 1:
        for a, b in ((ME, WME), (WME, ME)):
            if V.get(a) != UNKNOWN and V.get(b) == UNKNOWN:
                V.set(b, V.get(a), "schur-l1", "l^1: weakly convergent sequences converge in norm", [f"{a} = {V.get(a)}"])

    # vague ergodicity against weak mean ergodicity for reflexive p
    V.close()
    if reflexive:
        if V.get(VE) == YES:
            V.set(WME, YES, "vague-to-weak", "vague-ergodic => lambda_p(mu) weakly mean ergodic for 1 < p < inf", ["mu vague-ergodic"])
        if V.get(WME) == NO:
            V.set(VE, NO, "vague-to-weak", "vague-ergodic => lambda_p(mu) weakly mean ergodic for 1 < p < inf", ["not weakly mean ergodic"])
        if V.get(MCB) == YES and V.get(WME) == YES and V.get(VE) == UNKNOWN:
            V.set(VE, YES, "vague-from-weak", "Cesaro bounded measure and WME for some 1 < p < inf => vague-ergodic",
                  ["measure Cesaro bounded", "lambda_p(mu) weakly mean ergodic"])
    if Hfin and not pinf:
        if V.get(VE) == YES and V.get(ME) == UNKNOWN:
            V.set(ME, YES, "vague-compact", "H_mu compact: vague-ergodic => ME for all 1 <= p < inf", ["mu vague-ergodic"])
        if V.get(MCB) == YES and V.get(ME) == YES and V.get(VE) == UNKNOWN:
            V.set(VE, YES, "vague-compact", "H_mu compact: Cesaro bounded and ME for some p => vague-ergodic",
                  ["measure Cesaro bounded", "lambda_p(mu) mean ergodic"])
    V.close()
    if p == 1:
        for a, b in ((ME, WME), (WME, ME)):
            if V.get(a) != UNKNOWN and V.get(b) == UNKNOWN:
                V.set(b, V.get(a), "schur-l1", "l^1: weakly convergent sequences converge in norm", [f"{a} = {V.get(a)}"])
        V.close()

    for name in VERDICTS:
        if V.get(name) == UNKNOWN:
            why = V.blocked[name] or ["no applicable rule decides this property"]
            V.trace.append(TraceEntry(name, UNKNOWN, "unresolved", "", why))

    rep = ErgodicityReport(g.label, mu.digest(), p, facts, dict(V.values), V.trace, r, spec, notes)
    probs = validate(rep)
    if probs:
        raise ConsistencyError("; ".join(probs))
    return rep


def _unimodular_witness(mu: Measure, sampler: DualSampler):
    """An angle where |mu^| = 1 but mu^ != 1, if the grid holds one."""
    vals = transform_grid(mu, sampler)
    hit = np.nonzero((np.abs(np.abs(vals) - 1) <= 1e-12) & (np.abs(vals - 1) > 1e-6))[0]
    if hit.size == 0:
        return None
    i = int(hit[0])
    pts = sampler.grid_points() if mu.group.rank > 1 else sampler.angles()[:, None]
    return float(pts[i][0]), complex(vals[i])


# ---- fixed points -------------------------------------------------------------------

@dataclass
class FixedPointResult:
    kind: str  # "zero_only" | "nontrivial" | "unknown"
    witness: SupportedVector | None = None
    residual: float = math.nan
    reason: str = ""


def fixed_point_analysis(mu: Measure, p: float = 2, tol: float = 1e-10) -> FixedPointResult:
    """Fixed vectors of lambda_p(mu) in l^p(G), p < inf."""
    if math.isinf(p):
        raise StructuralError("fixed-point analysis needs p < inf")
    g = mu.group
    supp = mu.support()
    H = generated_subgroup(g, supp or [g.identity])
    tv = mu.norm
    if H.is_finite:
        A = subgroup_matrix(mu, H.finite_elements)
        n = A.shape[0]
        _, s, vh = np.linalg.svd(A - np.eye(n))
        if s[-1] <= tol * max(1.0, tv):
            w = vh[-1].conj()
            w = w / w[np.argmax(np.abs(w))]
            wit = SupportedVector(g, dict(zip(H.finite_elements, w)), check=False)
            res = (apply(ConvOperator(mu, p), wit) - wit).norm(p) / wit.norm(p)
            if res <= max(tol, 1e-9):
                return FixedPointResult("nontrivial", wit, res, "kernel of lambda(mu) - I on l^p(H_mu); translates fill l^p(G)")
        return FixedPointResult("zero_only", None, float(s[-1]), "lambda(mu) - I is invertible on l^p(H_mu)")
    if _cmp1(tv) <= 0:
        return FixedPointResult("zero_only", None, 0.0, "|mu| <= 1 and H_mu infinite: no nonzero fixed points")
    r = radius_estimate(mu, p, 8) if g.kind == FREE else None
    if g.kind != FREE:
        try:
            rep = spectrum2(mu)
            r = rep.radius
            if rep.gap_at_one.A_mu == "empty" and rep.gap_at_one.kind == "gap":
                return FixedPointResult("zero_only", None, 0.0, "1 is not in the spectrum, so lambda(mu) - I is invertible")
        except StructuralError:
            r = None
    if r is not None and _cmp1(r.hi) < 0:
        return FixedPointResult("zero_only", None, 0.0, "r(lambda_p(mu)) < 1, so lambda(mu) - I is invertible")
    if g.kind == LATTICE:
        # a finitely supported fixed vector has (mu^ - 1) f^ = 0 as trigonometric polynomials;
        # mu^ != 1 means f^ = 0, and l^p fixed vectors are excluded for p <= 2 by Plancherel/Hausdorff-Young
        if p <= 2:
            return FixedPointResult("zero_only", None, 0.0, "f^ (mu^ - 1) = 0 with mu^ - 1 vanishing on a null set")
    return FixedPointResult("unknown", None, math.nan, "no criterion applies")


# ---- cross-check against the empirical engines ------------------------------------------

@dataclass
class Discrepancy:
    kind: str  # "discrepancy" | "skipped" | "agree"
    verdict: str
    classifier: str
    empirical: str
    detail: str

    def to_json(self):
        return self.__dict__.copy()


@dataclass
class EngineOptions:
    horizon: int | None = None
    tol: float = 1e-8
    probe_tol: float = 1e-3
    ume_ns: tuple = (16, 32, 64, 128, 256, 512)
    probe_atoms: int = 200_000


def default_horizon(mu: Measure) -> int:
    g = mu.group
    if g.kind == FINITE:
        return 4096
    if g.kind == LATTICE:
        return 1024 if g.rank == 1 else 128
    return 8


def _avg_powers(z: np.ndarray, n: int) -> np.ndarray:
    """(1/n) sum_{k=1}^n z^k, elementwise."""
    z = np.asarray(z, dtype=complex)
    near = np.abs(1 - z) < 1e-12
    safe = np.where(near, 0.5, z)
    out = safe * (1 - safe ** n) / (n * (1 - safe))
    return np.where(near, 1.0, out)


def cesaro_gap_lower_bounds(mu: Measure, ns: Sequence[int]) -> list:
    """Lower bounds for |lambda_p(mu_[n] - mu_[2n])|, valid for every p.

    On abelian groups each transform value is a spectral value of the
    difference; on finite groups the matrix spectral radius is used.
    """
    g = mu.group
    if g.kind == LATTICE or (g.kind == FINITE and g.is_abelian):
        vals = transform_grid(mu, DualSampler.for_group(g))
        return [float(np.abs(_avg_powers(vals, n) - _avg_powers(vals, 2 * n)).max()) for n in ns]
    if g.kind == FINITE:
        A = exact_matrix(ConvOperator(mu, 2))
        eig = np.linalg.eigvals(A)
        return [float(np.abs(_avg_powers(eig, n) - _avg_powers(eig, 2 * n)).max()) for n in ns]
    raise StructuralError("no Cesaro gap bound for free groups")


def cross_check(mu: Measure, p: float, report: ErgodicityReport, opts: EngineOptions | None = None) -> list:
    """Compare classifier verdicts with Cesaro iteration, the vague probe and window norms."""
    opts = opts or EngineOptions()
    out: list = []
    g = mu.group
    v = report.verdicts
    N = opts.horizon or default_horizon(mu)
    H = generated_subgroup(g, mu.support() or [g.identity])

    if math.isinf(p):
        out.append(Discrepancy("skipped", ME, v[ME], "-", "no l^inf engine"))
    else:
        tests = [SupportedVector.delta(g)]
        if H.is_finite and len(H.finite_elements) > 1:
            tests += [SupportedVector.delta(g, x) for x in H.finite_elements[1:]]
        try:
            it = iterate_cesaro(ConvOperator(mu, p), tests, N, opts.tol)
            emp = it.sot_converges
            if v[ME] == YES and emp == "no":
                out.append(Discrepancy("discrepancy", ME, YES, emp, "; ".join(t.reason for t in it.traces if t.verdict == "no")))
            elif v[ME] == NO and emp == "yes" and (v[CB] == YES or H.is_finite):
                # finitely supported vectors are dense and T_[n] bounded: convergence on them would give ME
                detail = "Cesaro means converge on a dense set although ME = no"
                if H.is_finite:
                    detail = "Cesaro means converge on a basis of l^p(H_mu) although ME = no"
                out.append(Discrepancy("discrepancy", ME, NO, emp, detail))
            else:
                out.append(Discrepancy("agree", ME, v[ME], emp, it.traces[0].reason))
        except ResourceError as exc:
            out.append(Discrepancy("skipped", ME, v[ME], "-", str(exc)))

    # vague probe
    try:
        with atom_limit(min(max_atoms(), opts.probe_atoms)):
            probe = vague_probe(mu, N, tol=opts.probe_tol)
        if v[VE] == YES and probe.cesaro_bounded == "no":
            out.append(Discrepancy("discrepancy", VE, YES, "unbounded", probe.cesaro_bounded_witness))
        elif v[MCB] == NO and probe.cesaro_bounded == "yes":
            out.append(Discrepancy("discrepancy", MCB, NO, "bounded", probe.cesaro_bounded_witness))
        elif v[MCB] == YES and probe.cesaro_bounded == "no":
            out.append(Discrepancy("discrepancy", MCB, YES, "unbounded", probe.cesaro_bounded_witness))
        else:
            out.append(Discrepancy("agree", VE, v[VE], probe.cesaro_bounded, probe.note or "probe consistent"))
    except ResourceError as exc:
        out.append(Discrepancy("skipped", VE, v[VE], "-", str(exc)))

    # uniform convergence: lower bounds for |T_[n] - T_[2n]| must keep shrinking
    if v[UME] == YES and not math.isinf(p) and g.kind != FREE:
        lows = cesaro_gap_lower_bounds(mu, opts.ume_ns)
        stalled = all(b >= 0.999 * a for a, b in zip(lows, lows[1:])) and lows[-1] > 0.05
        if stalled:
            out.append(Discrepancy("discrepancy", UME, YES, "stalled", f"lower bounds {lows}"))
        else:
            out.append(Discrepancy("agree", UME, YES, "decaying", f"lower bounds {[round(x, 6) for x in lows]}"))
    return out
