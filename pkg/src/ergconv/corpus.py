"""Regression corpus: worked examples plus seeded random measures."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ergodicity import ClassifyOptions, EngineOptions, classify, cross_check, validate
from .errors import ConsistencyError
from .groups import cyclic, free, from_spec, lattice, word
from .measure import Measure

MODELS = ("Z", "Z_n", "Z2", "F2", "F3")
NORMS = (0.5, 1.0, 1.5)
EXPONENTS = (1.0, 2.0, 3.0, math.inf)


@dataclass
class CorpusCase:
    name: str
    group: dict
    measure: list
    p: float

    def build(self) -> Measure:
        g = from_spec(self.group)
        return Measure.from_json(g, self.measure)


@dataclass
class CaseResult:
    name: str
    p: float
    verdicts: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    discrepancies: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.violations and not self.discrepancies


def _case(name, g, atoms, p, spec) -> CorpusCase:
    mu = Measure(g, atoms)
    return CorpusCase(name, spec, mu.to_json(), p)


def worked_examples() -> list:
    Z, Z3, F3 = lattice(1), cyclic(3), free(3)
    zs, z3s, f3s = {"type": "lattice", "d": 1}, {"type": "cyclic", "n": 3}, {"type": "free", "k": 3}
    out = [
        _case("shift-difference", Z, {(1,): 0.5, (2,): -0.5}, 2.0, zs),
        _case("three-atom-t1.05-p1", Z, {(1,): 0.35, (0,): 0.35, (-1,): -0.35}, 1.0, zs),
        _case("three-atom-t1.05-p2", Z, {(1,): 0.35, (0,): 0.35, (-1,): -0.35}, 2.0, zs),
        _case("free-nu", F3, {word(1): 0.36, word(2): 0.36, word(3): 0.36}, 2.0, f3s),
        _case("walk-p1", Z, {(0,): 0.5, (1,): 0.5}, 1.0, zs),
        _case("walk-p2", Z, {(0,): 0.5, (1,): 0.5}, 2.0, zs),
        _case("z3-difference-p2", Z3, {1: 1.0, 2: -1.0}, 2.0, z3s),
        _case("z3-difference-p4", Z3, {1: 1.0, 2: -1.0}, 4.0, z3s),
        _case("z3-uniform", Z3, {0: 1 / 3, 1: 1 / 3, 2: 1 / 3}, 2.0, z3s),
        _case("z3-shift-p1", Z3, {1: 1.0}, 1.0, z3s),
        _case("half-delta0", Z, {(0,): 0.5}, 2.0, zs),
    ]
    return out


def _random_element(model, g, rng):
    if model == "Z":
        return (int(rng.integers(-3, 4)),)
    if model == "Z2":
        return tuple(int(v) for v in rng.integers(-2, 3, size=2))
    if model == "Z_n":
        return int(rng.integers(0, g.order))
    k = g.rank
    length = int(rng.integers(0, 3))
    signed: list = []
    while len(signed) < length:
        x = int(rng.integers(1, k + 1)) * (1 if rng.random() < 0.5 else -1)
        if signed and signed[-1] == -x:
            continue
        signed.append(x)
    return word(*signed)


def random_case(i: int, rng: np.random.Generator) -> CorpusCase:
    model = MODELS[i % len(MODELS)]
    if model == "Z":
        g, spec = lattice(1), {"type": "lattice", "d": 1}
    elif model == "Z2":
        g, spec = lattice(2), {"type": "lattice", "d": 2}
    elif model == "Z_n":
        n = int(rng.integers(2, 13))
        g, spec = cyclic(n), {"type": "cyclic", "n": n}
    else:
        k = 2 if model == "F2" else 3
        g, spec = free(k), {"type": "free", "k": k}
    target = NORMS[(i // len(MODELS)) % len(NORMS)]
    size = int(rng.integers(1, 5))
    if g.is_finite:
        size = min(size, g.order)
    flavour = rng.choice(["positive", "real", "complex"])
    atoms: dict = {}
    while len(atoms) < size:
        atoms[_random_element(model, g, rng)] = 0
    for x in atoms:
        if flavour == "positive":
            atoms[x] = float(rng.random()) + 0.05
        elif flavour == "real":
            atoms[x] = float(rng.standard_normal())
        else:
            atoms[x] = complex(rng.standard_normal(), rng.standard_normal())
    tv = math.fsum(abs(c) for c in atoms.values())
    atoms = {x: c * target / tv for x, c in atoms.items()}
    p = EXPONENTS[int(rng.integers(0, len(EXPONENTS)))]
    name = f"rand{i:03d}-{model}-{flavour}-{target:g}"
    return _case(name, g, atoms, p, spec)


def random_corpus(count: int = 200, seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    return [random_case(i, rng) for i in range(count)]


def run_case(case: CorpusCase, engine: EngineOptions | None = None) -> CaseResult:
    mu = case.build()
    res = CaseResult(case.name, case.p)
    try:
        rep = classify(mu, case.p, ClassifyOptions())
    except ConsistencyError as exc:
        res.violations.append(str(exc))
        return res
    res.verdicts = dict(rep.verdicts)
    res.violations += validate(rep)
    for d in cross_check(mu, case.p, rep, engine):
        if d.kind == "discrepancy":
            res.discrepancies.append(d.to_json())
        elif d.kind == "skipped":
            res.skipped.append(d.to_json())
    return res


def run_corpus(cases, workers: int = 1) -> list:
    if workers <= 1:
        return [run_case(c) for c in cases]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(run_case, cases, chunksize=1))
