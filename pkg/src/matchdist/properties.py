"""Seeded property checks over a pair of sampled functions, as used by ``property-suite``.

Each check returns a :class:`Check` (name, passed, detail) so the CLI and the
acceptance tests report the same numbers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bottleneck import bottleneck_distance, brute_force_bottleneck
from .geometry import (
    BiFunctionSample,
    LineParam,
    box_half_width,
    lipschitz_bound,
    lipschitz_bound_check,
    normalized_slice,
    uniform_norm,
)
from .persistence import PersistenceDiagram, diagrams, surface_diagrams

DEFAULT_SEED = 20240613


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def random_diagram(rng, max_points: int, degree: int = 0, essential_prob: float = 0.15) -> PersistenceDiagram:
    """Small diagrams on a coarse value grid so that ties and equal costs occur."""
    k = int(rng.integers(0, max_points + 1))
    births = rng.integers(0, 8, size=k) / 4.0
    deaths = births + rng.integers(0, 8, size=k) / 4.0
    deaths = np.where(rng.random(k) < essential_prob, np.inf, deaths)
    return PersistenceDiagram(degree, np.stack([births, deaths], 1))


def bottleneck_oracle(n_pairs: int = 500, max_points: int = 8, seed: int = DEFAULT_SEED) -> Check:
    """bottleneck_distance against brute-force enumeration on random small diagrams."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    mismatches = []
    for i in range(n_pairs):
        n1 = int(rng.integers(0, max_points + 1))
        D1 = random_diagram(rng, n1)
        D2 = random_diagram(rng, max_points - len(D1))
        fast, _ = bottleneck_distance(D1, D2)
        slow = brute_force_bottleneck(D1, D2, max_points)
        if fast != slow:
            mismatches.append({"pair": i, "fast": fast, "brute": slow})
    elapsed = time.perf_counter() - start
    return Check(
        "bottleneck oracle",
        not mismatches,
        {"pairs": n_pairs, "mismatches": len(mismatches), "first": mismatches[:3], "seconds": elapsed},
    )


def _random_params(rng, n, C):
    return [LineParam(float(a), float(b)) for a, b in zip(rng.random(n), rng.uniform(-C, C, n))]


def lipschitz(samples, n_pairs: int = 1000, seed: int = DEFAULT_SEED, atol: float = 1e-12) -> Check:
    """Sup-norm Lipschitz bound of the normalized slices on random parameter pairs, with C = C-bar."""
    rng = np.random.default_rng(seed)
    C = max(uniform_norm(s) for s in samples)
    violations, worst = 0, -np.inf
    for s in samples:
        ps, qs = _random_params(rng, n_pairs, C), _random_params(rng, n_pairs, C)
        for p, q in zip(ps, qs):
            r = lipschitz_bound_check(s, p, q, C, atol)
            violations += not r.passed
            worst = max(worst, r.lhs - r.rhs)
    return Check(
        "lipschitz bound",
        violations == 0,
        {"pairs": n_pairs * len(samples), "violations": violations, "max_lhs_minus_rhs": float(worst), "C": C},
    )


def limit_formulas(s: BiFunctionSample, bs=None, steps=(1e-2, 1e-4, 1e-6)) -> Check:
    """Slices at a -> 0 and a -> 1 approach max{f1 - b, 0} and max{0, f2 + b}."""
    norm = uniform_norm(s)
    bs = np.linspace(-norm, norm, 5) if bs is None else bs
    rows, ok = [], True
    for b in bs:
        left = np.maximum(s.f1 - b, 0.0)
        right = np.maximum(0.0, s.f2 + b)
        errs0 = [float(np.max(np.abs(normalized_slice(s, LineParam(h, b)).values - left))) for h in steps]
        errs1 = [float(np.max(np.abs(normalized_slice(s, LineParam(1.0 - h, b)).values - right))) for h in steps]
        bound = float(1e-5 * (norm + abs(b)))
        floor = 1e-12 * (norm + abs(b))  # errors already at rounding level need not shrink further
        good = all(
            e[-1] <= bound and all(y <= max(x, floor) for x, y in zip(e, e[1:])) for e in (errs0, errs1)
        )
        ok &= good
        rows.append({"b": float(b), "errors_a0": errs0, "errors_a1": errs1, "bound": bound, "passed": good})
    return Check("limit formulas", ok, {"rows": rows})


def swap_symmetry(s: BiFunctionSample, n: int = 200, seed: int = DEFAULT_SEED) -> Check:
    """f*_(a,b) = h*_(1-a,-b) for h = (f2, f1); exact when 1 - (1 - a) == a in floating point."""
    rng = np.random.default_rng(seed)
    h = s.swapped()
    C = uniform_norm(s)
    bad = 0
    for p in _random_params(rng, n, C):
        a = np.ldexp(np.floor(np.ldexp(p.a, 20)), -20)  # dyadic, so 1 - a is exact
        x = normalized_slice(s, LineParam(a, p.b)).values
        y = normalized_slice(h, LineParam(1.0 - a, -p.b)).values
        bad += not np.array_equal(x, y)
    return Check("swap symmetry", bad == 0, {"params": n, "mismatches": bad})


def stability(s: BiFunctionSample, n: int = 50, scale: float = 0.05, seed: int = DEFAULT_SEED) -> Check:
    """d_B of perturbed slices never exceeds the sup-norm of the perturbation."""
    rng = np.random.default_rng(seed)
    worst, bad = -np.inf, 0
    C = uniform_norm(s)
    for p in _random_params(rng, n, C):
        x = normalized_slice(s, p).values
        y = x + rng.uniform(-scale, scale, len(x))
        lhs = max(bottleneck_distance(D, E)[0] for D, E in zip(surface_diagrams(s.mesh, x), surface_diagrams(s.mesh, y)))
        rhs = float(np.max(np.abs(x - y)))
        bad += lhs > rhs + 1e-12
        worst = max(worst, lhs - rhs)
    return Check("stability", bad == 0, {"trials": n, "violations": bad, "max_lhs_minus_rhs": float(worst)})


def routes_agree(s: BiFunctionSample, n: int = 10, seed: int = DEFAULT_SEED) -> Check:
    """Union-find and explicit reduction give the same diagrams."""
    rng = np.random.default_rng(seed)
    bad = 0
    for p in _random_params(rng, n, uniform_norm(s)):
        v = normalized_slice(s, p).values
        bad += diagrams(s.mesh, v, "surface") != diagrams(s.mesh, v, "reduction")
    return Check("persistence routes agree", bad == 0, {"slices": n, "mismatches": bad})


def db_continuity(f, g, n: int = 100, seed: int = DEFAULT_SEED) -> Check:
    """|db(p) - db(p')| is bounded by the sum of the two Lipschitz bounds; db is symmetric in (f, g)."""
    from .search import db_at

    rng = np.random.default_rng(seed)
    C = box_half_width(f, g)
    nf, ng = uniform_norm(f), uniform_norm(g)
    bad = asym = 0
    for p in _random_params(rng, n, C):
        q = LineParam(min(1.0, max(0.0, p.a + rng.normal(0, 0.05))), float(np.clip(p.b + rng.normal(0, 0.2), -C, C)))
        x, y = db_at(f, g, p), db_at(f, g, q)
        bound = lipschitz_bound(nf, p, q, C) + lipschitz_bound(ng, p, q, C)
        bad += abs(x - y) > bound + 1e-12
        asym += x != db_at(g, f, p)
    return Check("db continuity and symmetry", bad == 0 and asym == 0, {"pairs": n, "violations": bad, "asymmetric": asym})


def run_suite(f, g, seed: int = DEFAULT_SEED, quick: bool = False) -> list[Check]:
    k = 4 if quick else 1
    return [
        bottleneck_oracle(500 // k, seed=seed),
        lipschitz([f, g], 1000 // k, seed=seed),
        limit_formulas(f),
        limit_formulas(g),
        swap_symmetry(f, seed=seed),
        stability(f, 50 // k, seed=seed),
        routes_agree(f, max(2, 10 // k), seed=seed),
        db_continuity(f, g, 100 // k, seed=seed),
    ]
