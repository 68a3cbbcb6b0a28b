"""Matching distance: lattice maximization, the reduced candidate set, and checks on both."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bottleneck import MatchingWitness, bottleneck_distance
from .geometry import BiFunctionSample, LineParam, box_half_width, slice_values
from .pareto import merge
from .persistence import surface_diagrams
from .special import SpecialValue, find_special_values

DEGREES = (0, 1, 2)
ROUNDING = 1e-12  # relative allowance for values equal up to floating-point rounding


def rounding_slack(v: float) -> float:
    return ROUNDING * max(1.0, abs(v))


def sliced_diagrams(s: BiFunctionSample, a: float, b: float, degree=None):
    dgms = surface_diagrams(s.mesh, slice_values(s.f1, s.f2, a, b))
    return dgms if degree is None else (dgms[degree],)


def db_with_witness(f: BiFunctionSample, g: BiFunctionSample, p: LineParam, degree=None):
    """(value, witness, degree attaining it); the first degree wins ties."""
    best = None
    for D, E in zip(sliced_diagrams(f, p.a, p.b, degree), sliced_diagrams(g, p.a, p.b, degree)):
        v, w = bottleneck_distance(D, E)
        if best is None or v > best[0]:
            best = (v, w, D.degree)
    return best


def db_at(f: BiFunctionSample, g: BiFunctionSample, p: LineParam, degree=None) -> float:
    """max over degrees of d_B(Dgm_k(f*_p), Dgm_k(g*_p)); one degree if ``degree`` is given."""
    return db_with_witness(f, g, p, degree)[0]


# ---------------------------------------------------------------------------
# batch evaluation


_POOL_STATE: dict = {}


def _init_worker(f, g, degree):
    _POOL_STATE.update(f=f, g=g, degree=degree)


def _eval_chunk(chunk):
    f, g, degree = _POOL_STATE["f"], _POOL_STATE["g"], _POOL_STATE["degree"]
    return [db_at(f, g, LineParam(a, b), degree) for a, b in chunk]


def evaluate(f, g, params, degree=None, workers: int = 1) -> np.ndarray:
    """db_at at every (a, b) in ``params``, in input order.

    Each evaluation is a pure function of its inputs, so the result does not
    depend on ``workers``.
    """
    params = [(float(a), float(b)) for a, b in params]
    if workers <= 1 or len(params) < 2 * workers:
        return np.array([db_at(f, g, LineParam(a, b), degree) for a, b in params])
    size = max(1, math.ceil(len(params) / (4 * workers)))
    chunks = [params[i : i + size] for i in range(0, len(params), size)]
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(f, g, degree)) as pool:
        out = []
        for part in pool.map(_eval_chunk, chunks):
            out.extend(part)
    return np.array(out)


# ---------------------------------------------------------------------------
# results


@dataclass
class MatchingResult:
    value: float
    argmax: LineParam
    witness: MatchingWitness
    log: list = field(default_factory=list)  # (LineParam, value), sorted by (a, b)
    degree: int | None = None  # degree attaining the value

    def to_dict(self, include_log: bool = False) -> dict:
        out = {
            "value": self.value,
            "argmax": {"a": self.argmax.a, "b": self.argmax.b},
            "degree": self.degree,
            "witness": self.witness.to_dict(),
            "evaluations": len(self.log),
        }
        if include_log:
            out["log"] = [[p.a, p.b, v] for p, v in self.log]
        return out


def _result(f, g, params, values, degree) -> MatchingResult:
    order = sorted(range(len(params)), key=lambda i: params[i])
    log = [(LineParam(*params[i]), float(values[i])) for i in order]
    if not log:
        raise ValueError("no parameters to evaluate")
    top = max(v for _, v in log)
    # first maximizer in (a, b) order; plateaus tie up to rounding
    arg = next(p for p, v in log if v >= top - rounding_slack(top))
    v, w, k = db_with_witness(f, g, arg, degree)
    return MatchingResult(top, arg, w, log, k)


def unit_nodes(n: int) -> np.ndarray:
    """n equispaced nodes on [0, 1] computed as i/(n-1), so the n-lattice is
    bitwise contained in the (2n-1)-lattice."""
    return np.arange(n) / (n - 1)


def box_nodes(n: int, C: float) -> np.ndarray:
    i = np.arange(n)
    return C * ((2 * i - (n - 1)) / (n - 1))


def lattice_params(res_a: int, res_b: int, C: float) -> list[tuple[float, float]]:
    """Lattice over [0,1] x [-C, C]; a = 1/2 is always included."""
    a = np.union1d(unit_nodes(res_a), [0.5])
    b = box_nodes(res_b, C)
    return [(float(x), float(y)) for x in a for y in b]


def matching_distance_grid(f, g, res_a: int, res_b: int, degree=None, workers: int = 1) -> MatchingResult:
    """Maximum of db_at over a uniform lattice of the box [0,1] x [-C, C]."""
    if res_a < 2 or res_b < 2:
        raise ValueError("lattice resolutions must be at least 2")
    params = lattice_params(res_a, res_b, box_half_width(f, g))
    return _result(f, g, params, evaluate(f, g, params, degree, workers), degree)


def candidate_params(C: float, b_res: int, special=(), lines=(0.0, 0.5, 1.0)):
    params = {(float(a), float(b)) for a in lines for b in box_nodes(b_res, C)}
    params.update((s.a, s.b) for s in special)
    return sorted(params)


def default_special(grids, C: float, res: int, degree=None) -> list[SpecialValue]:
    return find_special_values(merge(*grids), (0.0, 1.0), (-C, C), res, 1e-9, exclude_degenerate=True)


def matching_distance_candidates(
    f, g, grids=None, special=None, b_res: int = 404, degree=None, workers: int = 1, special_res: int = 128
) -> MatchingResult:
    """Maximum of db_at over {0, 1/2, 1} x (b lattice) together with the special values.

    If ``special`` is None it is computed from ``grids`` (the grids of f and g).
    """
    C = box_half_width(f, g)
    if special is None:
        special = default_special(grids, C, special_res) if grids else []
    params = candidate_params(C, b_res, special)
    return _result(f, g, params, evaluate(f, g, params, degree, workers), degree)


# ---------------------------------------------------------------------------
# verification


@dataclass
class TheoremReport:
    passed: bool
    tol: float
    grid: MatchingResult
    candidates: MatchingResult
    gap: float  # grid max - candidate max
    refinement_gap: float | None
    argmax_near_candidates: bool
    nearest_candidate: tuple | None
    control: MatchingResult | None = None
    control_passed: bool | None = None

    def to_dict(self) -> dict:
        out = {
            "passed": self.passed,
            "tol": self.tol,
            "gap": self.gap,
            "refinement_gap": self.refinement_gap,
            "grid": self.grid.to_dict(),
            "candidates": self.candidates.to_dict(),
            "argmax_near_candidates": self.argmax_near_candidates,
            "nearest_candidate": list(self.nearest_candidate) if self.nearest_candidate else None,
        }
        if self.control is not None:
            out["control"] = {"passed": self.control_passed, "result": self.control.to_dict()}
        return out


def _sub_result(f, g, full: MatchingResult, keep, degree) -> MatchingResult:
    params = [p.as_tuple() for p, _ in full.log if keep(p)]
    values = [v for p, v in full.log if keep(p)]
    return _result(f, g, params, values, degree)


def verify_main_theorem(
    f,
    g,
    res: int = 101,
    tol="auto",
    grids=None,
    special=None,
    b_res: int | None = None,
    degree=None,
    workers: int = 1,
    special_res: int = 128,
    control_a: float | None = 0.25,
) -> TheoremReport:
    """Compare the lattice maximum with the maximum over the candidate set.

    PASS iff candidate max >= lattice max - tol, where a rounding allowance of
    1e-12 relative is added to ``tol``.  With ``tol="auto"`` the
    tolerance is the change of the lattice maximum from ``res`` to
    ``2*res - 1``; the coarse lattice is a subset of the fine one, so the fine
    evaluations are reused.  ``control_a`` runs the same comparison against the
    single line family a = control_a, which should fail.
    """
    C = box_half_width(f, g)
    b_res = 4 * res if b_res is None else b_res
    refinement = None
    if tol == "auto":
        fine = matching_distance_grid(f, g, 2 * res - 1, 2 * res - 1, degree, workers)
        a_set = set(np.union1d(unit_nodes(res), [0.5]).tolist())
        b_set = set(box_nodes(res, C).tolist())
        grid = _sub_result(f, g, fine, lambda p: p.a in a_set and p.b in b_set, degree)
        refinement = abs(fine.value - grid.value)
        tol = refinement
    else:
        grid = matching_distance_grid(f, g, res, res, degree, workers)
        tol = float(tol)
    if special is None:
        special = default_special(grids, C, special_res) if grids else []
    cand = matching_distance_candidates(f, g, grids, special, b_res, degree, workers)
    gap = grid.value - cand.value

    # is the lattice argmax within one cell of a candidate line or special value?
    da, db = 1.0 / (res - 1), 2.0 * C / (res - 1)
    am = grid.argmax
    near = None
    for a0 in (0.0, 0.5, 1.0):
        if abs(am.a - a0) <= da:
            near = ("line", a0, am.b)
            break
    if near is None and special:
        S = np.array([[s.a, s.b] for s in special])
        ok = (np.abs(S[:, 0] - am.a) <= da) & (np.abs(S[:, 1] - am.b) <= db)
        if ok.any():
            k = int(np.flatnonzero(ok)[0])
            near = ("special", special[k].a, special[k].b)

    slack = tol + rounding_slack(grid.value)
    control = control_ok = None
    if control_a is not None:
        params = candidate_params(C, b_res, (), lines=(control_a,))
        control = _result(f, g, params, evaluate(f, g, params, degree, workers), degree)
        control_ok = control.value >= grid.value - slack
    return TheoremReport(
        cand.value >= grid.value - slack, tol, grid, cand, gap, refinement, near is not None, near, control, control_ok
    )


@dataclass
class BoundaryReport:
    checks: list  # (name, passed, detail)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in self.checks]}


def boundary_behavior_check(f, g, samples: int = 5, degree=None, atol: float = 1e-9) -> BoundaryReport:
    """Constancy, monotonicity, corner zeros and closed forms of db_at on the box boundary."""
    C = box_half_width(f, g)
    left = np.linspace(0.0, 0.5, samples)
    right = np.linspace(0.5, 1.0, samples)

    def run(points):
        return [db_at(f, g, LineParam(a, b), degree) for a, b in points]

    checks = []
    for name, pts in (("constant a<=1/2, b=-C", [(a, -C) for a in left]), ("constant a>=1/2, b=C", [(a, C) for a in right])):
        v = run(pts)
        var = max(v) - min(v)
        checks.append((name, var <= atol, {"variation": var, "values": v}))
    for name, pts in (
        ("non-increasing a->1, b=-C", [(a, -C) for a in right]),
        ("non-increasing a->0, b=C", [(a, C) for a in left[::-1]]),
    ):
        v = run(pts)
        rise = max([y - x for x, y in zip(v, v[1:])], default=0.0)
        checks.append((name, rise <= atol, {"max_increase": rise, "values": v}))
    for a, b in ((0.0, C), (1.0, -C)):
        v = db_at(f, g, LineParam(a, b), degree)
        checks.append((f"zero at ({a:g}, {'C' if b > 0 else '-C'})", v <= atol, {"value": v}))

    # below the box the slices are f1 - b (a <= 1/2) or (1-a)/a (f1 - b) (a >= 1/2)
    base = _first_component_distance(f, g, degree)
    offsets = [0.0, 0.5, 0.0, 1.0, 0.25]
    for side, avals in (("a<=1/2", left), ("a>=1/2", right)):
        errs = []
        for a, off in zip(avals, offsets):
            b = -C - off
            want = base if side == "a<=1/2" else (1.0 - a) / a * base
            errs.append(abs(db_at(f, g, LineParam(a, b), degree) - want))
        checks.append((f"closed form {side}, b<=-C", max(errs) <= atol, {"d_B(f1,g1)": base, "max_error": max(errs)}))
    return BoundaryReport(checks)


def _first_component_distance(f, g, degree=None) -> float:
    """max over degrees of d_B(Dgm f1, Dgm g1)."""
    Df = surface_diagrams(f.mesh, f.f1)
    Dg = surface_diagrams(g.mesh, g.f1)
    ks = DEGREES if degree is None else (degree,)
    return max(bottleneck_distance(Df[k], Dg[k])[0] for k in ks)
