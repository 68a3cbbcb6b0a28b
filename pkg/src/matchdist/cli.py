"""Command-line interface.

Exit codes: 0 success, 1 verification FAIL, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .geometry import DomainError, LineParam, box_half_width, normalized_slice
from .io import BUILTIN_MESHES, FunctionSpec, SpecError, function_sample, grid_for_spec, load_mesh, parse_function_spec
from .mesh import MeshError
from .pareto import ContourError, load_contours, merge, position_check, save_contours
from .persistence import surface_diagrams

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SPECIAL_CSV_HELP = "find-special CSV columns: a,b,c1,c2,ids,residual (ids = p|q;s|t contour ids)."
LOG_CSV_HELP = "compute --log-csv columns: a,b,d_B."
FUNCTION_HELP = "preset:xz, preset:affine:c1,d1,c2,d2, or a CSV file with columns vertex_index,f1,f2"


# ---------------------------------------------------------------------------
# argument types


def _res(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 2:
        raise argparse.ArgumentTypeError(f"resolution must be at least 2, got {v}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _pair(text):
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return lo, hi


def _line(text):
    a, b = _pair(text)
    try:
        return LineParam(a, b)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _function(text):
    try:
        return parse_function_spec(text)
    except SpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mesh(text):
    if ":" not in text and text != "icosahedron" and not Path(text).is_file():
        raise argparse.ArgumentTypeError(f"mesh file not found: {text}")
    return text


def _existing(text):
    if not Path(text).is_file():
        raise argparse.ArgumentTypeError(f"file not found: {text}")
    return text


def _tol(text):
    if text == "auto":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("tolerance must be non-negative")
    return v


def _degree(text):
    if text not in ("0", "1", "2"):
        raise argparse.ArgumentTypeError(f"degree must be 0, 1 or 2, got {text!r}")
    return int(text)


def _optional_float(text):
    if text == "none":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'none', got {text!r}") from None


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="matchdist",
        description="Matching distance of R^2-valued functions on closed surfaces, extended Pareto grids and special values.",
        epilog=f"Meshes: an ASCII OFF file or a built-in ({BUILTIN_MESHES}). {SPECIAL_CSV_HELP} {LOG_CSV_HELP}",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def pair_args(sp, need_g=True):
        sp.add_argument("--mesh", required=True, type=_mesh, help="OFF file or built-in mesh")
        sp.add_argument("--f", required=True, type=_function, help=FUNCTION_HELP)
        if need_g:
            sp.add_argument("--g", required=True, type=_function, help=FUNCTION_HELP)
        sp.add_argument("--degree", type=_degree, default=None, help="restrict to one homology degree (default: max over 0, 1, 2)")
        sp.add_argument("--out", help="write the JSON output here instead of stdout")

    sp = sub.add_parser("compute", help="matching distance by lattice maximization", epilog=LOG_CSV_HELP)
    pair_args(sp)
    sp.add_argument("--res", type=_res, default=101, help="lattice points per axis (default 101)")
    sp.add_argument("--res-b", type=_res, default=None, help="lattice points along b (default: --res)")
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--heatmap", help="write a parameter-space heatmap SVG")
    sp.add_argument("--log-csv", help="write every evaluation as a,b,d_B")
    sp.add_argument("--include-log", action="store_true", help="embed the evaluation log in the JSON")

    sp = sub.add_parser("verify-theorem", help="compare the lattice maximum with the candidate-set maximum")
    pair_args(sp)
    sp.add_argument("--res", type=_res, default=101)
    sp.add_argument("--tol", type=_tol, default="auto", help="'auto' (res vs 2*res-1 refinement gap) or a number")
    sp.add_argument("--b-res", type=_res, default=None, help="b lattice on the candidate lines (default 4*res)")
    sp.add_argument("--special-res", type=_res, default=128, help="lattice of the special-value search")
    sp.add_argument("--control-a", type=_optional_float, default=0.25, help="negative-control line a (or 'none')")
    sp.add_argument("--workers", type=_positive_int, default=1)
    sp.add_argument("--heatmap", help="write a parameter-space heatmap SVG with special values")

    sp = sub.add_parser("verify-position", help="check diagram coordinates against line-grid intersections")
    pair_args(sp, need_g=False)
    sp.add_argument("--contours", type=_existing, help="contour JSON (default: the analytic grid of a preset)")
    sp.add_argument("--line", type=_line, action="append", help="a,b; repeatable")
    sp.add_argument("--n-lines", type=_positive_int, default=25, help="random lines when --line is absent")
    sp.add_argument("--seed", type=int, default=20240613)
    sp.add_argument("--tol", type=float, default=0.05)
    sp.add_argument("--mode", choices=("stable", "coordinate"), default="stable")
    sp.add_argument("--svg", help="write the grid with the first line")

    sp = sub.add_parser("find-special", help="sample the special set of a pair", epilog=SPECIAL_CSV_HELP)
    sp.add_argument("--f", type=_function, help="preset for f (gives its analytic grid)")
    sp.add_argument("--g", type=_function, help="preset for g")
    sp.add_argument("--contours", type=_existing, nargs=2, metavar=("F_JSON", "G_JSON"), help="contour files instead of presets")
    sp.add_argument("--mesh", type=_mesh, help="mesh for C-bar when --b-range is absent and CSV values are used")
    sp.add_argument("--a-range", type=_pair, default=(0.0, 1.0), help="lo,hi (default 0,1)")
    sp.add_argument("--b-range", type=_pair, default=None, help="lo,hi (default -C,C); write --b-range=-1,1 for negative values")
    sp.add_argument("--res", type=_res, default=128)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--exclude-degenerate", action="store_true", help="drop witnesses built from copies of one contour")
    sp.add_argument("--out", help="CSV output (default stdout)")
    sp.add_argument("--svg", help="plot the special values in parameter space")

    sp = sub.add_parser("export-epg", help="render extended Pareto grids as SVG")
    sp.add_argument("--f", type=_function, help="preset for f")
    sp.add_argument("--g", type=_function, help="preset for g (drawn together with f)")
    sp.add_argument("--contours", type=_existing, action="append", help="contour JSON; repeatable")
    sp.add_argument("--line", type=_line, help="overlay the filtering line a,b")
    sp.add_argument("--samples", type=_res, default=512, help="points per proper arc")
    sp.add_argument("--out", required=True, help="SVG path")
    sp.add_argument("--json", help="also save the first grid as a contour JSON file")

    sp = sub.add_parser("boundary-check", help="boundary behavior of d_B on the parameter box")
    pair_args(sp)
    sp.add_argument("--samples", type=_res, default=5)

    sp = sub.add_parser("property-suite", help="seeded property checks")
    pair_args(sp)
    sp.add_argument("--seed", type=int, default=20240613)
    sp.add_argument("--quick", action="store_true", help="a quarter of the samples")
    return p


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError:
            raise AttributeError(name) from None


def parse_config(argv=None) -> RunConfig:
    """Parse and validate arguments; usage errors exit with status 2 naming the flag."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    opts = vars(ns).copy()
    cmd = opts.pop("command")
    if cmd == "find-special":
        if ns.contours is None and (ns.f is None or ns.g is None):
            parser.error("find-special needs --f and --g presets or --contours F_JSON G_JSON")
        if ns.contours is None and "csv" in (ns.f.kind, ns.g.kind):
            parser.error("find-special needs analytic presets or --contours; CSV values have no grid")
        if ns.b_range is None and ns.mesh is None and ns.contours is not None:
            parser.error("--b-range or --mesh is required with --contours")
    if cmd == "export-epg" and not (ns.f or ns.g or ns.contours):
        parser.error("export-epg needs --f, --g or --contours")
    for flag in ("f", "g"):
        spec = opts.get(flag)
        if cmd == "export-epg" and spec is not None and spec.kind == "csv":
            parser.error(f"--{flag}: CSV values have no analytic grid; pass --contours")
    if cmd == "verify-position" and ns.contours is None and ns.f.kind == "csv":
        parser.error("--contours is required when --f is a CSV file")
    return RunConfig(cmd, opts)


# ---------------------------------------------------------------------------
# output helpers


def jsonable(x):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf", "nan"."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(x, LineParam):
        return {"a": x.a, "b": x.b}
    if isinstance(x, FunctionSpec):
        return x.describe()
    return x


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, path=None):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _pair_samples(cfg):
    mesh = load_mesh(cfg.mesh)
    f = function_sample(mesh, cfg.f, "f")
    g = function_sample(mesh, cfg.g, "g") if cfg.options.get("g") is not None else None
    return mesh, f, g


def _config_record(cfg, *keys):
    return {k: cfg.options.get(k) for k in keys}


# ---------------------------------------------------------------------------
# commands


def cmd_compute(cfg) -> int:
    from .search import matching_distance_grid

    _, f, g = _pair_samples(cfg)
    res_b = cfg.res_b or cfg.res
    r = matching_distance_grid(f, g, cfg.res, res_b, cfg.degree, cfg.workers)
    out = r.to_dict(include_log=cfg.include_log)
    # workers are deliberately absent: output must not depend on them
    out["config"] = {"mesh": cfg.mesh, "f": cfg.f, "g": cfg.g, "res": cfg.res, "res_b": res_b, "degree": cfg.degree}
    out["C"] = box_half_width(f, g)
    _emit(dumps(out), cfg.out)
    if cfg.log_csv:
        with open(cfg.log_csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["a", "b", "d_B"])
            for p, v in r.log:
                w.writerow([repr(p.a), repr(p.b), repr(v)])
    if cfg.heatmap:
        from .plotting import Heatmap, emit_svg

        emit_svg(cfg.heatmap, heatmap=Heatmap.from_log(r.log, r.argmax), title=f"d_B over the parameter box, max {r.value:.6g}")
    return EXIT_OK


def cmd_verify_theorem(cfg) -> int:
    from .search import verify_main_theorem

    _, f, g = _pair_samples(cfg)
    gf, gg = grid_for_spec(cfg.f, "f"), grid_for_spec(cfg.g, "g")
    grids = [gf, gg] if gf is not None and gg is not None else None
    rep = verify_main_theorem(
        f, g, cfg.res, cfg.tol, grids, None, cfg.b_res, cfg.degree, cfg.workers, cfg.special_res, cfg.control_a
    )
    checks = [
        {"name": "candidate max >= lattice max - tol", "passed": rep.passed, "detail": {"gap": rep.gap, "tol": rep.tol}},
        {"name": "lattice argmax within one cell of the candidate set", "passed": rep.argmax_near_candidates,
         "detail": {"nearest": rep.nearest_candidate}},
    ]
    if rep.control is not None:
        checks.append({"name": f"negative control a={cfg.control_a} fails", "passed": not rep.control_passed,
                       "detail": {"control_max": rep.control.value}})
    if grids is None:
        checks.append({"name": "special values", "passed": True, "detail": "no analytic grids: candidate lines only"})
    out = {
        "command": "verify-theorem",
        "passed": rep.passed,
        "checks": checks,
        "report": rep.to_dict(),
        "config": _config_record(cfg, "mesh", "f", "g", "res", "tol", "b_res", "special_res", "control_a", "degree"),
    }
    _emit(dumps(out), cfg.out)
    if cfg.heatmap:
        from .plotting import Heatmap, emit_svg

        emit_svg(cfg.heatmap, heatmap=Heatmap.from_log(rep.grid.log, rep.grid.argmax), title="lattice d_B")
    print(f"verify-theorem: {'PASS' if rep.passed else 'FAIL'} (gap {rep.gap:.3g}, tol {rep.tol:.3g})", file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_verify_position(cfg) -> int:
    mesh, f, _ = _pair_samples(cfg)
    grid = load_contours(cfg.contours) if cfg.contours else grid_for_spec(cfg.f, "f")
    lines = cfg.line
    if not lines:
        rng = np.random.default_rng(cfg.seed)
        C = float(np.max(np.abs(f.values)))
        lines = [LineParam(float(a), float(b)) for a, b in zip(rng.uniform(0.05, 0.95, cfg.n_lines), rng.uniform(-C, C, cfg.n_lines))]
    checks, worst = [], 0.0
    for p in lines:
        if not p.interior:
            raise DomainError(f"verify-position needs 0 < a < 1, got a={p.a}")
        dg = list(surface_diagrams(mesh, normalized_slice(f, p)))
        if cfg.degree is not None:
            dg = [dg[cfg.degree]]
        r = position_check(dg, grid, p, cfg.tol, cfg.mode)
        worst = max(worst, r.worst)
        checks.append({
            "name": f"line a={p.a!r} b={p.b!r}",
            "passed": r.passed,
            "detail": {"worst": r.worst, "matched": len(r.matches), "failures": [list(x) for x in r.failures]},
        })
    passed = all(c["passed"] for c in checks)
    out = {
        "command": "verify-position",
        "passed": passed,
        "worst_residual": worst,
        "checks": checks,
        "config": _config_record(cfg, "mesh", "f", "contours", "tol", "mode", "seed", "n_lines", "degree"),
    }
    _emit(dumps(out), cfg.out)
    if cfg.svg:
        from .plotting import emit_svg

        emit_svg(cfg.svg, [grid], lines[0])
    return EXIT_OK if passed else EXIT_FAIL


def _analytic_C(spec: FunctionSpec) -> float:
    c1, d1, c2, d2 = spec.coeffs
    return max(abs(c1) + abs(d1), abs(c2) + abs(d2))


def cmd_find_special(cfg) -> int:
    from .special import find_special_values

    if cfg.contours:
        grids = [load_contours(cfg.contours[0]), load_contours(cfg.contours[1])]
    else:
        grids = [grid_for_spec(cfg.f, "f"), grid_for_spec(cfg.g, "g")]
    b_range = cfg.b_range
    if b_range is None:
        if cfg.mesh:
            mesh = load_mesh(cfg.mesh)
            C = box_half_width(function_sample(mesh, cfg.f, "f"), function_sample(mesh, cfg.g, "g")) if cfg.f and cfg.g else None
            if C is None:
                raise SpecError("--b-range is required with --contours unless --f and --g are given")
        else:
            # sup of |c x + d| on the unit sphere
            C = max(_analytic_C(cfg.f), _analytic_C(cfg.g))
        b_range = (-C, C)
    values = find_special_values(merge(*grids), cfg.a_range, b_range, cfg.res, cfg.tol, cfg.exclude_degenerate)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c1", "c2", "ids", "residual"])
    for s in values:
        w.writerow([repr(s.a), repr(s.b), s.c1, s.c2, s.ids(), repr(s.residual)])
    _emit(buf.getvalue(), cfg.out)
    if cfg.svg:
        from .plotting import emit_svg

        emit_svg(cfg.svg, special=values, title=f"{len(values)} special values")
    print(f"find-special: {len(values)} values", file=sys.stderr)
    return EXIT_OK


def cmd_export_epg(cfg) -> int:
    from .plotting import emit_svg

    grids = []
    if cfg.f is not None:
        grids.append(grid_for_spec(cfg.f, "f", cfg.samples))
    if cfg.g is not None:
        grids.append(grid_for_spec(cfg.g, "g", cfg.samples))
    grids += [load_contours(p) for p in cfg.contours or ()]
    emit_svg(cfg.out, grids, cfg.line)
    if cfg.json:
        save_contours(grids[0], cfg.json)
    return EXIT_OK


def cmd_boundary_check(cfg) -> int:
    from .search import boundary_behavior_check

    _, f, g = _pair_samples(cfg)
    rep = boundary_behavior_check(f, g, cfg.samples, cfg.degree)
    out = {"command": "boundary-check", **rep.to_dict(), "config": _config_record(cfg, "mesh", "f", "g", "samples", "degree")}
    _emit(dumps(out), cfg.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_property_suite(cfg) -> int:
    from .properties import run_suite

    _, f, g = _pair_samples(cfg)
    checks = run_suite(f, g, cfg.seed, cfg.quick)
    for c in checks:
        c.detail.pop("seconds", None)  # keep the JSON reproducible
    passed = all(c.passed for c in checks)
    out = {
        "command": "property-suite",
        "passed": passed,
        "checks": [c.to_dict() for c in checks],
        "config": _config_record(cfg, "mesh", "f", "g", "seed", "quick"),
    }
    _emit(dumps(out), cfg.out)
    return EXIT_OK if passed else EXIT_FAIL


COMMANDS = {
    "compute": cmd_compute,
    "verify-theorem": cmd_verify_theorem,
    "verify-position": cmd_verify_position,
    "find-special": cmd_find_special,
    "export-epg": cmd_export_epg,
    "boundary-check": cmd_boundary_check,
    "property-suite": cmd_property_suite,
}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse: 0 for --help/--version, 2 for usage errors
        return int(exc.code or 0)
    try:
        return COMMANDS[cfg.command](cfg)
    except (SpecError, MeshError, ContourError, DomainError, OSError) as exc:
        print(f"matchdist {cfg.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
