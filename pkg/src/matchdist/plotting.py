"""SVG figures: extended Pareto grids with filtering lines, and parameter-space heatmaps.

Output is deterministic: the SVG carries no date and element ids are derived
from a fixed hash salt, so identical inputs give identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .geometry import LineParam  # noqa: E402
from .pareto import HORIZONTAL, PROPER, VERTICAL  # noqa: E402

OWNER_COLORS = {"f": "tab:red", "g": "tab:blue"}
KIND_STYLE = {PROPER: "-", VERTICAL: "--", HORIZONTAL: ":"}


@dataclass
class Heatmap:
    a: np.ndarray  # sorted a nodes
    b: np.ndarray  # sorted b nodes
    values: np.ndarray  # (len(a), len(b))
    argmax: tuple | None = None

    @classmethod
    def from_log(cls, log, argmax=None) -> "Heatmap":
        """From (LineParam, value) pairs on a full lattice."""
        a = np.unique([p.a for p, _ in log])
        b = np.unique([p.b for p, _ in log])
        vals = np.full((len(a), len(b)), np.nan)
        ia = {x: i for i, x in enumerate(a.tolist())}
        ib = {y: j for j, y in enumerate(b.tolist())}
        for p, v in log:
            vals[ia[p.a], ib[p.b]] = v
        return cls(a, b, vals, None if argmax is None else (argmax.a, argmax.b))


def _edges(nodes):
    nodes = np.asarray(nodes, dtype=float)
    if len(nodes) == 1:
        return np.array([nodes[0] - 0.5, nodes[0] + 0.5])
    mid = (nodes[:-1] + nodes[1:]) / 2
    return np.concatenate([[2 * nodes[0] - mid[0]], mid, [2 * nodes[-1] - mid[-1]]])


def _view(contours, line):
    pts = []
    for c in contours:
        pts += [c.anchor] if c.kind != PROPER else list(map(tuple, c.points))
    if line is not None:
        pts.append((line.b, -line.b))
    if not pts:
        return (-1.0, 1.0), (-1.0, 1.0)
    P = np.array(pts, dtype=float)
    lo, hi = P.min(0), P.max(0)
    pad = 0.25 * max(float(np.max(hi - lo)), 1.0)
    return (lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad)


def _draw_grid(ax, contours, line):
    (x0, x1), (y0, y1) = _view(contours, line)
    for c in contours:
        color = OWNER_COLORS.get(c.owner, "tab:gray")
        style = KIND_STYLE[c.kind]
        if c.kind == PROPER:
            xs, ys = c.points[:, 0], c.points[:, 1]
        elif c.kind == VERTICAL:
            xs, ys = [c.anchor[0]] * 2, [c.anchor[1], y1]
        else:
            xs, ys = [c.anchor[0], x1], [c.anchor[1]] * 2
        ax.plot(xs, ys, style, color=color, lw=1.5, gid=f"contour-{c.id}")
    if line is not None:
        if line.a == 0.0:
            xs, ys = [line.b, line.b], [y0, y1]
        elif line.a == 1.0:
            xs, ys = [x0, x1], [-line.b, -line.b]
        else:
            t = np.array([(x0 - line.b) / line.a, (x1 - line.b) / line.a])
            xs, ys = t * line.a + line.b, t * (1 - line.a) - line.b
        ax.plot(xs, ys, color="tab:green", lw=1.0, gid="filtering-line")
    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_xlabel("first component")
    ax.set_ylabel("second component")


def _draw_special(ax, special):
    S = np.array([[s.a, s.b] for s in special]).reshape(-1, 2)
    ax.plot(S[:, 0], S[:, 1], ".", ms=1.5, color="tab:purple", gid="special-values")
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("a")
    ax.set_ylabel("b")


def _draw_heatmap(fig, ax, hm: Heatmap, special=()):
    ea, eb = _edges(hm.a), _edges(hm.b)
    finite = hm.values[np.isfinite(hm.values)]
    vmin, vmax = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    norm = matplotlib.colors.Normalize(vmin, vmax if vmax > vmin else vmin + 1.0)
    cmap = matplotlib.colormaps["viridis"]
    for i in range(len(hm.a)):
        for j in range(len(hm.b)):
            v = hm.values[i, j]
            color = cmap(norm(v)) if np.isfinite(v) else (0.8, 0.8, 0.8, 1.0)
            ax.add_patch(
                Rectangle((ea[i], eb[j]), ea[i + 1] - ea[i], eb[j + 1] - eb[j], color=color, lw=0, gid=f"cell-{i}-{j}")
            )
    if len(special):
        S = np.array([[s.a, s.b] for s in special])
        ax.plot(S[:, 0], S[:, 1], ",", color="white", gid="special-values")
    if hm.argmax is not None:
        ax.plot([hm.argmax[0]], [hm.argmax[1]], "x", color="tab:red", ms=8, mew=2, gid="argmax")
    ax.set_xlim(ea[0], ea[-1])
    ax.set_ylim(eb[0], eb[-1])
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    fig.colorbar(matplotlib.cm.ScalarMappable(norm, cmap), ax=ax, label="d_B")


def emit_svg(path, grids=(), line: LineParam | None = None, heatmap: Heatmap | None = None, special=(), title=None):
    """Write a standalone SVG.

    The plane panel shows the grids and the filtering line; the parameter
    panel shows the heatmap (with special values and the argmax) or, without
    a heatmap, the special values alone.  With nothing to draw the result is
    an empty plane panel.
    """
    contours = [c for g in grids for c in g]
    params = heatmap is not None or len(special) > 0
    plane = bool(contours) or line is not None or not params
    panels = int(plane) + int(params)
    with plt.rc_context({"svg.hashsalt": "matchdist", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(1, panels, figsize=(5.5 * panels, 5), squeeze=False)
        axes = list(axes[0])
        if plane:
            _draw_grid(axes.pop(0), contours, line)
        if heatmap is not None:
            _draw_heatmap(fig, axes.pop(0), heatmap, special)
        elif params:
            _draw_special(axes.pop(0), special)
        if title:
            fig.suptitle(title)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
