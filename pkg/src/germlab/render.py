"""Level-curve families gamma(f^{-1}(t)) and their SVG/CSV rendering.

Curves are traced in the source plane with marching squares and pushed
forward through gamma, so folds and cusps in the image cause no trouble.
Every vertex keeps its source point as a witness for the residual audit.
"""

import io
import json
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .exceptions import EmptyLevelSet, UsageError
from .expr import Expr, eval_array, parse
from .germs import PairDiagram, SingleDiagram

FORMAT_VERSION = "germlab render v1"
SVG_SIZE = 1000
REFINE_TOL = 1e-8
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")

SOURCE_VARS = ("x", "y")


@dataclass(frozen=True)
class DiagramDocument:
    """Text form of a single or pair diagram, as read from JSON."""

    f1: str
    gamma1: tuple
    f2: str = None
    gamma2: tuple = None
    degree: int = 12
    mode: str = "exact"

    def __post_init__(self):
        if self.mode not in ("exact", "float"):
            raise UsageError(f"mode must be 'exact' or 'float', got {self.mode!r}")
        if not isinstance(self.degree, int) or self.degree < 4:
            raise UsageError(f"degree must be an integer >= 4, got {self.degree!r}")
        if (self.f2 is None) != (self.gamma2 is None):
            raise UsageError("f2 and gamma2 must be given together")
        for g in (self.gamma1, self.gamma2):
            if g is not None and len(g) != 2:
                raise UsageError("gamma needs exactly two components")
        # parse everything once so bad text fails early
        self.components()

    @classmethod
    def from_json(cls, doc):
        if not isinstance(doc, dict) or "f1" not in doc or "gamma1" not in doc:
            raise UsageError("diagram document needs at least 'f1' and 'gamma1'")
        extra = set(doc) - {"f1", "gamma1", "f2", "gamma2", "degree", "mode"}
        if extra:
            raise UsageError(f"unknown document keys: {sorted(extra)}")
        g2 = doc.get("gamma2")
        return cls(
            str(doc["f1"]),
            tuple(str(c) for c in doc["gamma1"]),
            None if doc.get("f2") is None else str(doc["f2"]),
            None if g2 is None else tuple(str(c) for c in g2),
            doc.get("degree", 12),
            doc.get("mode", "exact"),
        )

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_json(doc)

    def to_json(self):
        out = {"f1": self.f1, "gamma1": list(self.gamma1)}
        if self.f2 is not None:
            out["f2"] = self.f2
            out["gamma2"] = list(self.gamma2)
        out["degree"] = self.degree
        out["mode"] = self.mode
        return out

    @property
    def is_pair(self):
        return self.f2 is not None

    def components(self):
        """[(f, (g1, g2))] as parsed expressions in (x, y)."""
        out = []
        for f, g in ((self.f1, self.gamma1), (self.f2, self.gamma2)):
            if f is None:
                continue
            out.append((parse(f, SOURCE_VARS), tuple(parse(c, SOURCE_VARS) for c in g)))
        return out

    def to_diagram(self):
        exact = self.mode == "exact"
        first = SingleDiagram.from_text(self.f1, self.gamma1, self.degree, exact)
        if not self.is_pair:
            return first
        return PairDiagram(first, SingleDiagram.from_text(self.f2, self.gamma2, self.degree, exact))


def _grid(domain, step):
    xmin, xmax, ymin, ymax = (float(v) for v in domain)
    if not (xmax > xmin and ymax > ymin):
        raise UsageError(f"empty domain {domain}")
    if not step > 0:
        raise UsageError("step must be positive")
    nx = int(round((xmax - xmin) / step)) + 1
    ny = int(round((ymax - ymin) / step)) + 1
    return np.linspace(xmin, xmax, nx), np.linspace(ymin, ymax, ny)


def _refine(f, t, a, b):
    """Bisection on segments a -> b (rows of points) for f = t."""
    fa = eval_array(f, a[:, 0], a[:, 1]) - t
    fb = eval_array(f, b[:, 0], b[:, 1]) - t
    sa = np.sign(fa)
    for _ in range(80):
        m = 0.5 * (a + b)
        fm = eval_array(f, m[:, 0], m[:, 1]) - t
        left = np.sign(fm) == sa
        a = np.where(left[:, None], m, a)
        b = np.where(left[:, None], b, m)
        if np.max(np.abs(b - a), initial=0.0) == 0.0:
            break
    m = 0.5 * (a + b)
    # an endpoint that already sits on the level set wins
    m = np.where((fa == 0)[:, None], a, m)
    return np.where((fb == 0)[:, None], b, m)


def trace_level_curve(f, t, domain=(-1.0, 1.0, -1.0, 1.0), step=0.01):
    """Polylines (arrays of source points) approximating ``{f = t}``.

    Vertices sit on grid edges and are bisected along their edge until
    ``|f - t| <= 1e-8``; vertices that cannot reach that are dropped.
    """
    if not isinstance(f, Expr):
        f = parse(str(f), SOURCE_VARS)
    xs, ys = _grid(domain, step)
    X, Y = np.meshgrid(xs, ys)
    Z = eval_array(f, X, Y) - t
    lines = []
    for c in measure.find_contours(Z, 0.0):
        r, q = c[:, 0], c[:, 1]
        r0, q0 = np.floor(r).astype(int), np.floor(q).astype(int)
        r1 = np.minimum(np.ceil(r).astype(int), len(ys) - 1)
        q1 = np.minimum(np.ceil(q).astype(int), len(xs) - 1)
        a = np.column_stack([xs[q0], ys[r0]])
        b = np.column_stack([xs[q1], ys[r1]])
        p = _refine(f, t, a, b)
        res = np.abs(eval_array(f, p[:, 0], p[:, 1]) - t)
        p = p[res <= REFINE_TOL]
        if len(p) >= 2:
            lines.append(p)
    if not lines:
        raise EmptyLevelSet(f"no level set f = {t} in {tuple(domain)}")
    return lines


@dataclass
class CurveFamily:
    """Traced curves of one component: per level, polylines with columns x, y, u, v, residual."""

    component: int
    levels: list = field(default_factory=list)
    polylines: list = field(default_factory=list)


def _components(d):
    if isinstance(d, DiagramDocument):
        return d.components()
    if isinstance(d, dict):
        return DiagramDocument.from_json(d).components()
    if isinstance(d, (list, tuple)):
        return list(d)
    raise UsageError("render needs a diagram document or a list of (f, gamma) expressions")


def trace_families(d, t_values, domain=(-1.0, 1.0, -1.0, 1.0), step=0.01):
    families = []
    for k, (f, gamma) in enumerate(_components(d), start=1):
        fam = CurveFamily(k)
        for t in t_values:
            polys = []
            for p in trace_level_curve(f, t, domain, step):
                x, y = p[:, 0], p[:, 1]
                u = eval_array(gamma[0], x, y)
                v = eval_array(gamma[1], x, y)
                res = np.abs(eval_array(f, x, y) - t)
                polys.append(np.column_stack([x, y, u, v, res]))
            fam.levels.append(float(t))
            fam.polylines.append(polys)
        families.append(fam)
    return families


def _num(v, digits):
    s = f"{v:.{digits}f}"
    return f"{0:.{digits}f}" if float(s) == 0 else s


def _csv(families):
    out = io.StringIO()
    out.write(f"# {FORMAT_VERSION}\n")
    out.write("component,t,path,u,v,x,y,residual\n")
    for fam in families:
        for t, polys in zip(fam.levels, fam.polylines):
            for n, p in enumerate(polys):
                for x, y, u, v, r in p:
                    out.write(f"{fam.component},{t:.10g},{n},{u:.12g},{v:.12g},{x:.12g},{y:.12g},{r:.3e}\n")
    return out.getvalue()


def _svg(families, view):
    umin, umax, vmin, vmax = (float(a) for a in view)
    sx = SVG_SIZE / (umax - umin)
    sy = SVG_SIZE / (vmax - vmin)
    out = io.StringIO()
    out.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(f"<!-- {FORMAT_VERSION} -->\n")
    out.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">\n'
    )
    for fam in families:
        color = COLORS[(fam.component - 1) % len(COLORS)]
        for t, polys in zip(fam.levels, fam.polylines):
            parts = []
            for p in polys:
                pts = [f"{_num((u - umin) * sx, 3)} {_num((vmax - v) * sy, 3)}" for u, v in p[:, 2:4]]
                parts.append("M " + " L ".join(pts))
            out.write(
                f'<path data-component="{fam.component}" data-t="{t:.10g}" fill="none" '
                f'stroke="{color}" stroke-width="1" d="{" ".join(parts)}"/>\n'
            )
    out.write("</svg>\n")
    return out.getvalue()


def render_family(d, t_values, domain=(-1.0, 1.0, -1.0, 1.0), fmt="svg", step=0.01, view=None):
    """Trace ``gamma_k(f_k^{-1}(t))`` for every component and level; return the document text.

    ``domain`` is the source rectangle; ``view`` the target rectangle shown
    in the SVG (defaults to ``domain``).
    """
    if fmt not in ("svg", "csv"):
        raise UsageError(f"format must be svg or csv, got {fmt!r}")
    families = trace_families(d, t_values, domain, step)
    if fmt == "csv":
        return _csv(families)
    return _svg(families, view or domain)


def audit(families, tol=1e-6):
    """Largest stored residual; the render is sound when it is <= ``tol``."""
    worst = 0.0
    for fam in families:
        for polys in fam.polylines:
            for p in polys:
                if len(p):
                    worst = max(worst, float(np.max(p[:, 4])))
    return worst, worst <= tol
