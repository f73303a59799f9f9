"""Streamline and stagnation-point analysis of computed wave fields.

A stream-function grid on a layer's reference rectangle, together with
the interface profile, determines the physical flow through the
straightening map.  This module inverts that map pointwise (the map is
affine in the vertical coordinate, so the inverse is closed-form),
wraps the samples in a smooth periodic spline, and exposes exact
chain-rule derivatives in physical coordinates.  On top of that sit
root-finding routines for the stagnation points, extraction of the
three critical curves (the level curve of psi_y, and the vertical
curves where psi_xy and psi_x vanish), the separatrix bounding the
critical layer, and a Hamiltonian streamline tracer.

For the generic small-amplitude picture with omega > 0 on the branch
through the smaller slip root, the lower layer has exactly three
stagnation points per period: a mirror pair on the surface at
x = zeta and 2 pi/k - zeta, and a center under the crest on
x = pi/k.  The critical layer of closed streamlines sits between the
surface and the separatrix through the surface pair.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field as _field

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.optimize import brentq

from .model import FieldGrid, WaveProfile

# Periodic padding columns on each side of the spline table.
_PAD = 8

# Relative gradient floor below which a point counts as stagnant.
_STAGNANT = 1e-13


class TopologyWarning(UserWarning):
    """Streamline topology differs from the small-amplitude picture."""


@dataclass(frozen=True)
class StagnationReport:
    """Stagnation points and critical curves of a lower-layer flow.

    ``points`` holds (x, y, classification) triples; classification is
    'surface' when the point is within half a vertical grid cell of the
    interface, 'interior-center' otherwise.  Curves are (n, 2) arrays of
    physical coordinates.
    """

    points: list
    zeta: float
    y_zeta_curve: np.ndarray
    xi_curve: np.ndarray
    xi_bar_curve: np.ndarray
    separatrix: np.ndarray
    critical_layer_area: float
    warnings: list = _field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def center(self):
        for x, y, kind in self.points:
            if kind == "interior-center":
                return (x, y)
        return None

    def to_dict(self) -> dict:
        return {
            "points": [[x, y, kind] for x, y, kind in self.points],
            "zeta": self.zeta,
            "y_zeta_curve": np.asarray(self.y_zeta_curve).tolist(),
            "xi_curve": np.asarray(self.xi_curve).tolist(),
            "xi_bar_curve": np.asarray(self.xi_bar_curve).tolist(),
            "separatrix": np.asarray(self.separatrix).tolist(),
            "critical_layer_area": self.critical_layer_area,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class Streamline:
    """A traced level curve of the stream function.

    ``closed`` means the path returned to its seed without wrapping a
    full period; ``truncated`` means it left the layer domain first.
    """

    points: np.ndarray
    closed: bool
    truncated: bool
    psi_drift: float

    def winding_number(self, center) -> int:
        p = self.points - np.asarray(center, dtype=float)
        ang = np.arctan2(p[:, 1], p[:, 0])
        dang = np.diff(ang)
        dang = (dang + np.pi) % (2.0 * np.pi) - np.pi
        return int(np.rint(dang.sum() / (2.0 * np.pi)))

    @property
    def x_extent(self) -> float:
        return float(self.points[:, 0].max() - self.points[:, 0].min())


class PushforwardField:
    """Physical-coordinate view of a reference-rectangle stream function.

    The vertical straightening is affine, so physical points map to
    reference points in closed form and all derivatives follow by the
    chain rule from a quintic spline of the reference samples (extended
    periodically in x).
    """

    def __init__(self, grid: FieldGrid, profile: WaveProfile | None = None):
        profile = profile if profile is not None else grid.profile
        if profile is None:
            raise ValueError("a pushforward needs the interface profile")
        if profile.k != grid.k:
            raise ValueError("profile and field wavenumbers differ")
        self.layer = grid.layer
        self.k = grid.k
        self.period = grid.period
        self.profile = profile
        self.sgn = 1.0 if grid.layer == "lower" else -1.0
        xs = grid.x_nodes()
        ys = grid.y_nodes()
        h = self.period / grid.nx
        x_ext = np.concatenate([xs[-_PAD:] - self.period, xs, xs[:_PAD] + self.period])
        v_ext = np.vstack([grid.values[-_PAD:], grid.values, grid.values[:_PAD]])
        self._spline = RectBivariateSpline(x_ext, ys, v_ext, kx=5, ky=5)
        self.q_lo, self.q_hi = float(ys[0]), float(ys[-1])
        self.cell_x = h
        self.cell_q = 1.0 / (grid.ny - 1)
        self.psi_scale = float(np.max(np.abs(grid.values)))
        self.ny = grid.ny

    # -- coordinate map --------------------------------------------------

    def _wrap(self, x):
        return np.mod(x, self.period)

    def reference_q(self, x, y):
        """Reference vertical coordinate of the physical point (x, y)."""
        x = np.asarray(x, dtype=float)
        eta = self.profile.evaluate(x)
        return (np.asarray(y, dtype=float) - eta) / (1.0 + self.sgn * eta)

    def surface(self, x):
        return self.profile.evaluate(x)

    def in_domain(self, x, y, margin: float = 0.0) -> bool:
        q = self.reference_q(x, y)
        return bool(np.all((q >= self.q_lo + margin) & (q <= self.q_hi - margin)))

    def vertical_cell(self, x) -> np.ndarray:
        """Physical height of one vertical grid cell at abscissa x."""
        eta = self.profile.evaluate(np.asarray(x, dtype=float))
        return (1.0 + self.sgn * eta) * self.cell_q

    # -- evaluation ------------------------------------------------------

    def psi(self, x, y):
        x = np.asarray(x, dtype=float)
        q = np.clip(self.reference_q(x, y), self.q_lo, self.q_hi)
        return self._spline.ev(self._wrap(x), q)

    def derivatives(self, x, y, second: bool = False) -> dict:
        """Chain-rule physical derivatives of psi at (x, y).

        Always returns psi_x and psi_y; with ``second`` also psi_xx,
        psi_xy, psi_yy.  The vertical map q(x, y) is affine in y, so
        q_yy = 0 and the formulas close without spline third derivatives.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        eta = self.profile.evaluate(x)
        etap = self.profile.derivative(x)
        den = 1.0 + self.sgn * eta
        q = (y - eta) / den
        qc = np.clip(q, self.q_lo, self.q_hi)
        xw = self._wrap(x)
        w_x = self._spline.ev(xw, qc, dx=1)
        w_q = self._spline.ev(xw, qc, dy=1)
        q_y = 1.0 / den
        q_x = -etap * (1.0 + self.sgn * q) / den
        out = {
            "psi_x": w_x + w_q * q_x,
            "psi_y": w_q * q_y,
        }
        if second:
            etapp = self.profile.second_derivative(x)
            w_xx = self._spline.ev(xw, qc, dx=2)
            w_qq = self._spline.ev(xw, qc, dy=2)
            w_xq = self._spline.ev(xw, qc, dx=1, dy=1)
            q_xy = -self.sgn * etap / den**2
            q_xx = (-etapp * (1.0 + self.sgn * q) / den
                    + 2.0 * self.sgn * etap**2 * (1.0 + self.sgn * q) / den**2)
            out["psi_yy"] = w_qq * q_y**2
            out["psi_xy"] = w_xq * q_y + w_qq * q_x * q_y + w_q * q_xy
            out["psi_xx"] = w_xx + 2.0 * w_xq * q_x + w_qq * q_x**2 + w_q * q_xx
        return out

    def gradient_norm_scale(self) -> float:
        return max(self.psi_scale, 1e-300)


def velocity(field: FieldGrid, profile: WaveProfile | None = None) -> dict:
    """Relative velocity samples (u - c, v) = (psi_y, -psi_x) on the grid.

    Returned at the physically mapped grid points, together with a
    finite-difference estimate of the largest discrete divergence on an
    interior subsample (analytically zero).
    """
    pf = PushforwardField(field, profile)
    x = field.x_nodes()
    eta = pf.profile.evaluate(x)[:, None]
    q = field.y_nodes()[None, :]
    y_phys = q + (1.0 + pf.sgn * q) * eta
    X = np.broadcast_to(x[:, None], y_phys.shape)
    d = pf.derivatives(X.ravel(), y_phys.ravel())
    u = d["psi_y"].reshape(y_phys.shape)
    v = -d["psi_x"].reshape(y_phys.shape)

    # Central-difference divergence on a coarse interior subsample.
    ii = np.arange(0, field.nx, max(1, field.nx // 16))
    jj = np.arange(2, field.ny - 2, max(1, field.ny // 16))
    xs = X[np.ix_(ii, jj)].ravel()
    ys = y_phys[np.ix_(ii, jj)].ravel()
    dx = 0.5 * pf.cell_x
    dy = 0.5 * pf.cell_q
    du = (pf.derivatives(xs + dx, ys)["psi_y"]
          - pf.derivatives(xs - dx, ys)["psi_y"]) / (2.0 * dx)
    dv = (-pf.derivatives(xs, ys + dy)["psi_x"]
          + pf.derivatives(xs, ys - dy)["psi_x"]) / (2.0 * dy)
    return {
        "x": np.array(X),
        "y": y_phys,
        "u_rel": u,
        "v": v,
        "divergence_sup": float(np.max(np.abs(du + dv))),
    }


# -- root-finding helpers -----------------------------------------------------


def _sign_change_roots(f, grid: np.ndarray, max_roots: int = 8) -> list:
    vals = np.array([f(g) for g in grid])
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(float(brentq(f, a, b, xtol=1e-13)))
        if len(roots) >= max_roots:
            break
    return roots


def _column_psi_y_root(pf: PushforwardField, x: float):
    """Vertical root of psi_y strictly below the surface, or None."""
    eta = float(pf.surface(x))
    top = eta - 1e-9 * (1.0 + eta)

    def f(y):
        return float(pf.derivatives(x, y)["psi_y"])

    y_grid = np.linspace(-1.0 + 1e-9, top, 64)
    roots = _sign_change_roots(f, y_grid, max_roots=2)
    return roots[0] if roots else None


def find_stagnation_points(field: FieldGrid, profile: WaveProfile | None = None,
                           n_scan: int = 512, n_curve: int = 129) -> StagnationReport:
    """Locate and classify all stagnation points of a lower-layer flow.

    The surface pair comes from sign changes of psi_y along the
    interface (psi_x vanishes there automatically, since the surface is
    a streamline); the interior center from a vertical root under the
    crest.  The report also carries the three critical curves, the
    separatrix, and the area of the critical layer.
    """
    if field.layer != "lower":
        raise ValueError("stagnation analysis targets the lower-layer field")
    pf = PushforwardField(field, profile)
    prof = pf.profile
    if prof.sup_norm() == 0.0:
        raise ValueError(
            "degenerate input: at s = 0 the whole surface is stagnant "
            "and the stagnation set is not isolated"
        )
    notes: list = []
    period = pf.period
    half = period / 2.0

    def surf_psi_y(x):
        return float(pf.derivatives(x, pf.surface(x))["psi_y"])

    x_grid = np.linspace(1e-6 * period, half - 1e-6 * period, n_scan)
    zetas = _sign_change_roots(surf_psi_y, x_grid)
    if len(zetas) != 1:
        notes.append(f"expected one surface sign change in (0, pi/k), found {len(zetas)}")
    zeta = zetas[0] if zetas else float("nan")

    points = []
    for z in zetas:
        for xx in (z, period - z):
            yy = float(pf.surface(xx))
            points.append((xx, yy, _classify(pf, xx, yy)))
    y_center = _column_psi_y_root(pf, half)
    if y_center is None:
        notes.append("no interior root of psi_y under the crest")
    else:
        points.append((half, y_center, _classify(pf, half, y_center)))

    if len(points) != 3:
        notes.append(f"unexpected topology: {len(points)} stagnation points")

    if zetas:
        y_zeta = _y_zeta_curve(pf, zeta, n_curve)
        sep = _separatrix_curve(pf, zeta, y_zeta, n_curve)
        area = float(np.trapezoid(prof.evaluate(sep[:, 0]) - sep[:, 1], sep[:, 0]))
        if not np.all(np.diff(y_zeta[: n_curve // 2 + 1, 1]) > -1e-12):
            notes.append("y_zeta is not increasing up to the crest")
    else:
        y_zeta = np.empty((0, 2))
        sep = np.empty((0, 2))
        area = 0.0
    xi = _vertical_curve(pf, "psi_xy", n_curve)
    xi_bar = _vertical_curve(pf, "psi_x", n_curve)

    for note in notes:
        warnings.warn(note, TopologyWarning, stacklevel=2)
    return StagnationReport(points=points, zeta=zeta, y_zeta_curve=y_zeta,
                            xi_curve=xi, xi_bar_curve=xi_bar, separatrix=sep,
                            critical_layer_area=area, warnings=notes)


def _classify(pf: PushforwardField, x: float, y: float) -> str:
    eta = float(pf.surface(x))
    return "surface" if abs(eta - y) <= 0.5 * float(pf.vertical_cell(x)) \
        else "interior-center"


def _y_zeta_curve(pf: PushforwardField, zeta: float, n: int) -> np.ndarray:
    """The curve psi_y = 0 between the surface stagnation points."""
    xs = np.linspace(zeta, pf.period - zeta, n)
    ys = np.empty(n)
    for idx, x in enumerate(xs):
        root = _column_psi_y_root(pf, x)
        ys[idx] = float(pf.surface(x)) if root is None else root
    return np.column_stack([xs, ys])


def _separatrix_curve(pf: PushforwardField, zeta: float, y_zeta: np.ndarray,
                      n: int) -> np.ndarray:
    """Zero level of psi strictly below the surface, endpoint-pinned.

    Column-wise bisection between the bed and the psi_y level curve; the
    stream function is monotone on each side of that curve, so the root
    is unique.  The endpoints are the surface stagnation points.
    """
    xs = y_zeta[:, 0]
    ys = np.empty_like(xs)
    ys[0] = float(pf.surface(xs[0]))
    ys[-1] = float(pf.surface(xs[-1]))
    for idx in range(1, xs.size - 1):
        x = xs[idx]
        y_hi = y_zeta[idx, 1]

        def f(y):
            return float(pf.psi(x, y))

        f_hi = f(y_hi)
        f_lo = f(-1.0 + 1e-9)
        if f_hi == 0.0 or f_hi * f_lo > 0.0:
            ys[idx] = float(pf.surface(x))
            continue
        ys[idx] = float(brentq(f, -1.0 + 1e-9, y_hi, xtol=1e-13))
    return np.column_stack([xs, ys])


def _vertical_curve(pf: PushforwardField, quantity: str, n: int) -> np.ndarray:
    """Extract the curve x = curve(y) in (0, pi/k) where a derivative
    vanishes, rising from the bed until the sign change disappears."""
    half = pf.period / 2.0
    eps = 1e-4 * half
    eta_min = float(np.min(pf.surface(np.linspace(0.0, pf.period, 256))))
    eta_max = float(np.max(pf.surface(np.linspace(0.0, pf.period, 256))))
    rows = np.linspace(-1.0 + 1e-4, eta_max - 1e-9, n)
    out = []
    for y in rows:
        if y <= eta_min:
            x_lo = eps
        else:
            # row enters the fluid where the surface crosses this height
            try:
                x_lo = brentq(lambda x: float(pf.surface(x)) - y, 1e-12, half) + eps
            except ValueError:
                x_lo = eps
        if x_lo >= half - eps:
            break

        def f(x):
            return float(pf.derivatives(x, y, second=True)[quantity])

        roots = _sign_change_roots(f, np.linspace(x_lo, half - eps, 96), max_roots=2)
        if not roots:
            if out:
                break
            continue
        out.append((roots[0], y))
    return np.array(out) if out else np.empty((0, 2))


def critical_curves(field: FieldGrid, profile: WaveProfile | None = None,
                    n_curve: int = 129) -> dict:
    """The three critical curves of the lower-layer flow.

    ``y_zeta``: psi_y = 0 between the surface stagnation points;
    ``xi``: psi_xy = 0, rising from the bed; ``xi_bar``: psi_x = 0,
    rising from the bed and terminating at the surface stagnation point.
    """
    if field.layer != "lower":
        raise ValueError("critical curves target the lower-layer field")
    pf = PushforwardField(field, profile)

    def surf_psi_y(x):
        return float(pf.derivatives(x, pf.surface(x))["psi_y"])

    half = pf.period / 2.0
    zetas = _sign_change_roots(surf_psi_y,
                               np.linspace(1e-6 * half, half * (1 - 2e-6), 512))
    if not zetas:
        raise ValueError("no surface stagnation point; curves undefined")
    return {
        "y_zeta": _y_zeta_curve(pf, zetas[0], n_curve),
        "xi": _vertical_curve(pf, "psi_xy", n_curve),
        "xi_bar": _vertical_curve(pf, "psi_x", n_curve),
    }


# -- marching squares ---------------------------------------------------------

# Segment table: for each of the 16 corner-sign cases, the edge pairs to
# connect.  Edges are 0: bottom, 1: right, 2: top, 3: left.
_MS_SEGMENTS = {
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    3: [(3, 1)], 12: [(3, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    6: [(0, 2)], 9: [(0, 2)],
    7: [(3, 2)], 8: [(3, 2)],
}


def zero_contours(values: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                  level: float = 0.0, mask_top_cells: int = 1) -> list:
    """Marching-squares level-set extraction with linear interpolation.

    Cells in the top ``mask_top_cells`` rows are skipped, which removes
    the surface streamline (itself at the extraction level) from the
    output.  Returns a list of (n, 2) polylines in grid coordinates.
    """
    v = np.asarray(values, dtype=float) - level
    nx, ny = v.shape
    segs = []
    jmax = ny - 1 - max(0, int(mask_top_cells))
    for i in range(nx - 1):
        for j in range(jmax):
            corners = (v[i, j], v[i + 1, j], v[i + 1, j + 1], v[i, j + 1])
            case = sum(1 << idx for idx, c in enumerate(corners) if c > 0.0)
            if case in (0, 15):
                continue

            def edge_point(edge):
                x0, x1 = xs[i], xs[i + 1]
                y0, y1 = ys[j], ys[j + 1]
                bl, br, tr, tl = corners
                if edge == 0:
                    t = bl / (bl - br)
                    return (x0 + t * (x1 - x0), y0)
                if edge == 1:
                    t = br / (br - tr)
                    return (x1, y0 + t * (y1 - y0))
                if edge == 2:
                    t = tl / (tl - tr)
                    return (x0 + t * (x1 - x0), y1)
                t = bl / (bl - tl)
                return (x0, y0 + t * (y1 - y0))

            if case in (5, 10):
                # saddle cell: pick pairing by the sign at the center
                center = 0.25 * sum(corners)
                if case == 5:
                    pairs = [(0, 1), (3, 2)] if center > 0 else [(3, 0), (1, 2)]
                else:
                    pairs = [(0, 3), (1, 2)] if center > 0 else [(0, 1), (3, 2)]
            else:
                pairs = _MS_SEGMENTS[case]
            for a, b in pairs:
                segs.append((edge_point(a), edge_point(b)))
    return _join_segments(segs)


def _join_segments(segs: list) -> list:
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    adjacency: dict = {}
    for a, b in segs:
        adjacency.setdefault(key(a), []).append((a, b))
        adjacency.setdefault(key(b), []).append((b, a))
    used = set()
    polylines = []
    for a, b in segs:
        if (key(a), key(b)) in used or (key(b), key(a)) in used:
            continue
        chain = [a, b]
        used.add((key(a), key(b)))
        for grow_end in (True, False):
            while True:
                tip = chain[-1] if grow_end else chain[0]
                nxt = None
                for p, q in adjacency.get(key(tip), []):
                    if (key(p), key(q)) in used or (key(q), key(p)) in used:
                        continue
                    nxt = q
                    used.add((key(p), key(q)))
                    break
                if nxt is None:
                    break
                if grow_end:
                    chain.append(nxt)
                else:
                    chain.insert(0, nxt)
        polylines.append(np.array(chain))
    polylines.sort(key=len, reverse=True)
    return polylines


def separatrix_and_layer(field: FieldGrid, profile: WaveProfile | None = None,
                         n_curve: int = 129, n_streamlines: int = 3) -> dict:
    """Separatrix, critical-layer polygon, and closed streamline samples.

    The separatrix is refined by column-wise bisection (the
    marching-squares extraction of the same level set is exposed
    separately through ``zero_contours``).  Streamlines are seeded on
    the crest line between the center and the separatrix; for the
    small-amplitude picture each closes on itself around the center.
    """
    report = find_stagnation_points(field, profile, n_curve=n_curve)
    pf = PushforwardField(field, profile)
    sep = report.separatrix
    xs = sep[:, 0]
    surface = np.column_stack([xs[::-1], pf.surface(xs[::-1])])
    layer_region = np.vstack([sep, surface])

    streamlines = []
    center = report.center
    if center is not None and sep.size:
        y_sep_mid = float(np.interp(center[0], sep[:, 0], sep[:, 1]))
        for t in np.linspace(0.35, 0.8, n_streamlines):
            seed = (center[0], center[1] + t * (y_sep_mid - center[1]))
            try:
                streamlines.append(trace_streamline(field, seed, profile=profile))
            except ValueError:
                continue
    return {
        "separatrix": sep,
        "layer_region": layer_region,
        "closed_streamline_samples": streamlines,
    }


def trace_streamline(field: FieldGrid, seed, step: float | None = None,
                     max_len: float | None = None,
                     profile: WaveProfile | None = None) -> Streamline:
    """Arclength RK4 integration of the direction field of grad-psi.

    The velocity (psi_y, -psi_x) is normalized, so ``step`` is a step in
    arclength and stagnation points are the only places the direction
    degenerates.  Tracing stops on closure (return to the seed, tested
    periodically in x), domain exit (truncated), or ``max_len``.
    """
    pf = PushforwardField(field, profile)
    x0, y0 = float(seed[0]), float(seed[1])
    if not pf.in_domain(x0, y0):
        raise ValueError(f"seed {seed} lies outside the {pf.layer} layer")
    if step is None:
        step = pf.period / 512.0
    if max_len is None:
        max_len = 6.0 * pf.period
    scale = pf.gradient_norm_scale()

    def direction(p):
        d = pf.derivatives(p[0], p[1])
        vx = float(d["psi_y"])
        vy = -float(d["psi_x"])
        norm = np.hypot(vx, vy)
        if norm < _STAGNANT * scale:
            return None
        return np.array([vx, vy]) / norm

    def rk4(p, h):
        k1 = direction(p)
        if k1 is None:
            return None, 0.0
        k2 = direction(p + 0.5 * h * k1)
        k3 = direction(p + 0.5 * h * k2) if k2 is not None else None
        k4 = direction(p + h * k3) if k3 is not None else None
        if k2 is None or k3 is None or k4 is None:
            return None, 0.0
        q = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        turn = abs(float(np.arctan2(k1[0] * k4[1] - k1[1] * k4[0],
                                    k1[0] * k4[0] + k1[1] * k4[1])))
        return q, turn

    psi0 = float(pf.psi(x0, y0))

    def pin_to_level(p):
        # Newton-project back onto {psi = psi0}; RK4 drift is secular, the
        # projection keeps the recorded orbit on the seed's level set.  One
        # iteration is enough on the flat stretches; the end caps bend the
        # level set hard enough to need a few.  The correction is normal to
        # the orbit and capped by the base step, not the locally adapted
        # one (end caps shrink h to nothing).
        for _ in range(4):
            err = float(pf.psi(p[0], p[1])) - psi0
            if abs(err) < 1e-13 * scale:
                return p
            d = pf.derivatives(p[0], p[1])
            gx, gy = float(d["psi_x"]), float(d["psi_y"])
            g2 = gx * gx + gy * gy
            if g2 < (_STAGNANT * scale) ** 2:
                return p
            cap = 0.5 * step / np.sqrt(g2)
            shift = float(np.clip(-err / g2, -cap, cap))
            q = p + shift * np.array([gx, gy])
            if not pf.in_domain(q[0], q[1]):
                return p
            p = q
        return p

    pts = [np.array([x0, y0])]
    p = pts[0].copy()
    t0 = direction(p)
    closed = False
    truncated = False
    # Critical-layer loops are extremely flat: the end caps turn on a
    # radius orders of magnitude below the flat-section step, so the
    # step adapts to the local turning angle instead of staying fixed.
    h = step
    h_min = 1e-12 * pf.period
    length = 0.0
    moved = 0.0
    while length < max_len:
        q, turn = rk4(p, h)
        if q is None:
            if h > h_min:
                h = max(0.5 * h, h_min)
                continue
            break
        if turn > 0.3 and h > h_min:
            h = max(0.5 * h, h_min)
            continue
        p = pin_to_level(q)
        pts.append(p.copy())
        length += h
        moved += h
        if turn < 0.05:
            h = min(step, 2.0 * h)
        if not pf.in_domain(p[0], p[1]):
            truncated = True
            break
        if moved > 8.0 * h:
            dx = (p[0] - x0 + pf.period / 2.0) % pf.period - pf.period / 2.0
            if np.hypot(dx, p[1] - y0) < 0.6 * h:
                wrapped = abs(p[0] - x0) > pf.period / 2.0
                if wrapped:
                    break
                # a flat loop passes within reach of the seed on its way
                # back; only the aligned return is a genuine closure
                t = direction(p)
                if t is not None and t0 is not None and float(np.dot(t, t0)) > 0.0:
                    pts.append(np.array([x0, y0]))
                    closed = True
                    break
    points = np.array(pts)
    psi_vals = pf.psi(points[:, 0], points[:, 1])
    drift = float(np.max(np.abs(psi_vals - psi_vals[0])))
    if drift > 1e-6 * scale:
        warnings.warn(
            f"stream-function drift {drift:.2e} exceeds 1e-6 of the field scale",
            TopologyWarning, stacklevel=2,
        )
    return Streamline(points=points, closed=closed, truncated=truncated,
                      psi_drift=drift)


def validity_threshold(k: int, i: int, params, s_hi: float = 0.3,
                       rel_tol: float = 0.05, nx: int = 64, ny: int = 97) -> float:
    """Empirical amplitude ceiling for the three-point streamline picture.

    Bisects on the amplitude of the second-order field for the largest s
    at which the stagnation analysis reports the expected topology with
    no warnings.  Analyses beyond the returned value should downgrade
    topological assertions to warnings.
    """
    from . import asymptotics

    def clean(s: float) -> bool:
        try:
            fld = asymptotics.lower_field_expansion(k, i, params, s, nx=nx, ny=ny)
        except ValueError:
            return False
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("error", TopologyWarning)
                report = find_stagnation_points(fld)
        except (TopologyWarning, ValueError):
            return False
        return report.count == 3

    lo = 0.0
    hi = s_hi
    s = s_hi
    while not clean(s):
        hi = s
        s *= 0.5
        if s < 1e-4:
            return 0.0
    lo = s
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if clean(mid):
            lo = mid
        else:
            hi = mid
    return lo
