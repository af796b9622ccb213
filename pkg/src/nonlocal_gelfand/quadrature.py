"""Adaptive quadrature engine.

The core is a vectorized Gauss-Kronrod (10/21) bisection scheme that
integrates a whole batch of integrals at once: every refinement pass
evaluates all newly created segments, across all integrals of the batch, in
a single call of the integrand.  Higher-level modules lean on this to keep
nested radial/angular integrals affordable in pure numpy.

Pieces of the integration range are mapped to a canonical variable before
refinement:

* endpoint singularities ``(x - x0)^beta`` with ``-1 < beta < 0`` are removed
  by ``x = x0 + (x1 - x0) u^{1/(1+beta)}``;
* an infinite upper limit is folded onto ``(0, 1]`` by ``x = c / u`` (or a
  power of it when the declared tail decay is slower than ``x^-2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError, DomainError
from .gamma import sphere_area

# Kronrod 21 / Gauss 10 nodes and weights (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980976030,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_W = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_W = np.zeros(21)
# Gauss nodes sit at the odd positions of the half-table
for _i, _w in zip((1, 3, 5, 7, 9), _WG):
    GAUSS_W[_i] = _w
    GAUSS_W[20 - _i] = _w
EPS = np.finfo(float).eps

PLAIN, LEFT_POWER, RIGHT_POWER, TAIL = 0, 1, 2, 3
MIN_WIDTH = 2.0 ** -64
MAX_SEGMENTS = 400_000


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 2000
    singularity_hints: tuple = ()

    def __post_init__(self):
        if not 1e-12 <= self.rel_tol <= 1e-2:
            raise DomainError(f"rel_tol must lie in [1e-12, 1e-2], got {self.rel_tol}")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be >= 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def replace(self, **kw) -> "QuadratureSpec":
        d = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                 max_subdivisions=self.max_subdivisions,
                 singularity_hints=self.singularity_hints)
        d.update(kw)
        return QuadratureSpec(**d)

    def tightened(self, factor: float) -> "QuadratureSpec":
        """Copy with tolerances divided by ``factor`` (rel_tol clipped at 1e-12)."""
        return self.replace(rel_tol=max(self.rel_tol / factor, 1e-12),
                            abs_tol=self.abs_tol / factor,
                            singularity_hints=())


DEFAULT_SPEC = QuadratureSpec()


@dataclass
class IntegralResult:
    value: float
    error_estimate: float
    converged: bool
    subdivisions_used: int

    def require(self, what: str = "integral") -> float:
        """Return the value, raising :class:`QuadratureError` if not converged."""
        if not self.converged:
            raise QuadratureError(
                f"{what} did not converge: value={self.value!r}, "
                f"error estimate={self.error_estimate!r}, "
                f"subdivisions={self.subdivisions_used}", self)
        return self.value


# ---------------------------------------------------------------------------
# batched core


@dataclass
class Pieces:
    """Integration pieces in canonical variables.

    ``owner`` is handed to the integrand so that one call can serve many
    integrals; ``group`` says which result a piece contributes to.
    """

    lo: list = field(default_factory=list)
    hi: list = field(default_factory=list)
    kind: list = field(default_factory=list)
    a: list = field(default_factory=list)
    b: list = field(default_factory=list)
    gamma: list = field(default_factory=list)
    owner: list = field(default_factory=list)
    group: list = field(default_factory=list)

    def add(self, kind, a, b, gamma=1.0, owner=0, group=0):
        if kind == PLAIN:
            lo, hi = a, b
        else:
            lo, hi = 0.0, 1.0
        self.lo.append(lo)
        self.hi.append(hi)
        self.kind.append(kind)
        self.a.append(a)
        self.b.append(b)
        self.gamma.append(gamma)
        self.owner.append(owner)
        self.group.append(group)

    def arrays(self):
        return (np.asarray(self.lo, float), np.asarray(self.hi, float),
                np.asarray(self.kind, int), np.asarray(self.a, float),
                np.asarray(self.b, float), np.asarray(self.gamma, float),
                np.asarray(self.owner, int), np.asarray(self.group, int))


def _map_nodes(u, kind, a, b, g):
    """Map canonical nodes ``u`` (S, 21) to ``x`` and the Jacobian."""
    x = u.copy()
    jac = np.ones_like(u)
    k = kind[:, None]
    aa = a[:, None]
    bb = b[:, None]
    gg = g[:, None]
    m = (k == LEFT_POWER) | (k == RIGHT_POWER)
    if m.any():
        rows = m[:, 0]
        ur = u[rows]
        w = (bb[rows] - aa[rows])
        up = ur ** gg[rows]
        left = (k[rows] == LEFT_POWER)
        x[rows] = np.where(left, aa[rows] + w * up, bb[rows] - w * up)
        jac[rows] = w * gg[rows] * ur ** (gg[rows] - 1.0)
    m = (k == TAIL)[:, 0]
    if m.any():
        ur = u[m]
        x[m] = aa[m] * ur ** (-gg[m])
        jac[m] = aa[m] * gg[m] * ur ** (-gg[m] - 1.0)
    return x, jac


def _evaluate(f, lo, hi, kind, a, b, g, owner):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    u = mid[:, None] + half[:, None] * NODES[None, :]
    x, jac = _map_nodes(u, kind, a, b, g)
    vals = np.asarray(f(x, owner), dtype=float)
    if vals.ndim == 2:
        vals = vals[:, :, None]
    vals = vals * jac[:, :, None]
    bad = ~np.isfinite(vals).all(axis=(1, 2))
    vals = np.where(np.isfinite(vals), vals, 0.0)
    kr = half[:, None] * np.einsum("snc,n->sc", vals, KRONROD_W)
    ga = half[:, None] * np.einsum("snc,n->sc", vals, GAUSS_W)
    resabs = np.abs(half)[:, None] * np.einsum("snc,n->sc", np.abs(vals), KRONROD_W)
    err = np.maximum(np.abs(kr - ga), 50.0 * EPS * resabs)
    err[bad] = np.inf
    return kr, err


@dataclass
class BatchResult:
    value: np.ndarray        # (G, C)
    error: np.ndarray        # (G, C)
    converged: np.ndarray    # (G,)
    subdivisions: np.ndarray  # (G,)


def integrate_pieces(f, pieces: Pieces, ngroups: int, rel_tol: float, abs_tol: float,
                     max_subdivisions: int, check_components: int | None = None,
                     tolerance: Callable | None = None) -> BatchResult:
    """Integrate every group of pieces to ``max(rel_tol |I|, abs_tol)``.

    ``f(x, owner)`` receives nodes of shape (S, 21) and owner indices (S,)
    and returns (S, 21) or (S, 21, C).  Only the first ``check_components``
    components steer refinement (all of them by default).  ``tolerance``, if
    given, maps the current (ngroups, C) values to per-component absolute
    targets; callers use it when a component only enters a derived quantity
    through a small factor.
    """
    if tolerance is None:
        def tolerance(V):
            return np.maximum(rel_tol * np.abs(V), abs_tol)

    lo, hi, kind, a, b, g, owner, group = pieces.arrays()
    npiece = len(lo)
    piece_id = np.arange(npiece)
    piece_len = hi - lo
    pieces_per_group = np.bincount(group, minlength=ngroups).astype(float)
    val, err = _evaluate(f, lo, hi, kind, a, b, g, owner)
    seg_lo, seg_hi, seg_piece = lo, hi, piece_id
    ncomp = val.shape[1]
    nchk = ncomp if check_components is None else check_components
    it = 0
    while True:
        it += 1
        sgroup = group[seg_piece]
        V = np.zeros((ngroups, ncomp))
        E = np.zeros((ngroups, ncomp))
        np.add.at(V, sgroup, val)
        np.add.at(E, sgroup, err)
        T = tolerance(V)
        count = np.bincount(sgroup, minlength=ngroups)
        unconv = (E[:, :nchk] > T[:, :nchk]).any(axis=1)
        active = unconv & (count < max_subdivisions)
        if not active.any() or it > max_subdivisions:
            break
        # worst-first: split the largest errors until the rest fits in half the budget
        scaled = (err[:, :nchk] / T[sgroup][:, :nchk]).max(axis=1)
        order = np.lexsort((-scaled, sgroup))
        sg = sgroup[order]
        sc = scaled[order]
        sc = np.minimum(sc, 1e200)
        csum = np.concatenate([np.cumsum(sc[::-1])[::-1], [0.0]])
        gend = np.searchsorted(sg, sg, side="right")
        suffix = csum[:-1] - csum[gend]
        split_sorted = active[sg] & (suffix > 0.5)
        # respect the subdivision budget: a split adds one segment per group
        room = max_subdivisions - count
        rank = np.arange(len(sg)) - np.searchsorted(sg, sg, side="left")
        split_sorted &= rank < room[sg]
        split = np.zeros(len(sc), bool)
        split[order] = split_sorted
        # segments at the resolution floor cannot be refined further
        split &= (seg_hi - seg_lo) > MIN_WIDTH * piece_len[seg_piece]
        if len(seg_lo) + split.sum() > MAX_SEGMENTS:
            break
        if not split.any():
            break
        idx = np.nonzero(split)[0]
        mids = 0.5 * (seg_lo[idx] + seg_hi[idx])
        new_lo = np.concatenate([seg_lo[idx], mids])
        new_hi = np.concatenate([mids, seg_hi[idx]])
        new_piece = np.concatenate([seg_piece[idx], seg_piece[idx]])
        nv, ne = _evaluate(f, new_lo, new_hi, kind[new_piece], a[new_piece], b[new_piece],
                           g[new_piece], owner[new_piece])
        keep = ~split
        seg_lo = np.concatenate([seg_lo[keep], new_lo])
        seg_hi = np.concatenate([seg_hi[keep], new_hi])
        seg_piece = np.concatenate([seg_piece[keep], new_piece])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])
    # deterministic, position-ordered summation
    order = np.lexsort((seg_lo, seg_piece))
    sgroup = group[seg_piece[order]]
    V = np.zeros((ngroups, ncomp))
    E = np.zeros((ngroups, ncomp))
    np.add.at(V, sgroup, val[order])
    np.add.at(E, sgroup, err[order])
    T = tolerance(V)
    conv = ~(E[:, :nchk] > T[:, :nchk]).any(axis=1)
    return BatchResult(V, E, conv, np.bincount(sgroup, minlength=ngroups))


def add_interval(pieces: Pieces, lo: float, hi: float, hints=(), points=(),
                 owner: int = 0, group: int = 0, tail_exponent: float | None = None):
    """Append the pieces covering ``[lo, hi]`` (``hi`` may be ``inf``).

    ``hints`` are ``(location, exponent)`` pairs; exponents in (-1, 0) at a
    piece endpoint trigger the power substitution.  ``tail_exponent`` is the
    decay ``x^e`` of the integrand at infinity, if known.
    """
    if not lo < hi:
        if lo == hi:
            return
        raise DomainError(f"empty interval [{lo}, {hi}]")
    if math.isinf(lo):
        raise DomainError("lower limit must be finite")
    sing = {}
    brk = set()
    for loc, ex in hints:
        if math.isinf(loc):
            tail_exponent = ex if tail_exponent is None else tail_exponent
            continue
        if lo <= loc <= hi:
            brk.add(float(loc))
            if -1.0 < ex < 0.0:
                sing[float(loc)] = min(ex, sing.get(float(loc), 0.0))
    for x in points:
        if lo < x < hi:
            brk.add(float(x))
    brk.update((lo,))
    if math.isinf(hi):
        fin = sorted(brk)
        c = max(1.0, fin[-1])
        if c > lo:
            brk.add(c)
        edges = sorted(brk)
        gam = 1.0
        if tail_exponent is not None:
            p = -tail_exponent
            if 1.0 < p < 2.0:
                gam = 1.0 / (p - 1.0)
        pieces.add(TAIL, c, math.inf, gam, owner, group)
    else:
        brk.add(float(hi))
        edges = sorted(brk)
    for x0, x1 in zip(edges[:-1], edges[1:]):
        if not x1 > x0:
            continue
        bl = sing.get(x0)
        br = sing.get(x1)
        if bl is not None and br is not None:
            xm = 0.5 * (x0 + x1)
            pieces.add(LEFT_POWER, x0, xm, 1.0 / (1.0 + bl), owner, group)
            pieces.add(RIGHT_POWER, xm, x1, 1.0 / (1.0 + br), owner, group)
        elif bl is not None:
            pieces.add(LEFT_POWER, x0, x1, 1.0 / (1.0 + bl), owner, group)
        elif br is not None:
            pieces.add(RIGHT_POWER, x0, x1, 1.0 / (1.0 + br), owner, group)
        else:
            pieces.add(PLAIN, x0, x1, 1.0, owner, group)


def _vectorize(f):
    """Adapt a user integrand so it accepts node arrays of any shape."""
    probe = np.array([0.3, 0.7])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return f
    except Exception:
        pass
    return np.vectorize(lambda x: float(f(x)), otypes=[float])


def integrate_adaptive(f: Callable, lo: float, hi: float, spec: QuadratureSpec = DEFAULT_SPEC,
                       points: Sequence[float] = ()) -> IntegralResult:
    """Integrate ``f`` over ``[lo, hi]``; ``hi`` may be ``+inf``.

    ``f`` should accept numpy arrays (scalar functions are vectorized
    automatically).  Non-convergence is reported through ``converged``.
    """
    fv = _vectorize(f)
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0
    pieces = Pieces()
    add_interval(pieces, float(lo), float(hi), spec.singularity_hints, points)
    if not pieces.lo:
        return IntegralResult(0.0, 0.0, True, 0)
    res = integrate_pieces(lambda x, o: fv(x), pieces, 1, spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions)
    return IntegralResult(sign * float(res.value[0, 0]), float(res.error[0, 0]),
                          bool(res.converged[0]), int(res.subdivisions[0]))


def integrate_batch(f, intervals, spec: QuadratureSpec, hints=(), points=None,
                    check_components=None) -> BatchResult:
    """Integrate ``f(x, j)`` over ``intervals[j]`` for every ``j`` in one batch.

    ``points`` optionally gives per-integral breakpoints (list of sequences).
    """
    pieces = Pieces()
    for j, (lo, hi) in enumerate(intervals):
        pts = () if points is None else points[j]
        add_interval(pieces, float(lo), float(hi), hints, pts, owner=j, group=j)
    return integrate_pieces(f, pieces, len(intervals), spec.rel_tol, spec.abs_tol,
                            spec.max_subdivisions, check_components)


def integrate_2d_adaptive(f: Callable, domain, spec: QuadratureSpec = DEFAULT_SPEC,
                          diagonal: bool = False, diagonal_exponent: float | None = None,
                          x_hints=(), y_hints=(), x_points=(), y_points=()) -> IntegralResult:
    """Iterated adaptive integral of ``f(x, y)`` over a rectangle.

    ``domain = (x0, x1, y0, y1)``.  With ``diagonal=True`` the integrand may be
    singular on ``x = y``; the rectangle is then sheared to ``(u, x)`` with
    ``u = x - y`` so the singular set is the line ``u = 0`` (declared
    exponent ``diagonal_exponent``).  Inner integrals run at a tenth of the
    outer tolerance and their error estimates are integrated alongside the
    value, so the reported error covers both levels.
    """
    x0, x1, y0, y1 = map(float, domain)
    inner = spec.tightened(10.0)
    if diagonal:
        def inner_limits(u):
            return np.maximum(x0, y0 + u), np.minimum(x1, y1 + u)

        def g(u, xv):
            return f(xv, xv - u)

        olo, ohi = x0 - y1, x1 - y0
        ohints = ((0.0, diagonal_exponent),) if diagonal_exponent is not None else ()
        opoints = tuple(p for p in (0.0, x0 - y0, x1 - y1) if olo < p < ohi)
        ihints = ()
        ipoints = ()
    else:
        def inner_limits(xv):
            return np.full_like(xv, y0), np.full_like(xv, y1)

        g = f
        olo, ohi = x0, x1
        ohints, opoints = tuple(x_hints), tuple(x_points)
        ihints, ipoints = tuple(y_hints), tuple(y_points)

    failures = []

    def outer(xn, _owner):
        flat = xn.ravel()
        los, his = inner_limits(flat)
        res = integrate_batch(
            lambda y, j: g(flat[j][:, None] * np.ones_like(y), y),
            list(zip(los, his)), inner, ihints,
            points=[ipoints] * flat.size)
        if not res.converged.all():
            failures.append(int((~res.converged).sum()))
        out = np.stack([res.value[:, 0], res.error[:, 0]], axis=-1)
        return out.reshape(xn.shape + (2,))

    pieces = Pieces()
    add_interval(pieces, olo, ohi, ohints, opoints)
    res = integrate_pieces(outer, pieces, 1, spec.rel_tol, spec.abs_tol,
                           spec.max_subdivisions, check_components=1)
    value = float(res.value[0, 0])
    err = float(res.error[0, 0] + abs(res.value[0, 1]))
    conv = bool(res.converged[0]) and not failures and err <= max(spec.rel_tol * abs(value), spec.abs_tol)
    return IntegralResult(value, err, conv, int(res.subdivisions[0]))


# ---------------------------------------------------------------------------
# sphere moments


_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
_CHUNK = 3_000_000


def _panel_edges(psi0, npanel):
    """Per-row panel edges on [0, pi], geometrically graded away from psi0."""
    rows = psi0.size
    edges = np.empty((rows, npanel + 1))
    edges[:, 0] = 0.0
    graded = psi0 < np.pi / 8
    if graded.any():
        p0 = psi0[graded]
        ratio = (np.pi / p0) ** (1.0 / (npanel - 1))
        k = np.arange(npanel)
        edges[graded, 1:] = p0[:, None] * ratio[:, None] ** k[None, :]
        edges[graded, -1] = np.pi
    if (~graded).any():
        edges[~graded, :] = np.linspace(0.0, np.pi, npanel + 1)[None, :]
    return edges


def sphere_moments(base, slope, p: float, n: int, which=("A",)):
    """Angular integrals over the unit sphere ``S^{n-1}``.

    With ``D(psi) = base + slope * sin^2(psi/2)`` (``psi`` the angle to a fixed
    pole) this returns, for each requested key,

    * ``A``: integral of ``D^-p``
    * ``B``: integral of ``D^-(p+1)``
    * ``C``: integral of ``cos(psi) D^-(p+1)``

    Inputs broadcast; ``base > 0`` unless ``slope`` is small enough that the
    integral is finite.  The rule is a 12-point Gauss-Legendre composite on
    panels graded geometrically from the peak width ``sqrt(base/slope)``,
    accurate to roughly 1e-13 relative.
    """
    base, slope = np.broadcast_arrays(np.asarray(base, float), np.asarray(slope, float))
    shape = base.shape
    base = base.ravel()
    slope = slope.ravel()
    out = {k: np.empty(base.size) for k in which}
    if n == 1:
        far = base + slope
        if "A" in out:
            out["A"] = base ** -p + far ** -p
        if "B" in out:
            out["B"] = base ** (-p - 1) + far ** (-p - 1)
        if "C" in out:
            out["C"] = base ** (-p - 1) - far ** (-p - 1)
        return {k: v.reshape(shape) for k, v in out.items()}
    area = sphere_area(n - 2)
    with np.errstate(divide="ignore", over="ignore"):
        psi0 = np.sqrt(np.where(slope > 0, base / np.where(slope > 0, slope, 1.0), np.inf))
    psi0 = np.maximum(psi0, 1e-300)
    for start in range(0, base.size, max(1, _CHUNK // (64 * 12))):
        sl = slice(start, min(base.size, start + max(1, _CHUNK // (64 * 12))))
        p0 = psi0[sl]
        pmin = float(p0.min())
        npanel = int(np.clip(math.ceil(math.log2(math.pi / pmin)) + 2 if pmin < np.pi / 8 else 8, 8, 64))
        e = _panel_edges(p0, npanel)
        half = 0.5 * (e[:, 1:] - e[:, :-1])
        mid = 0.5 * (e[:, 1:] + e[:, :-1])
        psi = mid[:, :, None] + half[:, :, None] * _GL_X[None, None, :]
        # Weights are folded into the exponent: near the diagonal D^-p alone
        # overflows although the weighted sum is finite.
        logw = np.log(half)[:, :, None] + np.log(_GL_W)[None, None, :]
        if n > 2:
            logw = logw + (n - 2) * np.log(np.sin(psi))
        s2 = np.sin(0.5 * psi) ** 2
        logD = np.log(base[sl, None, None] + slope[sl, None, None] * s2)
        if "A" in out:
            out["A"][sl] = area * np.exp(logw - p * logD).sum(axis=(1, 2))
        if "B" in out or "C" in out:
            wq = np.exp(logw - (p + 1) * logD)
            if "B" in out:
                out["B"][sl] = area * wq.sum(axis=(1, 2))
            if "C" in out:
                out["C"][sl] = area * np.einsum("rpk,rpk->r", wq, np.cos(psi))
    return {k: v.reshape(shape) for k, v in out.items()}


def angular_kernel(t, q: float, n: int, spec: QuadratureSpec | None = None, gamma: float = 1.0):
    """Sphere integral ``int_{S^{n-1}} (1 + t^2 - 2 t gamma <theta, omega>)^{-q/2} d omega``.

    With ``gamma = 1`` this is ``int |t theta - omega|^{-q}``; for ``n = 1`` it
    reduces to ``|1-t|^{-q} + (1+t)^{-q}``.  Satisfies
    ``K(1/t) = t^q K(t)``.  ``gamma < 1`` gives the shifted kernel used by the
    Poisson extension.  Accepts scalar or array ``t``.
    """
    if n < 1:
        raise DomainError("n >= 1 violated")
    if q <= 0:
        raise DomainError("q > 0 violated")
    scalar = np.ndim(t) == 0
    t = np.asarray(t, float)
    if (t < 0).any():
        raise DomainError("t >= 0 violated")
    if gamma == 1.0 and q >= n - 1 and (t == 1.0).any():
        raise DomainError("angular kernel is singular at t = 1 for q >= n - 1")
    c2 = 1.0 - gamma * gamma
    base = (t - gamma) ** 2 + c2
    slope = 4.0 * gamma * t
    out = sphere_moments(base, slope, 0.5 * q, n, ("A",))["A"]
    return float(out) if scalar else out
