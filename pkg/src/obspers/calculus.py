"""Module calculus: shifts, refinement, restriction-extension, smoothing,
image-pair modules and their diagonal, and the persistent rank.

Several operations return their result together with explicit witness
morphisms (the smoothing pair, the discretization pair); those witnesses are
exactly the maps used in the corresponding existence proofs and they verify as
honest interleavings, which is what the tests check.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import ValidationError
from .stepmodule import (Grid, Morphism, StepModule, compose, factor_morphism,
                         restrict_extend, union_grids)

# restrict_extend is re-exported from here because refinement and
# discretization conceptually belong to the calculus layer.
__all__ = [
    "refine", "restrict_extend", "shift", "eta", "eta_on", "smooth",
    "image_pairs", "diagonal", "persistent_rank", "PairGridModule",
    "SmoothResult", "DiscretizationPair", "restrict_morphism",
    "shift_morphism", "modules_match", "morphisms_match", "compose_matched",
    "lattice_grid", "discretize", "restriction_pair", "mono_epi_report",
]


def _q(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _add(coords, eps):
    return tuple(c + eps for c in coords)


def refine(v, grid):
    """Restriction-extension onto a refinement of v's grid.

    Every coordinate of v.grid must appear in grid; the result then evaluates
    identically to v at every rational point, and steps inside old cells are
    identities.
    """
    for a in range(v.grid.n_axes):
        if not set(v.grid.axes[a]) <= set(grid.axes[a]):
            raise ValidationError(f"axis {a}: grid does not refine the module's grid")
    return restrict_extend(v, grid)


def shift(v, eps):
    """The shifted module V[eps]: same data on the grid translated by -eps,
    so the extension satisfies shift(v, eps)(s) = v(s + eps).

    eps may be negative (translation is a group action); the metric layer only
    ever asks for eps >= 0.
    """
    return StepModule(v.field, v.grid.translate(-_q(eps)), v.dims, v.steps)


def eta_on(v, eps, grid):
    """The shift morphism eta_eps: V -> V[eps] restricted-extended to the
    given grid: the component at q is the internal structure map of v from
    the anchor of q to the anchor of q + eps."""
    eps = _q(eps)
    if eps < 0:
        raise ValidationError("eta needs eps >= 0")
    source = restrict_extend(v, grid)
    target = restrict_extend(shift(v, eps), grid)
    comps = {}
    for q in grid.points():
        c = grid.coords(q)
        a = v.grid.anchor(c)
        b = v.grid.anchor(_add(c, eps))
        if a is None:
            comps[q] = v.field.zeros(target.dims[q], 0)
        else:
            comps[q] = v.path_map(a, b)
    return Morphism(source, target, comps)


def eta(v, eps):
    """eta_eps: V -> V[eps] on the common refinement of the two grids.
    eta(v, 0) is the identity."""
    eps = _q(eps)
    grid = union_grids(v.grid, v.grid.translate(-eps)) if eps > 0 else v.grid
    return eta_on(v, eps, grid)


def restrict_morphism(m, grid):
    """Restriction-extension of a morphism: components are sampled at
    anchors, endpoints are the restricted-extended modules."""
    source = restrict_extend(m.source, grid)
    target = restrict_extend(m.target, grid)
    comps = {}
    for q in grid.points():
        a = m.grid.anchor(grid.coords(q))
        if a is None:
            comps[q] = m.field.zeros(0, 0)
        else:
            comps[q] = m.comps[a]
    return Morphism(source, target, comps)


def shift_morphism(m, eps):
    """m[eps]: the same components between the shifted endpoints."""
    return Morphism(shift(m.source, eps), shift(m.target, eps), m.comps)


def modules_match(a, b):
    """True when the two modules have the same extension to R^n (exact data
    equality after restriction to the common refinement)."""
    if a.field != b.field or a.grid.n_axes != b.grid.n_axes:
        return False
    u = union_grids(a.grid, b.grid)
    return restrict_extend(a, u) == restrict_extend(b, u)


def morphisms_match(m1, m2):
    """True when the two morphisms agree as morphisms of extensions."""
    if m1.field != m2.field or m1.grid.n_axes != m2.grid.n_axes:
        return False
    u = union_grids(m1.grid, m2.grid)
    r1 = restrict_morphism(m1, u)
    r2 = restrict_morphism(m2, u)
    if r1.source != r2.source or r1.target != r2.target:
        return False
    return all(np.array_equal(r1.comps[g], r2.comps[g]) for g in u.points())


def compose_matched(m2, m1):
    """m2 after m1 where the endpoints agree only up to extension: both are
    restricted to the common refinement first."""
    u = union_grids(m1.grid, m2.grid)
    r1 = restrict_morphism(m1, u)
    r2 = restrict_morphism(m2, u)
    if r1.target != r2.source:
        raise ValidationError("composition endpoints differ as extensions")
    return compose(r2, r1)


# ---------------------------------------------------------------------------
# Smoothing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothResult:
    """S_eps V = im(eta_eps) together with the explicit interleaving pair:
    g includes S into V[eps], f corestricts the 2eps structure map of V onto
    S[eps].  (module, f, g) verify as an eps-interleaving of (V, S)."""

    module: StepModule
    f: Morphism
    g: Morphism
    eps: Fraction


def smooth(v, eps):
    eps = _q(eps)
    if eps < 0:
        raise ValidationError("smooth needs eps >= 0")
    m = eta(v, eps)
    fac = factor_morphism(m)
    s = fac.image
    g = fac.image_inclusion  # S -> V[eps] as extensions
    big = s.grid
    # f: V -> S[eps] on the refinement v.grid u (S.grid - eps)
    f_grid = union_grids(v.grid, big.translate(-eps))
    source = restrict_extend(v, f_grid)
    target = restrict_extend(shift(s, eps), f_grid)
    comps = {}
    for qi in f_grid.points():
        q = f_grid.coords(qi)
        av = v.grid.anchor(q)
        tg = big.anchor(_add(q, eps))
        if tg is None or target.dims[qi] == 0:
            comps[qi] = v.field.zeros(target.dims[qi], source.dims[qi])
            continue
        if av is None:
            comps[qi] = v.field.zeros(target.dims[qi], 0)
            continue
        # ambient anchor of S's value at tg, the image of the step from tg
        amb = v.grid.anchor(_add(big.coords(tg), eps))
        basis = fac.image_inclusion.comps[tg]
        vec = v.path_map(av, amb)
        x = v.field.solve(basis, vec)
        if x is None:
            raise ValidationError("smoothing component left the image subspace")
        comps[qi] = x
    f = Morphism(source, target, comps)
    return SmoothResult(s, f, g, eps)


# ---------------------------------------------------------------------------
# Image pairs and the diagonal
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairGridModule:
    """A module over the poset of comparable grid point pairs {(p, q): p <= q}.

    Steps exist toward (p + e_i, q) whenever p + e_i <= q (kind 0) and toward
    (p, q + e_i) always (kind 1).  For image modules, kind-0 steps are
    injective and kind-1 steps are surjective.
    """

    field: object
    grid: Grid
    dims: dict
    steps: dict  # ((p, q), kind, axis) -> matrix

    def dim(self, p, q):
        return self.dims[(tuple(p), tuple(q))]


def _pairs(grid):
    pts = grid.points()
    return [(p, q) for p in pts for q in pts if all(x <= y for x, y in zip(p, q))]


def image_pairs(v):
    """The image functor applied to v: value at (p, q) is im(V_{p -> q}), with
    inclusion steps in p and corestricted structure maps in q."""
    F = v.field
    pts = v.grid.points()
    path = {}
    for p in pts:
        path[(p, p)] = F.identity(v.dims[p])
        for q in pts:
            if q == p or any(x > y for x, y in zip(p, q)):
                continue
            for axis in range(v.grid.n_axes):
                if q[axis] > p[axis]:
                    prev = q[:axis] + (q[axis] - 1,) + q[axis + 1:]
                    if (p, prev) in path:
                        path[(p, q)] = F.matmul(v.steps[(prev, axis)], path[(p, prev)])
                        break
    bases = {pq: F.column_space_basis(m) for pq, m in path.items()}
    dims = {pq: b.shape[1] for pq, b in bases.items()}
    steps = {}
    for (p, q), b in bases.items():
        for axis in range(v.grid.n_axes):
            p2 = v.grid.successor(p, axis)
            if p2 is not None and all(x <= y for x, y in zip(p2, q)):
                x = F.solve(bases[(p2, q)], b)
                steps[((p, q), 0, axis)] = x
            q2 = v.grid.successor(q, axis)
            if q2 is not None:
                x = F.solve(bases[(p, q2)], F.matmul(v.steps[(q, axis)], b))
                steps[((p, q), 1, axis)] = x
    return PairGridModule(F, v.grid, dims, steps)


def _pair_move(grid, pq, kind, axis):
    p, q = pq
    if kind == 0:
        p2 = grid.successor(p, axis)
        if p2 is None or any(x > y for x, y in zip(p2, q)):
            return None
        return (p2, q)
    q2 = grid.successor(q, axis)
    return None if q2 is None else (p, q2)


def mono_epi_report(pm):
    """Violations of the structural law of image modules: kind-0 steps must be
    injective, kind-1 steps surjective, and all elementary squares commute."""
    F = pm.field
    out = []
    for ((p, q), kind, axis), m in pm.steps.items():
        r = F.rank(m)
        if kind == 0 and r != m.shape[1]:
            out.append(f"step at ({p},{q}) raising p on axis {axis} is not injective")
        if kind == 1 and r != m.shape[0]:
            out.append(f"step at ({p},{q}) raising q on axis {axis} is not surjective")
    moves = [(k, a) for k in (0, 1) for a in range(pm.grid.n_axes)]
    for pq in _pairs(pm.grid):
        for i, m1 in enumerate(moves):
            for m2 in moves[i + 1:]:
                a = _pair_move(pm.grid, pq, *m1)
                b = _pair_move(pm.grid, pq, *m2)
                if a is None or b is None:
                    continue
                ab = _pair_move(pm.grid, a, *m2)
                ba = _pair_move(pm.grid, b, *m1)
                if ab is None or ba is None or ab != ba:
                    continue
                one = F.matmul(pm.steps[(a, *m2)], pm.steps[(pq, *m1)])
                two = F.matmul(pm.steps[(b, *m1)], pm.steps[(pq, *m2)])
                if not np.array_equal(one, two):
                    out.append(f"pair square at {pq} moves {m1},{m2} does not commute")
    return out


def diagonal(pm):
    """Restriction of a pair module to the diagonal (p, p); for image modules
    this recovers the original module on the nose."""
    grid = pm.grid
    dims = {g: pm.dims[(g, g)] for g in grid.points()}
    steps = {}
    for g in grid.points():
        for axis in range(grid.n_axes):
            h = grid.successor(g, axis)
            if h is None:
                continue
            up_q = pm.steps[((g, g), 1, axis)]
            up_p = pm.steps[((g, h), 0, axis)]
            steps[(g, axis)] = pm.field.matmul(up_p, up_q)
    return StepModule(pm.field, grid, dims, steps)


def persistent_rank(v, eps):
    """sup over s of rank(V_s -> V_{s+eps}); attained at anchors of the
    refinement grid u (grid - eps), so the supremum is a finite max."""
    eps = _q(eps)
    if eps < 0:
        raise ValidationError("persistent_rank needs eps >= 0")
    grid = union_grids(v.grid, v.grid.translate(-eps)) if eps > 0 else v.grid
    best = 0
    for q in grid.points():
        c = grid.coords(q)
        a = v.grid.anchor(c)
        if a is None:
            continue
        b = v.grid.anchor(_add(c, eps))
        best = max(best, v.field.rank(v.path_map(a, b)))
    return best


# ---------------------------------------------------------------------------
# Discretization onto a lattice, with the explicit interleaving pair
# ---------------------------------------------------------------------------

def lattice_grid(eps, lo_corner, hi_corner):
    """The grid eps*Z^n clipped to the smallest lattice box containing
    [lo_corner, hi_corner]."""
    eps = _q(eps)
    if eps <= 0:
        raise ValidationError("lattice spacing must be positive")
    axes = []
    for lo, hi in zip(lo_corner, hi_corner):
        lo, hi = _q(lo), _q(hi)
        start = eps * (lo / eps).__floor__()
        stop = eps * -((-hi / eps).__floor__())
        count = int((stop - start) / eps) + 1
        axes.append(tuple(start + k * eps for k in range(count)))
    return Grid(tuple(axes))


@dataclass(frozen=True)
class DiscretizationPair:
    """V_Q = restrict_extend(v, Q) with the density-proof interleaving:
    f_s = V_{s -> a_Q(s+eps)} and g_s = V_{a_Q(s) -> s+eps}, both realized on
    common refinements."""

    module: StepModule
    f: Morphism
    g: Morphism
    eps: Fraction
    grid: Grid


def restriction_pair(v, q_grid, eps):
    """The interleaving pair between v and its restriction-extension to
    q_grid, valid whenever q_grid is eps-dense over v's grid hull."""
    eps = _q(eps)
    F = v.field
    vq = restrict_extend(v, q_grid)
    # f: V -> V_Q[eps]
    f_grid = union_grids(v.grid, q_grid.translate(-eps))
    f_source = restrict_extend(v, f_grid)
    f_target = restrict_extend(shift(vq, eps), f_grid)
    f_comps = {}
    for qi in f_grid.points():
        c = f_grid.coords(qi)
        av = v.grid.anchor(c)
        aq = q_grid.anchor(_add(c, eps))
        if av is None:
            f_comps[qi] = F.zeros(f_target.dims[qi], 0)
            continue
        if aq is None:
            f_comps[qi] = F.zeros(0, f_source.dims[qi])
            continue
        tv = v.grid.anchor(q_grid.coords(aq))
        if tv is None or any(x > y for x, y in zip(av, tv)):
            raise ValidationError("q_grid is not eps-dense over the module; no density morphism")
        f_comps[qi] = v.path_map(av, tv)
    f = Morphism(f_source, f_target, f_comps)
    # g: V_Q -> V[eps]
    g_grid = union_grids(q_grid, v.grid.translate(-eps))
    g_source = restrict_extend(vq, g_grid)
    g_target = restrict_extend(shift(v, eps), g_grid)
    g_comps = {}
    for qi in g_grid.points():
        c = g_grid.coords(qi)
        aq = q_grid.anchor(c)
        bv = v.grid.anchor(_add(c, eps))
        if aq is None:
            g_comps[qi] = F.zeros(g_target.dims[qi], 0)
            continue
        sv = v.grid.anchor(q_grid.coords(aq))
        if sv is None:
            g_comps[qi] = F.zeros(g_target.dims[qi], 0)
            continue
        g_comps[qi] = v.path_map(sv, bv)
    g = Morphism(g_source, g_target, g_comps)
    return DiscretizationPair(vq, f, g, eps, q_grid)


def discretize(v, eps):
    """Snap v to the lattice eps*Z^n over its bounding box and return the
    restricted module with its eps-interleaving witness."""
    grid = lattice_grid(eps, v.grid.min_corner(), v.grid.max_corner())
    return restriction_pair(v, grid, eps)
