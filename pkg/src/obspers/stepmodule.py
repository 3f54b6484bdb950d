"""Persistence modules on finite grids.

A StepModule stores a finite grid with exact rational coordinates, a
finite-dimensional F_p vector space at each grid point, and a structure matrix
for each unit grid step.  It represents its extension to all of R^n: the value
at a point s is the value at the largest grid point below s (and 0 when no
grid point lies below), so the represented module is constant on half-open
cells and upper semicontinuous.  Composite structure maps are path products of
unit steps, well defined whenever the commutativity invariant holds.

No floating point appears anywhere: coordinates are Fractions, matrix entries
are residues mod p.
"""

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .errors import ValidationError
from .fields import PrimeField


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise ValidationError(f"coordinate {x!r} is not an exact rational")


@dataclass(frozen=True)
class Grid:
    """A finite product grid in R^n: one strictly increasing tuple of exact
    rational coordinates per axis."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(tuple(_frac(c) for c in axis) for axis in self.axes)
        if not axes:
            raise ValidationError("grid needs at least one axis")
        for axis in axes:
            if not axis:
                raise ValidationError("every axis needs at least one coordinate")
            if any(a >= b for a, b in zip(axis, axis[1:])):
                raise ValidationError("axis coordinates must be strictly increasing")
        object.__setattr__(self, "axes", axes)

    @property
    def n_axes(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(len(axis) for axis in self.axes)

    def points(self):
        """All grid point index tuples in lexicographic order."""
        return list(product(*[range(len(axis)) for axis in self.axes]))

    def coords(self, idx):
        return tuple(self.axes[a][i] for a, i in enumerate(idx))

    def successor(self, idx, axis):
        if idx[axis] + 1 >= len(self.axes[axis]):
            return None
        return idx[:axis] + (idx[axis] + 1,) + idx[axis + 1:]

    def anchor(self, s):
        """Index of sup{p in grid : p <= s}, or None when some axis of s lies
        below the grid minimum."""
        idx = []
        for a, axis in enumerate(self.axes):
            i = bisect.bisect_right(axis, _frac(s[a])) - 1
            if i < 0:
                return None
            idx.append(i)
        return tuple(idx)

    def translate(self, delta):
        """Grid moved by +delta on every axis."""
        d = _frac(delta)
        return Grid(tuple(tuple(c + d for c in axis) for axis in self.axes))

    def min_corner(self):
        return tuple(axis[0] for axis in self.axes)

    def max_corner(self):
        return tuple(axis[-1] for axis in self.axes)


def union_grids(*grids):
    n = grids[0].n_axes
    if any(g.n_axes != n for g in grids):
        raise ValidationError("grids have different numbers of axes")
    axes = []
    for a in range(n):
        coords = set()
        for g in grids:
            coords.update(g.axes[a])
        axes.append(tuple(sorted(coords)))
    return Grid(tuple(axes))


def _freeze(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StepModule:
    """Grid data for a persistence module, plus its implied extension.

    dims maps every grid index tuple to a nonnegative integer; steps maps
    (index, axis) to the matrix of the unit step toward the successor along
    that axis, of shape dims(successor) x dims(index).
    """

    field: PrimeField
    grid: Grid
    dims: dict
    steps: dict

    def __post_init__(self):
        dims = {tuple(k): int(v) for k, v in self.dims.items()}
        steps = {}
        for (g, axis), m in self.steps.items():
            a = np.mod(np.array(m, dtype=np.int64), self.field.p)
            if a.ndim != 2:
                a = a.reshape(a.shape[0] if a.size else 0, -1)
            steps[(tuple(g), int(axis))] = _freeze(a)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "steps", steps)

    def dim(self, idx):
        return self.dims[tuple(idx)]

    def step(self, idx, axis):
        return self.steps[(tuple(idx), axis)]

    @property
    def total_dim(self):
        return sum(self.dims.values())

    def __eq__(self, other):
        if not isinstance(other, StepModule):
            return NotImplemented
        return (self.field == other.field and self.grid == other.grid
                and self.dims == other.dims
                and self.steps.keys() == other.steps.keys()
                and all(np.array_equal(self.steps[k], other.steps[k]) for k in self.steps))

    def path_map(self, a, b):
        """The composite structure map from grid index a to grid index b >= a,
        as a product of unit steps (axis by axis; any path agrees when the
        module is valid)."""
        a, b = tuple(a), tuple(b)
        if any(x > y for x, y in zip(a, b)):
            raise ValidationError(f"no path from {a} to {b}")
        m = self.field.identity(self.dims[a])
        cur = a
        for axis in range(self.grid.n_axes):
            while cur[axis] < b[axis]:
                m = self.field.matmul(self.steps[(cur, axis)], m)
                cur = cur[:axis] + (cur[axis] + 1,) + cur[axis + 1:]
        return m

    def evaluate(self, s):
        """(dimension, anchor index) of the extension at the rational point s;
        (0, None) when no grid point lies below s."""
        idx = self.grid.anchor(s)
        if idx is None:
            return 0, None
        return self.dims[idx], idx


def zero_module(p, n_axes=1):
    """The zero module: a single grid point at the origin with dimension 0."""
    grid = Grid(tuple((Fraction(0),) for _ in range(n_axes)))
    dims = {tuple([0] * n_axes): 0}
    return StepModule(PrimeField(p), grid, dims, {})


def validate(v):
    """Check every shape and commutativity invariant.

    Returns a list of violation strings, empty when the module is valid; the
    first entry names the first violated constraint found.
    """
    out = []
    pts = v.grid.points()
    for g in pts:
        if g not in v.dims:
            out.append(f"missing dimension at {g}")
            return out
        if v.dims[g] < 0:
            out.append(f"negative dimension at {g}")
            return out
    for g in pts:
        for axis in range(v.grid.n_axes):
            h = v.grid.successor(g, axis)
            if h is None:
                continue
            if (g, axis) not in v.steps:
                out.append(f"missing step at {g} axis {axis}")
                continue
            m = v.steps[(g, axis)]
            want = (v.dims[h], v.dims[g])
            if m.shape != want:
                out.append(f"step at {g} axis {axis} has shape {m.shape}, expected {want}")
    for key in v.steps:
        g, axis = key
        if g not in v.dims or v.grid.successor(g, axis) is None:
            out.append(f"step at {g} axis {axis} does not match any grid edge")
    if out:
        return out
    for g in pts:
        for i in range(v.grid.n_axes):
            gi = v.grid.successor(g, i)
            if gi is None:
                continue
            for j in range(i + 1, v.grid.n_axes):
                gj = v.grid.successor(g, j)
                if gj is None:
                    continue
                via_i = v.field.matmul(v.steps[(gi, j)], v.steps[(g, i)])
                via_j = v.field.matmul(v.steps[(gj, i)], v.steps[(g, j)])
                if not np.array_equal(via_i, via_j):
                    out.append(f"square at {g} axes ({i},{j}) does not commute")
                    return out
    return out


def evaluate(v, s):
    return v.evaluate(s)


def restrict_extend(v, grid):
    """The module's extension sampled on an arbitrary finite grid.

    The result's value at a grid point q is the extension's value at q (the
    anchor value, or 0 below the original grid); its steps are path maps of v
    between anchors.  Idempotent, and the identity when grid refines v.grid.
    """
    dims = {}
    anchors = {}
    for q in grid.points():
        a = v.grid.anchor(grid.coords(q))
        anchors[q] = a
        dims[q] = 0 if a is None else v.dims[a]
    steps = {}
    for q in grid.points():
        for axis in range(grid.n_axes):
            q2 = grid.successor(q, axis)
            if q2 is None:
                continue
            a, b = anchors[q], anchors[q2]
            if a is None:
                steps[(q, axis)] = v.field.zeros(dims[q2], 0)
            else:
                steps[(q, axis)] = v.path_map(a, b)
    return StepModule(v.field, grid, dims, steps)


def direct_sum(a, b):
    """Biproduct on the common refinement of the two grids; dims add pointwise
    and steps are block diagonal."""
    if a.field != b.field:
        raise ValidationError(f"field mismatch: p={a.field.p} vs p={b.field.p}")
    grid = union_grids(a.grid, b.grid)
    ra = restrict_extend(a, grid)
    rb = restrict_extend(b, grid)
    dims = {g: ra.dims[g] + rb.dims[g] for g in grid.points()}
    steps = {}
    for (g, axis), ma in ra.steps.items():
        mb = rb.steps[(g, axis)]
        block = a.field.zeros(ma.shape[0] + mb.shape[0], ma.shape[1] + mb.shape[1])
        block[:ma.shape[0], :ma.shape[1]] = ma
        block[ma.shape[0]:, ma.shape[1]:] = mb
        steps[(g, axis)] = block
    return StepModule(a.field, grid, dims, steps)


# ---------------------------------------------------------------------------
# Morphisms
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Morphism:
    """A natural transformation between two StepModules on one shared grid:
    a matrix comps(g) of shape target.dims(g) x source.dims(g) per point."""

    source: StepModule
    target: StepModule
    comps: dict

    def __post_init__(self):
        if self.source.grid != self.target.grid:
            raise ValidationError("morphism endpoints must share a grid")
        comps = {}
        for g, m in self.comps.items():
            a = np.mod(np.array(m, dtype=np.int64), self.source.field.p)
            comps[tuple(g)] = _freeze(a)
        object.__setattr__(self, "comps", comps)

    @property
    def grid(self):
        return self.source.grid

    @property
    def field(self):
        return self.source.field

    def comp(self, idx):
        return self.comps[tuple(idx)]

    def __eq__(self, other):
        if not isinstance(other, Morphism):
            return NotImplemented
        return (self.source == other.source and self.target == other.target
                and self.comps.keys() == other.comps.keys()
                and all(np.array_equal(self.comps[k], other.comps[k]) for k in self.comps))


def validate_morphism(m):
    """Shape and naturality check; returns a list of violations."""
    out = []
    for g in m.grid.points():
        if g not in m.comps:
            out.append(f"missing component at {g}")
            return out
        want = (m.target.dims[g], m.source.dims[g])
        if m.comps[g].shape != want:
            out.append(f"component at {g} has shape {m.comps[g].shape}, expected {want}")
    if out:
        return out
    for g in m.grid.points():
        for axis in range(m.grid.n_axes):
            h = m.grid.successor(g, axis)
            if h is None:
                continue
            lhs = m.field.matmul(m.comps[h], m.source.steps[(g, axis)])
            rhs = m.field.matmul(m.target.steps[(g, axis)], m.comps[g])
            if not np.array_equal(lhs, rhs):
                out.append(f"naturality fails at {g} axis {axis}")
                return out
    return out


def identity_morphism(v):
    return Morphism(v, v, {g: v.field.identity(v.dims[g]) for g in v.grid.points()})


def zero_morphism(v, w):
    return Morphism(v, w, {g: v.field.zeros(w.dims[g], v.dims[g]) for g in v.grid.points()})


def compose(m2, m1):
    """m2 after m1; the grids must agree and m1's target data must equal m2's
    source data exactly."""
    if m1.target != m2.source:
        raise ValidationError("composition endpoints do not match")
    comps = {g: m1.field.matmul(m2.comps[g], m1.comps[g]) for g in m1.grid.points()}
    return Morphism(m1.source, m2.target, comps)


def add_morphisms(m1, m2):
    comps = {g: m1.field.matadd(m1.comps[g], m2.comps[g]) for g in m1.grid.points()}
    return Morphism(m1.source, m1.target, comps)


def scale_morphism(c, m):
    comps = {g: m.field.matscale(c, m.comps[g]) for g in m.grid.points()}
    return Morphism(m.source, m.target, comps)


def is_isomorphism(m):
    return (not validate_morphism(m)) and all(
        m.field.is_invertible(m.comps[g]) for g in m.grid.points())


def invert_morphism(m):
    comps = {g: m.field.inverse(m.comps[g]) for g in m.grid.points()}
    return Morphism(m.target, m.source, comps)


def flatten_morphism(m):
    """All components concatenated into one residue vector, points in
    lexicographic order; the coordinate form used by Hom-space searches."""
    parts = [m.comps[g].reshape(-1) for g in m.grid.points()]
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(parts)


def unflatten_morphism(v, w, vec):
    comps = {}
    pos = 0
    for g in v.grid.points():
        r, c = w.dims[g], v.dims[g]
        comps[g] = np.array(vec[pos:pos + r * c], dtype=np.int64).reshape(r, c)
        pos += r * c
    return Morphism(v, w, comps)


def hom_basis(v, w):
    """A basis of Hom(v, w) as a list of Morphisms.

    Both modules must live on the same grid (refine first).  The basis spans
    the exact solution space of all naturality equations; it always contains
    the identity in its span when w = v.
    """
    if v.grid != w.grid:
        raise ValidationError("hom_basis needs a common grid; refine first")
    if v.field != w.field:
        raise ValidationError("field mismatch")
    F = v.field
    pts = v.grid.points()
    offsets = {}
    total = 0
    for g in pts:
        offsets[g] = total
        total += w.dims[g] * v.dims[g]
    if total == 0:
        return []
    rows = []
    for g in pts:
        for axis in range(v.grid.n_axes):
            h = v.grid.successor(g, axis)
            if h is None:
                continue
            A = v.steps[(g, axis)]
            B = w.steps[(g, axis)]
            n_eq = w.dims[h] * v.dims[g]
            if n_eq == 0:
                continue
            block = F.zeros(n_eq, total)
            # row-major vec: vec(X_h A) = (I kron A^T) vec(X_h)
            kh = np.kron(F.identity(w.dims[h]), A.T)
            block[:, offsets[h]:offsets[h] + w.dims[h] * v.dims[h]] = kh
            kg = np.kron(B, F.identity(v.dims[g]))
            block[:, offsets[g]:offsets[g] + w.dims[g] * v.dims[g]] = \
                (block[:, offsets[g]:offsets[g] + w.dims[g] * v.dims[g]] - kg) % F.p
            rows.append(block)
    if rows:
        system = np.concatenate(rows, axis=0) % F.p
    else:
        system = F.zeros(0, total)
    basis = F.kernel_basis(system)
    return [unflatten_morphism(v, w, basis[:, j]) for j in range(basis.shape[1])]


# ---------------------------------------------------------------------------
# Kernel / image / cokernel of a morphism
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    """Pointwise kernel, image and cokernel of a morphism, with the canonical
    maps: kernel_inclusion into the source, image_inclusion into the target,
    coimage_projection from the source onto the image, cokernel_projection
    from the target."""

    kernel: StepModule
    image: StepModule
    cokernel: StepModule
    kernel_inclusion: Morphism
    image_inclusion: Morphism
    coimage_projection: Morphism
    cokernel_projection: Morphism


def factor_morphism(m):
    """Factor a valid morphism through its pointwise kernel, image and
    cokernel, with induced steps on each piece.

    dim(kernel) + dim(image) = dim(source) at every point, and all three
    pieces pass validate.
    """
    F = m.field
    v, w = m.source, m.target
    pts = m.grid.points()
    kbasis, ibasis, qbasis = {}, {}, {}
    for g in pts:
        c = m.comps[g]
        kbasis[g] = F.kernel_basis(c)
        ibasis[g] = F.column_space_basis(c)
        qbasis[g] = F.extend_to_basis(ibasis[g], w.dims[g])

    def induced(bases, ambient_steps, g, axis, h):
        """Express ambient_steps[(g, axis)] @ basis(g) in the basis at h."""
        target = F.matmul(ambient_steps[(g, axis)], bases[g])
        x = F.solve(bases[h], target)
        if x is None:
            raise ValidationError("induced step left the subspace; morphism invalid")
        return x

    ksteps, isteps, csteps = {}, {}, {}
    for g in pts:
        for axis in range(m.grid.n_axes):
            h = m.grid.successor(g, axis)
            if h is None:
                continue
            ksteps[(g, axis)] = induced(kbasis, v.steps, g, axis, h)
            isteps[(g, axis)] = induced(ibasis, w.steps, g, axis, h)
            # cokernel: push the quotient basis forward, then reduce mod image
            full = np.concatenate([ibasis[h], qbasis[h]], axis=1)
            x = F.solve(full, F.matmul(w.steps[(g, axis)], qbasis[g]))
            if x is None:
                raise ValidationError("cokernel step unsolvable; morphism invalid")
            csteps[(g, axis)] = x[ibasis[h].shape[1]:, :]
    kernel = StepModule(F, m.grid, {g: kbasis[g].shape[1] for g in pts}, ksteps)
    image = StepModule(F, m.grid, {g: ibasis[g].shape[1] for g in pts}, isteps)
    cokernel = StepModule(F, m.grid, {g: qbasis[g].shape[1] for g in pts}, csteps)
    kernel_inclusion = Morphism(kernel, v, {g: kbasis[g] for g in pts})
    image_inclusion = Morphism(image, w, {g: ibasis[g] for g in pts})
    coim = {}
    for g in pts:
        x = F.solve(ibasis[g], m.comps[g])
        coim[g] = x if x is not None else F.zeros(ibasis[g].shape[1], v.dims[g])
    coimage_projection = Morphism(v, image, coim)
    cproj = {}
    for g in pts:
        full = np.concatenate([ibasis[g], qbasis[g]], axis=1)
        x = F.solve(full, F.identity(w.dims[g]))
        cproj[g] = x[ibasis[g].shape[1]:, :]
    cokernel_projection = Morphism(w, cokernel, cproj)
    return Factorization(kernel, image, cokernel, kernel_inclusion,
                         image_inclusion, coimage_projection, cokernel_projection)
