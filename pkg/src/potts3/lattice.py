"""Boxes in Z^d and even discrete tori: geometry, parity, adjacency, shifts.

Vertex indexing is row-major over coordinates with the last coordinate
fastest; every "smallest vertex" tie-break in the package refers to this
order.  Vertex sets are plain ints used as dense bitmasks (bit i = vertex i).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import LatticeError


class LatticeKind(Enum):
    BOX = "box"
    TORUS = "torus"


class Parity(Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry request: a box Λ_n = {−n..n}^d or an even torus Z^d_n.

    ``extended`` pads the box with the odd vertices of Λ_{n+1}.
    """

    kind: LatticeKind
    d: int
    n: int
    extended: bool = False

    def validate(self) -> None:
        if self.d < 1:
            raise LatticeError(f"dimension must be positive, got d={self.d}")
        if self.kind is LatticeKind.TORUS:
            if self.n < 2:
                raise LatticeError(f"torus side must be at least 2, got n={self.n}")
            if self.n % 2 != 0:
                raise LatticeError(
                    f"torus side must be even to preserve bipartiteness, got n={self.n}"
                )
            if self.extended:
                raise LatticeError("extended regions are defined for boxes only")
        else:
            if self.n < 1:
                raise LatticeError(f"box half-width must be at least 1, got n={self.n}")


class Lattice:
    """Immutable graph of a lattice region with precomputed tables.

    Safe to share across workers; nothing here mutates after construction.
    """

    def __init__(self, spec: LatticeSpec):
        spec.validate()
        self.spec = spec
        self.kind = spec.kind
        self.d = spec.d
        self.n = spec.n
        self.coords: list[tuple[int, ...]] = list(self._gen_coords(spec))
        self.nv = len(self.coords)
        self.index_of: dict[tuple[int, ...], int] = {
            c: i for i, c in enumerate(self.coords)
        }
        self.parities = [sum(c) % 2 for c in self.coords]
        self.even_mask = 0
        for i, p in enumerate(self.parities):
            if p == 0:
                self.even_mask |= 1 << i
        self.full_mask = (1 << self.nv) - 1
        self.odd_mask = self.full_mask ^ self.even_mask

        self.neighbors: list[list[int]] = []
        for i, c in enumerate(self.coords):
            found = set()
            for axis in range(self.d):
                for sign in (1, -1):
                    j = self._neighbor_index(c, axis, sign)
                    if j is not None and j != i:
                        found.add(j)
            # n=2 tori collapse the two wrap edges into one (simple graph)
            self.neighbors.append(sorted(found))
        self.nbr_mask = [sum(1 << j for j in nbrs) for nbrs in self.neighbors]
        self.edges: list[tuple[int, int]] = [
            (u, v) for u in range(self.nv) for v in self.neighbors[u] if u < v
        ]
        # vertices with a Z^d neighbor outside the region (empty on tori)
        self.boundary_mask = 0
        if self.kind is LatticeKind.BOX:
            for i, c in enumerate(self.coords):
                if len(self.neighbors[i]) < 2 * self.d or self._touches_outside(c):
                    self.boundary_mask |= 1 << i

    @staticmethod
    def _gen_coords(spec: LatticeSpec):
        if spec.kind is LatticeKind.TORUS:
            yield from itertools.product(range(spec.n), repeat=spec.d)
        elif not spec.extended:
            yield from itertools.product(range(-spec.n, spec.n + 1), repeat=spec.d)
        else:
            m = spec.n
            for c in itertools.product(range(-m - 1, m + 2), repeat=spec.d):
                if all(abs(x) <= m for x in c) or sum(c) % 2 != 0:
                    yield c

    def _neighbor_index(self, c, axis, sign):
        cc = list(c)
        if self.kind is LatticeKind.TORUS:
            cc[axis] = (cc[axis] + sign) % self.n
            return self.index_of[tuple(cc)]
        cc[axis] += sign
        return self.index_of.get(tuple(cc))

    def _touches_outside(self, c) -> bool:
        # an extended-region vertex of full degree may still sit on the rim
        for axis in range(self.d):
            for sign in (1, -1):
                cc = list(c)
                cc[axis] += sign
                if tuple(cc) not in self.index_of:
                    return True
        return False

    # -- basic queries -----------------------------------------------------

    def parity(self, v: int) -> Parity:
        return Parity(self.parities[v])

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def index(self, coords) -> int:
        try:
            return self.index_of[tuple(coords)]
        except KeyError:
            raise LatticeError(f"{tuple(coords)} is not a vertex of this lattice") from None

    def shift(self, v: int, s: int):
        """σ_s(v) = v + e_s; None when the image leaves a box."""
        check_direction(s, self.d)
        axis, sign = abs(s) - 1, (1 if s > 0 else -1)
        return self._neighbor_index(self.coords[v], axis, sign)

    def shift_set(self, mask: int, s: int) -> int:
        """Image mask σ_s(X); box images falling outside are dropped."""
        out = 0
        for v in iter_bits(mask):
            w = self.shift(v, s)
            if w is not None:
                out |= 1 << w
        return out

    # -- automorphisms -----------------------------------------------------

    @lru_cache(maxsize=None)
    def vertex_automorphisms(self) -> tuple[tuple[int, ...], ...]:
        """Graph automorphisms: axis permutations and reflections, plus
        translations on tori.  Returned as vertex permutation tuples."""
        perms = set()
        axes = list(itertools.permutations(range(self.d)))
        signs = list(itertools.product((1, -1), repeat=self.d))
        if self.kind is LatticeKind.TORUS:
            shifts = list(itertools.product(range(self.n), repeat=self.d))
        else:
            shifts = [(0,) * self.d]
        for axperm in axes:
            for sgn in signs:
                for sh in shifts:
                    img = [0] * self.nv
                    ok = True
                    for i, c in enumerate(self.coords):
                        cc = [sgn[k] * c[axperm[k]] + sh[k] for k in range(self.d)]
                        if self.kind is LatticeKind.TORUS:
                            cc = [x % self.n for x in cc]
                        j = self.index_of.get(tuple(cc))
                        if j is None:
                            ok = False
                            break
                        img[i] = j
                    if ok:
                        perms.add(tuple(img))
        return tuple(sorted(perms))

    def __repr__(self):
        tag = "W" if self.spec.extended else self.kind.value
        return f"Lattice({tag}, d={self.d}, n={self.n}, nv={self.nv})"


def build_lattice(spec: LatticeSpec) -> Lattice:
    """Validate ``spec`` and construct the immutable lattice object."""
    return Lattice(spec)


def box(d: int, n: int, extended: bool = False) -> Lattice:
    return Lattice(LatticeSpec(LatticeKind.BOX, d, n, extended))


def torus(d: int, n: int) -> Lattice:
    return Lattice(LatticeSpec(LatticeKind.TORUS, d, n))


def shift_order(d: int) -> list[int]:
    """Direction ordering for every "smallest s" rule: +1 < −1 < +2 < −2 < …"""
    out = []
    for k in range(1, d + 1):
        out.append(k)
        out.append(-k)
    return out


def check_direction(s: int, d: int) -> None:
    if not isinstance(s, int) or s == 0 or abs(s) > d:
        raise LatticeError(f"shift direction must lie in ±{{1..{d}}}, got {s}")


# -- dense vertex-set (bitmask) helpers -------------------------------------


def iter_bits(mask: int):
    """Vertex indices of a bitmask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def external_boundary(lat: Lattice, mask: int) -> int:
    """∂_ext X: vertices outside X adjacent to X."""
    out = 0
    for v in iter_bits(mask):
        out |= lat.nbr_mask[v]
    return out & ~mask


def internal_boundary(lat: Lattice, mask: int) -> int:
    """∂_int X: vertices of X adjacent to the complement."""
    comp = lat.full_mask & ~mask
    out = 0
    for v in iter_bits(mask):
        if lat.nbr_mask[v] & comp:
            out |= 1 << v
    return out


def closure(lat: Lattice, mask: int) -> int:
    """X⁺ = X ∪ ∂_ext X."""
    return mask | external_boundary(lat, mask)


def edge_boundary(lat: Lattice, mask: int) -> list[tuple[int, int]]:
    """∇(X): edges with exactly one end in X, as (u, v) pairs with u < v."""
    out = []
    for u, v in lat.edges:
        if ((mask >> u) & 1) != ((mask >> v) & 1):
            out.append((u, v))
    return out


@dataclass(frozen=True)
class BoundaryOps:
    edge_boundary: tuple[tuple[int, int], ...]
    internal: int
    external: int
    closure: int
    even_part: int
    odd_part: int


def boundary_operators(lat: Lattice, mask: int) -> BoundaryOps:
    """All boundary operators of a vertex set in one record."""
    if mask & ~lat.full_mask:
        raise LatticeError("vertex set has bits outside this lattice")
    ext = external_boundary(lat, mask)
    return BoundaryOps(
        edge_boundary=tuple(edge_boundary(lat, mask)),
        internal=internal_boundary(lat, mask),
        external=ext,
        closure=mask | ext,
        even_part=mask & lat.even_mask,
        odd_part=mask & lat.odd_mask,
    )


def connected_components(lat: Lattice, mask: int) -> list[int]:
    """Maximal connected pieces of the induced subgraph, as masks ordered by
    smallest contained vertex."""
    comps = []
    rest = mask
    while rest:
        seed = rest & -rest
        comp = seed
        frontier = seed
        while frontier:
            grow = 0
            for v in iter_bits(frontier):
                grow |= lat.nbr_mask[v]
            grow &= mask & ~comp
            comp |= grow
            frontier = grow
        comps.append(comp)
        rest &= ~comp
    return comps
