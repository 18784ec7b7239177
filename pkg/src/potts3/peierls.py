"""The cutset repair map, its exact inverse, the unit flow ν, and the
approximation / good-triple certificates.

The repair map recolors the cutset region W by a one-step shift composed
with the color transposition f = (1 2), resetting a chosen subset S of the
entry layer to color 0.  The flow ν puts weight
(1/4)^{|C∩I(χ′)|}(3/4)^{|C∖I(χ′)|}(1/2)^{|D|} on each image, with unit total
out-flow; all ν arithmetic is exact rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coloring import Coloring
from .cutset import Cutset, SeedParity
from .errors import ColoringError, PropertyViolation
from .lattice import (
    Lattice,
    check_direction,
    external_boundary,
    internal_boundary,
    iter_bits,
    shift_order,
)

# f: fixes 0, swaps 1 and 2
_F = (0, 2, 1)


def boundary_layer(lat: Lattice, region: int, s: int) -> int:
    """W^s = {x ∈ ∂_int W : σ_{−s}(x) ∉ W}."""
    check_direction(s, lat.d)
    out = 0
    for v in iter_bits(internal_boundary(lat, region)):
        back = lat.shift(v, -s)
        if back is None or not ((region >> back) & 1):
            out |= 1 << v
    return out


def shift_coloring(chi: Coloring, region: int, s: int, subset: int) -> Coloring:
    """Repair map: 0 on S, unchanged on (W^s∖S) ∪ (V∖W), f∘χ∘σ_{−s} on W∖W^s."""
    lat = chi.lattice
    layer = boundary_layer(lat, region, s)
    if subset & ~layer:
        raise ColoringError("S must be a subset of the boundary layer W^s")
    buf = bytearray(chi.colors)
    for v in iter_bits(subset):
        buf[v] = 0
    for v in iter_bits(region & ~layer):
        back = lat.shift(v, -s)
        if back is None:
            raise PropertyViolation("shift leaves the lattice inside W")
        buf[v] = _F[chi.colors[back]]
    return Coloring(lat, buf, chi.q)


def reconstruct(chi_prime: Coloring, region: int, s: int) -> Coloring:
    """Invert the repair map: χ = χ′ off W, f∘χ′∘σ_s on W."""
    lat = chi_prime.lattice
    buf = bytearray(chi_prime.colors)
    for v in iter_bits(region):
        fwd = lat.shift(v, s)
        if fwd is None:
            raise PropertyViolation("shift leaves the lattice inside W")
        buf[v] = _F[chi_prime.colors[fwd]]
    return Coloring(lat, buf, chi_prime.q)


def phi_family(chi: Coloring, region: int, s: int):
    """Lazily yield (S, repaired coloring) over all S ⊆ W^s; the family
    has exactly 2^{|W^s|} members."""
    lat = chi.lattice
    layer = boundary_layer(lat, region, s)
    members = list(iter_bits(layer))
    for pick in range(1 << len(members)):
        subset = 0
        for i, v in enumerate(members):
            if (pick >> i) & 1:
                subset |= 1 << v
        yield subset, shift_coloring(chi, region, s, subset)


def sample_phi(chi: Coloring, region: int, s: int, rng) -> tuple[int, Coloring]:
    """Uniform member of φ_s(χ); ``rng`` is a random.Random-like object."""
    lat = chi.lattice
    layer = boundary_layer(lat, region, s)
    subset = 0
    for v in iter_bits(layer):
        if rng.getrandbits(1):
            subset |= 1 << v
    return subset, shift_coloring(chi, region, s, subset)


# -- approximations ----------------------------------------------------------


@dataclass(frozen=True)
class Approximation:
    """Coarse-grained stand-in A for the region W, split by parity."""

    lattice: Lattice
    even_part: int
    odd_part: int
    source: str = "external"   # "exact-w" when A = W itself


def exact_approximation(cut: Cutset) -> Approximation:
    w_even, w_odd = cut.region & cut.lattice.even_mask, cut.region & cut.lattice.odd_mask
    return Approximation(cut.lattice, w_even, w_odd, source="exact-w")


def degree_threshold(d: int) -> int:
    """⌈2d − √d⌉, the near-full-degree requirement, as an exact integer."""
    return 2 * d - math.isqrt(d)


def is_approximation(approx: Approximation, cut: Cutset) -> bool:
    """The three defining conditions, with exact integer degree thresholds."""
    lat = cut.lattice
    w_even = cut.region & lat.even_mask
    w_odd = cut.region & lat.odd_mask
    a_even, a_odd = approx.even_part, approx.odd_part
    if (w_even & ~a_even) or (a_odd & ~w_odd):
        return False
    need = degree_threshold(lat.d)
    for x in iter_bits(a_even):
        if (lat.nbr_mask[x] & a_odd).bit_count() < need:
            return False
    outside_even = lat.even_mask & ~a_even
    for y in iter_bits(lat.odd_mask & ~a_odd):
        if (lat.nbr_mask[y] & outside_even).bit_count() < need:
            return False
    return True


@dataclass(frozen=True)
class QSets:
    """The uncertain region of an approximation, plus the χ′-resolved part U."""

    q_even: int
    q_odd: int
    u: int


def _q_masks(approx: Approximation) -> tuple[int, int]:
    lat = approx.lattice
    outside_odd = lat.odd_mask & ~approx.odd_part
    q_even = approx.even_part & external_boundary(lat, outside_odd)
    q_odd = outside_odd & external_boundary(lat, approx.even_part)
    return q_even, q_odd


def q_sets(approx: Approximation, s: int, chi_prime: Coloring) -> QSets:
    """Q^E = A^E ∩ ∂_ext(O∖A^O), Q^O = (O∖A^O) ∩ ∂_ext(A^E),
    U = {x ∈ Q^E : χ′(σ_s(x)) = 0}."""
    lat = approx.lattice
    q_even, q_odd = _q_masks(approx)
    u = 0
    for x in iter_bits(q_even):
        fwd = lat.shift(x, s)
        if fwd is not None and chi_prime.colors[fwd] == 0:
            u |= 1 << x
    return QSets(q_even=q_even, q_odd=q_odd, u=u)


@dataclass(frozen=True)
class DirectionChoice:
    s: int
    rule: str                  # "primary" (two-threshold rule) or "fallback"
    layer: int                 # the winning W^s


def select_direction(cut: Cutset, approx: Approximation) -> DirectionChoice:
    """Smallest s with |W^s| ≥ .8(w_o−w_e) and |σ_s(Q^E)∩Q^O| ≤ 5|W^s|/√d.

    Both thresholds are compared exactly (integers; the second after
    squaring).  When no direction qualifies — possible at small d — fall
    back to the s maximizing |W^s|, ties by the direction ordering, and
    label the choice.
    """
    lat = cut.lattice
    if cut.seed_parity is not SeedParity.EVEN_SEEDED:
        raise ColoringError("direction selection is defined for even-seeded cutsets")
    w_even = cut.region & lat.even_mask
    w_odd = cut.region & lat.odd_mask
    gap = w_odd.bit_count() - w_even.bit_count()
    q_even, q_odd = _q_masks(approx)
    best = None
    for s in shift_order(lat.d):
        layer = boundary_layer(lat, cut.region, s)
        lsz = layer.bit_count()
        if best is None or lsz > best[1]:
            best = (s, lsz, layer)
        if 5 * lsz < 4 * gap:
            continue
        overlap = (lat.shift_set(q_even, s) & q_odd).bit_count()
        if overlap * overlap * lat.d <= 25 * lsz * lsz:
            return DirectionChoice(s=s, rule="primary", layer=layer)
    s, _, layer = best
    return DirectionChoice(s=s, rule="fallback", layer=layer)


# -- the flow ----------------------------------------------------------------


@dataclass(frozen=True)
class FlowCertificate:
    """(s, W^s, C, D) with the exact total out-flow (1 in closed form)."""

    s: int
    layer: int        # W^s
    c_set: int
    d_set: int
    nu_total: Fraction

    def __post_init__(self):
        if self.c_set & self.d_set or (self.c_set | self.d_set) != self.layer:
            raise PropertyViolation("C and D must partition W^s")


def flow_sets(cut: Cutset, approx: Approximation, s: int) -> tuple[int, int, int]:
    """(W^s, C, D) with C = W^s ∩ A^O ∩ σ_s(Q^E) and D = W^s ∖ C."""
    lat = cut.lattice
    layer = boundary_layer(lat, cut.region, s)
    q_even, _ = _q_masks(approx)
    c_set = layer & approx.odd_part & lat.shift_set(q_even, s)
    return layer, c_set, layer & ~c_set


def flow_certificate(cut: Cutset, approx: Approximation, s: int) -> FlowCertificate:
    """Package (s, W^s, C, D) with the closed-form unit out-flow."""
    layer, c_set, d_set = flow_sets(cut, approx, s)
    return FlowCertificate(s=s, layer=layer, c_set=c_set, d_set=d_set, nu_total=Fraction(1))


def membership_subset(chi: Coloring, chi_prime: Coloring, region: int, s: int) -> int:
    """The unique S whose repair image is χ′, or raise if χ′ is not one."""
    lat = chi.lattice
    layer = boundary_layer(lat, region, s)
    subset = 0
    for v in iter_bits(layer):
        if chi_prime.colors[v] == 0:
            subset |= 1 << v
    if shift_coloring(chi, region, s, subset) != chi_prime:
        raise ColoringError("chi_prime is not in the shift family of chi")
    return subset


def flow_weight(
    chi: Coloring,
    chi_prime: Coloring,
    cut: Cutset,
    approx: Approximation,
    s: int,
) -> Fraction:
    """ν(χ, χ′) = (1/4)^{|C∩I(χ′)|} (3/4)^{|C∖I(χ′)|} (1/2)^{|D|}."""
    membership_subset(chi, chi_prime, cut.region, s)
    _, c_set, d_set = flow_sets(cut, approx, s)
    zeros_prime = 0
    for v, c in enumerate(chi_prime.colors):
        if c == 0:
            zeros_prime |= 1 << v
    hit = (c_set & zeros_prime).bit_count()
    miss = (c_set & ~zeros_prime).bit_count()
    return (
        Fraction(1, 4) ** hit
        * Fraction(3, 4) ** miss
        * Fraction(1, 2) ** d_set.bit_count()
    )


@dataclass(frozen=True)
class FlowTotal:
    closed_form: Fraction
    explicit: Fraction | None   # None when |W^s| exceeded the explicit cap
    agrees: bool | None


def flow_out_total(
    chi: Coloring,
    cut: Cutset,
    approx: Approximation,
    s: int,
    explicit_cap: int = 20,
) -> FlowTotal:
    """Σ_{χ′∈φ_s(χ)} ν(χ, χ′): 1 in closed form, cross-checked by explicit
    summation over all S whenever |W^s| ≤ ``explicit_cap``."""
    layer, c_set, d_set = flow_sets(cut, approx, s)
    closed = Fraction(1)
    for _v in iter_bits(c_set):
        closed *= Fraction(1, 4) + Fraction(3, 4)
    for _v in iter_bits(d_set):
        closed *= Fraction(1, 2) + Fraction(1, 2)
    if layer.bit_count() > explicit_cap:
        return FlowTotal(closed_form=closed, explicit=None, agrees=None)
    total = Fraction(0)
    for _subset, chi_prime in phi_family(chi, cut.region, s):
        total += flow_weight(chi, chi_prime, cut, approx, s)
    return FlowTotal(closed_form=closed, explicit=total, agrees=total == closed)


# -- good triples ------------------------------------------------------------


@dataclass(frozen=True)
class TripleContext:
    """Q-sets plus the bipartite graph B of lattice edges between them."""

    lattice: Lattice
    q_even: int
    q_odd: int
    u: int

    def b_boundary(self, even_subset: int) -> int:
        """∂_ext taken inside B: the Q^O-neighbors of an even subset."""
        out = 0
        for x in iter_bits(even_subset):
            out |= self.lattice.nbr_mask[x]
        return out & self.q_odd

    def b_edges(self) -> list[tuple[int, int]]:
        out = []
        for x in iter_bits(self.q_even):
            for y in iter_bits(self.lattice.nbr_mask[x] & self.q_odd):
                out.append((x, y))
        return out


@dataclass(frozen=True)
class GoodTriple:
    k: int
    l: int
    m: int


def triple_context(approx: Approximation, s: int, chi_prime: Coloring) -> TripleContext:
    qq = q_sets(approx, s, chi_prime)
    return TripleContext(approx.lattice, qq.q_even, qq.q_odd, qq.u)


def _is_cover(ctx: TripleContext, cover: int) -> bool:
    return all(((cover >> x) & 1) or ((cover >> y) & 1) for x, y in ctx.b_edges())


def _is_minimal_cover(ctx: TripleContext, cover: int) -> bool:
    if not _is_cover(ctx, cover):
        return False
    for v in iter_bits(cover):
        if _is_cover(ctx, cover & ~(1 << v)):
            return False
    return True


def is_good_triple(triple: GoodTriple, ctx: TripleContext) -> bool:
    """K ⊆ Q^O, L ⊆ U, M ⊆ Q^E∖U; K∪L∪M a minimal vertex cover of B;
    K = ∂_B(U∖L)."""
    k, l, m = triple.k, triple.l, triple.m
    if (k & ~ctx.q_odd) or (l & ~ctx.u) or (m & ~(ctx.q_even & ~ctx.u)):
        return False
    if k & l or k & m or l & m:
        return False
    if not _is_minimal_cover(ctx, k | l | m):
        return False
    return k == ctx.b_boundary(ctx.u & ~l)


def canonical_good_triple(
    chi: Coloring,
    cut: Cutset,
    approx: Approximation,
    s: int,
    chi_prime: Coloring,
) -> GoodTriple:
    """(W∩Q^O, U∖W, (Q^E∖U)∖W); asserts goodness."""
    ctx = triple_context(approx, s, chi_prime)
    w = cut.region
    triple = GoodTriple(
        k=w & ctx.q_odd,
        l=ctx.u & ~w,
        m=(ctx.q_even & ~ctx.u) & ~w,
    )
    if not is_good_triple(triple, ctx):
        raise PropertyViolation("canonical triple failed the goodness conditions")
    return triple


@dataclass(frozen=True)
class BoundReport:
    status: str                      # "ok" or "skipped"
    nu: Fraction | None = None
    b_value: float | None = None     # B(K′, L′), float rendering of the √3 power
    b_squared: Fraction | None = None
    nu_le_b: bool | None = None      # exact comparison via squares; diagnostic only
    ratio: float | None = None
    k0_size: int | None = None
    l0_size: int | None = None
    k_prime_size: int | None = None
    l_prime_size: int | None = None


def _good_triples(ctx: TripleContext):
    """All good triples, enumerated by the resolved subset L ⊆ U.

    K is forced (K = ∂_B(U∖L)) and M is forced up to cover minimality, so
    L determines the triple.
    """
    u_bits = list(iter_bits(ctx.u))
    edges = ctx.b_edges()
    for pick in range(1 << len(u_bits)):
        l = 0
        for i, v in enumerate(u_bits):
            if (pick >> i) & 1:
                l |= 1 << v
        k = ctx.b_boundary(ctx.u & ~l)
        # every edge must be covered by K ∪ L ∪ (some M ⊆ Q^E∖U)
        m = 0
        feasible = True
        for x, y in edges:
            if ((k >> y) & 1) or ((l >> x) & 1):
                continue
            if (ctx.u >> x) & 1:
                feasible = False   # x ∈ U∖L cannot be covered by M
                break
            m |= 1 << x
        if not feasible:
            continue
        triple = GoodTriple(k=k, l=l, m=m)
        if is_good_triple(triple, ctx):
            yield triple


def bound_report(
    chi: Coloring,
    chi_prime: Coloring,
    cut: Cutset,
    approx: Approximation,
    s: int,
    cap: int = 24,
) -> BoundReport:
    """Minimize |K|+|L| over good triples and compute B(K′, L′).

    Exhaustive over the L-subsets when |Q^E ∪ Q^O| ≤ ``cap``; otherwise the
    report is marked skipped.  The comparison ν ≤ B is computed exactly on
    squares and reported, never asserted.
    """
    ctx = triple_context(approx, s, chi_prime)
    if (ctx.q_even | ctx.q_odd).bit_count() > cap:
        return BoundReport(status="skipped")
    hat = canonical_good_triple(chi, cut, approx, s, chi_prime)
    best = None
    for triple in _good_triples(ctx):
        key = (triple.k.bit_count() + triple.l.bit_count(), triple.k, triple.l)
        if best is None or key < best[0]:
            best = (key, triple)
    if best is None:
        raise PropertyViolation("no good triple found despite the canonical-triple guarantee")
    k0, l0 = best[1].k, best[1].l
    k_prime = k0 & ~hat.k
    l_prime = l0 & ~hat.l
    lat = cut.lattice
    w_even = (cut.region & lat.even_mask).bit_count()
    w_odd = (cut.region & lat.odd_mask).bit_count()
    gap = w_odd - w_even
    nu = flow_weight(chi, chi_prime, cut, approx, s)
    n_k0, n_l0 = k0.bit_count(), l0.bit_count()
    n_kp, n_lp = k_prime.bit_count(), l_prime.bit_count()
    # B = (√3/2)^gap · 2^{|K0|} / (3^{|K0|+|L0|} · 2^{|K′|−|L′|})
    b_squared = (
        Fraction(3, 4) ** gap
        * Fraction(4) ** n_k0
        / (Fraction(9) ** (n_k0 + n_l0) * Fraction(4) ** (n_kp - n_lp))
    )
    b_value = math.sqrt(b_squared)
    return BoundReport(
        status="ok",
        nu=nu,
        b_value=b_value,
        b_squared=b_squared,
        nu_le_b=nu * nu <= b_squared,
        ratio=float(nu) / b_value if b_value else math.inf,
        k0_size=n_k0,
        l0_size=n_l0,
        k_prime_size=n_kp,
        l_prime_size=n_lp,
    )
