from __future__ import annotations

from fractions import Fraction

import pytest

from potts3 import (
    Approximation,
    Coloring,
    GoodTriple,
    OddBoundaryZero,
    Parity,
    boundary_layer,
    bound_report,
    build_box_cutset,
    canonical_good_triple,
    exact_approximation,
    flow_out_total,
    flow_weight,
    is_approximation,
    is_good_triple,
    phase_coloring,
    phi_family,
    q_sets,
    reconstruct,
    satisfies_bc,
    sample_phi,
    select_direction,
    select_family,
    shift_coloring,
    torus,
    zero_set,
)
from potts3.cutset import SeedParity
from potts3.dynamics import CounterRng
from potts3.errors import ColoringError
from potts3.lattice import iter_bits, shift_order
from potts3.peierls import degree_threshold, flow_sets, membership_subset, triple_context


def _torus_zero_coloring(lat, zero_cells):
    buf = bytearray(lat.nv)
    zmask = 0
    for c in zero_cells:
        zmask |= 1 << lat.index(c)
    for v in range(lat.nv):
        if lat.parities[v] == 1:
            buf[v] = 2
        else:
            buf[v] = 0 if (zmask >> v) & 1 else 1
    return Coloring(lat, buf, 3)


@pytest.fixture(scope="module")
def star_setup():
    t = torus(2, 4)
    chi = _torus_zero_coloring(t, [(0, 0)])
    fam = select_family(chi)
    assert fam.branch is SeedParity.EVEN_SEEDED
    return t, chi, fam.cutsets[0]


@pytest.fixture(scope="module")
def domino_setup():
    """Two even zeros at distance 2 on Z^2_6: the smallest region with a
    nontrivial external approximation (an extra even cell with three
    region-odd neighbors)."""
    t = torus(2, 6)
    chi = _torus_zero_coloring(t, [(0, 0), (2, 0)])
    fam = select_family(chi)
    assert fam.branch is SeedParity.EVEN_SEEDED
    assert len(fam.cutsets) == 1
    cut = fam.cutsets[0]
    extra = t.index((1, 1))
    approx = Approximation(
        t,
        (cut.region & t.even_mask) | (1 << extra),
        cut.region & t.odd_mask,
        source="external",
    )
    assert is_approximation(approx, cut)
    return t, chi, cut, approx, extra


def test_boundary_layer_star(star_setup):
    t, chi, cut = star_setup
    v0 = t.index((0, 0))
    # for s=+1 the entry layer omits the neighbor whose -s shift stays in W
    layer = boundary_layer(t, cut.region, 1)
    expect = {t.index((3, 0)), t.index((0, 1)), t.index((0, 3))}
    assert set(iter_bits(layer)) == expect
    # every internal boundary vertex has some exiting direction
    union = 0
    for s in shift_order(2):
        union |= boundary_layer(t, cut.region, s)
    from potts3.lattice import internal_boundary

    assert union == internal_boundary(t, cut.region)


def test_boundary_layer_full_torus():
    t = torus(2, 4)
    assert boundary_layer(t, t.full_mask, 1) == 0


def test_shift_identity_when_nothing_moves(star_setup):
    t, chi, cut = star_setup
    # a region equal to its boundary layer: W - W^s = empty, S = empty
    layer = boundary_layer(t, cut.region, 1)
    chi2 = shift_coloring(chi, layer, 1, 0)
    assert chi2 == chi


def test_shift_requires_subset(star_setup):
    t, chi, cut = star_setup
    outside = (~boundary_layer(t, cut.region, 1)) & t.full_mask
    with pytest.raises(ColoringError):
        shift_coloring(chi, cut.region, 1, outside & -outside)


def test_injectivity_of_subset_map(star_setup):
    t, chi, cut = star_setup
    for s in shift_order(2):
        seen = {}
        for subset, chi_p in phi_family(chi, cut.region, s):
            assert chi_p.colors not in seen
            seen[chi_p.colors] = subset
        assert len(seen) == 1 << boundary_layer(t, cut.region, s).bit_count()


def test_torus_shift_properness_and_roundtrip(star_setup):
    t, chi, cut = star_setup
    from potts3 import is_proper

    for s in shift_order(2):
        for subset, chi_p in phi_family(chi, cut.region, s):
            assert is_proper(chi_p)
            assert reconstruct(chi_p, cut.region, s) == chi
            assert membership_subset(chi, chi_p, cut.region, s) == subset


def test_sampler_matches_family(star_setup):
    t, chi, cut = star_setup
    rng = CounterRng(7, 0)
    members = dict(phi_family(chi, cut.region, 1))
    for _ in range(10):
        subset, chi_p = sample_phi(chi, cut.region, 1, rng)
        assert members[subset] == chi_p


def test_q_sets_exact_w_is_empty(star_setup):
    t, chi, cut = star_setup
    approx = exact_approximation(cut)
    qq = q_sets(approx, 1, chi)
    assert qq.q_even == 0 and qq.q_odd == 0 and qq.u == 0


def test_q_sets_containments_external(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    qq = q_sets(approx, -2, chi)
    w_even = cut.region & t.even_mask
    w_odd = cut.region & t.odd_mask
    assert qq.q_even == 1 << extra
    assert qq.q_odd.bit_count() == 1
    # the four displayed containments
    assert approx.even_part & ~qq.q_even & ~w_even == 0
    assert (t.even_mask & ~approx.even_part) & w_even == 0
    assert approx.odd_part & ~w_odd == 0
    assert (t.odd_mask & ~(approx.odd_part | qq.q_odd)) & w_odd == 0
    assert qq.u & ~qq.q_even == 0


def test_q_sets_empty_when_a_odd_is_all_odd():
    t = torus(2, 4)
    chi = _torus_zero_coloring(t, [(0, 0)])
    approx = Approximation(t, t.even_mask, t.odd_mask)
    qq = q_sets(approx, 1, chi)
    assert qq.q_even == 0


def test_is_approximation_examples(star_setup):
    t, chi, cut = star_setup
    assert is_approximation(exact_approximation(cut), cut)
    assert not is_approximation(Approximation(t, 0, 0), cut)
    assert not is_approximation(Approximation(t, t.even_mask, t.odd_mask), cut)
    assert degree_threshold(2) == 3
    # dropping one odd vertex of W keeps a valid approximation at d=2
    w_odd = cut.region & t.odd_mask
    drop = 1 << next(iter_bits(w_odd))
    smaller = Approximation(t, cut.region & t.even_mask, w_odd & ~drop)
    assert is_approximation(smaller, cut)


def test_select_direction_star_symmetric(star_setup):
    t, chi, cut = star_setup
    choice = select_direction(cut, exact_approximation(cut))
    assert choice.s == 1  # full symmetry: ordering rule decides


def test_select_direction_primary_on_domino(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    choice = select_direction(cut, approx)
    assert choice.rule == "primary"
    assert choice.s == 1


def test_select_direction_sweep_over_torus_families(z24_states):
    # every even-seeded family cutset yields a labeled direction, and its
    # odd side strictly outweighs its even side
    seen_rules = set()
    for chi in z24_states[::23]:
        fam = select_family(chi)
        for cut in fam.cutsets:
            if cut.seed_parity is not SeedParity.EVEN_SEEDED:
                continue
            t = cut.lattice
            gap = (cut.region & t.odd_mask).bit_count() - (cut.region & t.even_mask).bit_count()
            assert gap > 0
            choice = select_direction(cut, exact_approximation(cut))
            assert choice.rule in ("primary", "fallback")
            assert choice.layer == boundary_layer(t, cut.region, choice.s)
            seen_rules.add(choice.rule)
    assert seen_rules  # at least one cutset was exercised


def test_flow_weight_formula_arithmetic():
    assert (
        Fraction(1, 4) ** 1 * Fraction(3, 4) ** 2 * Fraction(1, 2) ** 3
        == Fraction(9, 512)
    )


def test_flow_weights_with_exact_approximation(star_setup):
    t, chi, cut = star_setup
    approx = exact_approximation(cut)
    for s in shift_order(2):
        layer, c_set, d_set = flow_sets(cut, approx, s)
        assert c_set == 0 and d_set == layer
        for _subset, chi_p in phi_family(chi, cut.region, s):
            assert flow_weight(chi, chi_p, cut, approx, s) == Fraction(1, 2) ** layer.bit_count()
        total = flow_out_total(chi, cut, approx, s)
        assert total.closed_form == 1 and total.agrees is True


def test_flow_nontrivial_c_set(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    s = -2
    layer, c_set, d_set = flow_sets(cut, approx, s)
    assert c_set == 1 << t.index((1, 0))
    assert c_set | d_set == layer and c_set & d_set == 0
    total = flow_out_total(chi, cut, approx, s)
    assert total.closed_form == 1 and total.explicit == 1
    # weights now depend on whether the C-cell was reset to zero
    weights = set()
    for subset, chi_p in phi_family(chi, cut.region, s):
        nu = flow_weight(chi, chi_p, cut, approx, s)
        hit = (c_set & zero_set(chi_p)).bit_count()
        assert nu == Fraction(1, 4) ** hit * Fraction(3, 4) ** (1 - hit) * Fraction(1, 2) ** d_set.bit_count()
        weights.add(nu)
    assert len(weights) == 2


def test_flow_weight_rejects_non_member(star_setup):
    t, chi, cut = star_setup
    with pytest.raises(ColoringError):
        flow_weight(chi, phase_coloring(t, Parity.ODD, 2), cut, exact_approximation(cut), 1)


def test_vacuous_good_triple(star_setup):
    t, chi, cut = star_setup
    approx = exact_approximation(cut)
    _, chi_p = next(phi_family(chi, cut.region, 1))
    triple = canonical_good_triple(chi, cut, approx, 1, chi_p)
    assert triple == GoodTriple(0, 0, 0)
    ctx = triple_context(approx, 1, chi_p)
    assert is_good_triple(triple, ctx)


def test_canonical_triple_nontrivial(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    s = -2
    seen_u = set()
    for subset, chi_p in phi_family(chi, cut.region, s):
        ctx = triple_context(approx, s, chi_p)
        seen_u.add(ctx.u)
        triple = canonical_good_triple(chi, cut, approx, s, chi_p)
        assert is_good_triple(triple, ctx)
        assert triple.k == 0  # Q^O lies outside W here
        assert (triple.l | triple.m) == ctx.q_even
    assert len(seen_u) == 2  # both U branches occur across the family


def test_is_good_triple_rejects_wrong_k(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    s = -2
    _, chi_p = next(phi_family(chi, cut.region, s))
    ctx = triple_context(approx, s, chi_p)
    bad = GoodTriple(k=ctx.q_odd, l=ctx.u, m=(ctx.q_even & ~ctx.u))
    assert not is_good_triple(bad, ctx)


def test_bound_report(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    s = -2
    for subset, chi_p in phi_family(chi, cut.region, s):
        rep = bound_report(chi, chi_p, cut, approx, s)
        assert rep.status == "ok"
        assert rep.nu > 0
        assert rep.b_squared > 0
        assert rep.nu_le_b == (rep.nu * rep.nu <= rep.b_squared)
        assert rep.k0_size + rep.l0_size <= 1


def test_bound_report_skips_when_large(domino_setup):
    t, chi, cut, approx, extra = domino_setup
    s = -2
    _, chi_p = next(phi_family(chi, cut.region, s))
    rep = bound_report(chi, chi_p, cut, approx, s, cap=0)
    assert rep.status == "skipped"


def test_box_shift_images_respect_boundary_condition(box_corpus, box22):
    v0 = box22.index((0, 0))
    chi = box_corpus[3]
    cut = build_box_cutset(chi, v0)
    for s in shift_order(2):
        for _subset, chi_p in phi_family(chi, cut.region, s):
            assert satisfies_bc(chi_p, OddBoundaryZero())
