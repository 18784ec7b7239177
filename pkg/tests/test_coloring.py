from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from potts3 import (
    Coloring,
    ImbalanceClass,
    OddBoundaryZero,
    Parity,
    PinnedVertex,
    box,
    classify,
    deserialize,
    enumerate_colorings,
    imbalance,
    is_proper,
    mod3_coloring,
    phase_coloring,
    satisfies_bc,
    serialize,
    torus,
    zero_set,
)
from potts3.coloring import zero_counts
from potts3.errors import (
    BoundaryConditionError,
    ColoringError,
    ColorRangeError,
    HeaderFormatError,
    PayloadLengthError,
)
from potts3.lattice import iter_bits


def test_properness_examples():
    t = torus(2, 4)
    assert not is_proper(Coloring(t, bytes(16), 3))
    assert is_proper(phase_coloring(t))
    b = box(2, 1)
    assert is_proper(mod3_coloring(b))


def test_zero_set_of_phase_and_mod3():
    t = torus(2, 4)
    chi = phase_coloring(t)
    assert zero_set(chi) == t.even_mask
    b = box(2, 1)
    m3 = mod3_coloring(b)
    expect = [v for v, c in enumerate(b.coords) if sum(c) % 3 == 0]
    assert list(iter_bits(zero_set(m3))) == expect
    assert len(expect) == 3


def test_zero_set_requires_proper():
    t = torus(2, 4)
    with pytest.raises(ColoringError):
        zero_set(Coloring(t, bytes(16), 3))


def test_zero_set_always_independent(z24_states):
    t = z24_states[0].lattice
    for chi in z24_states[::7]:
        zeros = zero_set(chi)
        for v in iter_bits(zeros):
            assert not (t.nbr_mask[v] & zeros)


def test_imbalance_and_classes():
    t = torus(2, 4)
    chi = phase_coloring(t, Parity.EVEN)
    assert imbalance(chi) == 8
    assert classify(chi, Fraction(11, 50)) is ImbalanceClass.EVEN_HEAVY
    mirror = phase_coloring(t, Parity.ODD)
    assert imbalance(mirror) == -8
    assert classify(mirror, Fraction(11, 50)) is ImbalanceClass.ODD_HEAVY
    no_zero = Coloring(t, bytes((1 if p == 0 else 2) for p in t.parities), 3)
    assert imbalance(no_zero) == 0
    assert classify(no_zero, Fraction(11, 50)) is ImbalanceClass.BALANCED


def test_class_threshold_is_exact():
    # on Z^2_4 at rho=11/50 the threshold is 1.76: imbalance 2 is heavy, 1 is not
    t = torus(2, 4)
    for chi in enumerate_colorings(t, 3):
        imb = imbalance(chi)
        cls = classify(chi, Fraction(11, 50))
        if imb >= 2:
            assert cls is ImbalanceClass.EVEN_HEAVY
        elif imb <= -2:
            assert cls is ImbalanceClass.ODD_HEAVY
        else:
            assert cls is ImbalanceClass.BALANCED


def test_classify_needs_torus():
    with pytest.raises(ColoringError):
        classify(mod3_coloring(box(2, 1)), Fraction(11, 50))


def test_color_swap_symmetry(z24_states):
    swap = bytes((0, 2, 1))
    for chi in z24_states[::101]:
        swapped = Coloring(chi.lattice, bytes(swap[c] for c in chi.colors), 3)
        assert is_proper(swapped)
        assert zero_set(swapped) == zero_set(chi)


def test_translation_negates_imbalance(z24_states):
    t = z24_states[0].lattice
    shift_map = [t.shift(v, 1) for v in range(t.nv)]
    for chi in z24_states:
        moved = bytearray(16)
        for v in range(t.nv):
            moved[shift_map[v]] = chi.colors[v]
        assert imbalance(Coloring(t, moved, 3)) == -imbalance(chi)


def test_satisfies_bc_examples():
    b = box(2, 1)
    chi = phase_coloring(b, Parity.ODD)   # 0 on odd, 1 on even
    assert satisfies_bc(chi, OddBoundaryZero())
    assert not satisfies_bc(chi, PinnedVertex((0, 0), 0))
    m3 = mod3_coloring(b)
    assert not satisfies_bc(m3, OddBoundaryZero())
    with pytest.raises(BoundaryConditionError):
        satisfies_bc(phase_coloring(torus(2, 4)), OddBoundaryZero())


def test_serialize_roundtrip(z24_states):
    for chi in z24_states[::211]:
        assert deserialize(serialize(chi)) == chi


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=3**9 - 1))
def test_serialize_roundtrip_box_random(code):
    b = box(2, 1)
    colors = bytearray(9)
    for i in range(9):
        colors[i] = code % 3
        code //= 3
    chi = Coloring(b, colors, 3)
    assert deserialize(serialize(chi)) == chi


def test_deserialize_diagnostics():
    import base64

    t = torus(2, 4)
    blob = serialize(phase_coloring(t))
    head, payload = blob.split(b"\n")

    with pytest.raises(HeaderFormatError):
        deserialize(b'{"kind": "torus"}\n' + payload)
    with pytest.raises(HeaderFormatError):
        deserialize(b"not json\n" + payload)
    with pytest.raises(PayloadLengthError):
        deserialize(head + b"\n")
    # a packed color value of 3 is out of range for q=3
    bad = bytearray(4)
    bad[0] = 0b00000011
    with pytest.raises(ColorRangeError):
        deserialize(head + b"\n" + base64.b64encode(bytes(bad)))


def test_zero_counts_consistency(z24_states):
    for chi in z24_states[::301]:
        ze, zo = zero_counts(chi)
        assert ze - zo == imbalance(chi)
