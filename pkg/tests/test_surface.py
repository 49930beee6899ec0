from fractions import Fraction as F

import pytest

import surface
from decomposition import DecompositionKind
from errors import HypothesisUnmet
from exactgeom import equals, hull, volume
from surface import (LatticeSurface, SurfFlag, base_loci_divisorial, classify, from_toric, is_psef,
                     limiting_polygon_by_extrapolation, mu, numerical_dim, okounkov_polygon, pairing,
                     parametric_sweep, restricted_volumes, toric_class, validate, zariski_decompose)
from toric import BodyKind, ToricDivisor

H, E, HmE = (1, 0), (0, 1), (1, -1)
TRIANGLE = hull([(0, 0), (1, 0), (0, 1)])


def test_validate_models(bl1p2, p1p1_surface, f2_surface, p2_surface):
    for S in (bl1p2, p1p1_surface, f2_surface, p2_surface):
        assert validate(S).ok, validate(S).problems


def test_validate_rejects_definite_form():
    S = LatticeSurface.from_data(2, [[1, 0], [0, 1]], [("A", (1, 0))], [(1, 0), (0, 1)])
    report = validate(S)
    assert not report.ok
    assert any("signature" in p for p in report.problems)


def test_validate_rejects_missing_negative_generator():
    S = LatticeSurface.from_data(2, [[1, 0], [0, -1]], [("E", (0, 1)), ("2E", (0, 2))], [(0, 1), (1, -1)])
    assert not validate(S).ok


def test_pairing(bl1p2):
    assert pairing(bl1p2, (1, 1), E) == -1
    assert pairing(bl1p2, H, H) == 1


def test_classify(bl1p2):
    c = classify(bl1p2, H)
    assert c.psef and c.nef and c.big
    c = classify(bl1p2, (1, 1))
    assert c.psef and c.big and not c.nef
    assert not classify(bl1p2, (1, -2)).psef
    assert not is_psef(bl1p2, (1, -2))


def test_zariski_blowup_example(bl1p2):
    dec = zariski_decompose(bl1p2, (1, 1))
    assert dec.positive == (1, 0)
    assert dec.negative == (("E", 1),)
    assert dec.to_json() == {"P": ["1", "0"], "N": [{"curve": "E", "coeff": "1"}], "kind": "sigma"}


def test_zariski_nef_class_has_no_negative_part(p1p1_surface):
    dec = zariski_decompose(p1p1_surface, (1, 0))
    assert dec.positive == (1, 0)
    assert dec.negative == ()


def test_zariski_on_f2(f2_surface):
    dec = zariski_decompose(f2_surface, (1, 1))
    assert dec.positive == (1, F(1, 2))
    assert dec.negative_map() == {"s": F(1, 2)}


def test_good_decomposition(bl1p2):
    good = zariski_decompose(bl1p2, (1, 1), DecompositionKind.GOOD)
    assert good.semiample
    assert good.same_parts(zariski_decompose(bl1p2, (1, 1)))


def test_s_decomposition_needs_abundance(bl1p2):
    from dataclasses import replace

    S = replace(bl1p2, abundant=False)
    with pytest.raises(HypothesisUnmet):
        zariski_decompose(S, (1, 1), DecompositionKind.S)


def test_numerical_dimension(bl1p2, p1p1_surface):
    assert numerical_dim(p1p1_surface, (1, 0)) == 1
    assert numerical_dim(bl1p2, H) == 2
    assert numerical_dim(bl1p2, E) == 0
    assert surface.volume(bl1p2, (1, 1)) == 1


@pytest.mark.parametrize("D, curve, expected", [(H, "E", 1), (H, "H-E", 1), ((1, 1), "E", 2)])
def test_mu(bl1p2, D, curve, expected):
    assert mu(bl1p2, D, curve) == expected


def test_sweep_along_fibre_curve(bl1p2):
    sweep = parametric_sweep(bl1p2, H, "H-E")
    assert (sweep.a, sweep.mu) == (0, 1)
    assert len(sweep.chambers) == 1
    chamber = sweep.chambers[0]
    assert chamber.negative == (("E", 0, 1),)
    assert [chamber.beta_at(t) for t in (0, F(1, 2), 1)] == [1, F(1, 2), 0]


def test_sweep_without_events(bl1p2):
    sweep = parametric_sweep(bl1p2, H, "E")
    assert sweep.chambers[0].negative == ()
    assert sweep.breakpoints == ((0, 0), (1, 1))


def test_sweep_starting_inside_negative_part(bl1p2):
    sweep = parametric_sweep(bl1p2, (1, 1), "E")
    assert (sweep.a, sweep.mu) == (1, 2)
    assert sweep.breakpoints == ((1, 0), (2, 1))


def test_big_polygon(bl1p2):
    body = okounkov_polygon(bl1p2, H, SurfFlag("H-E"))
    assert equals(body, TRIANGLE)
    assert 2 * volume(body, (0, 1)) == surface.volume(bl1p2, H)


def test_fibre_class_polygons(p1p1_surface):
    f1 = (1, 0)
    assert equals(okounkov_polygon(p1p1_surface, f1, SurfFlag("f2"), BodyKind.LIM), hull([(0, 0), (0, 1)]))
    flag = SurfFlag("f1+2f2")
    assert equals(okounkov_polygon(p1p1_surface, f1, flag, BodyKind.VAL), hull([(0, 0), (0, 1)]))
    assert equals(okounkov_polygon(p1p1_surface, f1, flag, BodyKind.LIM), hull([(0, 0), (0, 2)]))


def test_fibre_class_along_a_fibre(p1p1_surface):
    f1 = (1, 0)
    flag = SurfFlag("f1")
    assert equals(okounkov_polygon(p1p1_surface, f1, flag, BodyKind.LIM), hull([(0, 0), (1, 0)]))
    assert equals(okounkov_polygon(p1p1_surface, f1, flag, BodyKind.VAL), hull([(0, 0), (1, 0)]))


def test_big_kind_requires_bigness(p1p1_surface):
    with pytest.raises(HypothesisUnmet):
        okounkov_polygon(p1p1_surface, (1, 0), SurfFlag("f2"), BodyKind.BIG)


def test_val_needs_fibration_data():
    S = LatticeSurface.from_data(2, [[0, 1], [1, 0]], [("a", (1, 0)), ("b", (0, 1))], [(1, 0), (0, 1)],
                                 abundant=True)
    with pytest.raises(HypothesisUnmet, match="fibration data required"):
        okounkov_polygon(S, (1, 0), SurfFlag("b"), BodyKind.VAL)


def test_limiting_polygon_extrapolation_matches_closed_form(bl1p2, p1p1_surface):
    for S, D, curve in ((bl1p2, (1, 1), "E"), (p1p1_surface, (1, 0), "f2"), (bl1p2, E, "E")):
        flag = SurfFlag(curve)
        assert equals(limiting_polygon_by_extrapolation(S, D, flag), okounkov_polygon(S, D, flag, BodyKind.LIM))


def test_restricted_volumes(bl1p2, p1p1_surface):
    assert restricted_volumes(bl1p2, H, "H-E") == (1, 1)
    assert restricted_volumes(p1p1_surface, (1, 0), "f2") == (1, 1)
    assert restricted_volumes(p1p1_surface, (1, 0), "f1+2f2") == (1, 2)


def test_augmented_curve_keeps_its_limiting_width(bl1p2):
    # E is in B+(H) but not in B-(H): only vol is undefined
    assert restricted_volumes(bl1p2, H, "E") == (None, 0)
    with pytest.raises(HypothesisUnmet):
        restricted_volumes(bl1p2, (1, 1), "E")


def test_divisorial_base_loci(bl1p2):
    assert base_loci_divisorial(bl1p2, H).to_json() == {"B-": [], "B+": ["E"]}
    assert base_loci_divisorial(bl1p2, (1, 1)).to_json() == {"B-": ["E"], "B+": ["E"]}
    assert base_loci_divisorial(bl1p2, (2, -1)).to_json() == {"B-": [], "B+": []}


def test_from_toric_models(p2, f1, f2):
    S = from_toric(p2)
    assert S.rank == 1 and S.form == ((1,),)
    model = from_toric(f1)
    assert validate(model).ok
    assert sorted(pairing(model, c.cls, c.cls) for c in model.curves) == [-1, 0, 0, 1]
    assert min(pairing(from_toric(f2), c.cls, c.cls) for c in from_toric(f2).curves) == -2


def test_toric_and_lattice_decompositions_agree(f1):
    S = from_toric(f1)
    D = ToricDivisor.of(0, 1, 0, 1)
    dec = zariski_decompose(S, toric_class(f1, D))
    assert dec.negative_map() == {"D1": 1}
    assert dec.positive == toric_class(f1, ToricDivisor.of(0, 0, 0, 1))


def test_flag_curve_in_negative_part_shifts_polygon(bl1p2):
    body = okounkov_polygon(bl1p2, (1, 1), SurfFlag("E"))
    assert equals(body, hull([(1, 0), (2, 0), (2, 1)]))
    assert not any(v[0] == 0 for v in body.vertices)
