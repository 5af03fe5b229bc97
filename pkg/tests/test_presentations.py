import copy
import json

import pytest

from bianchi.presentations import (STABILIZER_ORDERS, DataError, UnsupportedGroup, closure, derive_pgl, evaluate_word,
                                   format_word, group_id, invert_word, is_central, load_cellcomplex,
                                   load_presentation, parse_word, presentation_from_file, presentation_from_json,
                                   projective_order, _shipped)
from bianchi.ring import Mat2

ALL = [f"{k}2_O{d}" for k in ("PSL", "PGL") for d in (1, 2, 3, 7, 11)]
COMPLEXES = ["PSL2_O2"] + [f"PGL2_O{d}" for d in (1, 2, 3, 7, 11)]


@pytest.mark.parametrize("gid", ALL)
def test_relators_evaluate_to_center(gid):
    P = load_presentation(gid)
    for w in P.relators:
        assert is_central(P.evaluate(w))
    for M in P.matrices:
        assert P.kind == "PGL" or M.det() == (1, 0)


def test_psl_o2_presentation():
    P = load_presentation("PSL2_O2")
    assert P.names == ["A", "B", "U"]
    assert len(P.relators) == 4
    B2 = P.evaluate(parse_word("B B", P.names))
    assert B2 == Mat2(-1, 0, 0, -1, 2)
    assert P.evaluate(parse_word("A U A^-1 U^-1", P.names)).is_scalar()
    assert P.evaluate(()) == Mat2.identity(2)
    assert parse_word("(B U B U^-1)^2", P.names) in P.relators


def test_printed_relator_with_squared_u_is_not_central():
    # the variant with U^2 does not hold for the realizations; (B U B U^-1)^2 is shipped instead
    P = load_presentation("PSL2_O2")
    assert not is_central(P.evaluate(parse_word("(B U^2 B U^-1)^2", P.names)))


def test_word_parsing_roundtrip():
    names = ["A", "B", "U"]
    for text in ["A B^-2 U", "[A, U]", "(A B)^3", "B^2", "A A^-1"]:
        w = parse_word(text, names)
        assert parse_word(format_word(w, names), names) == w
    assert parse_word("A A^-1", names) == ()
    assert parse_word("[A, U]", names) == ((0, 1), (2, 1), (0, -1), (2, -1))
    assert invert_word(parse_word("A B^2", names)) == ((1, -2), (0, -1))
    with pytest.raises(DataError):
        parse_word("A Z", names)
    with pytest.raises(DataError):
        parse_word("A $", names)


def test_evaluate_word_bad_index():
    P = load_presentation("PSL2_O1")
    with pytest.raises(IndexError):
        evaluate_word(((P.ngens, 1),), P)


def test_corrupt_relator_is_rejected(tmp_path):
    obj = copy.deepcopy(_shipped("presentations.json")["PSL2_O2"])
    obj["relators"][1] = "(A B)^4"
    with pytest.raises(DataError):
        presentation_from_json("PSL2_O2", obj).validate()
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(obj))
    with pytest.raises(DataError):
        presentation_from_file(path)
    obj = copy.deepcopy(_shipped("presentations.json")["PSL2_O2"])
    path.write_text(json.dumps(obj))
    assert presentation_from_file(path).gid == "PSL2_O2"


def test_group_ids():
    assert group_id(7, "pgl") == "PGL2_O7"
    with pytest.raises(UnsupportedGroup):
        group_id(5, "PSL")
    with pytest.raises(UnsupportedGroup):
        load_cellcomplex("PSL2_O1")


@pytest.mark.parametrize("d", [1, 2, 3, 7, 11])
def test_shipped_pgl_matches_derivation(d):
    shipped = load_presentation(f"PGL2_O{d}")
    derived = derive_pgl(load_presentation(f"PSL2_O{d}"))
    assert shipped.names == derived.names
    assert shipped.matrices == derived.matrices
    assert shipped.relators == derived.relators


@pytest.mark.parametrize("gid", COMPLEXES)
def test_stabilizer_orders_match_labels(gid):
    C = load_cellcomplex(gid)
    for cell in C.vertices + C.edges:
        gens = C.stabilizer_matrices(cell)
        assert len(closure(gens)) == STABILIZER_ORDERS[cell.label]
        for M in gens:
            n = projective_order(M)
            assert n is not None and STABILIZER_ORDERS[cell.label] % n == 0


def test_cell_complex_shapes():
    C = load_cellcomplex("PSL2_O2")
    assert (len(C.vertices), len(C.edges)) == (4, 4)
    assert len(C.edge_identifications) == 1
    g = C.evaluate(C.edge_identifications[0].element)
    assert g.projective_key() == Mat2(1, (0, 1), 0, 1, 2).projective_key()

    C = load_cellcomplex("PGL2_O1")
    assert [v.label for v in C.vertices] == ["D4", "S3", "S4"]
    assert len(C.edges) == 3
    assert not C.edge_identifications and not C.vertex_identifications

    C = load_cellcomplex("PGL2_O7")
    assert (len(C.vertices), len(C.edges)) == (5, 5)
    assert len(C.edge_reps) == 4


@pytest.mark.parametrize("d,label", [(7, "D2"), (11, "S3")])
def test_glued_vertex_contains_gluing_element(d, label):
    C = load_cellcomplex(f"PGL2_O{d}")
    (ident,) = C.edge_identifications
    assert ident.orientation == -1
    # the gluing fixes the vertex shared by the two glued edges
    shared = set(C.edge(ident.source).ends) & set(C.edge(ident.target).ends)
    (v,) = shared
    assert C.vertex(v).label == label
    G = closure(C.stabilizer_matrices(C.vertex(v)))
    assert C.evaluate(ident.element).projective_key() in G


@pytest.mark.parametrize("gid", COMPLEXES)
def test_boundary_is_closed_loop(gid):
    C = load_cellcomplex(gid)
    names = [name for name, _ in C.boundary]
    assert sorted(names) == sorted(e.name for e in C.edges)
