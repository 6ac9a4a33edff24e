import pytest
from hypothesis import given, strategies as st

from origami_entropy.surface import (
    Permutation,
    SurfaceError,
    build_surface,
    builtin_surface,
    check_hypothesis,
    format_permutation,
    load_surface_file,
    parse_permutation,
)


def test_parse_transposition():
    p = parse_permutation("(1,2)", 3)
    assert (p(1), p(2), p(3)) == (2, 1, 3)


def test_parse_empty_is_identity():
    p = parse_permutation("", 4)
    assert all(p(i) == i for i in range(1, 5))


def test_parse_repeated_element_rejected():
    with pytest.raises(SurfaceError):
        parse_permutation("(1,2)(2,3)", 3)


def test_parse_out_of_range_rejected():
    with pytest.raises(SurfaceError):
        parse_permutation("(1,5)", 3)


def test_parse_malformed_rejected():
    with pytest.raises(SurfaceError):
        parse_permutation("(1,2", 3)
    with pytest.raises(SurfaceError):
        parse_permutation("1,2)", 3)


@given(st.permutations(list(range(1, 8))))
def test_format_parse_round_trip(images):
    p = Permutation(7, tuple(images))
    assert parse_permutation(format_permutation(p), 7) == p


def test_composition_rightmost_first():
    p = parse_permutation("(1,2)", 3)
    q = parse_permutation("(2,3)", 3)
    assert (p * q)(2) == p(q(2)) == p(3) == 3


def test_inverse():
    p = parse_permutation("(1,2,3)", 4)
    assert p * p.inverse() == Permutation.identity(4)


def test_l_shape_vertex_data():
    surf = build_surface(parse_permutation("(1,2)", 3), parse_permutation("(1,3)", 3))
    assert surf.cone_multipliers == (3,)
    assert surf.genus == 2
    # commutator h v h^-1 v^-1 is the 3-cycle (1,2,3)
    assert set(surf.vertex_cycles[0]) == {1, 2, 3}


def test_ew_vertex_data():
    surf = builtin_surface("EW")
    assert surf.n_squares == 8
    assert surf.cone_multipliers == (2, 2, 2, 2)
    assert surf.genus == 3


def test_torus_has_no_singularity():
    surf = build_surface(Permutation.identity(1), Permutation.identity(1))
    assert surf.cone_multipliers == (1,)
    assert surf.genus == 1
    with pytest.raises(SurfaceError):
        check_hypothesis(surf)


def test_degree_mismatch_rejected():
    with pytest.raises(SurfaceError):
        build_surface(Permutation.identity(2), Permutation.identity(3))


def test_disconnected_rejected():
    with pytest.raises(SurfaceError):
        build_surface(Permutation.identity(2), Permutation.identity(2))


def test_hypothesis_l_shape():
    info = check_hypothesis(builtin_surface("L"))
    assert (info.k, info.n, info.genus) == (2, 1, 2)
    assert info.sigma == pytest.approx(3.0 ** 0.5, abs=0)


def test_hypothesis_ew():
    info = check_hypothesis(builtin_surface("EW"))
    assert (info.k, info.n, info.genus) == (1, 4, 3)
    assert info.sigma == pytest.approx(8.0 ** 0.5, abs=0)


def test_builtin_o2():
    surf = builtin_surface("O", 2)
    assert surf.genus == 2
    assert surf.cone_multipliers == (2, 2)


def test_builtin_st2_matches_l_shape():
    st2 = check_hypothesis(builtin_surface("St", 2))
    ell = check_hypothesis(builtin_surface("L"))
    assert (st2.k, st2.n, st2.genus) == (ell.k, ell.n, ell.genus)


def test_builtin_o_family_structure():
    # O_k: two singularities of multiplier k, for every small k
    for k in range(2, 11):
        info = check_hypothesis(builtin_surface("O", k))
        assert info.k == k - 1
        assert info.n == 2
        assert info.genus == k


def test_builtin_unknown_family():
    with pytest.raises(SurfaceError):
        builtin_surface("Q", 2)
    with pytest.raises(SurfaceError):
        builtin_surface("O", 1)


@pytest.mark.parametrize("name,k", [("L", None), ("EW", None), ("O", 3),
                                    ("ST", 4), ("G", 3)])
def test_angle_and_genus_bookkeeping(name, k):
    surf = builtin_surface(name, k)
    assert sum(surf.cone_multipliers) == surf.n_squares
    assert sum(m - 1 for m in surf.cone_multipliers) == 2 * surf.genus - 2


@given(st.permutations(list(range(1, 9))))
def test_relabeling_invariance(images):
    pi = Permutation(8, tuple(images))
    surf = builtin_surface("EW")
    h = pi * surf.h * pi.inverse()
    v = pi * surf.v * pi.inverse()
    relabeled = build_surface(h, v)
    assert sorted(relabeled.cone_multipliers) == sorted(surf.cone_multipliers)
    assert relabeled.genus == surf.genus


def test_load_surface_file(tmp_path):
    path = tmp_path / "surf.txt"
    path.write_text("# comment\nsquares: 3\nh: (1,2)\nv: (1,3)\n")
    surf = load_surface_file(str(path))
    assert surf.cone_multipliers == (3,)


def test_load_surface_file_missing_field(tmp_path):
    path = tmp_path / "surf.txt"
    path.write_text("squares: 3\nh: (1,2)\n")
    with pytest.raises(SurfaceError, match="missing field"):
        load_surface_file(str(path))


def test_load_surface_file_bad_line(tmp_path):
    path = tmp_path / "surf.txt"
    path.write_text("squares 3\n")
    with pytest.raises(SurfaceError, match=":1:"):
        load_surface_file(str(path))
