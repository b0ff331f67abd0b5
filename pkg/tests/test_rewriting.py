import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import quotient_dimension_gf2
from blockforge.presentations import instantiate_family, parse_presentation, instantiate
from blockforge.rewriting import CapExceeded, complete, compute_basis, radical_nilpotency


def nb_of(fid, n, sc=None):
    return compute_basis(instantiate_family(fid, n, sc or {}))


@pytest.fixture(scope="module")
def bases():
    return {
        "sd4": nb_of("SD2A1", 4, {"c": 0}),
        "sd4c1": nb_of("SD2A1", 4, {"c": 1}),
        "q3b4": nb_of("Q3B", 4),
        "k4": nb_of("KleinFourLocal", 2),
    }


def cartan(nb):
    V = nb.quiver.vertices
    pc = nb.pair_counts()
    return [[pc.get((s, t), 0) for t in V] for s in V]


def test_klein_four_rules_and_basis(bases):
    nb = bases["k4"]
    rs = nb.system
    x, y = 0, 1
    assert sorted(rs.leading_words) == sorted([(x, x), (y, y), (y, x)])
    assert rs.normal_form((0, 0, (y, x))) == {(0, 0, (x, y)): 1}
    assert nb.monomials == [(0, 0, ()), (0, 0, (x,)), (0, 0, (y,)), (0, 0, (x, y))]
    assert nb.dimension == 4
    assert radical_nilpotency(nb) == 3


def test_sd2a1_top_relator_vanishes(bases):
    rs = bases["sd4"].system
    q = rs.quiver
    a, b, g = (q.arrow_index(x) for x in ("alpha", "beta", "gamma"))
    word = (a,) + (g, b, a) * 4
    assert rs.normal_form((0, 0, word)) == {}


@pytest.mark.parametrize("n,power", [(4, 3), (5, 7)])
def test_q3b_gamma_beta_is_alpha_power(n, power):
    rs = complete(instantiate_family("Q3B", n))
    q = rs.quiver
    a, b, g = (q.arrow_index(x) for x in ("alpha", "beta", "gamma"))
    one = q.vertex_index("1")
    lhs = rs.normal_form((one, one, (g, b)))
    assert lhs and lhs == rs.normal_form((one, one, (a,) * power))
    assert rs.normal_form((one, one, (a,) * (power + 1))) != lhs


def test_q3b_last_relator(bases):
    rs = bases["q3b4"].system
    q = rs.quiver
    b, d, e = (q.arrow_index(x) for x in ("beta", "delta", "eta"))
    assert rs.normal_form((q.vertex_index("1"), q.vertex_index("2"), (d, e, d, b))) == {}


def test_idempotents(bases):
    rs = bases["sd4"].system
    e0, e1 = (0, 0, ()), (1, 1, ())
    assert rs.normal_form(e0) == {e0: 1}
    assert bases["sd4"].mult[bases["sd4"].idempotent(0), bases["sd4"].idempotent(1)].sum() == 0
    for nb in bases.values():
        for v in range(len(nb.quiver.vertices)):
            assert (v, v, ()) in nb.index


def test_cartan_matrices(bases):
    assert cartan(bases["sd4"]) == [[16, 8], [8, 6]]
    assert cartan(bases["sd4c1"]) == [[16, 8], [8, 6]]
    assert cartan(bases["q3b4"]) == [[8, 4, 4], [4, 6, 2], [4, 2, 4]]


@pytest.mark.parametrize("fid,n,sc,length", [
    ("KleinFourLocal", 2, {}, 4),
    ("SD2A1", 4, {"c": 0}, 15),
    ("SD2A1", 4, {"c": 1}, 15),
    ("Q3B", 4, {}, 11),
])
def test_dimension_against_path_space_oracle(fid, n, sc, length):
    pres = instantiate_family(fid, n, sc)
    expected = compute_basis(pres).dimension
    assert quotient_dimension_gf2(pres, length) == expected
    # one more layer of paths changes nothing, so the truncation was harmless
    assert quotient_dimension_gf2(pres, length + 1) == expected


def test_larger_n_dimensions():
    assert nb_of("SD2A1", 5, {"c": 0}).dimension == 74
    assert nb_of("Q3B", 5).dimension == 42


def test_nilpotency_matches_loewy_length(bases):
    from blockforge.repmod import Algebra, loewy_length, projective
    assert radical_nilpotency(bases["sd4"]) == 13
    assert radical_nilpotency(bases["q3b4"]) == 9
    alg = Algebra.family("Q3B", 4)
    assert max(loewy_length(projective(alg, v)) for v in range(3)) == 9


def test_no_arrows():
    pres = instantiate(parse_presentation("field 2\nvertices a b\n"))
    nb = compute_basis(pres)
    assert nb.dimension == 2
    assert radical_nilpotency(nb) == 1


def test_relators_reduce_to_zero():
    for fid, n, sc in [("SD2A1", 4, {"c": 1}), ("Q3B", 4, {}), ("KleinFourLocal", 2, {})]:
        pres = instantiate_family(fid, n, sc)
        rs = complete(pres)
        for poly in pres.relator_polys():
            assert rs.normal_form(poly) == {}


@pytest.mark.parametrize("key", ["sd4", "q3b4", "k4"])
def test_associativity_all_triples(bases, key):
    nb = bases[key]
    M = nb.mult.astype(np.int64)
    p = nb.F.p
    # (b_i b_j) b_k = sum_l M[i,j,l] b_l b_k ; b_i (b_j b_k) = sum_l M[j,k,l] b_i b_l
    lhs = np.einsum("ijl,lkm->ijkm", M, M) % p
    rhs = np.einsum("jkl,ilm->ijkm", M, M) % p
    assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("key", ["sd4", "q3b4", "k4"])
def test_unit(bases, key):
    nb = bases[key]
    one = sum(np.eye(nb.dimension, dtype=np.int64)[nb.idempotent(v)] for v in range(len(nb.quiver.vertices)))
    M = nb.mult.astype(np.int64)
    I = np.eye(nb.dimension, dtype=np.int64)
    assert np.array_equal(np.einsum("i,ijl->jl", one, M) % 2, I)
    assert np.array_equal(np.einsum("j,ijl->il", one, M) % 2, I)


def random_path(q, rng, length):
    v = int(rng.integers(len(q.vertices)))
    start, word = v, ()
    for _ in range(length):
        outs = [a for a in range(len(q.arrows)) if q.sources[a] == v]
        if not outs:
            break
        a = int(rng.choice(outs))
        word = (a,) + word
        v = q.targets[a]
    return (start, v, word)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["sd4", "q3b4"]))
def test_confluence_random_split_points(bases, seed, key):
    """Reducing the two halves first and multiplying gives the same normal form."""
    nb = bases[key]
    rs = nb.system
    q = rs.quiver
    rng = np.random.default_rng(seed)
    for _ in range(40):
        m = random_path(q, rng, int(rng.integers(0, 16)))
        direct = rs.normal_form(m)
        k = int(rng.integers(0, len(m[2]) + 1))
        left_word, right_word = m[2][:k], m[2][k:]
        mid = q.sources[left_word[-1]] if left_word else m[1]
        right = rs.normal_form((m[0], mid, right_word))
        left = rs.normal_form((mid, m[1], left_word))
        via = np.zeros(nb.dimension, dtype=np.int64)
        for a, ca in left.items():
            for b, cb in right.items():
                via = (via + ca * cb * nb.mult[nb.index[a], nb.index[b]]) % 2
        assert np.array_equal(via, nb.coords(direct))


def test_cap_exceeded_for_infinite_quotient():
    pres = instantiate(parse_presentation("field 2\nvertices 0\narrow x: 0 -> 0\narrow y: 0 -> 0\nrelation x*y - y*x\n"))
    with pytest.raises(CapExceeded):
        compute_basis(pres, degree_cap=6)


def test_cap_below_relator_length():
    with pytest.raises(ValueError):
        complete(instantiate_family("SD2A1", 4, {"c": 0}), degree_cap=3)


def test_cap_exceeded_when_completion_diverges():
    # the positive braid relation has no finite deg-lex completion on two letters
    pres = instantiate(parse_presentation("field 2\nvertices 0\narrow x: 0 -> 0\narrow y: 0 -> 0\n"
                                          "relation x*y*x - y*x*y\n"))
    with pytest.raises(CapExceeded):
        complete(pres, degree_cap=10)
