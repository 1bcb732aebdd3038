from fractions import Fraction as F

import pytest

from treeseries.core import (
    Automaton,
    FinalVector,
    RankedAlphabet,
    Tree,
    absorb_final_vector,
    automaton_from_json,
    automaton_to_json,
    check_tree,
    count_trees,
    enumerate_trees,
    evaluate,
    format_tree,
    kron,
    kron_all,
    make_arity_distinct,
    parse_tree,
    tree_size,
    unify_alphabets,
)
from treeseries.errors import (
    InvalidBeta,
    InvariantError,
    SymbolMismatch,
    TooManyTrees,
)
from treeseries.exactmath import UniPolynomial
from treeseries.series import generating_prefix
from treeseries.zoo import SIGNATURE


def t(name, *children):
    return Tree(name, tuple(children))


# ---------------------------------------------------------------------------
# alphabets and trees


def test_alphabet_requires_nullary():
    with pytest.raises(InvariantError):
        RankedAlphabet.of(("f", 2))


def test_alphabet_rejects_duplicates():
    with pytest.raises(InvariantError):
        RankedAlphabet.of(("a", 0), ("a", 1))


def test_tree_size():
    assert tree_size(t("sigma0")) == 0
    assert tree_size(t("sigma2", t("sigma0"), t("sigma1", t("sigma0")))) == 2
    assert tree_size(t("sigma1", t("sigma1", t("sigma1", t("sigma0"))))) == 3


def test_tree_parse_format_round_trip():
    text = "(sigma2 (sigma0) (sigma1 (sigma0)))"
    tree = parse_tree(text)
    assert tree == t("sigma2", t("sigma0"), t("sigma1", t("sigma0")))
    assert format_tree(tree) == text
    assert parse_tree("sigma0") == t("sigma0")


def test_check_tree_rejects_bad_arity():
    with pytest.raises(SymbolMismatch):
        check_tree(SIGNATURE, t("sigma1"))
    with pytest.raises(SymbolMismatch):
        check_tree(SIGNATURE, t("mystery"))


# ---------------------------------------------------------------------------
# Kronecker products


def test_kron_definition():
    assert kron((F(1), F(2)), (F(3), F(4))) == (F(3), F(4), F(6), F(8))
    assert kron((F(1), F(1)), (F(1), F(1))) == (F(1),) * 4


def test_kron_empty_product_is_one():
    assert kron_all([]) == (F(1),)


def test_kron_mixed_product_property():
    # (u (x) v) (A (x) B) = (uA) (x) (vB) on small rational matrices
    u = (F(1), F(2))
    v = (F(3), F(-1), F(2))
    a_mat = [[F(1), F(2)], [F(0), F(1)]]
    b_mat = [[F(2), F(0), F(1)], [F(1), F(1), F(0)], [F(0), F(3), F(1)]]

    def mat_vec(vec, m):
        cols = len(m[0])
        return tuple(
            sum((vec[i] * m[i][j] for i in range(len(vec))), F(0)) for j in range(cols)
        )

    def mat_kron(m1, m2):
        rows = []
        for r1 in m1:
            for r2 in m2:
                rows.append([x * y for x in r1 for y in r2])
        return rows

    lhs = mat_vec(kron(u, v), mat_kron(a_mat, b_mat))
    rhs = kron(mat_vec(u, a_mat), mat_vec(v, b_mat))
    assert lhs == rhs


# ---------------------------------------------------------------------------
# evaluation


def test_evaluate_bell_examples(bell):
    assert evaluate(bell, t("sigma0")) == ((F(1), F(1)), F(1))
    assert evaluate(bell, t("sigma1", t("sigma0"))) == ((F(0), F(1)), F(0))
    assert evaluate(bell, t("sigma2", t("sigma0"), t("sigma0"))) == ((F(1), F(0)), F(1))


def test_evaluate_rejects_unknown_symbol(bell):
    with pytest.raises(SymbolMismatch):
        evaluate(bell, t("nope"))


def test_evaluate_total_on_enumerated_trees(bell, labelled, cubic):
    # the ring membership conditions keep every weight defined on real trees
    for a in (bell, labelled, cubic):
        for n in range(5):
            for tree in enumerate_trees(a.alphabet, n):
                evaluate(a, tree)


# ---------------------------------------------------------------------------
# final vectors


def test_final_vector_rejects_nonnegative_roots():
    with pytest.raises(InvalidBeta):
        FinalVector.of((UniPolynomial.const(1), UniPolynomial((0, 1))))  # 1/x


def test_absorb_unit_vector_preserves_values(bell):
    out = absorb_final_vector(bell, FinalVector.unit(bell.dimension))
    assert out.dimension == bell.dimension + 1
    for n in range(5):
        for tree in enumerate_trees(bell.alphabet, n):
            assert evaluate(out, tree)[1] == evaluate(bell, tree)[1]


def test_absorb_size_multiplier(bell):
    beta = FinalVector.of((UniPolynomial.x(), UniPolynomial.const(1)), 0)
    out = absorb_final_vector(bell, beta)
    for n in range(5):
        for tree in enumerate_trees(bell.alphabet, n):
            assert evaluate(out, tree)[1] == n * evaluate(bell, tree)[1]


def test_absorb_integral_weight(bell):
    beta = FinalVector.of((UniPolynomial.const(1), UniPolynomial((1, 1))), 0)
    out = absorb_final_vector(bell, beta)
    for n in range(5):
        for tree in enumerate_trees(bell.alphabet, n):
            assert evaluate(out, tree)[1] == evaluate(bell, tree)[1] / (1 + n)


def test_absorb_matches_mu_beta_generally(bell, labelled):
    beta = FinalVector.of(
        (UniPolynomial((1, 2)), UniPolynomial((1, 1))),  # (1+2x)/(1+x)
        (UniPolynomial((0, 0, 1)), UniPolynomial.const(1)),  # x^2
    )
    for a in (bell, labelled):
        out = absorb_final_vector(a, beta)
        for n in range(5):
            for tree in enumerate_trees(a.alphabet, n):
                mu, _ = evaluate(a, tree)
                expected = sum(
                    (mu[j] * v for j, v in enumerate(beta.value_at(n))), F(0)
                )
                assert evaluate(out, tree)[1] == expected


# ---------------------------------------------------------------------------
# alphabet normalizations


def test_make_arity_distinct_merges_nullaries():
    alphabet = RankedAlphabet.of(("a", 0), ("b", 0))
    a = Automaton.build(1, alphabet, {"a": [1], "b": [2]})
    out = make_arity_distinct(a)
    assert out.alphabet.symbols == (("h0", 0),)
    assert out.weight("h0")[0] == (F(3),)


def test_make_arity_distinct_preserves_series(bell):
    out = make_arity_distinct(bell)
    assert (
        generating_prefix(out, 6).coefficients
        == generating_prefix(bell, 6).coefficients
    )


def test_make_arity_distinct_sums_same_arity():
    alphabet = RankedAlphabet.of(("a", 0), ("f", 2), ("g", 2))
    one = "1"
    a = Automaton.build(
        1, alphabet, {"a": [1], "f": [[one]] * 1 + [[one]] * 0, "g": [["2"]]}
    )
    out = make_arity_distinct(a)
    assert out.weight("h2")[0][0]((1, 0, 0)) == F(3)
    for n in range(6):
        assert (
            generating_prefix(out, 5).coefficients
            == generating_prefix(a, 5).coefficients
        )


def test_unify_identical_alphabets_is_identity(bell, labelled):
    b1, b2 = unify_alphabets(bell, labelled)
    assert b1 is bell and b2 is labelled


def test_unify_disjoint_alphabets():
    a1 = Automaton.build(
        1,
        RankedAlphabet.of(("a", 0), ("f", 1)),
        {"a": [1], "f": [["1/(x0)"]]},
    )
    a2 = Automaton.build(
        1,
        RankedAlphabet.of(("b", 0), ("g", 2)),
        {"b": [2], "g": [["1"]] * 1},
    )
    u1, u2 = unify_alphabets(a1, a2)
    assert u1.alphabet == u2.alphabet
    assert [k for _, k in u1.alphabet.symbols] == [0, 1, 2]
    for orig, unified in ((a1, u1), (a2, u2)):
        assert (
            generating_prefix(unified, 5).coefficients
            == generating_prefix(orig, 5).coefficients
        )


def test_unify_pads_only_the_smaller(bell):
    a2 = Automaton.build(
        1, RankedAlphabet.of(("b", 0), ("g", 1)), {"b": [1], "g": [["1/(x0)"]]}
    )
    u1, u2 = unify_alphabets(bell, a2)
    assert u1.alphabet == u2.alphabet
    assert (
        generating_prefix(u1, 5).coefficients
        == generating_prefix(bell, 5).coefficients
    )


# ---------------------------------------------------------------------------
# tree enumeration


def test_enumerate_single_leaf():
    alphabet = RankedAlphabet.of(("a", 0))
    assert enumerate_trees(alphabet, 0) == [t("a")]
    assert enumerate_trees(alphabet, 1) == []


def test_enumerate_counts_match_convolution_recurrence():
    # c_n = c_{n-1} + sum_{i+j=n-1} c_i c_j with c_0 = 1 over {a/0, u/1, f/2}
    alphabet = RankedAlphabet.of(("a", 0), ("u", 1), ("f", 2))
    c = [1]
    for n in range(1, 7):
        c.append(c[n - 1] + sum(c[i] * c[n - 1 - i] for i in range(n)))
    for n in range(7):
        trees = enumerate_trees(alphabet, n)
        assert len(trees) == c[n] == count_trees(alphabet, n)
        assert len(set(map(format_tree, trees))) == len(trees)
        assert all(tree_size(tree) == n for tree in trees)
    assert c[2] == 6


def test_enumerate_catalan():
    alphabet = RankedAlphabet.of(("a", 0), ("f", 2))
    assert len(enumerate_trees(alphabet, 3)) == 5


def test_enumerate_guard():
    alphabet = RankedAlphabet.of(("a", 0), ("f", 2))
    with pytest.raises(TooManyTrees):
        enumerate_trees(alphabet, 16)


def test_enumerate_deterministic_order():
    alphabet = RankedAlphabet.of(("a", 0), ("f", 2))
    first = [format_tree(x) for x in enumerate_trees(alphabet, 3)]
    second = [format_tree(x) for x in enumerate_trees(alphabet, 3)]
    assert first == second


# ---------------------------------------------------------------------------
# serialization


def test_json_round_trip(bell, labelled, cubic):
    for a in (bell, labelled, cubic):
        again = automaton_from_json(automaton_to_json(a))
        assert again == a
        assert automaton_to_json(again) == automaton_to_json(a)


def test_json_rejects_out_of_range_column():
    import json

    from treeseries.errors import InputFormatError

    payload = {
        "dimension": 1,
        "alphabet": [{"name": "a", "arity": 0}],
        "weights": {"a": {"entries": [{"row": [], "col": 0, "value": "1"}]}},
    }
    with pytest.raises(InputFormatError):
        automaton_from_json(json.dumps(payload))
    payload["weights"]["a"]["entries"][0]["col"] = 2
    with pytest.raises(InputFormatError):
        automaton_from_json(json.dumps(payload))
