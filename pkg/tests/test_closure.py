from fractions import Fraction as F

import pytest

from treeseries.closure import (
    gf_add,
    gf_cauchy,
    gf_derive,
    gf_integrate,
    gf_inverse,
    gf_mul_shifted,
    gf_scale,
    gf_shift_backward,
    gf_shift_forward,
    ts_add,
    ts_hadamard,
    ts_scale,
)
from treeseries.core import Automaton, RankedAlphabet, enumerate_trees, evaluate
from treeseries.errors import AlphabetMismatch, ZeroConstantTerm
from treeseries.series import (
    generating_prefix,
    series_add,
    series_cauchy,
    series_scale,
)
from treeseries.zoo import SIGNATURE

N = 8


def prefix(a, n=N):
    return generating_prefix(a, n)


def trees_up_to(alphabet, size):
    out = []
    for n in range(size + 1):
        out.extend(enumerate_trees(alphabet, n))
    return out


@pytest.fixture(scope="module")
def random_pair():
    # two fixed dimension-2 automata over the shared signature with assorted
    # nonzero weights, exercising off-diagonal paths
    a1 = Automaton.build(
        2,
        SIGNATURE,
        {
            "sigma0": [1, F(1, 2)],
            "sigma1": [["1/(x0)", "2"], ["0", "(x1+1)/(x0+1)"]],
            "sigma2": [
                ["1", "0"],
                ["0", "1/(x0)"],
                ["(x2+1)/(1)*(x1+1)", "0"],
                ["0", "3"],
            ],
        },
    )
    a2 = Automaton.build(
        2,
        SIGNATURE,
        {
            "sigma0": [0, 2],
            "sigma1": [["0", "1/(x0+1)"], ["1", "0"]],
            "sigma2": [
                ["0", "1"],
                ["1/(x0)", "0"],
                ["0", "0"],
                ["(x1+1)/(x0)", "0"],
            ],
        },
    )
    return a1, a2


# ---------------------------------------------------------------------------
# tree-series operations: pointwise on every tree of size <= 3


def test_ts_add_values(bell, labelled, random_pair):
    for a1, a2 in [(bell, labelled), random_pair]:
        result = ts_add(a1, a2)
        assert result.dimension == a1.dimension + a2.dimension + 1
        for t in trees_up_to(a1.alphabet, 3):
            assert (
                evaluate(result, t)[1] == evaluate(a1, t)[1] + evaluate(a2, t)[1]
            )


def test_ts_add_zero_like(bell):
    zero_like = ts_scale(bell, 0)
    result = ts_add(bell, zero_like)
    for t in trees_up_to(bell.alphabet, 4):
        assert evaluate(result, t)[1] == evaluate(bell, t)[1]


def test_ts_add_double(bell):
    result = ts_add(bell, bell)
    for t in trees_up_to(bell.alphabet, 3)[:10]:
        assert evaluate(result, t)[1] == 2 * evaluate(bell, t)[1]


def test_ts_add_requires_identical_alphabet(bell):
    other = Automaton.build(1, RankedAlphabet.of(("b", 0)), {"b": [1]})
    with pytest.raises(AlphabetMismatch):
        ts_add(bell, other)


def test_ts_scale_values(bell):
    assert ts_scale(bell, 1) is bell
    zero = ts_scale(bell, 0)
    minus = ts_scale(bell, -1)
    cancel = ts_add(bell, minus)
    for t in trees_up_to(bell.alphabet, 3):
        assert evaluate(zero, t)[1] == 0
        assert evaluate(cancel, t)[1] == 0
    third = ts_scale(bell, F(-7, 3))
    assert third.dimension == bell.dimension + 1
    for t in trees_up_to(bell.alphabet, 3):
        assert evaluate(third, t)[1] == F(-7, 3) * evaluate(bell, t)[1]


def test_ts_hadamard_values(bell, labelled, random_pair):
    for a1, a2 in [(bell, bell), (bell, labelled), random_pair]:
        result = ts_hadamard(a1, a2)
        assert result.dimension == a1.dimension * a2.dimension
        for t in trees_up_to(a1.alphabet, 3):
            assert (
                evaluate(result, t)[1] == evaluate(a1, t)[1] * evaluate(a2, t)[1]
            )


def test_ts_hadamard_zero_absorbs(bell):
    zero = ts_scale(bell, 0)
    result = ts_hadamard(zero, ts_scale(bell, 1))
    for t in trees_up_to(bell.alphabet, 3):
        assert evaluate(result, t)[1] == 0


# ---------------------------------------------------------------------------
# generating-function operations: prefixes vs exact prefix arithmetic


def test_gf_add_prefixes(bell, labelled):
    result = gf_add(bell, labelled)
    assert prefix(result).coefficients == series_add(prefix(bell), prefix(labelled)).coefficients


def test_gf_add_unifies_alphabets(bell):
    other = Automaton.build(
        1, RankedAlphabet.of(("b", 0), ("g", 1)), {"b": [1], "g": [["1/(x0)"]]}
    )
    result = gf_add(bell, other)
    assert prefix(result).coefficients == series_add(prefix(bell), prefix(other)).coefficients


def test_gf_scale_prefixes(bell):
    assert gf_scale(bell, 1) is bell
    assert prefix(gf_scale(bell, 0)).coefficients == (F(0),) * (N + 1)
    got = prefix(gf_scale(bell, F(3, 2)))
    assert got.coefficients == series_scale(prefix(bell), F(3, 2)).coefficients


def test_gf_shift_forward(bell, zero):
    result = gf_shift_forward(bell)
    assert result.dimension == bell.dimension + 1
    assert prefix(result).coefficients == (F(0),) + prefix(bell, N - 1).coefficients
    assert prefix(gf_shift_forward(zero)).coefficients == (F(0),) * (N + 1)
    double = gf_shift_forward(result)
    assert prefix(double).coefficients == (F(0), F(0)) + prefix(bell, N - 2).coefficients


def test_gf_mul_shifted(bell, labelled):
    result = gf_mul_shifted(bell, labelled)
    assert result.dimension == bell.dimension + labelled.dimension + 1
    expected = (F(0),) + series_cauchy(prefix(bell), prefix(labelled)).coefficients[: N]
    assert prefix(result).coefficients == expected


def test_gf_mul_shifted_by_unit_and_zero(bell):
    unit = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [1]})
    result = gf_mul_shifted(bell, unit)
    assert prefix(result).coefficients == (F(0),) + prefix(bell, N - 1).coefficients
    zero_like = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [0]})
    assert prefix(gf_mul_shifted(bell, zero_like)).coefficients == (F(0),) * (N + 1)


def test_gf_shift_backward(bell):
    result = gf_shift_backward(bell)
    assert result.dimension == 2 * bell.dimension
    assert prefix(result, N).coefficients == prefix(bell, N + 1).coefficients[1:]


def test_gf_shift_backward_constant():
    const = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [7]})
    assert prefix(gf_shift_backward(const), 4).coefficients == (F(0),) * 5


def test_gf_shift_round_trip(labelled):
    # labelled trees have zero constant term, so back(forward(f)) = f
    result = gf_shift_backward(gf_shift_forward(labelled))
    assert prefix(result, 6).coefficients == prefix(labelled, 6).coefficients


def test_gf_shift_backward_ternary_alphabet():
    # y' = y^3 compiles with a ternary symbol, exercising the cut positions
    # 0..3 of the backward-shift encoding
    from treeseries.compile import compile_cda, parse_rds

    a = compile_cda(parse_rds("y' = y*y*y ; y(0)=1"))
    assert max(k for _, k in a.alphabet.symbols) == 3
    base = generating_prefix(a, 9)
    result = gf_shift_backward(a)
    assert prefix(result, 8).coefficients == base.coefficients[1:]


def test_gf_derive(bell, labelled):
    for a in (bell, labelled):
        result = gf_derive(a)
        assert result.dimension == 2 * (a.dimension + 1)
        base = prefix(a, N + 1)
        expected = tuple((n + 1) * base[n + 1] for n in range(N + 1))
        assert prefix(result).coefficients == expected


def test_gf_derive_constant_is_zero():
    const = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [5]})
    assert prefix(gf_derive(const), 4).coefficients == (F(0),) * 5


def test_gf_integrate(bell, zero):
    result = gf_integrate(bell)
    assert result.dimension == bell.dimension + 2
    base = prefix(bell, N)
    expected = (F(0),) + tuple(base[n] / (n + 1) for n in range(N))
    assert prefix(result).coefficients == expected
    assert prefix(gf_integrate(zero)).coefficients == (F(0),) * (N + 1)


def test_derive_then_integrate_round_trips(bell):
    result = gf_integrate(gf_derive(bell))
    base = prefix(bell, 6)
    got = prefix(result, 6)
    assert got[0] == 0
    assert got.coefficients[1:] == base.coefficients[1:]


def test_derive_after_integrate_is_identity(bell):
    result = gf_derive(gf_integrate(bell))
    assert prefix(result, 6).coefficients == prefix(bell, 6).coefficients


def test_gf_cauchy(bell, labelled):
    result = gf_cauchy(bell, labelled)
    assert result.dimension == 2 * (bell.dimension + labelled.dimension + 1)
    expected = series_cauchy(prefix(bell), prefix(labelled))
    assert prefix(result).coefficients == expected.coefficients


def test_gf_cauchy_unit_identity(bell):
    unit = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [1]})
    assert prefix(gf_cauchy(bell, unit)).coefficients == prefix(bell).coefficients


def test_gf_cauchy_square():
    geo = Automaton.build(
        1,
        RankedAlphabet.of(("a", 0), ("u", 1)),
        {"a": [1], "u": [["1"]]},
    )  # all-ones series
    sq = gf_cauchy(geo, geo)
    assert prefix(sq, 5).coefficients == tuple(F(n + 1) for n in range(6))


def test_gf_inverse_constant():
    const = Automaton.build(1, RankedAlphabet.of(("a", 0)), {"a": [2]})
    result = gf_inverse(const)
    assert prefix(result, 4).coefficients == (F(1, 2),) + (F(0),) * 4


def test_gf_inverse_bell(bell):
    result = gf_inverse(bell)
    base = prefix(bell)
    inv = [1 / base[0]]
    for n in range(1, N + 1):
        inv.append(-1 / base[0] * sum(base[i + 1] * inv[n - 1 - i] for i in range(n)))
    assert prefix(result).coefficients == tuple(inv)
    convolution = series_cauchy(prefix(result), base)
    assert convolution.coefficients == (F(1),) + (F(0),) * N


def test_gf_inverse_involution(bell):
    result = gf_inverse(gf_inverse(bell))
    assert prefix(result, 6).coefficients == prefix(bell, 6).coefficients


def test_gf_inverse_convolution_identity_at_automaton_level(bell):
    # compose the automata themselves, not just their prefixes
    ident = gf_cauchy(bell, gf_inverse(bell))
    assert prefix(ident, 8).coefficients == (F(1),) + (F(0),) * 8


def test_gf_inverse_requires_nonzero_constant(labelled):
    with pytest.raises(ZeroConstantTerm):
        gf_inverse(labelled)
