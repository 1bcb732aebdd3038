"""Constructions producing new automata from old.

Tree-series operations (ts_*) preserve the value of every individual tree;
generating-function operations (gf_*) act on the series only and are free to
rename or merge alphabet symbols.  Compound operations chain the primitive
constructions literally, so every link is testable on its own; dimensions
grow accordingly and stay small at the scale this package targets.

Fresh symbols introduced here use the reserved "__" prefix, which user
alphabets must avoid.
"""

from __future__ import annotations

from fractions import Fraction

from .core import (
    Automaton,
    FinalVector,
    RankedAlphabet,
    Tree,
    absorb_final_vector,
    evaluate,
    kron_all,
    make_arity_distinct,
    row_index,
    unify_alphabets,
    unrank_row,
)
from .errors import AlphabetMismatch, ZeroConstantTerm
from .exactmath import MultiPolynomial, SizeRational, UniPolynomial, _frac
from .series import generating_prefix


def _zero(arity: int) -> SizeRational:
    return SizeRational(MultiPolynomial(arity + 1))


def _fresh_name(base: str, taken) -> str:
    name = base
    n = 1
    while name in taken:
        n += 1
        name = f"{base}{n}"
    return name


# ---------------------------------------------------------------------------
# formal tree series operations


def ts_add(a1: Automaton, a2: Automaton) -> Automaton:
    """Value on every tree is the sum of the inputs' values.

    Requires genuinely identical alphabets: unify_alphabets preserves series,
    not per-tree values, so it is not applied implicitly here.
    """
    if a1.alphabet != a2.alphabet:
        raise AlphabetMismatch("ts_add needs two automata over one identical alphabet")
    d1, d2 = a1.dimension, a2.dimension
    d = d1 + d2
    weights = {}
    for name, arity in a1.alphabet.symbols:
        m1, m2 = a1.weight(name), a2.weight(name)
        if arity == 0:
            weights[name] = [m1[0] + m2[0]]
            continue
        zero = _zero(arity)
        rows = []
        for row in range(d**arity):
            idx = unrank_row(row, d, arity)
            cells = [zero] * d
            if all(i < d1 for i in idx):
                old = m1[row_index(idx, d1)]
                for j in range(d1):
                    cells[j] = old[j]
            elif all(i >= d1 for i in idx):
                old = m2[row_index(tuple(i - d1 for i in idx), d2)]
                for j in range(d2):
                    cells[d1 + j] = old[j]
            rows.append(tuple(cells))
        weights[name] = rows
    block = Automaton.build(d, a1.alphabet, weights)
    beta = FinalVector.of(*([1] + [0] * (d1 - 1) + [1] + [0] * (d2 - 1)))
    return absorb_final_vector(block, beta)


def ts_scale(a: Automaton, c) -> Automaton:
    """Value on every tree scaled by the rational c; c = 1 returns a itself."""
    c = _frac(c)
    if c == 1:
        return a
    return absorb_final_vector(a, FinalVector.unit(a.dimension, scale=c))


def ts_hadamard(a1: Automaton, a2: Automaton) -> Automaton:
    """Value on every tree is the product of the inputs' values (dimension
    d1*d2, paired-index construction)."""
    if a1.alphabet != a2.alphabet:
        raise AlphabetMismatch(
            "ts_hadamard needs two automata over one identical alphabet"
        )
    d1, d2 = a1.dimension, a2.dimension
    d = d1 * d2

    def pair(i, j):
        return i * d2 + j

    weights = {}
    for name, arity in a1.alphabet.symbols:
        m1, m2 = a1.weight(name), a2.weight(name)
        if arity == 0:
            row = [Fraction(0)] * d
            for i in range(d1):
                for j in range(d2):
                    row[pair(i, j)] = m1[0][i] * m2[0][j]
            weights[name] = [row]
            continue
        rows = []
        for row in range(d**arity):
            idx = unrank_row(row, d, arity)
            pairs = [(i // d2, i % d2) for i in idx]
            r1 = row_index(tuple(p[0] for p in pairs), d1)
            r2 = row_index(tuple(p[1] for p in pairs), d2)
            cells = []
            for i in range(d1):
                for j in range(d2):
                    e1, e2 = m1[r1][i], m2[r2][j]
                    cells.append(_zero(arity) if e1.is_zero or e2.is_zero else e1 * e2)
            rows.append(tuple(cells))
        weights[name] = rows
    return Automaton.build(d, a1.alphabet, weights)


# ---------------------------------------------------------------------------
# generating-function operations


def gf_add(a1: Automaton, a2: Automaton) -> Automaton:
    b1, b2 = unify_alphabets(a1, a2)
    return ts_add(b1, b2)


def gf_scale(a: Automaton, c) -> Automaton:
    return ts_scale(a, c)


def _embed_shifted(matrix, arity: int, offset: int, d_old: int, d_new: int):
    """Re-index a weight matrix into a larger automaton, states shifted by
    offset; all rows/columns touching foreign states are zero."""
    zero = _zero(arity)
    rows = []
    for row in range(d_new**arity):
        idx = unrank_row(row, d_new, arity)
        cells = [zero] * d_new
        if all(offset <= i < offset + d_old for i in idx):
            old = matrix[row_index(tuple(i - offset for i in idx), d_old)]
            for j in range(d_old):
                cells[offset + j] = old[j]
        rows.append(tuple(cells))
    return rows


def gf_shift_forward(a: Automaton) -> Automaton:
    """f(x) -> x * f(x), via a fresh unary root symbol."""
    d = a.dimension
    d_new = d + 1
    u_name = _fresh_name("__u", a.alphabet.names())
    alphabet = RankedAlphabet.of((u_name, 1), *a.alphabet.symbols)
    weights = {}
    for name, arity in a.alphabet.symbols:
        m = a.weight(name)
        if arity == 0:
            weights[name] = [(Fraction(0),) + m[0]]
        else:
            weights[name] = _embed_shifted(m, arity, 1, d, d_new)
    u = [[_zero(1)] * d_new for _ in range(d_new)]
    u[1][0] = SizeRational.const(1, 1)  # reads the old first coordinate
    weights[u_name] = u
    return Automaton.build(d_new, alphabet, weights)


def _rename_apart(a2: Automaton, taken) -> Automaton:
    mapping = {}
    for name, arity in a2.alphabet.symbols:
        new = name
        while new in taken or new in mapping.values():
            new = "__r_" + new
        mapping[name] = new
    alphabet = RankedAlphabet.of(*[(mapping[n], k) for n, k in a2.alphabet.symbols])
    weights = {mapping[n]: a2.weight(n) for n in a2.alphabet.names()}
    return Automaton.build(a2.dimension, alphabet, weights)


def gf_mul_shifted(a1: Automaton, a2: Automaton) -> Automaton:
    """(f, g) -> x * f(x) * g(x), via a fresh binary root symbol whose left
    subtree is read in a1 and right subtree in a2."""
    a2 = _rename_apart(a2, set(a1.alphabet.names()))
    u_name = _fresh_name("__u", set(a1.alphabet.names()) | set(a2.alphabet.names()))
    d1, d2 = a1.dimension, a2.dimension
    d = d1 + d2 + 1
    alphabet = RankedAlphabet.of(
        (u_name, 2), *a1.alphabet.symbols, *a2.alphabet.symbols
    )
    weights = {}
    for name, arity in a1.alphabet.symbols:
        m = a1.weight(name)
        if arity == 0:
            weights[name] = [(Fraction(0),) + m[0] + (Fraction(0),) * d2]
        else:
            weights[name] = _embed_shifted(m, arity, 1, d1, d)
    for name, arity in a2.alphabet.symbols:
        m = a2.weight(name)
        if arity == 0:
            weights[name] = [(Fraction(0),) * (1 + d1) + m[0]]
        else:
            weights[name] = _embed_shifted(m, arity, 1 + d1, d2, d)
    u = [[_zero(2)] * d for _ in range(d * d)]
    u[row_index((1, 1 + d1), d)][0] = SizeRational.const(2, 1)
    weights[u_name] = u
    return Automaton.build(d, alphabet, weights)


def gf_shift_backward(a: Automaton) -> Automaton:
    """f(x) -> (f(x) - f(0)) / x.

    The input is made arity distinct first.  For each symbol g_k and each
    cut position i, a fresh symbol __h_<k>_<i> simulates g_k applied to
    i-1 ordinary subtrees, one shifted subtree, and trailing leaves; the
    instantiated weight substitutes (x0+1, x1, ..., x_{i-1}, xi+1, 0, ..., 0)
    so the simulated tree is one node larger than the real one.
    """
    a = make_arity_distinct(a)
    d = a.dimension
    d_new = 2 * d
    arities = sorted({k for _, k in a.alphabet.symbols})
    leaf = a.alphabet.of_arity(0)[0]
    leaf_row = a.weight(leaf)[0]

    symbols = list(a.alphabet.symbols)
    for k in arities:
        if k == 0:
            continue
        for i in range(k + 1):
            symbols.append((f"__h_{k}_{i}", i))
    alphabet = RankedAlphabet.of(*symbols)

    weights = {}
    for name, arity in a.alphabet.symbols:
        m = a.weight(name)
        if arity == 0:
            weights[name] = [(Fraction(0),) * d + m[0]]
        else:
            weights[name] = _embed_shifted(m, arity, d, d, d_new)

    for k in arities:
        if k == 0:
            continue
        gk = a.weight(f"h{k}")
        # arity-0 witness: the size-1 tree g_k(leaf,...,leaf)
        mu_tilde, _ = evaluate(a, Tree(f"h{k}", tuple(Tree(leaf) for _ in range(k))))
        weights[f"__h_{k}_0"] = [mu_tilde + (Fraction(0),) * d]
        for i in range(1, k + 1):
            # substituted weight: parent one larger, cut child one larger,
            # trailing children pinned to leaves of size zero
            mapping = [("var", 0, 1)]
            mapping += [("var", v, 0) for v in range(1, i)]
            mapping.append(("var", i, 1))
            mapping += [("const", 0)] * (k - i)
            sub = [
                [entry.substitute_sizes(mapping, i) for entry in row] for row in gk
            ]
            # fold trailing leaf vectors: M = (I_{d^i} (x) leaf^(k-i)) . sub
            tail = kron_all([leaf_row] * (k - i))
            m_rows = []
            for lead in range(d**i):
                acc = [_zero(i)] * d
                for t_ix, t_val in enumerate(tail):
                    if t_val == 0:
                        continue
                    src = sub[lead * (d ** (k - i)) + t_ix]
                    for j in range(d):
                        if not src[j].is_zero:
                            acc[j] = acc[j] + src[j].scale(t_val)
                m_rows.append(acc)
            zero = _zero(i)
            rows = []
            for row in range(d_new**i):
                idx = unrank_row(row, d_new, i)
                cells = [zero] * d_new
                if all(x >= d for x in idx[:-1]) and idx[-1] < d:
                    src = m_rows[row_index(tuple(x - d for x in idx[:-1]) + (idx[-1],), d)]
                    for j in range(d):
                        cells[j] = src[j]
                rows.append(tuple(cells))
            weights[f"__h_{k}_{i}"] = rows
    return Automaton.build(d_new, alphabet, weights)


def gf_derive(a: Automaton) -> Automaton:
    """f -> f', as the x*f' construction followed by a backward shift."""
    theta = absorb_final_vector(
        a, FinalVector.of((UniPolynomial.x(), UniPolynomial.const(1)),
                          *([0] * (a.dimension - 1)))
    )
    return gf_shift_backward(theta)


def gf_integrate(a: Automaton) -> Automaton:
    """f -> integral of f from 0, as (1/x) integral followed by a forward shift."""
    inner = absorb_final_vector(
        a,
        FinalVector.of(
            (UniPolynomial.const(1), UniPolynomial((1, 1))), *([0] * (a.dimension - 1))
        ),
    )
    return gf_shift_forward(inner)


def gf_cauchy(a1: Automaton, a2: Automaton) -> Automaton:
    """(f, g) -> f * g: the shifted product followed by a backward shift."""
    return gf_shift_backward(gf_mul_shifted(a1, a2))


def gf_inverse(a: Automaton) -> Automaton:
    """f -> 1/f, defined when the constant term a_0 is nonzero.

    Builds the backward shift of f, then adds one coordinate computing the
    inverse coefficients b_n = -(1/a_0) * sum a_{i+1} b_{n-1-i} via a fresh
    binary symbol.
    """
    a0 = generating_prefix(a, 0)[0]
    if a0 == 0:
        raise ZeroConstantTerm("series has zero constant term; no inverse")
    shifted = make_arity_distinct(gf_shift_backward(a))
    d = shifted.dimension
    d_new = d + 1
    u_name = _fresh_name("__u", shifted.alphabet.names())
    alphabet = RankedAlphabet.of((u_name, 2), *shifted.alphabet.symbols)
    weights = {}
    for name, arity in shifted.alphabet.symbols:
        m = shifted.weight(name)
        if arity == 0:
            weights[name] = [(1 / a0,) + m[0]]
        else:
            weights[name] = _embed_shifted(m, arity, 1, d, d_new)
    u = [[_zero(2)] * d_new for _ in range(d_new * d_new)]
    u[row_index((1, 0), d_new)][0] = SizeRational.const(2, -1 / a0)
    weights[u_name] = u
    return Automaton.build(d_new, alphabet, weights)
