"""Generating-function coefficients and exact series-prefix arithmetic.

The coefficient vectors a_n of an automaton satisfy

    a_0 = sum of nullary weight rows
    a_n = sum over symbols g of arity k >= 1, and over n1+...+nk = n-1, of
          (a_n1 (x) ... (x) a_nk) . mu(g)(n, n1, ..., nk)

which the stream below evaluates by dynamic programming, enumerating
compositions lexicographically.  The generating prefix is the first
component of each vector.  brute_force_coefficient recomputes a_n by
summing mu~ over every tree of size n and is the independent oracle for
the recurrence.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import Automaton, compositions, enumerate_trees, kron_all, unrank_row
from .exactmath import _frac


@dataclass(frozen=True)
class SeriesPrefix:
    coefficients: tuple  # of Fraction, index n holds the coefficient of x^n

    @classmethod
    def of(cls, *values) -> "SeriesPrefix":
        return cls(tuple(_frac(v) for v in values))

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, n):
        return self.coefficients[n]

    def truncate(self, length: int) -> "SeriesPrefix":
        return SeriesPrefix(self.coefficients[:length])


@dataclass(frozen=True)
class VectorSeriesPrefix:
    vectors: tuple  # of row tuples, all of one length d

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, n):
        return self.vectors[n]

    def firsts(self) -> SeriesPrefix:
        return SeriesPrefix(tuple(v[0] for v in self.vectors))


def series_add(s1: SeriesPrefix, s2: SeriesPrefix) -> SeriesPrefix:
    n = min(len(s1), len(s2))
    return SeriesPrefix(tuple(s1[i] + s2[i] for i in range(n)))


def series_scale(s: SeriesPrefix, c) -> SeriesPrefix:
    c = _frac(c)
    return SeriesPrefix(tuple(a * c for a in s.coefficients))


def series_cauchy(s1: SeriesPrefix, s2: SeriesPrefix) -> SeriesPrefix:
    n = min(len(s1), len(s2))
    out = []
    for m in range(n):
        out.append(sum((s1[i] * s2[m - i] for i in range(m + 1)), Fraction(0)))
    return SeriesPrefix(tuple(out))


def s_derive(s: SeriesPrefix) -> SeriesPrefix:
    """The operator f -> x f' on prefixes: coefficient n becomes n * a_n."""
    return SeriesPrefix(tuple(n * a for n, a in enumerate(s.coefficients)))


class CoefficientStream:
    """Resumable cache of the coefficient vectors of one automaton.

    Not safe to share between threads; create one per consumer.
    """

    def __init__(self, automaton: Automaton):
        self.automaton = automaton
        d = automaton.dimension
        a0 = [Fraction(0)] * d
        for name in automaton.alphabet.of_arity(0):
            row = automaton.weight(name)[0]
            for j in range(d):
                a0[j] += row[j]
        self._cache = [tuple(a0)]
        # per symbol: (arity, [(state indices of the row, column, entry)]);
        # only these few Kronecker components are ever multiplied out
        self._entries = {}
        for name, k in automaton.alphabet.symbols:
            if k >= 1:
                cells = [
                    (unrank_row(row, d, k), col, entry)
                    for row, col, entry in automaton.nonzero_entries(name)
                ]
                self._entries[name] = (k, cells)

    def up_to(self, n_max: int):
        while len(self._cache) <= n_max:
            self._cache.append(self._next(len(self._cache)))
        return self._cache[: n_max + 1]

    def _next(self, n: int):
        d = self.automaton.dimension
        acc = [Fraction(0)] * d
        for name, (k, cells) in self._entries.items():
            for comp in compositions(n - 1, k):
                vecs = [self._cache[m] for m in comp]
                sizes = (n,) + comp
                for indices, col, entry in cells:
                    coeff = Fraction(1)
                    for vec, i in zip(vecs, indices):
                        coeff *= vec[i]
                        if not coeff:
                            break
                    if coeff:
                        acc[col] += coeff * entry(sizes)
        return tuple(acc)


def coefficients(a: Automaton, n_max: int) -> VectorSeriesPrefix:
    """Coefficient vectors a_0..a_n_max via the size-indexed recurrence."""
    return VectorSeriesPrefix(tuple(CoefficientStream(a).up_to(n_max)))


def generating_prefix(a: Automaton, n_max: int) -> SeriesPrefix:
    """First components of the coefficient vectors: the generating function."""
    return coefficients(a, n_max).firsts()


def brute_force_coefficient(a: Automaton, n: int):
    """Sum of mu~(t) over every tree of size n, by exhaustive enumeration.

    Subtree vectors are cached per object: the enumeration shares subtree
    instances heavily, and mu~ of a subtree does not depend on its context.
    """
    d = a.dimension
    trees = enumerate_trees(a.alphabet, n)
    nonzero = {name: a.nonzero_entries(name) for name in a.alphabet.names()}
    cache = {}

    def mu_tilde(t):
        found = cache.get(id(t))
        if found is not None:
            return found
        k = a.alphabet.arity(t.root)
        if k == 0:
            result = a.weight(t.root)[0]
        else:
            big = kron_all([mu_tilde(c) for c in t.children])
            sizes = (t.size,) + tuple(c.size for c in t.children)
            out = [Fraction(0)] * d
            for row, col, entry in nonzero[t.root]:
                coeff = big[row]
                if coeff != 0:
                    out[col] += coeff * entry(sizes)
            result = tuple(out)
        cache[id(t)] = result
        return result

    acc = [Fraction(0)] * d
    for t in trees:
        vec = mu_tilde(t)
        for j in range(d):
            acc[j] += vec[j]
    return tuple(acc)
