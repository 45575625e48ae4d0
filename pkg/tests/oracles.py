"""Independent reference implementations used by the test suite.

Everything here is written the slow, obvious way on purpose: permutation
scans, direct lattice sums, Monte Carlo volumes, and an exact Weingarten
expectation from the pair-partition Gram matrix.  None of it shares code
with the package internals it checks.
"""

from fractions import Fraction
from itertools import permutations

import numpy as np

from traffics.graphs import TestGraph
from traffics.partitions import enumerate_partitions, pair_partitions


def brute_isomorphic(g: TestGraph, h: TestGraph) -> bool:
    """Test isomorphism by trying every vertex bijection (|V| <= 8)."""
    if g.n_vertices != h.n_vertices or len(g.edges) != len(h.edges):
        return False
    target = sorted(h.edges)
    for perm in permutations(range(g.n_vertices)):
        moved = sorted(
            e._replace(src=perm[e.src], tar=perm[e.tar]) for e in g.edges
        )
        if moved == target:
            return True
    return False


def bell_numbers(limit: int) -> list[int]:
    """Bell triangle; bell_numbers(6) == [1, 1, 2, 5, 15, 52, 203]."""
    out = [1]
    row = [1]
    for _ in range(limit):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        out.append(nxt[0])
        row = nxt
    return out


def catalan_by_recurrence(limit: int) -> list[int]:
    """C_0..C_limit via C_{k+1} = sum_i C_i C_{k-i}."""
    cs = [1]
    for k in range(limit):
        cs.append(sum(cs[i] * cs[k - i] for i in range(k + 1)))
    return cs


def double_factorial_odd(k: int) -> int:
    out = 1
    for j in range(1, 2 * k, 2):
        out *= j
    return out


def naive_trace_sum(T: TestGraph, fn) -> complex:
    """Sum fn over the quotient of T by every vertex partition."""
    from traffics.graphs import quotient

    total = 0
    for pi in enumerate_partitions(T.n_vertices):
        total = total + fn(quotient(T, pi))
    return total


def mc_cut_volume(T: TestGraph, proportions, points: int, seed: int = 0) -> float:
    """Monte Carlo volume of the band-compatible region in [0,1]^V."""
    rng = np.random.default_rng(seed)
    ok = np.ones(points, dtype=bool)
    xs = rng.random((T.n_vertices, points))
    for e in T.edges:
        if e.src == e.tar:
            continue
        c = float(proportions[e.label])
        ok &= np.abs(xs[e.src] - xs[e.tar]) <= c
    return float(np.mean(ok))


def forest_components(n_vertices: int, undirected_edges) -> int:
    """Union-find component count of an undirected graph."""
    parent = list(range(n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in undirected_edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(v) for v in range(n_vertices)})


def is_forest(n_vertices: int, undirected_edges) -> bool:
    comps = forest_components(n_vertices, undirected_edges)
    return len(list(undirected_edges)) == n_vertices - comps


# ---------------------------------------------------------------------------
# exact Haar orthogonal expectations

def _loops(p, q, m: int) -> int:
    return forest_components(m, list(p) + list(q))


def _solve_fraction(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    """Gaussian elimination over Q."""
    m = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(m):
        piv = next(r for r in range(col, m) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(m):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[r][m] for r in range(m)]


def haar_injective_expectation(T: TestGraph, n: int) -> Fraction:
    """Exact E[prod of O-entries] for one injective vertex labelling.

    The Gram matrix of pair partitions is G(p, q) = n^{#loops(p v q)}; the
    Weingarten matrix is its inverse, and only pairings constant on rows
    (resp. columns) survive the index deltas.
    """
    edges = T.edges
    m = len(edges)
    if m % 2:
        return Fraction(0)
    rows = [e.src if e.star else e.tar for e in edges]
    cols = [e.tar if e.star else e.src for e in edges]
    pairings = [tuple(tuple(b) for b in p) for p in pair_partitions(m)]
    row_ok = [
        i
        for i, p in enumerate(pairings)
        if all(rows[a] == rows[b] for a, b in p)
    ]
    col_ok = [
        i
        for i, p in enumerate(pairings)
        if all(cols[a] == cols[b] for a, b in p)
    ]
    if not row_ok or not col_ok:
        return Fraction(0)
    flat = [
        [tuple(pair) for pair in pairings[i]] for i in range(len(pairings))
    ]
    G = [
        [Fraction(n) ** _loops(flat[i], flat[j], m) for j in range(len(pairings))]
        for i in range(len(pairings))
    ]
    total = Fraction(0)
    for q in col_ok:
        e_q = [Fraction(int(i == q)) for i in range(len(pairings))]
        wg_col = _solve_fraction(G, e_q)
        for p in row_ok:
            total += wg_col[p]
    return total


def haar_tau0_exact(T: TestGraph, n: int) -> Fraction:
    """Exact (1/n) E tr^0 T(O) for Haar orthogonal O at finite n."""
    per = haar_injective_expectation(T, n)
    count = Fraction(1)
    for j in range(T.n_vertices):
        count *= n - j
    return count * per / n


def haar_estimator_mean(T: TestGraph, n: int) -> Fraction:
    """Exact mean of the count-normalized injective estimator."""
    return Fraction(n) ** (T.n_vertices - 1) * haar_injective_expectation(T, n)
