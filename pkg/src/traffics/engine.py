"""Evaluate graph monomials on matrices and estimate traffic states.

Evaluation follows the sum-over-maps rule: a graph monomial t with input u
and output v takes the value

    t(A)(i, j) = sum over phi: V -> [n] with phi(v) = i, phi(u) = j
                 of the product over edges e of A_e(phi(tar e), phi(src e)),

with the conjugate transpose bound to starred edges.  The engine contracts
vertices one at a time (greedy, smallest resulting tensor first) via einsum,
broadcasting over any leading batch axes of the bound matrices.  When an
elimination would exceed the intermediate rank guard it falls back to direct
enumeration of the maps, which is also exposed as a test oracle.

Traffic states: ``tau[T] = E (1/n) tr T(A)`` is estimated by Monte Carlo with
one counter-based stream per sample index, so results are byte-identical for
a given (seed, n, samples) regardless of batching or thread count.
"""

from __future__ import annotations

import math
import string
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product as _iproduct
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np

from .graphs import GraphMonomial, TestGraph, canonical_form, canonical_key, quotient
from .partitions import MAX_GROUND, enumerate_partitions, mobius_zero

DEFAULT_MAX_RANK = 4
DEFAULT_ENUM_LIMIT = 10**8


class _RankOverflow(Exception):
    pass


def _bindings(g: TestGraph, matrices: Any) -> dict[str, np.ndarray]:
    labels = g.labels()
    if isinstance(matrices, Mapping):
        out = {}
        for lab in labels:
            if lab not in matrices:
                raise ValueError(f"no matrix bound to label {lab!r}")
            out[lab] = np.asarray(matrices[lab])
    else:
        if len(labels) > 1:
            raise ValueError("a bare array can only bind a single-label graph")
        out = {lab: np.asarray(matrices) for lab in labels}
    n = batch = None
    for lab, m in out.items():
        if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
            raise ValueError(f"matrix for {lab!r} is not square")
        if n is None:
            n, batch = m.shape[-1], m.shape[:-2]
        elif m.shape[-1] != n or m.shape[:-2] != batch:
            raise ValueError("bound matrices disagree in shape")
    return out


def _dim(g: TestGraph, mats: dict[str, np.ndarray], matrices: Any) -> tuple[int, tuple]:
    if mats:
        m = next(iter(mats.values()))
        return m.shape[-1], m.shape[:-2]
    # edgeless graph: take the dimension from whatever was passed
    if isinstance(matrices, Mapping):
        for m in matrices.values():
            m = np.asarray(m)
            return m.shape[-1], m.shape[:-2]
        raise ValueError("cannot infer the dimension from an empty binding")
    m = np.asarray(matrices)
    return m.shape[-1], m.shape[:-2]


def _edge_factor(e, mats) -> tuple[np.ndarray, tuple[int, ...]]:
    m = mats[e.label]
    if e.star:
        arr, axes = m.conj(), (e.src, e.tar)
    else:
        arr, axes = m, (e.tar, e.src)
    if e.src == e.tar:
        return np.diagonal(arr, axis1=-2, axis2=-1), (e.src,)
    return arr, axes


def _contract(
    g: TestGraph, mats: dict[str, np.ndarray], keep: tuple[int, ...], max_rank: int,
    n: int, batch: tuple,
) -> np.ndarray:
    """Sum over all maps phi, returning an array indexed by phi on ``keep``."""
    factors = [_edge_factor(e, mats) for e in g.edges]
    scalar = np.ones(batch)
    covered = {v for _, axes in factors for v in axes}
    for v in range(g.n_vertices):
        if v not in covered and v not in keep:
            scalar = scalar * n  # vertex free in every map
    internal = [v for v in sorted(covered) if v not in keep]
    while internal:
        best_v, best_rank = None, None
        for v in internal:
            axes = set()
            for _, ax in factors:
                if v in ax:
                    axes.update(ax)
            rank = len(axes) - 1
            if best_rank is None or rank < best_rank:
                best_v, best_rank = v, rank
        if best_rank > max_rank:
            raise _RankOverflow(best_rank)
        group = [(arr, ax) for arr, ax in factors if best_v in ax]
        rest = [(arr, ax) for arr, ax in factors if best_v not in ax]
        out_axes = tuple(
            dict.fromkeys(a for _, ax in group for a in ax if a != best_v)
        )
        letter = {}
        for _, ax in group:
            for a in ax:
                letter.setdefault(a, string.ascii_letters[len(letter)])
        spec = ",".join("..." + "".join(letter[a] for a in ax) for _, ax in group)
        spec += "->..." + "".join(letter[a] for a in out_axes)
        merged = np.einsum(spec, *(arr for arr, _ in group), optimize=True)
        if out_axes:
            rest.append((merged, out_axes))
        else:
            scalar = scalar * merged
        factors = rest
        internal.remove(best_v)
    # only `keep` axes remain; combine
    if not keep:
        return scalar
    letter = {a: string.ascii_letters[i] for i, a in enumerate(keep)}
    ins, ops = [], []
    for arr, ax in factors:
        ins.append("..." + "".join(letter[a] for a in ax))
        ops.append(arr)
    for a in keep:
        if not any(a in ax for _, ax in factors):
            ins.append("..." + letter[a])
            ops.append(np.ones(batch + (n,)))
    spec = ",".join(ins) + "->..." + "".join(letter[a] for a in keep)
    out = np.einsum(spec, *ops, optimize=True)
    return out * scalar.reshape(batch + (1,) * len(keep))


def _phi_values(
    g: TestGraph, mats: dict[str, np.ndarray], phis: np.ndarray, batch: tuple
) -> np.ndarray:
    """Product over edges for each map in ``phis`` (rows = maps)."""
    vals = np.ones(batch + (phis.shape[0],))
    for e in g.edges:
        arr, axes = _edge_factor(e, mats)
        if len(axes) == 1:
            vals = vals * arr[..., phis[:, axes[0]]]
        else:
            vals = vals * arr[..., phis[:, axes[0]], phis[:, axes[1]]]
    return vals


def _all_maps(n: int, k: int, limit: int) -> np.ndarray:
    if n**k > limit:
        raise ValueError(f"enumeration of {n}^{k} maps exceeds the limit {limit}")
    grids = np.meshgrid(*[np.arange(n)] * k, indexing="ij")
    return np.stack([a.ravel() for a in grids], axis=1)


def eval_graph_matrix(
    t: GraphMonomial,
    matrices: Any,
    *,
    max_rank: int = DEFAULT_MAX_RANK,
    enum_limit: int = DEFAULT_ENUM_LIMIT,
) -> np.ndarray:
    """Evaluate a graph monomial on bound matrices; result (..., n, n)."""
    g = t.graph
    mats = _bindings(g, matrices)
    n, batch = _dim(g, mats, matrices)
    try:
        if t.v_in == t.v_out:
            vec = _contract(g, mats, (t.v_in,), max_rank, n, batch)
            out = np.zeros(batch + (n, n), dtype=vec.dtype)
            idx = np.arange(n)
            out[..., idx, idx] = vec
            return out
        return _contract(g, mats, (t.v_out, t.v_in), max_rank, n, batch)
    except _RankOverflow:
        pass
    phis = _all_maps(n, g.n_vertices, enum_limit)
    vals = _phi_values(g, mats, phis, batch)
    out = np.zeros(batch + (n, n), dtype=vals.dtype)
    flat = out.reshape((-1, n, n))
    vflat = vals.reshape((-1, vals.shape[-1]))
    np.add.at(flat, (slice(None), phis[:, t.v_out], phis[:, t.v_in]), vflat)
    return flat.reshape(out.shape)


def trace_test_graph(
    T: TestGraph,
    matrices: Any,
    *,
    max_rank: int = DEFAULT_MAX_RANK,
    enum_limit: int = DEFAULT_ENUM_LIMIT,
) -> Any:
    """tr T(A): sum over all vertex maps of the edge-entry product."""
    mats = _bindings(T, matrices)
    n, batch = _dim(T, mats, matrices)
    try:
        out = _contract(T, mats, (), max_rank, n, batch)
    except _RankOverflow:
        phis = _all_maps(n, T.n_vertices, enum_limit)
        out = _phi_values(T, mats, phis, batch).sum(axis=-1)
    return out if batch else out[()]


@lru_cache(maxsize=4096)
def _injective_terms(T: TestGraph) -> tuple[tuple[int, TestGraph], ...]:
    """Mobius-weighted quotients of T, grouped up to isomorphism."""
    if T.n_vertices > MAX_GROUND:
        raise ValueError(f"too many vertices for the partition sum ({T.n_vertices})")
    agg: dict[tuple, list] = {}
    for pi in enumerate_partitions(T.n_vertices):
        q = quotient(T, pi)
        key = canonical_key(q)
        slot = agg.get(key)
        if slot is None:
            agg[key] = [canonical_form(q), mobius_zero(pi)]
        else:
            slot[1] += mobius_zero(pi)
    return tuple(
        (w, graph) for graph, w in (agg[k] for k in sorted(agg)) if w != 0
    )


def trace_injective(
    T: TestGraph,
    matrices: Any,
    *,
    max_rank: int = DEFAULT_MAX_RANK,
    enum_limit: int = DEFAULT_ENUM_LIMIT,
) -> Any:
    """tr^0 T(A): the sum restricted to injective maps, via Mobius inversion."""
    total = None
    for w, q in _injective_terms(T):
        val = trace_test_graph(q, matrices, max_rank=max_rank, enum_limit=enum_limit)
        total = w * val if total is None else total + w * val
    return total


def trace_injective_direct(
    T: TestGraph, matrices: Any, *, enum_limit: int = DEFAULT_ENUM_LIMIT
) -> Any:
    """Oracle: tr^0 by direct enumeration of injective maps."""
    mats = _bindings(T, matrices)
    n, batch = _dim(T, mats, matrices)
    k = T.n_vertices
    count = math.perm(n, k)
    if count > enum_limit:
        raise ValueError(f"enumeration of {count} injective maps exceeds the limit")
    if count == 0:
        return np.zeros(batch) if batch else 0.0
    phis = np.array(list(permutations(range(n), k)), dtype=np.intp)
    out = _phi_values(T, mats, phis, batch).sum(axis=-1)
    return out if batch else out[()]


def trace_full_direct(
    T: TestGraph, matrices: Any, *, enum_limit: int = DEFAULT_ENUM_LIMIT
) -> Any:
    """Oracle: tr over all maps by direct enumeration."""
    mats = _bindings(T, matrices)
    n, batch = _dim(T, mats, matrices)
    phis = _all_maps(n, T.n_vertices, enum_limit)
    out = _phi_values(T, mats, phis, batch).sum(axis=-1)
    return out if batch else out[()]


# ---------------------------------------------------------------------------
# Monte Carlo estimation

@dataclass(frozen=True)
class Estimate:
    """Monte Carlo estimate of a (normalized) traffic-state quantity."""

    mean: complex
    stderr: float
    samples: int
    n: int

    def z(self, theory: complex) -> float:
        if self.stderr == 0:
            return math.inf if self.mean != theory else 0.0
        return abs(complex(self.mean) - complex(theory)) / self.stderr


def _chunk_size(n: int) -> int:
    # keep stacked batches near 100 MB; depends only on n, so results do not
    # change with threading or memory pressure
    return max(1, min(64, int(1.2e8 / (16 * max(n * n, 1)))))


def _sample_values(
    T: TestGraph,
    model: Any,
    n: int,
    samples: int,
    seed: int,
    injective: bool,
    threads: Optional[int],
    max_rank: int,
) -> np.ndarray:
    from .ensembles import stream

    terms = _injective_terms(T) if injective else ((1, T),)
    labels = T.labels()
    # Normalizing tr^0 by the injective-map count instead of n removes the
    # O(1/n) falling-factorial bias, so means are centered on the limit.
    scale = 1.0
    if injective:
        if n < T.n_vertices:
            return np.zeros(samples)
        for j in range(T.n_vertices):
            scale *= n / (n - j)

    def run_chunk(start: int, stop: int) -> np.ndarray:
        stacked: dict[str, np.ndarray] = {}
        per = []
        for i in range(start, stop):
            per.append(model.sample(n, stream(seed, i)))
        for lab in labels:
            stacked[lab] = np.stack([m[lab] for m in per])
        out = None
        for w, q in terms:
            val = trace_test_graph(q, stacked, max_rank=max_rank)
            out = w * val if out is None else out + w * val
        return np.asarray(out) * (scale / n)

    size = _chunk_size(n)
    bounds = [(s, min(s + size, samples)) for s in range(0, samples, size)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda se: run_chunk(*se), bounds))
    else:
        parts = [run_chunk(*se) for se in bounds]
    return np.concatenate(parts)


def _mean_stderr(values: np.ndarray) -> tuple[complex, float]:
    mean = complex(np.mean(values))
    k = values.size
    if k < 2:
        return mean, 0.0
    var = float(np.sum(np.abs(values - mean) ** 2)) / (k - 1)
    return mean, math.sqrt(var / k)


def estimate_traffic_state(
    T: TestGraph,
    model: Any,
    n: int,
    samples: int,
    seed: int,
    *,
    injective: bool = False,
    threads: Optional[int] = None,
    max_rank: int = DEFAULT_MAX_RANK,
) -> Estimate:
    """Estimate tau[T] = E (1/n) tr T(A) (or tau^0 with ``injective``).

    ``model`` provides ``sample(n, rng) -> {label: matrix}``; each sample
    index draws from its own stream of ``seed``.  Injective estimates carry
    the n^|V| / (n)_|V| count correction (see ``_sample_values``).
    """
    values = _sample_values(T, model, n, samples, seed, injective, threads, max_rank)
    mean, stderr = _mean_stderr(values)
    return Estimate(mean, stderr, samples, n)


def central_moment_estimate(
    T: TestGraph,
    model: Any,
    n: int,
    samples: int,
    order: int,
    seed: int,
    *,
    injective: bool = False,
    threads: Optional[int] = None,
    max_rank: int = DEFAULT_MAX_RANK,
) -> Estimate:
    """Two-pass estimate of E |(1/n) tr T - E (1/n) tr T|^order."""
    if order < 2 or order % 2:
        raise ValueError("central moment order must be even and >= 2")
    values = _sample_values(T, model, n, samples, seed, injective, threads, max_rank)
    mean = complex(np.mean(values))
    dev = np.abs(values - mean) ** order
    m, se = _mean_stderr(dev)
    return Estimate(m.real, se, samples, n)
