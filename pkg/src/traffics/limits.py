"""Limiting traffic distributions of band ensembles.

Everything here computes limits of injective traffic states tau^0[T] as the
dimension grows:

* Hermitian ensembles with unit-variance band entries concentrate injective
  limits on *colored double trees*: loop-free graphs whose edge classes each
  hold exactly two same-labelled edges and whose skeleton is a tree.  A class
  is *opposing* when its edges point in opposite directions and *congruent*
  otherwise; congruent classes pick up the pseudo-variance beta of the label.
* Band regimes refine the picture: slowly growing bands contract, full-width
  bands delete, proportional bands keep their classes, and the surviving
  forest is scored by an exact cut-probability integral p_T.
* Fixed band widths stop concentrating; the limit is a Fekete density of
  band-compatible injective maps times a product of entry moments.
* Haar orthogonal families live on anti-directed cacti and produce signed
  Catalan numbers.

Cut integrals, closed forms and Mobius weights are exact (Fractions
throughout); Monte Carlo enters only in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, Union

from .ensembles import BandProfile, EntrySpec
from .graphs import Edge, TestGraph, edge_classes

Number = Union[int, float, Fraction, complex]

#: label -> band profile, one independent ensemble per label
RegimeAssignment = Mapping[str, BandProfile]

ORDERING_COMPONENT_CAP = 10
FIXED_BAND_WORK_LIMIT = 10**8


def _strip_stars(g: TestGraph) -> TestGraph:
    """Self-adjoint semantics: a starred edge equals its unstarred twin."""
    if not any(e.star for e in g.edges):
        return g
    return TestGraph(
        g.n_vertices, tuple(Edge(e.src, e.tar, e.label, False) for e in g.edges)
    )


def _beta_of(betas: Any, label: str) -> Number:
    if betas is None:
        return 1
    if isinstance(betas, Mapping):
        return betas.get(label, 1)
    return betas


def _is_real(x: Number) -> bool:
    return not (isinstance(x, complex) and x.imag != 0)


# ---------------------------------------------------------------------------
# double trees

@dataclass(frozen=True)
class Pad:
    """One doubled edge class of a double tree.

    ``u < v`` are the skeleton endpoints.  For a congruent pad both edges run
    ``src -> tar``; for an opposing pad src/tar record one of the two edges.
    """

    u: int
    v: int
    label: str
    orientation: str  # 'congruent' | 'opposing'
    src: int
    tar: int
    members: tuple[int, int]


@dataclass(frozen=True)
class DoubleTreeReport:
    is_double_tree: bool
    pads: tuple[Pad, ...] = ()
    reason: Optional[str] = None

    def congruent_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p in self.pads:
            if p.orientation == "congruent":
                out[p.label] = out.get(p.label, 0) + 1
        return out

    def opposing_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for p in self.pads:
            if p.orientation == "opposing":
                out[p.label] = out.get(p.label, 0) + 1
        return out


def classify_double_tree(T: TestGraph) -> DoubleTreeReport:
    """Decide whether T is a colored double tree, with a reason when not.

    Stars are ignored (self-adjoint matrices).  Conditions: no loops, every
    edge class holds exactly two edges of one label, and the skeleton of
    classes is a tree.
    """
    g = _strip_stars(T)
    for e in g.edges:
        if e.src == e.tar:
            return DoubleTreeReport(False, reason=f"loop at vertex {e.src}")
    classes = edge_classes(g)
    pads = []
    for cls in classes:
        if len(cls.members) != 2:
            return DoubleTreeReport(
                False,
                reason=f"class {{{cls.u},{cls.v}}} has {len(cls.members)} edges",
            )
        e1, e2 = (g.edges[i] for i in cls.members)
        if e1.label != e2.label:
            return DoubleTreeReport(
                False,
                reason=f"class {{{cls.u},{cls.v}}} mixes labels {e1.label!r}, {e2.label!r}",
            )
        orientation = "congruent" if (e1.src, e1.tar) == (e2.src, e2.tar) else "opposing"
        pads.append(
            Pad(cls.u, cls.v, e1.label, orientation, e1.src, e1.tar, tuple(cls.members))
        )
    if len(classes) != g.n_vertices - 1:
        return DoubleTreeReport(False, reason="skeleton has a cycle")
    return DoubleTreeReport(True, tuple(pads))


def wigner_ltd(T: TestGraph, betas: Any = None) -> Number:
    """Limit of tau^0[T] for a Wigner family: prod over labels of
    beta_i^(congruent pad count) on colored double trees, zero otherwise.

    Non-real betas are routed to :func:`ordering_sum_ltd`.
    """
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        return 0
    if any(not _is_real(_beta_of(betas, lab)) for lab in T.labels()):
        return ordering_sum_ltd(T, betas)
    out: Number = 1
    for lab, cnt in rep.congruent_counts().items():
        out = out * _beta_of(betas, lab) ** cnt
    return out


def ordering_sum_ltd(
    T: TestGraph, betas: Any = None, *, component_cap: int = ORDERING_COMPONENT_CAP
) -> Number:
    """Wigner limit for possibly non-real pseudo-variances.

    Congruent pads weight beta or conj(beta) according to the relative order
    of their endpoints under a uniformly random total order of the vertices;
    the average factorizes over the connected components of the subgraph of
    complex-labelled pads, each averaged exactly over its |V|! orders.
    """
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        return 0
    base: Number = 1
    complex_pads = []
    for pad in rep.pads:
        beta = _beta_of(betas, pad.label)
        if _is_real(beta):
            if pad.orientation == "congruent":
                base = base * beta
        else:
            complex_pads.append(pad)
    if not complex_pads:
        return base
    # components of the complex-labelled subgraph
    verts = sorted({v for p in complex_pads for v in (p.u, p.v)})
    comp = {v: v for v in verts}

    def find(v):
        while comp[v] != v:
            comp[v] = comp[comp[v]]
            v = comp[v]
        return v

    for p in complex_pads:
        comp[find(p.u)] = find(p.v)
    groups: dict[int, list] = {}
    for p in complex_pads:
        groups.setdefault(find(p.u), []).append(p)
    total: Number = base
    for pads in groups.values():
        cverts = sorted({v for p in pads for v in (p.u, p.v)})
        if len(cverts) > component_cap:
            raise ValueError(
                f"ordering sum over {len(cverts)} vertices exceeds the cap {component_cap}"
            )
        acc: complex = 0
        for order in permutations(cverts):
            pos = {v: i for i, v in enumerate(order)}  # later = smaller value
            w: complex = 1
            for p in pads:
                if p.orientation != "congruent":
                    continue
                beta = complex(_beta_of(betas, p.label))
                w *= beta if pos[p.tar] > pos[p.src] else beta.conjugate()
            acc += w
        total = total * (acc / math.factorial(len(cverts)))
    return total


# ---------------------------------------------------------------------------
# band regimes and the forest transform

def regime_role(profile: BandProfile) -> str:
    """What the forest transform does to a label: contract, delete or keep."""
    r = profile.regime
    if r == "slow" or (r == "periodic" and profile.gamma is not None):
        return "contract"
    if r in ("full", "wigner") or (r == "periodic" and profile.c is not None):
        return "delete"
    if r == "proportional":
        return "keep"
    raise ValueError(f"regime {r!r} has no forest role (use the fixed-band oracle)")


def forest_transform(T: TestGraph, regimes: RegimeAssignment) -> tuple[TestGraph, ...]:
    """Contract slow pads, delete full-width pads, keep proportional pads.

    T must be a colored double tree; the result is the list of connected
    components of the transformed graph (isolated vertices included), each a
    double tree over proportional labels only.
    """
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        raise ValueError(f"forest transform needs a colored double tree: {rep.reason}")
    g = _strip_stars(T)
    roles = {}
    for lab in g.labels():
        if lab not in regimes:
            raise ValueError(f"no regime assigned to label {lab!r}")
        roles[lab] = regime_role(regimes[lab])
    n = g.n_vertices
    parent = list(range(n))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for pad in rep.pads:
        if roles[pad.label] == "contract":
            parent[find(pad.u)] = find(pad.v)
    reps: dict[int, int] = {}
    vmap = []
    for v in range(n):
        r = find(v)
        if r not in reps:
            reps[r] = len(reps)
        vmap.append(reps[r])
    kept = [
        Edge(vmap[g.edges[i].src], vmap[g.edges[i].tar], g.edges[i].label)
        for pad in rep.pads
        if roles[pad.label] == "keep"
        for i in pad.members
    ]
    m = len(reps)
    cparent = list(range(m))

    def cfind(v):
        while cparent[v] != v:
            cparent[v] = cparent[cparent[v]]
            v = cparent[v]
        return v

    for e in kept:
        cparent[cfind(e.src)] = cfind(e.tar)
    comp_vertices: dict[int, list[int]] = {}
    for v in range(m):
        comp_vertices.setdefault(cfind(v), []).append(v)
    out = []
    for root in sorted(comp_vertices, key=lambda r: min(comp_vertices[r])):
        vs = comp_vertices[root]
        local = {v: i for i, v in enumerate(sorted(vs))}
        edges = tuple(
            Edge(local[e.src], local[e.tar], e.label)
            for e in kept
            if cfind(e.src) == root
        )
        out.append(TestGraph(len(vs), edges))
    return tuple(out)


# ---------------------------------------------------------------------------
# exact piecewise polynomials and the cut integral

def _poly_add(p: tuple, q: tuple) -> tuple:
    n = max(len(p), len(q))
    return tuple(
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)
    )


def _poly_scale(p: tuple, a: Fraction) -> tuple:
    return tuple(a * x for x in p)


def _poly_mul(p: tuple, q: tuple) -> tuple:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return tuple(out)


def _poly_eval(p: tuple, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _poly_antideriv(p: tuple) -> tuple:
    return (Fraction(0),) + tuple(Fraction(c, i + 1) for i, c in enumerate(p))


def _poly_shift(p: tuple, s: Fraction) -> tuple:
    """q with q(x) = p(x + s)."""
    out = [Fraction(0)] * len(p)
    for j, c in enumerate(p):
        # expand c (x+s)^j
        term = [Fraction(0)] * (j + 1)
        for k in range(j + 1):
            term[k] = c * math.comb(j, k) * s ** (j - k)
        for k in range(j + 1):
            out[k] += term[k]
    return tuple(out)


@dataclass(frozen=True)
class PiecewisePoly:
    """Exact piecewise polynomial on [0, 1] with Fraction coefficients.

    ``breaks`` is an increasing tuple starting at 0 and ending at 1;
    ``pieces[i]`` holds the coefficients (low degree first) on
    [breaks[i], breaks[i+1]].
    """

    breaks: tuple[Fraction, ...]
    pieces: tuple[tuple[Fraction, ...], ...]

    @staticmethod
    def one() -> "PiecewisePoly":
        return PiecewisePoly((Fraction(0), Fraction(1)), ((Fraction(1),),))

    def _on(self, breaks: tuple[Fraction, ...]) -> tuple[tuple, ...]:
        """Pieces re-sampled on a refinement of the break grid."""
        out = []
        j = 0
        for lo, hi in zip(breaks, breaks[1:]):
            mid = (lo + hi) / 2
            while not (self.breaks[j] <= mid <= self.breaks[j + 1]):
                j += 1
            out.append(self.pieces[j])
        return tuple(out)

    def _zip(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        breaks = tuple(sorted(set(self.breaks) | set(other.breaks)))
        a, b = self._on(breaks), other._on(breaks)
        return PiecewisePoly(breaks, tuple(op(p, q) for p, q in zip(a, b)))

    def __mul__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._zip(other, _poly_mul)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._zip(other, _poly_add)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self._zip(other, lambda p, q: _poly_add(p, _poly_scale(q, Fraction(-1))))

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        if not 0 <= x <= 1:
            raise ValueError("argument outside [0, 1]")
        for i in range(len(self.pieces)):
            if x <= self.breaks[i + 1]:
                return _poly_eval(self.pieces[i], x)
        return _poly_eval(self.pieces[-1], x)

    def integral(self) -> Fraction:
        total = Fraction(0)
        for lo, hi, p in zip(self.breaks, self.breaks[1:], self.pieces):
            anti = _poly_antideriv(p)
            total += _poly_eval(anti, hi) - _poly_eval(anti, lo)
        return total

    def antiderivative(self) -> "PiecewisePoly":
        """Continuous antiderivative F with F(0) = 0."""
        pieces = []
        acc = Fraction(0)
        for lo, p in zip(self.breaks, self.pieces):
            anti = _poly_antideriv(p)
            const = acc - _poly_eval(anti, lo)
            pieces.append(_poly_add(anti, (const,)))
            hi = self.breaks[len(pieces)]
            acc = _poly_eval(pieces[-1], hi)
        return PiecewisePoly(self.breaks, tuple(pieces))

    def compose_clamped(self, s: Fraction) -> "PiecewisePoly":
        """g(x) = self(clamp(x + s, 0, 1)) as a piecewise polynomial on [0, 1]."""
        cand = {Fraction(0), Fraction(1), -s, 1 - s}
        cand.update(b - s for b in self.breaks)
        breaks = tuple(sorted(c for c in cand if 0 <= c <= 1))
        lo_val = _poly_eval(self.pieces[0], Fraction(0))
        hi_val = _poly_eval(self.pieces[-1], Fraction(1))
        pieces = []
        for a, b in zip(breaks, breaks[1:]):
            t = (a + b) / 2 + s
            if t <= 0:
                pieces.append((lo_val,))
            elif t >= 1:
                pieces.append((hi_val,))
            else:
                j = 0
                while not (self.breaks[j] <= t <= self.breaks[j + 1]):
                    j += 1
                pieces.append(_poly_shift(self.pieces[j], s))
        return PiecewisePoly(breaks, tuple(pieces))

    def window(self, c: Fraction) -> "PiecewisePoly":
        """g(x) = integral of self over [x-c, x+c] intersected with [0, 1]."""
        F = self.antiderivative()
        return F.compose_clamped(c) - F.compose_clamped(-c)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot take {type(x).__name__} as an exact proportion")


def _pad_proportions(
    rep: DoubleTreeReport, proportions: Any
) -> dict[tuple[int, int], Fraction]:
    out = {}
    for pad in rep.pads:
        if isinstance(proportions, Mapping):
            if pad.label not in proportions:
                raise ValueError(f"no proportion for label {pad.label!r}")
            c = _as_fraction(proportions[pad.label])
        else:
            c = _as_fraction(proportions)
        if not 0 < c <= 1:
            raise ValueError(f"proportion for {pad.label!r} must be in (0, 1]")
        out[(pad.u, pad.v)] = c
    return out


def cut_integral(T: TestGraph, proportions: Any) -> Fraction:
    """Exact volume of band-compatible vertex positions.

    For a double tree with pad proportions c, this is the integral over
    [0,1]^V of the product over pads of 1{|x_u - x_v| <= c_pad}, computed by
    eliminating skeleton leaves with exact piecewise polynomials.
    """
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        raise ValueError(f"cut integral needs a colored double tree: {rep.reason}")
    cs = _pad_proportions(rep, proportions)
    n = T.n_vertices
    adj: dict[int, list[tuple[int, Fraction]]] = {v: [] for v in range(n)}
    for (u, v), c in cs.items():
        adj[u].append((v, c))
        adj[v].append((u, c))
    f = {v: PiecewisePoly.one() for v in range(n)}
    degree = {v: len(adj[v]) for v in range(n)}
    removed = set()
    leaves = [v for v in range(n) if degree[v] == 1]
    while leaves:
        u = leaves.pop()
        if u in removed or len(removed) == n - 1:
            continue
        removed.add(u)
        for w, c in adj[u]:
            if w in removed:
                continue
            f[w] = f[w] * f[u].window(c)
            degree[w] -= 1
            if degree[w] == 1:
                leaves.append(w)
            break
    (root,) = (v for v in range(n) if v not in removed)
    return f[root].integral()


def norm_factor(T: TestGraph, proportions: Any) -> Fraction:
    """Product over pads of (2c - c^2), the single-pad cut volume."""
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        raise ValueError(f"norm factor needs a colored double tree: {rep.reason}")
    cs = _pad_proportions(rep, proportions)
    out = Fraction(1)
    for c in cs.values():
        out *= 2 * c - c * c
    return out


def cut_probability(T: TestGraph, proportions: Any) -> Fraction:
    """p_T = cut_integral / norm_factor, the pad-normalized cut volume."""
    return cut_integral(T, proportions) / norm_factor(T, proportions)


def rbm_ltd(T: TestGraph, regimes: RegimeAssignment, betas: Any = None) -> Number:
    """Limit of tau^0[T] for independent band families.

    Zero off double trees; otherwise prod beta_i^(congruent count) times the
    cut probability p_F of the forest transform.  Betas must be real here
    (non-real pseudo-variances are a Wigner-regime refinement only).
    """
    rep = classify_double_tree(T)
    if not rep.is_double_tree:
        return 0
    for lab in T.labels():
        if not _is_real(_beta_of(betas, lab)):
            raise ValueError("rbm_ltd needs real betas")
    out: Number = 1
    for lab, cnt in rep.congruent_counts().items():
        out = out * _beta_of(betas, lab) ** cnt
    for comp in forest_transform(T, regimes):
        if comp.n_edges == 0:
            continue
        props = {
            lab: regimes[lab].c for lab in comp.labels()
        }
        out = out * cut_probability(comp, props)
    return out


# ---------------------------------------------------------------------------
# closed forms

def closed_form_reference(name: str, *params) -> Fraction:
    """Frozen closed forms for regression tests and the CLI.

    * ``pT_star(c)``: cut probability of the two-pad star, one label
    * ``pS(ci, cj)``: cut probability of the two-pad star, two labels
    * ``degree_moment(ell, c)``: limit 2*ell-th moment of the normalized
      degree matrix of a proportional band (odd moments vanish)
    """
    if name == "pT_star":
        (c,) = map(_as_fraction, params)
        den = (2 * c - c * c) ** 2
        if c <= Fraction(1, 2):
            num = 8 * c * c * (Fraction(1, 2) - c) + Fraction(14, 3) * c**3
        else:
            num = 2 * c - 1 + Fraction(2, 3) * (1 - c**3)
        return num / den
    if name == "pS":
        ci, cj = sorted(map(_as_fraction, params))
        den = (2 * ci - ci * ci) * (2 * cj - cj * cj)
        if ci + cj <= 1:
            num = (
                -Fraction(1, 3) * ci**3 - ci**2 * cj - 2 * ci * cj**2 + 4 * ci * cj
            )
        else:
            num = (
                Fraction(1, 3) * cj**3
                - ci * cj**2
                - ci**2
                - cj**2
                + 2 * ci * cj
                + ci
                + cj
                - Fraction(1, 3)
            )
        return num / den
    if name == "degree_moment":
        ell, c = params
        ell = int(ell)
        c = _as_fraction(c)
        if ell < 0:
            raise ValueError("ell must be >= 0")
        if ell == 0:
            return Fraction(1)
        t = min(2 * c, Fraction(1))
        dfact = 1
        for j in range(1, 2 * ell, 2):
            dfact *= j
        num = Fraction(2, ell + 1) * (t ** (ell + 1) - c ** (ell + 1)) + abs(
            2 * c - 1
        ) * t**ell
        return dfact * num / (2 * c - c * c) ** ell
    raise ValueError(f"unknown closed form {name!r}")


def degree_moment_order(m: int, c) -> Fraction:
    """Moment of order m of the limiting degree law (odd orders vanish)."""
    if m % 2:
        return Fraction(0)
    return closed_form_reference("degree_moment", m // 2, c)


# ---------------------------------------------------------------------------
# fixed band width

def _band_windows(g: TestGraph, bands: Mapping[str, int]) -> dict[tuple[int, int], int]:
    """Per skeleton pair, the tightest band width over the class's labels."""
    out: dict[tuple[int, int], int] = {}
    for cls in edge_classes(g):
        if cls.is_loop:
            continue
        ws = []
        for i in cls.members:
            lab = g.edges[i].label
            if lab not in bands:
                raise ValueError(f"no band width for label {lab!r}")
            ws.append(int(bands[lab]))
        out[(cls.u, cls.v)] = min(ws)
    return out


def fixed_band_count(
    T: TestGraph,
    bands: Mapping[str, int],
    n: int,
    ordering: Optional[Sequence[int]] = None,
    *,
    work_limit: int = FIXED_BAND_WORK_LIMIT,
) -> int:
    """Number of injective maps phi: V -> {0..n-1} with |phi(u) - phi(v)|
    bounded by the tightest band width over every non-loop class.

    ``ordering`` optionally lists the vertices in decreasing phi; only maps
    compatible with it are counted.
    """
    g = _strip_stars(T)
    windows = _band_windows(g, bands)
    nv = g.n_vertices
    if ordering is not None and sorted(ordering) != list(range(nv)):
        raise ValueError("ordering must list every vertex exactly once")
    rank = {v: i for i, v in enumerate(ordering)} if ordering is not None else None
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(nv)}
    for (u, v), w in windows.items():
        adj[u].append((v, w))
        adj[v].append((u, w))
    # breadth-first vertex order; bound the search before running it
    order = [0]
    seen = {0}
    first_w = {}
    qi = 0
    while qi < len(order):
        u = order[qi]
        qi += 1
        for v, w in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                first_w[v] = w
                order.append(v)
    for v in range(nv):  # vertices with loop edges only
        if v not in seen:
            seen.add(v)
            order.append(v)
    work = n
    for v in order[1:]:
        work *= min(2 * first_w[v] + 1, n) if v in first_w else n
        if work > work_limit:
            raise ValueError(f"fixed-band count work bound exceeds {work_limit}")
    phi = [-1] * nv
    used = [False] * (n + 1)
    total = 0

    def rec(k: int) -> None:
        nonlocal total
        if k == len(order):
            total += 1
            return
        v = order[k]
        lo, hi = 0, n - 1
        for u, w in adj[v]:
            if phi[u] >= 0:
                lo = max(lo, phi[u] - w)
                hi = min(hi, phi[u] + w)
        for val in range(lo, hi + 1):
            if used[val]:
                continue
            if rank is not None:
                ok = True
                for u in order[:k]:
                    if (rank[u] < rank[v]) != (phi[u] > val):
                        ok = False
                        break
                if not ok:
                    continue
            phi[v] = val
            used[val] = True
            rec(k + 1)
            used[val] = False
        phi[v] = -1

    rec(0)
    return total


@dataclass(frozen=True)
class FixedBandReport:
    """Fekete data for the injective map density of a fixed-band graph."""

    ns: tuple[int, ...]
    counts: tuple[int, ...]
    ratios: tuple[float, ...]
    p_lower: float  # certified lower bound on the superadditive limit
    upper_bound: float  # spanning-tree product bound on the limit
    monotone: bool  # whether the reported ratios are nondecreasing


def fixed_band_p(
    T: TestGraph, bands: Mapping[str, int], ns: Sequence[int]
) -> FixedBandReport:
    """Estimate the Fekete density p = lim a_n / n from exact counts.

    a_n is superadditive, so every a_n / n is a certified lower bound on p;
    the report flags whether the ratios are nondecreasing on the grid.
    """
    g = _strip_stars(T)
    windows = _band_windows(g, bands)
    ns = tuple(sorted(int(n) for n in ns))
    counts = tuple(fixed_band_count(T, bands, n) for n in ns)
    ratios = tuple(a / n for a, n in zip(counts, ns))
    bound = 1.0
    # product over a spanning tree of class windows (first-BFS-entry widths)
    seen = {0}
    frontier = [0]
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(g.n_vertices)}
    for (u, v), w in windows.items():
        adj[u].append((v, w))
        adj[v].append((u, w))
    while frontier:
        u = frontier.pop()
        for v, w in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                bound *= 2 * w
                frontier.append(v)
    return FixedBandReport(
        ns, counts, ratios, max(ratios) if ratios else 0.0, bound,
        all(r2 >= r1 - 1e-12 for r1, r2 in zip(ratios, ratios[1:])),
    )


@dataclass(frozen=True)
class FixedBandLTD:
    value: float
    moment_factor: Number
    denominator: float
    report: Optional[FixedBandReport]


def fixed_band_ltd(
    T: TestGraph,
    bands: Mapping[str, int],
    entries: Any = None,
    ns: Optional[Sequence[int]] = None,
) -> FixedBandLTD:
    """Limit of tau^0[T] for fixed band widths and real iid entry laws.

    The limit is (lim a_n/n) * S(T) / prod over edges sqrt(2 b + 1), where
    S(T) multiplies entry moments per class and a_n counts band-compatible
    injective maps.  The Fekete density is reported via its best certified
    lower bound on the given grid (default 16..256 doubling).
    """
    g = _strip_stars(T)

    def entry_for(lab: str) -> EntrySpec:
        if entries is None:
            return EntrySpec.gaussian()
        if isinstance(entries, EntrySpec):
            return entries
        return entries[lab]

    s_factor: Number = 1
    for cls in edge_classes(g):
        per_label: dict[str, int] = {}
        for i in cls.members:
            lab = g.edges[i].label
            per_label[lab] = per_label.get(lab, 0) + 1
        for lab, m in per_label.items():
            spec = entry_for(lab)
            mom = spec.diag_moment(m) if cls.is_loop else spec.real_moment(m)
            s_factor = s_factor * mom
    denom = 1.0
    for e in g.edges:
        denom *= math.sqrt(2 * int(bands[e.label]) + 1)
    if s_factor == 0:
        return FixedBandLTD(0.0, s_factor, denom, None)
    if ns is None:
        ns = (16, 32, 64, 128, 256)
    report = fixed_band_p(T, bands, ns)
    return FixedBandLTD(report.p_lower * float(s_factor) / denom, s_factor, denom, report)


# ---------------------------------------------------------------------------
# Haar orthogonal families

def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True)
class CactusReport:
    is_cactus: bool
    is_anti_directed: bool
    pad_sizes: tuple[int, ...] = ()
    reason: Optional[str] = None


def classify_orthogonal_cactus(T: TestGraph) -> CactusReport:
    """Cactus test for orthogonal families: every edge lies on exactly one
    simple cycle (no bridges) and every cycle alternates direction.

    Stars are resolved first: for an orthogonal matrix the starred edge
    equals the reversed plain edge.
    """
    edges = tuple(e.reversed() if e.star else Edge(*e[:3]) for e in T.edges)
    n = T.n_vertices
    if not edges:
        # the trivial graph: vacuously a cactus, empty pad product
        return CactusReport(True, True, ())
    # loops form their own single-edge blocks and never alternate direction
    loop_blocks = [[i] for i, e in enumerate(edges) if e.src == e.tar]
    adj: dict[int, list[tuple[int, int]]] = {v: [] for v in range(n)}
    for i, e in enumerate(edges):
        if e.src != e.tar:
            adj[e.src].append((e.tar, i))
            adj[e.tar].append((e.src, i))
    # biconnected components via DFS with an edge stack
    disc = [-1] * n
    low = [0] * n
    stack: list[int] = []
    blocks: list[list[int]] = []
    counter = [0]

    def dfs(u: int, parent_edge: int) -> None:
        disc[u] = low[u] = counter[0]
        counter[0] += 1
        for v, ei in adj[u]:
            if ei == parent_edge:
                continue
            if disc[v] == -1:
                stack.append(ei)
                dfs(v, ei)
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    block = []
                    while True:
                        e2 = stack.pop()
                        block.append(e2)
                        if e2 == ei:
                            break
                    blocks.append(block)
            elif disc[v] < disc[u]:
                stack.append(ei)
                low[u] = min(low[u], disc[v])

    dfs(0, -1)
    blocks.extend(loop_blocks)
    covered = {i for b in blocks for i in b}
    if len(covered) != len(edges):
        return CactusReport(False, False, reason="graph is not biconnected-decomposable")
    sizes = []
    for block in blocks:
        vs = set()
        for i in block:
            vs.update((edges[i].src, edges[i].tar))
        if len(block) == 1 and edges[block[0]].src != edges[block[0]].tar:
            return CactusReport(False, False, reason="bridge edge outside every cycle")
        if len(block) != len(vs):
            return CactusReport(
                False, False, reason=f"block with {len(block)} edges on {len(vs)} vertices"
            )
        sizes.append(len(block))
    # anti-direction: within each pad every vertex is a source or a sink
    for block in blocks:
        io: dict[int, list[int]] = {}
        for i in block:
            e = edges[i]
            io.setdefault(e.src, []).append(+1)
            io.setdefault(e.tar, []).append(-1)
        for v, signs in io.items():
            if len(set(signs)) != 1:
                return CactusReport(
                    True, False, tuple(sorted(sizes)),
                    reason=f"vertex {v} is neither source nor sink on its pad",
                )
    return CactusReport(True, True, tuple(sorted(sizes)))


def haar_ltd(T: TestGraph) -> int:
    """Limit of tau^0[T] for a Haar orthogonal family: a product of signed
    Catalan numbers over the pads of an anti-directed cactus, else zero.

    A pad of length 2k carries the Weingarten coefficient (-1)^(k-1) C_(k-1),
    the Mobius weight of a join loop covering k column pairs.  The 2-pad is
    weight 1; the anti-directed 4-cycle is -C_1 = -1 (exact value at finite
    n: -(n-2)(n-3)/(n(n+2)), from the inverse of the 3x3 pairing Gram
    matrix)."""
    rep = classify_orthogonal_cactus(T)
    if not (rep.is_cactus and rep.is_anti_directed):
        return 0
    out = 1
    for size in rep.pad_sizes:
        k = size // 2
        out *= (-1) ** (k - 1) * catalan(k - 1)
    return out


# ---------------------------------------------------------------------------
# summing limits over quotients

def double_tree_quotients(
    T: TestGraph,
) -> Iterator[tuple[tuple[tuple[int, ...], ...], TestGraph]]:
    """All vertex partitions of T whose quotient is a colored double tree.

    Yields (blocks, quotient graph).  The scan assigns vertices to blocks in
    index order and prunes any prefix that already violates the double-tree
    conditions (a loop, a class of three edges, mixed labels in a class, or
    a cycle among completed classes), so it touches far fewer states than
    the full partition lattice while yielding exactly the same quotients.
    """
    g = _strip_stars(T)
    n = g.n_vertices
    if any(e.src == e.tar for e in g.edges):
        return
    later: list[list[tuple[int, str]]] = [[] for _ in range(n)]
    for e in g.edges:
        a, b = (e.src, e.tar) if e.src < e.tar else (e.tar, e.src)
        later[b].append((a, e.label))
    remaining = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        remaining[k] = remaining[k + 1] + len(later[k])
    block_of = [-1] * n
    blocks: list[list[int]] = []
    cls_edges: dict[tuple[int, int], list[str]] = {}
    parent = list(range(n))  # skeleton union-find over block ids, no compression
    open_classes = 0

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    def try_place(v: int, b: int):
        """Returns an undo record, or None if the placement is pruned."""
        nonlocal open_classes
        undo_cls: list[tuple[int, int]] = []
        undo_union: list[int] = []
        opened = closed = 0
        ok = True
        for u, lab in later[v]:
            a = block_of[u]
            if a == b:
                ok = False  # quotient loop
                break
            key = (a, b) if a < b else (b, a)
            members = cls_edges.get(key)
            if members is None:
                ra, rb = find(key[0]), find(key[1])
                if ra == rb:
                    ok = False  # skeleton cycle
                    break
                parent[ra] = rb
                undo_union.append(ra)
                cls_edges[key] = [lab]
                undo_cls.append(key)
                opened += 1
            elif len(members) == 1:
                if members[0] != lab:
                    ok = False  # mixed labels
                    break
                members.append(lab)
                undo_cls.append(key)
                closed += 1
            else:
                ok = False  # third edge in a class
                break
        if ok:
            open_classes += opened - closed
            if open_classes > remaining[v + 1]:
                ok = False  # not enough future edges to close the pads
                open_classes -= opened - closed
        if not ok:
            for key in reversed(undo_cls):
                members = cls_edges[key]
                if len(members) == 2:
                    members.pop()
                else:
                    del cls_edges[key]
            for ra in reversed(undo_union):
                parent[ra] = ra
            return None
        return undo_cls, undo_union, opened - closed

    def undo_place(rec) -> None:  # reverse of try_place's success path
        nonlocal open_classes
        undo_cls, undo_union, delta = rec
        for key in reversed(undo_cls):
            members = cls_edges[key]
            if len(members) == 2:
                members.pop()
            else:
                del cls_edges[key]
        for ra in reversed(undo_union):
            parent[ra] = ra
        open_classes -= delta

    def rec(v: int) -> Iterator[tuple[tuple[tuple[int, ...], ...], TestGraph]]:
        if v == n:
            if open_classes == 0:
                bl = tuple(tuple(b) for b in blocks)
                q = TestGraph(
                    len(blocks),
                    tuple(
                        Edge(block_of[e.src], block_of[e.tar], e.label) for e in g.edges
                    ),
                )
                yield bl, q
            return
        for b in range(len(blocks) + 1):
            fresh = b == len(blocks)
            if fresh:
                blocks.append([])
            rec_state = try_place(v, b)
            if rec_state is not None:
                block_of[v] = b
                blocks[b].append(v)
                yield from rec(v + 1)
                blocks[b].pop()
                block_of[v] = -1
                undo_place(rec_state)
            if fresh:
                blocks.pop()

    yield from rec(0)


def ltd_trace(
    T: TestGraph,
    ltd_fn: Callable[[TestGraph], Number],
    *,
    support: str = "double_tree",
) -> Number:
    """Limit of tau[T]: the sum of ltd_fn over the quotients of T.

    ``ltd_fn`` gives the limiting injective value of a quotient (for example
    ``lambda q: wigner_ltd(q, betas)``); quotients are grouped up to
    isomorphism so ltd_fn runs once per shape.  The default scan visits only
    double-tree quotients, which carries every band-regime limit; a limit
    supported elsewhere (the orthogonal one lives on cacti) needs
    ``support="all"``, the full partition lattice.
    """
    from .graphs import canonical_form, canonical_key, quotient

    if support == "double_tree":
        quotients = (q for _, q in double_tree_quotients(T))
    elif support == "all":
        from .partitions import enumerate_partitions

        quotients = (
            quotient(T, pi) for pi in enumerate_partitions(T.n_vertices)
        )
    else:
        raise ValueError(f"unknown support {support!r}")
    shapes: dict[tuple, list] = {}
    for q in quotients:
        key = canonical_key(q)
        slot = shapes.get(key)
        if slot is None:
            shapes[key] = [canonical_form(q), 1]
        else:
            slot[1] += 1
    total: Number = 0
    for key in sorted(shapes):
        form, count = shapes[key]
        total = total + count * ltd_fn(form)
    return total
