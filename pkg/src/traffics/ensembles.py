"""Random matrix ensembles: entry laws, band profiles, samplers.

Entries are always centered with unit absolute second moment; the parameter
``beta = E[X^2]`` (|beta| <= 1) controls the pseudo-variance of off-diagonal
entries.  Band profiles describe how the band width b(n) scales with the
dimension and carry the matching normalization.

Sampling is deterministic given (seed, index): every sample index gets its
own counter-based Philox stream, so estimates are reproducible regardless of
batching or thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Optional, Union

import numpy as np

Number = Union[int, float, Fraction]


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent Philox stream for (seed, index)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _resolve_rng(
    rng: Optional[np.random.Generator], seed: Optional[int], index: int
) -> np.random.Generator:
    if rng is not None:
        return rng
    if seed is None:
        seed = np.random.SeedSequence().entropy
    return stream(seed, index)


# ---------------------------------------------------------------------------
# entry laws

def _double_factorial_odd(k: int) -> int:
    # (k-1)!! for even k
    out = 1
    for j in range(1, k, 2):
        out *= j
    return out


@dataclass(frozen=True)
class Law:
    """Real centered law with unit variance: 'gaussian' or finite 'discrete'."""

    kind: str
    atoms: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind == "gaussian":
            return
        if self.kind != "discrete":
            raise ValueError(f"unknown law kind {self.kind!r}")
        atoms = tuple(self.atoms)
        weights = tuple(self.weights)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)
        if len(atoms) != len(weights) or not atoms:
            raise ValueError("discrete law needs matching nonempty atoms/weights")
        if any(w < 0 for w in weights):
            raise ValueError("negative weight")
        tot = sum(weights)
        m1 = sum(w * a for a, w in zip(atoms, weights))
        m2 = sum(w * a * a for a, w in zip(atoms, weights))
        for name, val, want in (("total mass", tot, 1), ("mean", m1, 0), ("variance", m2, 1)):
            if abs(val - want) > 1e-12:
                raise ValueError(f"discrete law has {name} {val}, expected {want}")

    def moment(self, k: int) -> Number:
        """Exact k-th moment (a Fraction for rational discrete laws)."""
        if k < 0:
            raise ValueError("moment order must be >= 0")
        if self.kind == "gaussian":
            return 0 if k % 2 else _double_factorial_odd(k)
        return sum(w * a**k for a, w in zip(self.atoms, self.weights))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(size)
        atoms = np.asarray([float(a) for a in self.atoms])
        p = np.asarray([float(w) for w in self.weights])
        return atoms[rng.choice(len(atoms), size=size, p=p / p.sum())]


_RADEMACHER = Law("discrete", (-1, 1), (Fraction(1, 2), Fraction(1, 2)))


@dataclass(frozen=True)
class EntrySpec:
    """Entry distribution of a Hermitian random matrix.

    ``beta = E[X^2]`` for off-diagonal entries (E|X|^2 = 1).  For the complex
    Gaussian case the real and imaginary parts have variances (1+Re beta)/2
    and (1-Re beta)/2 with covariance Im(beta)/2, one consistent choice.
    """

    beta: complex
    offdiag: Law
    diag: Law

    def __post_init__(self):
        b = complex(self.beta)
        if abs(b) > 1 + 1e-12:
            raise ValueError(f"|beta| must be <= 1, got {abs(b)}")

    @staticmethod
    def gaussian(beta: complex = 1) -> "EntrySpec":
        return EntrySpec(beta, Law("gaussian"), Law("gaussian"))

    @staticmethod
    def rademacher() -> "EntrySpec":
        return EntrySpec(1, _RADEMACHER, _RADEMACHER)

    @staticmethod
    def discrete(atoms, weights, diag: Optional[Law] = None) -> "EntrySpec":
        off = Law("discrete", tuple(atoms), tuple(weights))
        return EntrySpec(1, off, diag if diag is not None else off)

    @property
    def is_real(self) -> bool:
        if self.offdiag.kind == "discrete":
            return True
        b = complex(self.beta)
        return b.imag == 0 and abs(b.real - 1) < 1e-12

    def real_moment(self, k: int) -> Number:
        """k-th moment of the off-diagonal law; real laws only."""
        if not self.is_real:
            raise ValueError("moments are only available for real entry laws")
        return self.offdiag.moment(k)

    def diag_moment(self, k: int) -> Number:
        return self.diag.moment(k)

    def sample_offdiag(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.offdiag.kind == "discrete" or self.is_real:
            return self.offdiag.sample(rng, size)
        b = complex(self.beta)
        vr, vi, cv = (1 + b.real) / 2, (1 - b.real) / 2, b.imag / 2
        l11 = math.sqrt(vr)
        l21 = cv / l11 if l11 > 0 else 0.0
        l22 = math.sqrt(max(vi - l21 * l21, 0.0))
        z1 = rng.standard_normal(size)
        z2 = rng.standard_normal(size)
        return l11 * z1 + 1j * (l21 * z1 + l22 * z2)

    def sample_diag(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.diag.sample(rng, size)


# ---------------------------------------------------------------------------
# band profiles

_REGIMES = ("wigner", "periodic", "slow", "proportional", "full", "fixed")


@dataclass(frozen=True)
class BandProfile:
    """Band-width scaling regime plus its parameters.

    * ``wigner`` / ``full``: no band, normalization n^(-1/2)
    * ``slow``: b(n) = floor(n^gamma) -> infinity, o(n); normalization (2b)^(-1/2)
    * ``proportional``: b(n) = floor(c n), 0 < c <= 1; normalization ((2c-c^2) n)^(-1/2)
    * ``fixed``: constant b; normalization (2b+1)^(-1/2)
    * ``periodic``: circular distance; slow (gamma) or proportional (c)
      growth, normalization (2b)^(-1/2) either way
    """

    regime: str
    c: Optional[Number] = None
    b: Optional[int] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        r = self.regime
        if r not in _REGIMES:
            raise ValueError(f"unknown regime {r!r}")
        if r in ("wigner", "full"):
            if (self.c, self.b, self.gamma) != (None, None, None):
                raise ValueError(f"{r} takes no parameters")
        elif r == "slow":
            if self.gamma is None or not 0 < self.gamma < 1:
                raise ValueError("slow regime needs 0 < gamma < 1")
        elif r == "proportional":
            if self.c is None or not 0 < self.c <= 1:
                raise ValueError("proportional regime needs 0 < c <= 1")
        elif r == "fixed":
            if self.b is None or self.b < 0:
                raise ValueError("fixed regime needs b >= 0")
        elif r == "periodic":
            if (self.gamma is None) == (self.c is None):
                raise ValueError("periodic regime needs exactly one of gamma, c")
            if self.gamma is not None and not 0 < self.gamma < 1:
                raise ValueError("periodic-slow needs 0 < gamma < 1")
            if self.c is not None and not 0 < self.c <= Fraction(1, 2):
                raise ValueError("periodic-proportional needs 0 < c <= 1/2")

    @staticmethod
    def parse(text: str) -> "BandProfile":
        """Parse e.g. 'wigner', 'fixed:2', 'proportional:1/3', 'slow:0.5',
        'periodic-slow:0.5', 'periodic-prop:0.25'."""
        head, _, arg = text.strip().partition(":")
        head = head.lower()
        if head in ("wigner", "full"):
            if arg:
                raise ValueError(f"{head} takes no parameter")
            return BandProfile(head)
        if not arg:
            raise ValueError(f"regime {head!r} needs a parameter")
        if head == "fixed":
            return BandProfile("fixed", b=int(arg))
        if head == "proportional":
            return BandProfile("proportional", c=Fraction(arg))
        if head == "slow":
            return BandProfile("slow", gamma=float(Fraction(arg)))
        if head == "periodic-slow":
            return BandProfile("periodic", gamma=float(Fraction(arg)))
        if head in ("periodic-prop", "periodic-proportional"):
            return BandProfile("periodic", c=Fraction(arg))
        raise ValueError(f"unknown regime {head!r}")

    def describe(self) -> str:
        if self.regime in ("wigner", "full"):
            return self.regime
        if self.regime == "fixed":
            return f"fixed:{self.b}"
        if self.regime == "proportional":
            return f"proportional:{self.c}"
        if self.regime == "slow":
            return f"slow:{self.gamma}"
        kind = "slow" if self.gamma is not None else "prop"
        arg = self.gamma if self.gamma is not None else self.c
        return f"periodic-{kind}:{arg}"

    @property
    def is_periodic(self) -> bool:
        return self.regime == "periodic"

    def width(self, n: int) -> int:
        if self.regime in ("wigner", "full"):
            return n
        if self.regime == "fixed":
            return self.b
        if self.gamma is not None:
            return max(1, int(n**self.gamma))
        return max(1, int(self.c * n))

    def normalization(self, n: int) -> float:
        if self.regime in ("wigner", "full"):
            return n**-0.5
        if self.regime == "fixed":
            return (2 * self.b + 1) ** -0.5
        if self.regime == "proportional":
            cf = float(self.c)
            return ((2 * cf - cf * cf) * n) ** -0.5
        return (2 * self.width(n)) ** -0.5


def band_mask(n: int, profile: BandProfile) -> np.ndarray:
    """0/1 mask selecting the band (diagonal always included)."""
    if profile.regime in ("wigner", "full"):
        return np.ones((n, n))
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :])
    if profile.is_periodic:
        d = np.minimum(d, n - d)
    return (d <= profile.width(n)).astype(float)


def check_slow_growth(profile: BandProfile, ns) -> None:
    """Sanity-check a slow band width on the sampled grid: 1 <= b(n) < n/2,
    nondecreasing.  The asymptotics (b -> inf, b = o(n)) are the caller's
    declaration and cannot be verified on finitely many n."""
    if profile.regime != "slow" and not (profile.is_periodic and profile.gamma is not None):
        return
    ns = sorted(ns)
    widths = [profile.width(n) for n in ns]
    for n, b in zip(ns, widths):
        if not 1 <= b < n / 2:
            raise ValueError(f"slow band width b({n}) = {b} is not in [1, n/2)")
    if any(b2 < b1 for b1, b2 in zip(widths, widths[1:])):
        raise ValueError("slow band width is not nondecreasing on the grid")


# ---------------------------------------------------------------------------
# samplers

def sample_hermitian(
    n: int,
    entry: Optional[EntrySpec] = None,
    rng: Optional[np.random.Generator] = None,
    *,
    seed: Optional[int] = None,
    index: int = 0,
) -> np.ndarray:
    """Hermitian matrix with iid unit-variance entries (no normalization)."""
    rng = _resolve_rng(rng, seed, index)
    entry = entry if entry is not None else EntrySpec.gaussian()
    iu = np.triu_indices(n, 1)
    off = entry.sample_offdiag(rng, iu[0].size)
    d = entry.sample_diag(rng, n)
    x = np.zeros((n, n), dtype=complex if np.iscomplexobj(off) else float)
    x[iu] = off
    x = x + x.conj().T
    x[np.arange(n), np.arange(n)] = d
    return x


def sample_wigner(
    n: int,
    entry: Optional[EntrySpec] = None,
    rng: Optional[np.random.Generator] = None,
    *,
    seed: Optional[int] = None,
    index: int = 0,
) -> np.ndarray:
    """Normalized Wigner matrix: unit-variance Hermitian entries over sqrt(n)."""
    return sample_hermitian(n, entry, rng, seed=seed, index=index) / math.sqrt(n)


def sample_rbm(
    n: int,
    profile: BandProfile,
    entry: Optional[EntrySpec] = None,
    rng: Optional[np.random.Generator] = None,
    *,
    seed: Optional[int] = None,
    index: int = 0,
) -> np.ndarray:
    """Random band matrix: masked Hermitian entries times the profile's
    normalization."""
    x = sample_hermitian(n, entry, rng, seed=seed, index=index)
    return profile.normalization(n) * band_mask(n, profile) * x


def degree_matrix(w: np.ndarray) -> np.ndarray:
    """Diagonal matrix of row sums."""
    d = w.sum(axis=-1)
    out = np.zeros_like(w)
    idx = np.arange(w.shape[-1])
    out[..., idx, idx] = d
    return out


def markov(p: float, q: float, w: np.ndarray) -> np.ndarray:
    """p w + q deg(w); at (1, -1) rows sum to zero (Markov generator shape)."""
    return p * w + q * degree_matrix(w)


def sample_haar_orthogonal(
    n: int,
    rng: Optional[np.random.Generator] = None,
    *,
    seed: Optional[int] = None,
    index: int = 0,
) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR with sign correction."""
    rng = _resolve_rng(rng, seed, index)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


# ---------------------------------------------------------------------------
# label -> ensemble models

class MatrixModel:
    """Assignment of an independent ensemble to each label.

    Values of ``assignments`` are a :class:`BandProfile` (Gaussian entries),
    a ``(BandProfile, EntrySpec)`` pair, or the string ``"haar"``.  Sampling
    draws labels in sorted order from a single stream, so a (seed, index)
    pair pins the whole family.
    """

    def __init__(self, assignments: Mapping[str, Any]):
        parts = []
        for label in sorted(assignments):
            val = assignments[label]
            if val == "haar":
                parts.append((label, "haar", None, None))
            elif isinstance(val, BandProfile):
                parts.append((label, "rbm", val, EntrySpec.gaussian()))
            else:
                profile, entry = val
                parts.append((label, "rbm", profile, entry))
        self.parts = tuple(parts)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.parts)

    def profiles(self) -> dict[str, BandProfile]:
        return {lab: prof for lab, kind, prof, _ in self.parts if kind == "rbm"}

    def entries(self) -> dict[str, EntrySpec]:
        return {lab: ent for lab, kind, _, ent in self.parts if kind == "rbm"}

    def sample(self, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        out = {}
        for label, kind, profile, entry in self.parts:
            if kind == "haar":
                out[label] = sample_haar_orthogonal(n, rng)
            else:
                out[label] = sample_rbm(n, profile, entry, rng)
        return out
