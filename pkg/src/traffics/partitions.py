"""Set partitions, pairings and the Mobius function of the partition lattice."""

from __future__ import annotations

from math import factorial
from typing import Iterator, Sequence, Union

#: Enumeration refuses ground sets beyond this size (Bell numbers explode).
MAX_GROUND = 14


def _ground_list(ground: Union[int, Sequence]) -> list:
    if isinstance(ground, int):
        return list(range(ground))
    return list(ground)


def enumerate_partitions(ground: Union[int, Sequence]) -> Iterator[tuple[tuple, ...]]:
    """All set partitions of ``ground`` (an int n means ``0..n-1``).

    Partitions are emitted in restricted-growth-string order: element k is
    assigned the lowest-numbered blocks first, so the one-block partition
    comes first and the all-singletons partition last.  Blocks are tuples in
    ground order, listed by first appearance.
    """
    items = _ground_list(ground)
    n = len(items)
    if n > MAX_GROUND:
        raise ValueError(f"ground set too large ({n} > {MAX_GROUND})")
    if n == 0:
        yield ()
        return
    rgs = [0] * n

    def rec(k: int, maxused: int) -> Iterator[tuple[tuple, ...]]:
        if k == n:
            blocks: list[list] = [[] for _ in range(maxused + 1)]
            for i, b in enumerate(rgs):
                blocks[b].append(items[i])
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(maxused + 2):
            rgs[k] = b
            yield from rec(k + 1, max(maxused, b))

    yield from rec(1, 0)


def mobius_zero(partition: Sequence[Sequence]) -> int:
    """Mobius function mu(0, pi) of the partition lattice.

    0 is the all-singletons partition; the value is the product over blocks
    of (-1)^(|B|-1) (|B|-1)!.
    """
    out = 1
    for block in partition:
        k = len(block)
        if k < 1:
            raise ValueError("empty block")
        out *= (-1) ** (k - 1) * factorial(k - 1)
    return out


def pair_partitions(ground: Union[int, Sequence]) -> Iterator[tuple[tuple, ...]]:
    """All perfect matchings of ``ground``; raises on odd size.

    There are (n-1)!! of them for even n.  Each is a tuple of 2-tuples; the
    first element of a pair precedes the second in ground order.
    """
    items = _ground_list(ground)
    if len(items) % 2:
        raise ValueError("pair partitions need an even ground set")
    if len(items) > MAX_GROUND:
        raise ValueError(f"ground set too large ({len(items)} > {MAX_GROUND})")

    def rec(rest: list) -> Iterator[tuple[tuple, ...]]:
        if not rest:
            yield ()
            return
        a = rest[0]
        for i in range(1, len(rest)):
            b = rest[i]
            for tail in rec(rest[1:i] + rest[i + 1 :]):
                yield ((a, b),) + tail

    yield from rec(items)
