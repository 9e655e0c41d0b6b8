"""Finite permutations on {0, ..., d-1} with the two special families used
throughout the package: cyclic shifts x -> x+i (mod d) and reflections
x -> i-x (mod d).

Permutations are stored as image tuples: ``p.image[x]`` is the image of x.
Composition follows the function convention ``compose(p, q)(x) == p(q(x))``,
i.e. the right factor acts first.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from math import gcd


class Family(enum.Enum):
    """Membership of a permutation in the shift or reflection family."""

    SHIFT = "shift"
    REFLECTION = "reflection"
    OTHER = "other"


@dataclass(frozen=True)
class Perm:
    """A permutation of {0, ..., d-1} given by its image tuple.

    >>> Perm((1, 2, 0))(0)
    1
    """

    image: tuple[int, ...]

    def __post_init__(self) -> None:
        d = len(self.image)
        if d == 0:
            raise ValueError("empty permutation")
        if sorted(self.image) != list(range(d)):
            raise ValueError(f"not a permutation of 0..{d - 1}: {self.image}")

    @property
    def degree(self) -> int:
        return len(self.image)

    def __call__(self, x: int) -> int:
        return self.image[x]

    def is_identity(self) -> bool:
        return all(self.image[x] == x for x in range(len(self.image)))


def identity(d: int) -> Perm:
    return Perm(tuple(range(d)))


def shift(d: int, i: int) -> Perm:
    """The cyclic shift x -> x+i (mod d)."""
    return Perm(tuple((x + i) % d for x in range(d)))


def reflection(d: int, i: int) -> Perm:
    """The reflection x -> i-x (mod d)."""
    return Perm(tuple((i - x) % d for x in range(d)))


def compose(p: Perm, q: Perm) -> Perm:
    """Composition p after q: compose(p, q)(x) == p(q(x))."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} != {q.degree}")
    return Perm(tuple(p.image[q.image[x]] for x in range(p.degree)))


def inverse(p: Perm) -> Perm:
    img = [0] * p.degree
    for x, y in enumerate(p.image):
        img[y] = x
    return Perm(tuple(img))


def shift_index(p: Perm) -> int | None:
    """i such that p == shift(d, i), or None."""
    d = p.degree
    i = p.image[0]
    if all(p.image[x] == (x + i) % d for x in range(d)):
        return i
    return None


def reflection_index(p: Perm) -> int | None:
    """i such that p == reflection(d, i), or None."""
    d = p.degree
    i = p.image[0]  # p(0) == i
    if all(p.image[x] == (i - x) % d for x in range(d)):
        return i
    return None


def classify_family(p: Perm) -> tuple[Family, int | None]:
    """Classify p as a shift, a reflection, or neither.

    Shifts win ties: for d = 2 the two families coincide and every element
    is reported as a shift.
    """
    i = shift_index(p)
    if i is not None:
        return (Family.SHIFT, i)
    i = reflection_index(p)
    if i is not None:
        return (Family.REFLECTION, i)
    return (Family.OTHER, None)


def conjugation_unit(p: Perm) -> int | None:
    """The unit u with p * shift(x) * p^-1 == shift(u*x) for every x, if any.

    Exists exactly when p normalizes the shift family; the returned u is then
    invertible mod d. Shifts give u = 1, reflections give u = d-1.
    """
    d = p.degree
    pinv = inverse(p)
    u = shift_index(compose(compose(p, shift(d, 1)), pinv))
    if u is None:
        return None
    for x in range(2, d):
        got = shift_index(compose(compose(p, shift(d, x)), pinv))
        if got != (u * x) % d:
            return None
    if gcd(u, d) != 1:
        return None
    return u


_TOKEN_RE = re.compile(r"^(?:(s|r)(\d+)|\[(\d+(?:,\d+)*)\])$")


def parse_token(token: str, d: int) -> Perm:
    """Parse a permutation token: ``s<i>`` shift, ``r<i>`` reflection, or an
    explicit image list ``[a0,a1,...]``."""
    m = _TOKEN_RE.match(token.replace(" ", ""))
    if m is None:
        raise ValueError(f"bad permutation token: {token!r}")
    if m.group(1) == "s":
        return shift(d, int(m.group(2)) % d)
    if m.group(1) == "r":
        return reflection(d, int(m.group(2)) % d)
    image = tuple(int(t) for t in m.group(3).split(","))
    if len(image) != d:
        raise ValueError(f"image list {token!r} has length {len(image)}, expected d={d}")
    return Perm(image)


def format_token(p: Perm) -> str:
    """Shortest faithful token; inverse of parse_token."""
    i = shift_index(p)
    if i is not None:
        return f"s{i}"
    i = reflection_index(p)
    if i is not None:
        return f"r{i}"
    return "[" + ",".join(str(x) for x in p.image) + "]"
