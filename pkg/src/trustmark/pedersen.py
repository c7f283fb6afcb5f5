"""Pedersen commitments ``C = M*g + dec*h`` and the vector form used by the proofs."""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Sequence

from .errors import UsageError
from .group import L, Point, random_scalar


@dataclass(frozen=True)
class CommitKey:
    g: Point
    h: Point
    bases: tuple[Point, ...] = ()

    def __post_init__(self):
        for p in (self.g, self.h, *self.bases):
            if p.is_identity():
                raise UsageError("commitment bases must not be the identity")


def commit(key: CommitKey, message: int, rng: Random | None = None,
           dec: int | None = None) -> tuple[Point, int]:
    """Commit to ``message``; returns ``(C, dec)``.

    ``dec`` may be forced (tests only); otherwise it is sampled uniformly.
    """
    if dec is None:
        dec = random_scalar(rng)
    return key.g * message + key.h * dec, dec % L


def com_open(key: CommitKey, c: Point, message: int, dec: int) -> bool:
    return key.g * message + key.h * dec == c


def vector_commit(key: CommitKey, messages: Sequence[int], r: int) -> Point:
    """``r*h + sum(m_i * h_i)`` over the key's vector bases."""
    if len(messages) != len(key.bases):
        raise UsageError(
            f"expected {len(key.bases)} messages, got {len(messages)}"
        )
    acc = key.h * r
    for m, base in zip(messages, key.bases):
        if m % L:
            acc = acc + base * m
    return acc
