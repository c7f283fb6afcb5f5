"""Public parameters: hash-derived, or aggregated from a contribution ceremony.

In the ceremony every participant publishes ``share = tau*g`` for each label
together with a Schnorr proof of knowledge of ``tau``; the trusted element is
the sum of all verified shares, which nobody can take the log of unless every
contributor colludes. Collusion-freedom is an assumption, not something this
module can check.
"""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Iterable

from .errors import DecodeError, MissingError, UsageError
from .group import (
    L, Point, base_generator, base_mul, decode_scalar, encode_scalar,
    hash_to_group, hash_to_scalar, point_sum, random_scalar,
)
from .pedersen import CommitKey

POK_TAG = b"crs/pok"


def h_label() -> str:
    return "crs/h"


def base_label(i: int) -> str:
    """Label of the i-th vector base, 1-based."""
    return f"crs/h{i}"


@dataclass(frozen=True)
class PublicParams:
    g: Point
    h: Point
    bases: tuple[Point, ...]
    n: int
    m: int

    def __post_init__(self):
        if self.n < 2 or self.m < 1:
            raise UsageError(f"need n >= 2 and m >= 1, got n={self.n}, m={self.m}")
        if len(self.bases) != self.n:
            raise UsageError(f"expected {self.n} bases, got {len(self.bases)}")
        elems = [self.g, self.h, *self.bases]
        if any(p.is_identity() for p in elems):
            raise UsageError("parameters contain the identity")
        if len({p.encode() for p in elems}) != len(elems):
            raise UsageError("parameters are not pairwise distinct")

    @property
    def N(self) -> int:
        return self.n**self.m

    def commit_key(self) -> CommitKey:
        return CommitKey(self.g, self.h, self.bases)

    def encode(self) -> bytes:
        head = self.n.to_bytes(2, "big") + self.m.to_bytes(2, "big")
        return head + b"".join(p.encode() for p in (self.g, self.h, *self.bases))

    def digest(self) -> bytes:
        return hashlib.sha256(self.encode()).digest()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "N": self.N,
            "g": self.g.hex(),
            "h": self.h.hex(),
            "bases": [b.hex() for b in self.bases],
        }

    @classmethod
    def from_json(cls, obj: dict) -> PublicParams:
        try:
            pp = cls(
                g=Point.decode(bytes.fromhex(obj["g"])),
                h=Point.decode(bytes.fromhex(obj["h"])),
                bases=tuple(Point.decode(bytes.fromhex(b)) for b in obj["bases"]),
                n=int(obj["n"]),
                m=int(obj["m"]),
            )
        except (KeyError, ValueError) as exc:
            raise DecodeError(f"bad params file: {exc}") from exc
        if "N" in obj and int(obj["N"]) != pp.N:
            raise DecodeError("params file N does not equal n**m")
        if pp.g != base_generator():
            raise DecodeError("params file g is not the standard generator")
        return pp

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> PublicParams:
        return cls.from_json(json.loads(Path(path).read_text()))


def derive_params_deterministic(n: int = 4, m: int = 2) -> PublicParams:
    """Nothing-up-my-sleeve parameters from :func:`hash_to_group`."""
    if not (isinstance(n, int) and isinstance(m, int)) or n < 2 or m < 1:
        raise UsageError(f"need integers n >= 2 and m >= 1, got n={n!r}, m={m!r}")
    return PublicParams(
        g=base_generator(),
        h=hash_to_group(h_label().encode(), b""),
        bases=tuple(hash_to_group(base_label(i).encode(), b"") for i in range(1, n + 1)),
        n=n,
        m=m,
    )


# -- ceremony ----------------------------------------------------------------

@dataclass(frozen=True)
class Contribution:
    label: str
    share: Point
    challenge: int
    response: int
    contributor_id: str = ""

    @property
    def pok(self) -> bytes:
        return encode_scalar(self.challenge) + encode_scalar(self.response)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "share_hex": self.share.hex(),
            "pok_hex": self.pok.hex(),
            "contributor_id": self.contributor_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> Contribution:
        try:
            pok = bytes.fromhex(obj["pok_hex"])
            if len(pok) != 64:
                raise DecodeError("pok must be 64 bytes")
            return cls(
                label=obj["label"],
                share=Point.decode(bytes.fromhex(obj["share_hex"])),
                challenge=decode_scalar(pok[:32]),
                response=decode_scalar(pok[32:]),
                contributor_id=obj.get("contributor_id", ""),
            )
        except (KeyError, ValueError) as exc:
            raise DecodeError(f"bad contribution record: {exc}") from exc


def _pok_challenge(label: str, share: Point, commitment: Point) -> int:
    lab = label.encode()
    data = len(lab).to_bytes(2, "big") + lab + share.encode() + commitment.encode()
    return hash_to_scalar(POK_TAG, data)


def contribute(label: str, contributor_id: str = "",
               rng: Random | None = None) -> tuple[Contribution, int]:
    """Fresh share ``tau*g`` with a proof of knowledge of ``tau`` bound to ``label``.

    The caller should discard ``tau`` once the contribution is published.
    """
    tau = random_scalar(rng)
    share = base_mul(tau)
    k = random_scalar(rng)
    c = _pok_challenge(label, share, base_mul(k))
    return Contribution(label, share, c, (k + c * tau) % L, contributor_id), tau


def verify_contribution(label: str, c: Contribution) -> bool:
    if c.label != label or c.share.is_identity():
        return False
    commitment = base_mul(c.response) - c.share * c.challenge
    return _pok_challenge(label, c.share, commitment) == c.challenge


def aggregate(contributions: Iterable[Contribution], label: str | None = None) -> Point:
    """Sum of the shares; every contribution must carry a valid proof."""
    contributions = list(contributions)
    if not contributions:
        raise UsageError("no contributions to aggregate")
    label = contributions[0].label if label is None else label
    for c in contributions:
        if not verify_contribution(label, c):
            raise UsageError(
                f"unverified contribution from {c.contributor_id or '?'} for {label}"
            )
    return point_sum(c.share for c in contributions)


def params_from_ceremony(contributions: Iterable[Contribution], n: int = 4,
                         m: int = 2) -> PublicParams:
    by_label: dict[str, list[Contribution]] = defaultdict(list)
    for c in contributions:
        by_label[c.label].append(c)
    labels = [h_label()] + [base_label(i) for i in range(1, n + 1)]
    missing = [lab for lab in labels if lab not in by_label]
    if missing:
        raise MissingError(f"no contributions for {', '.join(missing)}")
    h, *bases = (aggregate(by_label[lab], lab) for lab in labels)
    return PublicParams(base_generator(), h, tuple(bases), n, m)


def append_transcript(path: str | Path, c: Contribution) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(c.to_json(), sort_keys=True) + "\n")


def read_transcript(path: str | Path) -> list[Contribution]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(Contribution.from_json(json.loads(line)))
    return out
