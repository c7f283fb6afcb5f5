"""Wall-clock timings of the signature and commitment algorithms."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from random import Random
from typing import Callable

from .. import ars
from ..crs import derive_params_deterministic
from ..group import POINT_BYTES, random_scalar
from ..pedersen import com_open, commit

# Reference timings (ms) measured on a 2.3 GHz laptop.
REFERENCE_MS = {"sign": 13.7, "verify": 11.0, "commit": 0.0072, "com_open": 0.0072}


@dataclass(frozen=True)
class BenchResult:
    op: str
    iterations: int
    mean_ms: float
    median_ms: float
    size_bytes: int | None = None
    reference_ms: float | None = None


@dataclass
class BenchReport:
    n: int
    m: int
    results: list[BenchResult]

    def __getitem__(self, op: str) -> BenchResult:
        for r in self.results:
            if r.op == op:
                return r
        raise KeyError(op)

    def write_csv(self, path: str | Path) -> None:
        fields = list(BenchResult.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            for r in self.results:
                w.writerow(asdict(r))


def _time(fn: Callable[[], object], iterations: int, warmup: int = 2) -> list[float]:
    for _ in range(warmup):
        fn()
    out = []
    for _ in range(iterations):
        t0 = time.perf_counter()
        fn()
        out.append((time.perf_counter() - t0) * 1e3)
    return out


def run_bench(iterations: int = 50, n: int = 4, m: int = 2,
              seed: int | None = 0) -> BenchReport:
    rng = Random(seed)
    pp = derive_params_deterministic(n, m)
    key = pp.commit_key()
    auditor = ars.okgen(pp, rng)
    admitters = [ars.ukgen(pp, rng) for _ in range(pp.N)]
    ring = ars.Ring(tuple(a.pk for a in admitters))
    signer = admitters[pp.N // 2]
    msg = b"benchmark message"
    sig = ars.sign(pp, auditor.opk, msg, ring, signer.sk, rng)
    opened = ars.open(pp, msg, ring, sig, auditor.osk, rng)
    assert opened is not None
    pk, proof = opened
    value = random_scalar(rng)
    c, dec = commit(key, value, rng)
    sig_size = len(sig.to_bytes())

    cases = [
        ("sign", lambda: ars.sign(pp, auditor.opk, msg, ring, signer.sk, rng), sig_size),
        ("verify", lambda: ars.verify(pp, auditor.opk, msg, ring, sig), sig_size),
        ("open", lambda: ars.open(pp, msg, ring, sig, auditor.osk, rng), 96),
        ("judge", lambda: ars.judge(pp, auditor.opk, msg, ring, sig, pk, proof), 96),
        ("commit", lambda: commit(key, value, rng), POINT_BYTES),
        ("com_open", lambda: com_open(key, c, value, dec), POINT_BYTES),
    ]
    results = []
    for op, fn, size in cases:
        times = _time(fn, iterations)
        results.append(BenchResult(op, iterations, statistics.fmean(times),
                                   statistics.median(times), size, REFERENCE_MS.get(op)))
    return BenchReport(n, m, results)
