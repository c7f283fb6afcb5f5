"""Tabular embedding report: transaction counts and fees per chain and mode."""

from __future__ import annotations

import csv
from pathlib import Path

from ..embed import FeeConfig, Mode, RefKind, estimate_fee
from ..tokens import Chain
from . import scenario as _scenario

FIELDS = ["chain", "mode", "ref_kind", "payload_bytes", "tx_count", "fee", "unit"]


def embedding_rows(seed: int = 2021, pad_to: int | None = _scenario.REFERENCE_PAYLOAD[Chain.BTC],
                   fees: FeeConfig = FeeConfig()) -> list[dict]:
    rows = []
    for chain in Chain:
        for mode in Mode:
            kinds = [RefKind.URL, RefKind.IPFS_PATH] if mode is Mode.CASE2 else [None]
            for kind in kinds:
                sc = _scenario.Scenario(seed=seed, chain=chain, mode=mode, pad_to=pad_to,
                                        storage_kind=kind or RefKind.URL, revoke=False)
                tr = _scenario.e2e_scenario(sc)
                emb = tr["embed"]
                # ETH gas needs the actual bytes; the scenario already priced them.
                quote = None if chain is Chain.ETH else estimate_fee(chain, emb["chunk_sizes"], fees)
                rows.append({
                    "chain": chain.name.lower(),
                    "mode": mode.value,
                    "ref_kind": kind.value if kind else "",
                    "payload_bytes": tr["issue"]["size"],
                    "tx_count": emb["tx_count"],
                    "fee": str(quote.amount) if quote else emb["fee"]["amount"],
                    "unit": emb["fee"]["unit"],
                })
    return rows


def write_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=FIELDS)
        w.writeheader()
        w.writerows(rows)
