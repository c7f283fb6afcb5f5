"""Simulated ledger and storage, benchmarks and the end-to-end scenario."""

from .ledger import SimLedger, SimStorage, SimTx

__all__ = ["SimLedger", "SimStorage", "SimTx"]
