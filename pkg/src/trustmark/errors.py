"""Exception types shared across the package."""


class TrustmarkError(Exception):
    """Base class for package errors."""


class UsageError(TrustmarkError, ValueError):
    """Bad arguments: empty tags, wrong arity, signer outside the ring."""


class DecodeError(TrustmarkError, ValueError):
    """Byte string is not a canonical encoding of the expected object."""


class MissingError(TrustmarkError, LookupError):
    """A transaction, storage object or registry entry does not exist."""


class IntegrityError(TrustmarkError):
    """Fetched data does not match the digest committed on chain."""


class LedgerRejected(TrustmarkError):
    """The ledger refused a transaction (e.g. it exceeds the chunk limit)."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index
