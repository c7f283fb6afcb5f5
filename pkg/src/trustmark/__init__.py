"""Anonymous trust/untrust tokens for blockchain addresses.

Admitters sign tokens with an accountable ring signature over ristretto255;
a designated auditor can open the signature, a Pedersen commitment links an
issuance to its later revocation, and :mod:`trustmark.embed` packs tokens
into chain transactions.
"""

__version__ = "0.1.0"
