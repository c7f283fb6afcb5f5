"""Scripted replay of the full token lifecycle on the simulated ledger.

ceremony -> keygen -> ring -> issue -> submitter check -> embed -> extract and
verify -> open/judge -> revoke -> revocation check -> embed -> link check.

Every intermediate artifact goes into the transcript. With a fixed seed the
transcript is byte-identical across runs. Steps that touch the chain are
marked ``chain_dependent``; every other step comes out the same on all chain
profiles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random

from .. import ars, crs, embed, tokens
from ..embed import Mode, RefKind
from ..errors import TrustmarkError
from ..group import encode_scalar
from ..tokens import Chain, Flag, Target
from .ledger import SimLedger, SimStorage

SAMPLE_NOTE = ("This user received cryptocurrencies XEM that were leaked on 20180126 "
               "from Coincheck.")
# On-chain case-1 payload sizes reported for the three chains.
REFERENCE_PAYLOAD = {Chain.BTC: 1612, Chain.ETH: 1619, Chain.NEM: 1616}


@dataclass
class Scenario:
    seed: int = 2021
    chain: Chain = Chain.BTC
    mode: Mode = Mode.CASE1
    n: int = 4
    m: int = 2
    admitters: int = 16
    auditors: int = 3
    contributors: int = 3
    signer: int = 5
    designated: int = 0
    target: Target = Target(Chain.BTC, b"1BoatSLRHtKNngkdXEeobR76b53LETtpyT")
    flag: Flag = Flag.UNTRUST
    note: str = SAMPLE_NOTE
    pad_to: int | None = REFERENCE_PAYLOAD[Chain.BTC]
    now: int = 1586131200  # 2020-04-06
    lifetime: int = 30 * 86400
    storage_kind: RefKind = RefKind.URL
    tamper: str | None = None  # "flag" flips the flag after signing
    revoke: bool = True

    @classmethod
    def from_json(cls, obj: dict) -> Scenario:
        kw = dict(obj)
        if "chain" in kw:
            kw["chain"] = Chain[str(kw["chain"]).upper()]
        if "mode" in kw:
            kw["mode"] = Mode(kw["mode"])
        if "flag" in kw:
            kw["flag"] = Flag[str(kw["flag"]).upper()]
        if "storage_kind" in kw:
            kw["storage_kind"] = RefKind(kw["storage_kind"])
        if "target" in kw:
            t = kw["target"]
            kw["target"] = Target(Chain[t["chain"].upper()], t["address"].encode())
        return cls(**kw)


@dataclass
class Step:
    label: str
    record: dict
    chain_dependent: bool = False


@dataclass
class Transcript:
    steps: list[Step] = field(default_factory=list)

    def add(self, label: str, chain_dependent: bool = False, **record) -> None:
        self.steps.append(Step(label, record, chain_dependent))

    def __getitem__(self, label: str) -> dict:
        for s in self.steps:
            if s.label == label:
                return s.record
        raise KeyError(label)

    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    def to_json(self) -> list:
        return [{"step": s.label, "chain_dependent": s.chain_dependent, **s.record}
                for s in self.steps]

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()

    def chain_independent_bytes(self) -> bytes:
        core = [s for s in self.to_json() if not s["chain_dependent"]]
        return json.dumps(core, sort_keys=True, separators=(",", ":")).encode()


class ScenarioAbort(TrustmarkError):
    def __init__(self, step: str, reason: str, transcript: Transcript,
                 verdict: tokens.Verdict | None = None):
        super().__init__(f"{step}: {reason}")
        self.step = step
        self.reason = reason
        self.transcript = transcript
        self.verdict = verdict


def _padded_note(sc: Scenario, pp, auditor_pk) -> str:
    if sc.pad_to is None:
        return sc.note
    probe = tokens.TokenMessage(sc.target, sc.flag, auditor_pk, sc.now + sc.lifetime,
                                tokens.IssuePayload(pp.g), sc.note)
    size = len(probe.encode()) + 32 + ars.RingSig.size(pp.n, pp.m)
    return sc.note + " " * max(0, sc.pad_to - size)


def _embed(sc: Scenario, payload: bytes, ledger: SimLedger, storage: SimStorage):
    if sc.mode is Mode.CASE1:
        plan = embed.plan_case1(payload, ledger.profile)
    else:
        ref = storage.put(payload, sc.storage_kind)
        plan = embed.plan_case2(payload, ref, ledger.profile)
    head = embed.link_and_submit(plan, ledger)
    data = [ledger.get_tx(t).data for t in plan.txids]
    return plan, head, embed.estimate_fee(ledger.profile, data)


def e2e_scenario(script: Scenario | None = None) -> Transcript:
    sc = script or Scenario()
    rng = Random(sc.seed)
    tr = Transcript()

    def abort(step, reason, verdict=None):
        raise ScenarioAbort(step, reason, tr, verdict)

    # Ceremony: every contributor adds a share for h and each vector base.
    labels = [crs.h_label()] + [crs.base_label(i) for i in range(1, sc.n + 1)]
    contributions = []
    for who in range(sc.contributors):
        for lab in labels:
            c, _ = crs.contribute(lab, f"admitter-{who}", rng)
            contributions.append(c)
    if not all(crs.verify_contribution(c.label, c) for c in contributions):
        abort("ceremony", "contribution failed verification")
    pp = crs.params_from_ceremony(contributions, sc.n, sc.m)
    tr.add("ceremony", transcript=[c.to_json() for c in contributions], params=pp.to_json())

    admitters = [ars.ukgen(pp, rng) for _ in range(sc.admitters)]
    auditors = [ars.okgen(pp, rng) for _ in range(sc.auditors)]
    registry = tokens.AdmitterRegistry()
    for a in admitters:
        registry.add_admitter(a.pk)
    for a in auditors:
        registry.add_auditor(a.opk)
    tr.add("keygen", admitters=[a.pk.hex() for a in admitters],
           auditors=[a.opk.hex() for a in auditors])

    ring = registry.publish_ring(a.pk for a in admitters)
    tr.add("ring", ring_id=ring.ring_id.hex(), size=len(ring))

    signer = admitters[sc.signer]
    auditor = auditors[sc.designated]
    expiry = sc.now + sc.lifetime
    note = _padded_note(sc, pp, auditor.opk)
    token, link = tokens.issue_token(pp, signer, ring, auditor.opk, sc.target, sc.flag,
                                     expiry, note, now=sc.now, rng=rng)
    tr.add("issue", token=token.to_bytes().hex(), size=len(token.to_bytes()),
           commitment=token.msg.payload.commitment.hex())

    if sc.tamper == "flag":
        token = tokens.with_flag(token, Flag(1 - token.msg.flag))
    verdict = tokens.submitter_check(pp, token, registry, sc.now)
    tr.add("submit", accepted=verdict.accepted, abort_step=verdict.step, reason=verdict.reason)
    if not verdict:
        abort("submit", verdict.reason, verdict)

    ledger = SimLedger(sc.chain)
    storage = SimStorage()
    payload = embed.encode_token(token)
    plan, head, fee = _embed(sc, payload, ledger, storage)
    tr.add("embed", chain_dependent=True, chain=sc.chain.name.lower(), mode=sc.mode.value,
           head_txid=head.hex(), tx_count=len(plan), storage_objects=len(storage.objects),
           chunk_sizes=[len(ledger.get_tx(t).data) for t in plan.txids],
           fee=fee.to_json())

    try:
        recovered = embed.extract(head, ledger, storage, sc.n, sc.m)
    except TrustmarkError as exc:
        abort("extract", str(exc))
    if recovered != token:
        abort("extract", "extracted token differs from the embedded one")
    check = tokens.submitter_check(pp, recovered, registry, sc.now)
    tr.add("verify", valid=check.accepted)
    if not check:
        abort("verify", check.reason, check)

    opened = tokens.audit_open(pp, recovered, ring, auditor.osk, rng)
    if opened is None:
        abort("open", "designated auditor could not open the token")
    pk, proof = opened
    others = [tokens.audit_open(pp, recovered, ring, a.osk, rng)
              for i, a in enumerate(auditors) if i != sc.designated]
    tr.add("open", pk=pk.hex(), proof=proof.to_bytes().hex(),
           signer_index=[a.pk for a in admitters].index(pk),
           non_designated_opened=sum(o is not None for o in others))
    judged = tokens.audit_judge(pp, recovered, ring, pk, proof)
    tr.add("judge", result=judged)
    if not judged:
        abort("judge", "judge rejected the opening")

    if not sc.revoke:
        return tr
    revocation = tokens.revoke_token(pp, signer, ring, auditor.opk, sc.target, link, head,
                                     expiry, "revoked", flag=sc.flag, now=sc.now, rng=rng)
    tr.add("revoke", chain_dependent=True, token=revocation.to_bytes().hex(),
           r_link=encode_scalar(link.r_link).hex())
    verdict = tokens.submitter_check(pp, revocation, registry, sc.now)
    if not verdict:
        abort("revoke", verdict.reason, verdict)
    rplan, rhead, rfee = _embed(sc, embed.encode_token(revocation), ledger, storage)
    fetched = embed.extract(rhead, ledger, storage, sc.n, sc.m)
    linked = tokens.verify_revocation(pp, fetched, ring, recovered, head)
    tr.add("verify_revocation", chain_dependent=True, head_txid=rhead.hex(),
           tx_count=len(rplan), fee=rfee.to_json(), linked=linked,
           ledger_size=len(ledger))
    if not linked:
        abort("verify_revocation", "revocation does not open the original commitment")
    return tr
