"""Command-line driver for every role in the token lifecycle.

Exit codes: 0 success, 2 validation abort, 3 cryptographic failure,
4 missing data.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from random import Random

from . import ars, crs, embed, tokens
from .crs import PublicParams
from .embed import FeeConfig, Mode, RefKind
from .errors import (
    DecodeError, IntegrityError, LedgerRejected, MissingError, UsageError,
)
from .group import Point, decode_scalar, encode_scalar
from .harness.ledger import SimLedger, SimStorage

EXIT_OK, EXIT_ABORT, EXIT_CRYPTO, EXIT_MISSING = 0, 2, 3, 4


class CliExit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code


# -- helpers -------------------------------------------------------------------

def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _rng(args) -> Random | None:
    seed = getattr(args, "seed", None)
    return None if seed is None else Random(seed)


def _config(args) -> dict:
    path = getattr(args, "config", None)
    return json.loads(Path(path).read_text()) if path else {}


def _fees(args) -> FeeConfig:
    return FeeConfig.from_json(_config(args).get("fees", {}))


def _profile(args):
    prof = embed.profile(args.chain)
    override = _config(args).get("profiles", {}).get(args.chain.lower(), {})
    if "max_chunk" in override:
        prof = replace(prof, max_chunk=override["max_chunk"])
    return prof


def _registry_path(args) -> Path:
    if getattr(args, "registry", None):
        return Path(args.registry)
    cfg = _config(args)
    if "registry" in cfg:
        return Path(cfg["registry"])
    raise CliExit(EXIT_ABORT, "no registry given (use --registry or a config file)")


def _load_params(args) -> PublicParams:
    if not Path(args.params).exists():
        raise CliExit(EXIT_MISSING, f"params file {args.params} not found")
    return PublicParams.load(args.params)


def _point(hexstr: str) -> Point:
    return Point.decode(bytes.fromhex(hexstr))


def _read_blob(path: str) -> bytes:
    p = Path(path)
    if not p.exists():
        raise CliExit(EXIT_MISSING, f"{path} not found")
    raw = p.read_bytes()
    try:
        return bytes.fromhex(raw.decode("ascii").strip())
    except (UnicodeDecodeError, ValueError):
        return raw


def _load_token(args, pp: PublicParams) -> tokens.Token:
    return tokens.Token.from_bytes(_read_blob(args.token), pp.n, pp.m)


def _load_key(path: str) -> dict:
    if not Path(path).exists():
        raise CliExit(EXIT_MISSING, f"key file {path} not found")
    return json.loads(Path(path).read_text())


# -- ceremony ------------------------------------------------------------------

def cmd_ceremony(args) -> int:
    if args.action == "contribute":
        c, _ = crs.contribute(args.label, args.id, _rng(args))
        crs.append_transcript(args.transcript, c)
        _emit(c.to_json())
        return EXIT_OK
    if args.action == "derive":
        pp = crs.derive_params_deterministic(args.n, args.m)
        pp.save(args.out)
        _emit(pp.to_json())
        return EXIT_OK
    if not Path(args.transcript).exists():
        raise CliExit(EXIT_MISSING, f"transcript {args.transcript} not found")
    contributions = crs.read_transcript(args.transcript)
    if args.action == "verify":
        bad = [i for i, c in enumerate(contributions) if not crs.verify_contribution(c.label, c)]
        _emit({"records": len(contributions), "invalid_lines": bad})
        return EXIT_CRYPTO if bad else EXIT_OK
    # aggregate
    try:
        pp = crs.params_from_ceremony(contributions, args.n, args.m)
    except UsageError as exc:
        raise CliExit(EXIT_CRYPTO, str(exc)) from exc
    pp.save(args.out)
    _emit(pp.to_json())
    return EXIT_OK


# -- keys and rings ------------------------------------------------------------

def cmd_keygen(args) -> int:
    pp = _load_params(args)
    rng = _rng(args)
    reg_path = Path(args.registry) if args.registry else None
    reg = tokens.AdmitterRegistry.load(reg_path) if reg_path else None
    if args.role == "admitter":
        kp = ars.ukgen(pp, rng)
        rec = {"role": "admitter", "pk": kp.pk.hex(), "sk": encode_scalar(kp.sk).hex()}
        if reg is not None:
            reg.add_admitter(kp.pk)
    else:
        kp = ars.okgen(pp, rng)
        rec = {"role": "auditor", "opk": kp.opk.hex(), "osk": encode_scalar(kp.osk).hex()}
        if reg is not None:
            reg.add_auditor(kp.opk)
    Path(args.out).write_text(json.dumps(rec, indent=2) + "\n")
    if reg is not None:
        reg.save(reg_path)
    _emit({k: v for k, v in rec.items() if k in ("role", "pk", "opk")})
    return EXIT_OK


def cmd_ring(args) -> int:
    reg_path = _registry_path(args)
    reg = tokens.AdmitterRegistry.load(reg_path)
    members = [_point(h) for h in args.member or []]
    for kf in args.key or []:
        members.append(_point(_load_key(kf)["pk"]))
    if not members:
        members = list(reg.admitters)
    try:
        ring = reg.publish_ring(members)
    except UsageError as exc:
        raise CliExit(EXIT_ABORT, str(exc)) from exc
    reg.save(reg_path)
    _emit({"ring_id": ring.ring_id.hex(), "size": len(ring)})
    return EXIT_OK


# -- issue / revoke / check ----------------------------------------------------

def _admitter(pp, args) -> ars.AdmitterKeypair:
    rec = _load_key(args.key)
    if rec.get("role") != "admitter":
        raise CliExit(EXIT_ABORT, f"{args.key} is not an admitter key")
    return ars.admitter_from_secret(pp, decode_scalar(bytes.fromhex(rec["sk"])))


def _ring(reg, args) -> ars.Ring:
    try:
        return reg.resolve(bytes.fromhex(args.ring_id))
    except MissingError as exc:
        raise CliExit(EXIT_MISSING, str(exc)) from exc


def _target(args) -> tokens.Target:
    return tokens.Target(tokens.Chain[args.target_chain.upper()], args.address.encode())


def _write_token(token: tokens.Token, out: str | None) -> None:
    blob = token.to_bytes().hex()
    if out:
        Path(out).write_text(blob + "\n")
    _emit({"ring_id": token.ring_id.hex(), "size": len(token.to_bytes()),
           "token": blob if not out else out})


def cmd_issue(args) -> int:
    pp = _load_params(args)
    reg = tokens.AdmitterRegistry.load(_registry_path(args))
    token, link = tokens.issue_token(
        pp, _admitter(pp, args), _ring(reg, args), _point(args.auditor_pk), _target(args),
        tokens.Flag[args.flag.upper()], args.expiry, args.note, now=args.now, rng=_rng(args))
    if args.link_out:
        Path(args.link_out).write_text(json.dumps(link.to_json(), indent=2) + "\n")
    _write_token(token, args.out)
    return EXIT_OK


def cmd_revoke(args) -> int:
    pp = _load_params(args)
    reg = tokens.AdmitterRegistry.load(_registry_path(args))
    link = tokens.LinkSecret.from_json(_load_key(args.link))
    token = tokens.revoke_token(
        pp, _admitter(pp, args), _ring(reg, args), _point(args.auditor_pk), _target(args),
        link, bytes.fromhex(args.orig_txid), args.expiry, args.note,
        flag=tokens.Flag[args.flag.upper()], now=args.now, rng=_rng(args))
    _write_token(token, args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    pp = _load_params(args)
    reg = tokens.AdmitterRegistry.load(_registry_path(args))
    verdict = tokens.submitter_check(pp, _load_token(args, pp), reg, args.now)
    _emit({"accepted": verdict.accepted, "step": verdict.step, "reason": verdict.reason})
    return EXIT_OK if verdict else EXIT_ABORT


# -- embedding -----------------------------------------------------------------

def cmd_embed(args) -> int:
    pp = _load_params(args)
    prof = _profile(args)
    ledger = SimLedger.load(args.ledger, prof.chain)
    if ledger.profile.chain != prof.chain:
        raise CliExit(EXIT_ABORT, f"ledger {args.ledger} is for {ledger.profile.chain.name}")
    ledger.profile = prof
    payload = _load_token(args, pp).to_bytes()
    if args.mode == Mode.CASE1.value:
        plan = embed.plan_case1(payload, prof)
    else:
        storage = SimStorage.load(args.storage)
        ref = storage.put(payload, RefKind(args.ref_kind))
        plan = embed.plan_case2(payload, ref, prof)
        storage.save(args.storage)
    head = embed.link_and_submit(plan, ledger)
    ledger.save(args.ledger)
    data = [ledger.get_tx(t).data for t in plan.txids]
    out = plan.to_json(embed.estimate_fee(prof, data, _fees(args)))
    out["head_txid"] = head.hex()
    _emit(out)
    return EXIT_OK


def cmd_extract(args) -> int:
    ledger = SimLedger.load(args.ledger, args.chain)
    storage = SimStorage.load(args.storage) if args.storage else None
    mode, data = embed.extract_payload(bytes.fromhex(args.head), ledger, storage)
    if args.out:
        Path(args.out).write_text(data.hex() + "\n")
    _emit({"mode": mode.value, "size": len(data), "token": args.out or data.hex()})
    return EXIT_OK


# -- auditing ------------------------------------------------------------------

def cmd_open(args) -> int:
    pp = _load_params(args)
    reg = tokens.AdmitterRegistry.load(_registry_path(args))
    token = _load_token(args, pp)
    rec = _load_key(args.auditor_key)
    osk = decode_scalar(bytes.fromhex(rec["osk"]))
    opened = tokens.audit_open(pp, token, reg.resolve(token.ring_id), osk, _rng(args))
    if opened is None:
        _emit({"opened": False})
        return EXIT_CRYPTO
    pk, proof = opened
    _emit({"opened": True, "pk": pk.hex(), "proof": proof.to_bytes().hex()})
    return EXIT_OK


def cmd_judge(args) -> int:
    pp = _load_params(args)
    reg = tokens.AdmitterRegistry.load(_registry_path(args))
    token = _load_token(args, pp)
    proof = ars.OpenProof.from_bytes(bytes.fromhex(args.proof))
    ok = tokens.audit_judge(pp, token, reg.resolve(token.ring_id), _point(args.pk), proof)
    _emit({"judge": int(ok)})
    return EXIT_OK if ok else EXIT_CRYPTO


# -- reports -------------------------------------------------------------------

def _print_rows(rows: list[dict], fields: list[str]) -> None:
    print("\t".join(fields))
    for r in rows:
        print("\t".join(str(r[f]) for f in fields))


def cmd_bench(args) -> int:
    from .harness.bench import BenchResult, run_bench
    from .plotting import bench_figure
    report = run_bench(args.iterations, args.n, args.m, args.seed)
    fields = list(BenchResult.__dataclass_fields__)
    rows = [{f: getattr(r, f) for f in fields} for r in report.results]
    for r in rows:
        r["mean_ms"] = f"{r['mean_ms']:.4f}"
        r["median_ms"] = f"{r['median_ms']:.4f}"
    _print_rows(rows, fields)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report.write_csv(out / "bench.csv")
        bench_figure(report, out / "bench.png")
        print(f"# wrote {out / 'bench.csv'} and {out / 'bench.png'}", file=sys.stderr)
    return EXIT_OK


def cmd_report(args) -> int:
    from .harness.report import FIELDS, embedding_rows, write_csv
    from .plotting import embedding_figure
    rows = embedding_rows(args.seed, None if args.no_pad else args.pad_to, _fees(args))
    _print_rows(rows, FIELDS)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / "embedding.csv")
        embedding_figure(rows, out / "embedding.png")
        print(f"# wrote {out / 'embedding.csv'} and {out / 'embedding.png'}", file=sys.stderr)
    return EXIT_OK


def cmd_e2e(args) -> int:
    from .harness.scenario import Scenario, ScenarioAbort, e2e_scenario
    obj = json.loads(Path(args.script).read_text()) if args.script else {}
    if args.chain:
        obj["chain"] = args.chain
    if args.mode:
        obj["mode"] = args.mode
    if args.seed is not None:
        obj["seed"] = args.seed
    if args.tamper:
        obj["tamper"] = args.tamper
    try:
        tr = e2e_scenario(Scenario.from_json(obj))
    except ScenarioAbort as exc:
        _emit({"aborted": exc.step, "reason": exc.reason,
               "submit_step": exc.verdict.step if exc.verdict is not None else None})
        return EXIT_ABORT
    if args.out:
        Path(args.out).write_bytes(tr.to_bytes() + b"\n")
    summary = {s.label: {k: v for k, v in s.record.items()
                         if not isinstance(v, (list, dict)) or k == "fee"}
               for s in tr.steps}
    for rec in summary.values():
        for k in ("token", "proof", "transcript"):
            rec.pop(k, None)
    _emit(summary)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trustmark", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON config: fees, profiles, registry path")
    sub = p.add_subparsers(dest="command", required=True)

    def params_arg(sp):
        sp.add_argument("--params", default="params.json")

    def registry_arg(sp):
        sp.add_argument("--registry")

    def seed_arg(sp):
        sp.add_argument("--seed", type=int, help="deterministic randomness (testing only)")

    def issue_args(sp):
        params_arg(sp)
        registry_arg(sp)
        seed_arg(sp)
        sp.add_argument("--key", required=True, help="admitter key file")
        sp.add_argument("--ring-id", required=True)
        sp.add_argument("--auditor-pk", required=True)
        sp.add_argument("--target-chain", default="btc", choices=["btc", "eth", "nem"])
        sp.add_argument("--address", required=True)
        sp.add_argument("--flag", default="trust", choices=["trust", "untrust"])
        sp.add_argument("--expiry", type=int, required=True, help="unix seconds")
        sp.add_argument("--note", default="")
        sp.add_argument("--now", type=int)
        sp.add_argument("--out")

    c = sub.add_parser("ceremony", help="parameter generation ceremony")
    c.add_argument("action", choices=["contribute", "verify", "aggregate", "derive"])
    c.add_argument("--transcript", default="ceremony.jsonl")
    c.add_argument("--label", default="crs/h")
    c.add_argument("--id", default="")
    c.add_argument("--n", type=int, default=4)
    c.add_argument("--m", type=int, default=2)
    c.add_argument("--out", default="params.json")
    seed_arg(c)
    c.set_defaults(func=cmd_ceremony)

    k = sub.add_parser("keygen", help="generate admitter or auditor keys")
    k.add_argument("role", choices=["admitter", "auditor"])
    k.add_argument("--out", required=True)
    params_arg(k)
    registry_arg(k)
    seed_arg(k)
    k.set_defaults(func=cmd_keygen)

    r = sub.add_parser("ring", help="publish a ring of admitter keys")
    r.add_argument("action", choices=["publish"])
    r.add_argument("--member", action="append", help="admitter pk (hex); repeatable")
    r.add_argument("--key", action="append", help="admitter key file; repeatable")
    registry_arg(r)
    r.set_defaults(func=cmd_ring)

    i = sub.add_parser("issue", help="issue a trust/untrust token")
    issue_args(i)
    i.add_argument("--link-out", help="where to store the revocation secret")
    i.set_defaults(func=cmd_issue)

    v = sub.add_parser("revoke", help="revoke a token issued earlier")
    issue_args(v)
    v.add_argument("--link", required=True)
    v.add_argument("--orig-txid", required=True)
    v.set_defaults(func=cmd_revoke)

    ch = sub.add_parser("check", help="submitter checks 1-4")
    params_arg(ch)
    registry_arg(ch)
    ch.add_argument("--token", required=True)
    ch.add_argument("--now", type=int)
    ch.set_defaults(func=cmd_check)

    e = sub.add_parser("embed", help="embed a token on the simulated ledger")
    params_arg(e)
    e.add_argument("--token", required=True)
    e.add_argument("--chain", required=True, choices=["btc", "eth", "nem"])
    e.add_argument("--mode", default="case1", choices=["case1", "case2"])
    e.add_argument("--ledger", default="ledger.json")
    e.add_argument("--storage", default="storage.json")
    e.add_argument("--ref-kind", default="url", choices=["url", "ipfs"])
    e.set_defaults(func=cmd_embed)

    x = sub.add_parser("extract", help="reassemble a token from its head txid")
    x.add_argument("--head", required=True)
    x.add_argument("--chain", default="btc", choices=["btc", "eth", "nem"])
    x.add_argument("--ledger", default="ledger.json")
    x.add_argument("--storage")
    x.add_argument("--out")
    x.set_defaults(func=cmd_extract)

    o = sub.add_parser("open", help="auditor opens a token")
    params_arg(o)
    registry_arg(o)
    seed_arg(o)
    o.add_argument("--token", required=True)
    o.add_argument("--auditor-key", required=True)
    o.set_defaults(func=cmd_open)

    j = sub.add_parser("judge", help="check an auditor's opening")
    params_arg(j)
    registry_arg(j)
    j.add_argument("--token", required=True)
    j.add_argument("--pk", required=True)
    j.add_argument("--proof", required=True)
    j.set_defaults(func=cmd_judge)

    b = sub.add_parser("bench", help="time sign/verify/commit; CSV + figure with --out")
    b.add_argument("--iterations", type=int, default=50)
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--m", type=int, default=2)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    rp = sub.add_parser("report", help="transactions and fees per chain; CSV + figure")
    rp.add_argument("--seed", type=int, default=2021)
    rp.add_argument("--pad-to", type=int, default=1612)
    rp.add_argument("--no-pad", action="store_true")
    rp.add_argument("--out")
    rp.set_defaults(func=cmd_report)

    s = sub.add_parser("e2e", help="replay the whole lifecycle on the simulator")
    s.add_argument("--script", help="JSON scenario overrides")
    s.add_argument("--chain", choices=["btc", "eth", "nem"])
    s.add_argument("--mode", choices=["case1", "case2"])
    s.add_argument("--seed", type=int)
    s.add_argument("--tamper", choices=["flag"])
    s.add_argument("--out")
    s.set_defaults(func=cmd_e2e)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliExit as exc:
        if str(exc):
            print(f"trustmark: {exc}", file=sys.stderr)
        return exc.code
    except MissingError as exc:
        print(f"trustmark: missing: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (IntegrityError, DecodeError) as exc:
        print(f"trustmark: {exc}", file=sys.stderr)
        return EXIT_CRYPTO
    except (UsageError, LedgerRejected) as exc:
        print(f"trustmark: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
