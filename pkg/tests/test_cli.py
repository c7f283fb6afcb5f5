import json

import pytest

from trustmark.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    try:
        return code, json.loads(out)
    except json.JSONDecodeError:
        return code, out


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_full_walkthrough(workdir, capsys):
    for k, label in enumerate(["crs/h", "crs/h1", "crs/h2", "crs/h3", "crs/h4"]):
        for who in "ab":
            assert main(["ceremony", "contribute", "--label", label, "--id", who,
                         "--seed", f"{k}{ord(who)}"]) == 0
    capsys.readouterr()
    code, res = run(capsys, "ceremony", "verify")
    assert code == 0 and res["records"] == 10
    assert main(["ceremony", "aggregate"]) == 0
    capsys.readouterr()
    for i in range(3):
        assert main(["keygen", "admitter", "--out", f"a{i}.json", "--registry", "reg.json",
                     "--seed", str(i)]) == 0
    assert main(["keygen", "auditor", "--out", "aud.json", "--registry", "reg.json",
                 "--seed", "9"]) == 0
    capsys.readouterr()
    code, ring = run(capsys, "ring", "publish", "--registry", "reg.json")
    assert code == 0 and ring["size"] == 3
    opk = json.loads((workdir / "aud.json").read_text())["opk"]
    code, _ = run(capsys, "issue", "--registry", "reg.json", "--key", "a1.json",
                  "--ring-id", ring["ring_id"], "--auditor-pk", opk, "--address", "1Boat",
                  "--expiry", "4000000000", "--out", "tok.hex", "--link-out", "link.json",
                  "--seed", "3")
    assert code == 0
    code, verdict = run(capsys, "check", "--registry", "reg.json", "--token", "tok.hex")
    assert code == 0 and verdict["accepted"]

    code, plan = run(capsys, "embed", "--token", "tok.hex", "--chain", "btc", "--mode", "case1")
    assert code == 0
    assert plan["fee_quote"]["tx_count"] == len(plan["chunks"])
    code, back = run(capsys, "extract", "--head", plan["head_txid"], "--out", "back.hex")
    assert code == 0 and (workdir / "back.hex").read_text() == (workdir / "tok.hex").read_text()

    code, plan2 = run(capsys, "embed", "--token", "tok.hex", "--chain", "nem", "--mode",
                      "case2", "--ledger", "nem.json", "--ref-kind", "ipfs")
    assert code == 0 and len(plan2["chunks"]) == 1
    assert plan2["fee_quote"]["amount"] == "0.20"
    code, _ = run(capsys, "extract", "--head", plan2["head_txid"], "--chain", "nem",
                  "--ledger", "nem.json", "--storage", "storage.json")
    assert code == 0

    code, opened = run(capsys, "open", "--registry", "reg.json", "--token", "tok.hex",
                       "--auditor-key", "aud.json")
    assert code == 0 and opened["pk"] == json.loads((workdir / "a1.json").read_text())["pk"]
    code, j = run(capsys, "judge", "--registry", "reg.json", "--token", "tok.hex",
                  "--pk", opened["pk"], "--proof", opened["proof"])
    assert code == 0 and j["judge"] == 1
    other = json.loads((workdir / "a0.json").read_text())["pk"]
    code, j = run(capsys, "judge", "--registry", "reg.json", "--token", "tok.hex",
                  "--pk", other, "--proof", opened["proof"])
    assert code == 3 and j["judge"] == 0

    code, _ = run(capsys, "revoke", "--registry", "reg.json", "--key", "a1.json",
                  "--ring-id", ring["ring_id"], "--auditor-pk", opk, "--address", "1Boat",
                  "--expiry", "4000000000", "--link", "link.json",
                  "--orig-txid", plan["head_txid"], "--out", "rev.hex")
    assert code == 0
    code, verdict = run(capsys, "check", "--registry", "reg.json", "--token", "rev.hex",
                        "--now", "4000000001")
    assert code == 2 and verdict["step"] == 3


def test_exit_codes(workdir, capsys):
    assert main(["check", "--registry", "r.json", "--token", "missing.hex"]) == 4
    assert main(["ceremony", "verify", "--transcript", "none.jsonl"]) == 4
    for k, label in enumerate(["crs/h", "crs/h1", "crs/h2", "crs/h3", "crs/h4"]):
        main(["ceremony", "contribute", "--label", label, "--transcript", "t.jsonl",
              "--seed", str(k)])
    assert main(["ceremony", "aggregate", "--transcript", "t.jsonl", "--out", "ok.json"]) == 0
    lines = (workdir / "t.jsonl").read_text().splitlines()
    bad = json.loads(lines[2])
    bad["pok_hex"] = "00" * 64
    (workdir / "t.jsonl").write_text("\n".join(lines[:2] + [json.dumps(bad)] + lines[3:]) + "\n")
    assert main(["ceremony", "verify", "--transcript", "t.jsonl"]) == 3
    assert main(["ceremony", "aggregate", "--transcript", "t.jsonl"]) == 3
    (workdir / "partial.jsonl").write_text(lines[0] + "\n")
    assert main(["ceremony", "aggregate", "--transcript", "partial.jsonl"]) == 4
    assert main(["extract", "--head", "00" * 32]) == 4
    assert main(["issue", "--key", "k.json", "--ring-id", "00", "--auditor-pk", "00",
                 "--address", "x", "--expiry", "1"]) == 4  # params.json missing


def test_e2e_and_tamper(workdir, capsys):
    code, out = run(capsys, "e2e", "--chain", "nem", "--mode", "case2", "--out", "t.json")
    assert code == 0 and out["embed"]["tx_count"] == 1 and out["judge"]["result"]
    assert (workdir / "t.json").exists()
    code, out = run(capsys, "e2e", "--tamper", "flag")
    assert code == 2 and out["submit_step"] == 4


def test_report_and_bench_write_files(workdir, capsys):
    assert main(["report", "--out", "rep"]) == 0
    text = capsys.readouterr().out
    assert "btc\tcase1\t\t1612\t21\t0.042\tBTC" in text
    assert (workdir / "rep" / "embedding.csv").exists()
    assert (workdir / "rep" / "embedding.png").stat().st_size > 0
    assert main(["bench", "--iterations", "2", "--out", "b"]) == 0
    assert (workdir / "b" / "bench.csv").read_text().startswith("op,iterations")
    assert (workdir / "b" / "bench.png").stat().st_size > 0


def test_config_overrides_fees(workdir, capsys):
    (workdir / "cfg.json").write_text(json.dumps({"fees": {"btc_per_tx": "0.001"}}))
    assert main(["--config", "cfg.json", "report"]) == 0
    assert "btc\tcase1\t\t1612\t21\t0.021\tBTC" in capsys.readouterr().out
