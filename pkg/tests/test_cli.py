import csv
import io
import json

import pytest

from latticode.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_params_list_and_show(capsys):
    code, out, _ = run(capsys, "params", "list")
    assert code == 0 and len(json.loads(out)) == 21
    code, out, _ = run(capsys, "params", "show", "frodo-640-e8")
    d = json.loads(out)
    assert (d["sigma"], d["q"], d["B"]) == (3.25, 32768, "2")
    code, out, _ = run(capsys, "params", "show", "frodo-976-bw16")
    assert json.loads(out)["B"] == "13/4"
    code, out, _ = run(capsys, "params", "list", "--format", "csv")
    assert len(list(csv.DictReader(io.StringIO(out)))) == 21


def test_params_unknown(capsys):
    code, _, err = run(capsys, "params", "show", "frodo-7")
    assert code == 1 and err.startswith("error:") and err.count("\n") == 1


def test_encode_d4_example(capsys):
    code, out, _ = run(capsys, "encode", "--lattice", "D4", "--p", "4", "--bits", "6e")
    assert code == 0 and out.split() == ["1", "2", "3", "0"]
    code, out, _ = run(capsys, "encode", "--lattice", "D4", "--p", "4", "--bits", "00")
    assert out.split() == ["0"] * 4
    code, out, _ = run(capsys, "encode", "--lattice", "D4", "--p", "4", "--index", "1 2 3 1")
    assert out.split() == ["1", "2", "3", "0"]


def test_encode_half_integers_unscaled(capsys):
    code, out, _ = run(capsys, "encode", "--lattice", "E8", "--p", "4", "--index", "0 0 0 0 0 0 0 1")
    assert code == 0 and "/" in out


def test_decode_round_trip(capsys):
    code, out, _ = run(capsys, "encode", "--lattice", "E8", "--p", "4", "--delta", "3", "--bits", "a53c")
    word = out.strip()
    code, out, _ = run(capsys, "decode", "--lattice", "E8", "--p", "4", "--delta", "3", word)
    assert code == 0 and out.strip() == "a53c"
    noisy = " ".join(str(int(v) + 1) for v in word.split())
    code, out, _ = run(capsys, "decode", "--lattice", "E8", "--p", "4", "--delta", "3", noisy)
    assert out.strip() == "a53c"


def test_encode_errors(capsys):
    code, _, err = run(capsys, "encode", "--lattice", "D4", "--p", "4", "--bits", "zz")
    assert code == 1 and "hex" in err
    code, _, err = run(capsys, "encode", "--lattice", "D4", "--p", "4", "--bits", "6e6e")
    assert code == 1
    code, _, err = run(capsys, "encode", "--lattice", "D4", "--p", "4")
    assert code == 1 and "exactly one" in err
    code, _, err = run(capsys, "decode", "--lattice", "BW32", "--p", "4", "--delta", "2", " ".join(["0"] * 32))
    assert code == 1 and "2^32 cosets" in err


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_pke_files(tmp_path, capsys):
    pk, sk, ct = (str(tmp_path / n) for n in ("pk", "sk", "ct"))
    assert run(capsys, "pke", "keygen", "--params", "frodo-640-e8", "--public", pk, "--secret", sk, "--seed", "7")[0] == 0
    msg = "0123456789abcdef0123456789abcdef"
    assert run(capsys, "pke", "encrypt", "--public", pk, "--message", msg, "--ciphertext", ct, "--seed", "7")[0] == 0
    first = open(ct, "rb").read()
    run(capsys, "pke", "encrypt", "--public", pk, "--message", msg, "--ciphertext", ct, "--seed", "7")
    assert open(ct, "rb").read() == first
    code, out, _ = run(capsys, "pke", "decrypt", "--secret", sk, "--ciphertext", ct)
    assert code == 0 and out.strip() == msg


def test_pke_corrupted_ciphertext_smoke(tmp_path, capsys):
    from latticode import frodo

    pk, sk, ct = (str(tmp_path / n) for n in ("pk", "sk", "ct"))
    run(capsys, "pke", "keygen", "--params", "frodo-640-e8", "--public", pk, "--secret", sk, "--seed", "3")
    run(capsys, "pke", "encrypt", "--public", pk, "--message", "00" * 16, "--ciphertext", ct, "--seed", "3")
    params, c = frodo.deserialize_ciphertext(open(ct, "rb").read())
    c2 = c.c2.copy()
    c2[0, 0] ^= params.q >> 1
    open(ct, "wb").write(frodo.serialize_ciphertext(params, frodo.Ciphertext(c.c1, c2)))
    code, out, _ = run(capsys, "pke", "decrypt", "--secret", sk, "--ciphertext", ct)
    assert code == 0 and len(out.strip()) == 32


def test_pke_roundtrip(capsys):
    code, out, _ = run(capsys, "pke", "roundtrip", "--params", "frodo-640-e8", "--trials", "20", "--seed", "7")
    assert code == 0 and json.loads(out) == {"params": "frodo-640-e8", "trials": 20, "failures": 0}


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.delenv("LATTICODE_SEED", raising=False)
    code, _, err = run(capsys, "pke", "roundtrip", "--params", "frodo-640", "--trials", "1")
    assert code == 1 and "seed" in err
    monkeypatch.setenv("LATTICODE_SEED", "11")
    code, out, _ = run(capsys, "pke", "roundtrip", "--params", "frodo-640", "--trials", "2")
    assert code == 0 and json.loads(out)["failures"] == 0


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "pke", "decrypt", "--secret", str(tmp_path / "nope"), "--ciphertext", "x")
    assert code == 1 and "cannot read" in err


def test_dfr_bound(capsys):
    code, out, _ = run(capsys, "dfr", "bound", "--lattice", "E8", "--q", "32768", "--sigma", "3.25", "--nprime", "640", "--b", "2")
    d = json.loads(out)
    assert code == 0 and d["tau"] == 1920 and abs(d["bound_log2"] + 164) <= 1
    code, out, _ = run(capsys, "dfr", "bound", "--params", "frodo-640-bw16")
    assert json.loads(out)["b_rate"] == "9/4"
    code, _, err = run(capsys, "dfr", "bound", "--lattice", "E8")
    assert code == 1


def test_dfr_table(capsys, tmp_path):
    code, out, _ = run(capsys, "dfr", "table", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 12
    assert all(r["B"] and r["ct_bytes"] for r in rows)
    dest = tmp_path / "t3.json"
    assert run(capsys, "dfr", "table", "3", "--output", str(dest))[0] == 0
    assert len(json.loads(dest.read_text(encoding="utf-8"))) == 12
    assert run(capsys, "dfr", "table", "4")[0] == 1


def test_dfr_simulate(capsys):
    args = ["dfr", "simulate", "--lattice", "E8", "--p", "4", "--delta", "8", "--target", "0.01", "--trials", "20000", "--seed", "1"]
    code, out, _ = run(capsys, *args)
    d = json.loads(out)
    assert code == 0 and d["mc_trials"] == 20000
    code, out2, _ = run(capsys, *args, "--threads", "2")
    assert json.loads(out2)["mc_failures"] == d["mc_failures"]
    code, _, err = run(capsys, "dfr", "simulate", "--lattice", "BW32", "--p", "4", "--sigma-bar", "1", "--seed", "1")
    assert code == 1 and "not implemented" in err
    assert run(capsys, "dfr", "simulate", "--lattice", "E8")[0] == 2
