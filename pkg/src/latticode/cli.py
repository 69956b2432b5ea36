"""Command-line front end: ``latticode params|encode|decode|pke|dfr ...``.

Output is machine-readable by default (compact JSON, or CSV where asked);
``--pretty`` indents JSON for people.  Errors print one ``error:`` line on
stderr and exit with status 1 (2 for usage errors).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, codec, frodo
from .cvp import BACKEND
from .lattices import catalog_get
from .params import get_params, params_registry

SEED_ENV = "LATTICODE_SEED"


class CliError(Exception):
    pass


# helpers ---------------------------------------------------------------------


def _seed(args) -> int:
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is None:
            raise CliError(f"no seed given: pass --seed or set {SEED_ENV}")
        try:
            seed = int(env, 0)
        except ValueError:
            raise CliError(f"{SEED_ENV}={env!r} is not an integer") from None
    if not 0 <= seed < 1 << 64:
        raise CliError("seed must be a 64-bit unsigned integer")
    return seed


def _seed_bytes(seed: int, tag: str, index: int = 0) -> bytes:
    return hashlib.sha256(f"{tag}:{index}:".encode() + seed.to_bytes(8, "little")).digest()


def _jsonable(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    if isinstance(v, float):
        return round(v, 6)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _emit(args, obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2 if args.pretty else None, sort_keys=False)
    _write(args, text + "\n")


def _write(args, text: str) -> None:
    out = getattr(args, "output", None)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _vector(text: str) -> list:
    parts = text.replace(",", " ").replace("[", " ").replace("]", " ").split()
    if not parts:
        raise CliError("empty vector")
    try:
        return [Fraction(p) for p in parts]
    except ValueError:
        raise CliError(f"not a vector of numbers: {text!r}") from None


def _code_config(args) -> codec.CodeConfig:
    try:
        base = catalog_get(args.lattice)
    except KeyError as e:
        raise CliError(str(e.args[0])) from None
    return codec.CodeConfig(base, args.p, args.delta, args.blocks)


def _fmt_scalar(v) -> str:
    f = Fraction(v)
    return str(f.numerator) if f.denominator == 1 else str(f)


# params ----------------------------------------------------------------------


def cmd_params(args) -> None:
    if args.action == "list":
        rows = [p.summary() for p in params_registry()]
        if args.format == "csv":
            cols = ["id", "name", "family", "n_prime", "q", "sigma", "lattice", "B", "ct_bytes", "dfr_log2"]
            lines = [",".join(cols)] + [",".join(str(r[c]) for c in cols) for r in rows]
            _write(args, "\n".join(lines) + "\n")
        else:
            _emit(args, rows)
        return
    if not args.name:
        raise CliError("params show needs a parameter-set id")
    try:
        p = get_params(args.name)
    except KeyError as e:
        raise CliError(str(e.args[0])) from None
    _emit(args, p.summary())


# encode / decode -------------------------------------------------------------


def cmd_encode(args) -> None:
    cfg = _code_config(args)
    if (args.bits is None) == (args.index is None):
        raise CliError("give exactly one of --bits HEX or --index 'z1 z2 ...'")
    if args.bits is not None:
        z = codec.bits_to_index(cfg, codec.hex_to_bits(args.bits, cfg.total_bits))
    else:
        z = np.array([int(v) for v in _vector(args.index)], dtype=np.int64)
    x = codec.label(cfg, z).scaled(cfg.delta)
    q = Fraction(cfg.q)
    vals = [f % q for f in x.to_fractions()]
    _write(args, " ".join(_fmt_scalar(v) for v in vals) + "\n")


def cmd_decode(args) -> None:
    cfg = _code_config(args)
    y = _vector(args.word)
    if any(v.denominator != 1 for v in y):
        raise CliError("received word must be integers mod q")
    y = np.array([int(v) for v in y], dtype=np.int64)
    if y.size != cfg.n:
        raise CliError(f"word has {y.size} entries, expected {cfg.n}")
    z = codec.decode_index(cfg, y)
    if cfg.power_of_two:
        _write(args, codec.bits_to_hex(codec.index_to_bits(cfg, z)) + "\n")
    else:
        _write(args, " ".join(str(int(v)) for v in z) + "\n")


# pke -------------------------------------------------------------------------


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from None


def _write_bytes(path: str, data: bytes) -> None:
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}") from None


def cmd_pke(args) -> None:
    if args.action == "keygen":
        params = _params(args)
        kp = frodo.keygen(params, _seed_bytes(_seed(args), "keygen"))
        if not args.public or not args.secret:
            raise CliError("keygen needs --public PATH and --secret PATH")
        _write_bytes(args.public, frodo.serialize_public(params, kp.public))
        _write_bytes(args.secret, frodo.serialize_secret(params, kp.secret))
        _emit(args, {"params": params.id, "public": args.public, "secret": args.secret})
    elif args.action == "encrypt":
        if not args.public or not args.ciphertext or args.message is None:
            raise CliError("encrypt needs --public, --message HEX and --ciphertext PATH")
        params, pk = frodo.deserialize_public(_read(args.public))
        bits = codec.hex_to_bits(args.message, params.message_bits)
        ct = frodo.encrypt(params, pk, bits, _seed_bytes(_seed(args), "encrypt"))
        _write_bytes(args.ciphertext, frodo.serialize_ciphertext(params, ct))
        _emit(args, {"params": params.id, "ciphertext": args.ciphertext, "bytes": params.ct_bytes})
    elif args.action == "decrypt":
        if not args.secret or not args.ciphertext:
            raise CliError("decrypt needs --secret and --ciphertext")
        params, sk = frodo.deserialize_secret(_read(args.secret))
        params_ct, ct = frodo.deserialize_ciphertext(_read(args.ciphertext))
        if params_ct != params:
            raise CliError("key and ciphertext belong to different parameter sets")
        _write(args, codec.bits_to_hex(frodo.decrypt(params, sk, ct)) + "\n")
    else:  # roundtrip
        params = _params(args)
        seed = _seed(args)
        failures = 0
        for i in range(args.trials):
            kp = frodo.keygen(params, _seed_bytes(seed, "keygen", i))
            rng = frodo.derive_rng("message", _seed_bytes(seed, "message", i))
            msg = rng.integers(0, 2, params.message_bits)
            ct = frodo.encrypt(params, kp, msg, _seed_bytes(seed, "encrypt", i))
            failures += int(np.any(frodo.decrypt(params, kp, ct) != msg))
        _emit(args, {"params": params.id, "trials": args.trials, "failures": failures})


def _params(args):
    if not args.params:
        raise CliError("--params ID is required")
    try:
        return get_params(args.params)
    except KeyError as e:
        raise CliError(str(e.args[0])) from None


# dfr -------------------------------------------------------------------------


def cmd_dfr(args) -> None:
    if args.action == "table":
        if args.which not in (2, 3):
            raise CliError("dfr table needs 2 or 3")
        rows = analysis.reproduce_table(args.which)
        if args.format == "csv":
            for r in rows:
                r["dfr_log2_computed"] = f"{r['dfr_log2_computed']:.2f}"
            _write(args, analysis.table_csv(rows))
        else:
            _emit(args, rows)
        return
    if args.action == "bound":
        if args.params:
            rep = analysis.dfr_for_params(_params(args), args.sigma)
            _emit(args, analysis.report_dict(rep))
            return
        missing = [f for f in ("lattice", "q", "sigma", "nprime", "b") if getattr(args, f) is None]
        if missing:
            raise CliError("dfr bound needs --params or all of --lattice --q --sigma --nprime --b")
        base = catalog_get(args.lattice)
        blocks = args.blocks if args.blocks_given else 64 // base.dim
        sb = analysis.effective_sigma(args.sigma, args.nprime)
        b = Fraction(args.b)
        bound = analysis.dfr_bound(base.gamma_sq, base.tau * blocks, args.q, b, sb)
        _emit(args, {
            "lattice": f"{base.name}^{blocks}", "gamma_sq": base.gamma_sq, "tau": base.tau * blocks,
            "q": args.q, "B": b, "sigma": args.sigma, "n_prime": args.nprime, "sigma_bar": sb,
            "bound_log2": bound,
        })
        return
    # simulate
    cfg = _code_config(args)
    if cfg.base.name.upper() in ("BW32", "BW64"):
        raise CliError(f"{cfg.base.name} decoder not implemented (2^32 cosets)" if cfg.base.name == "BW32"
                       else f"{cfg.base.name} decoder not implemented")
    if (args.sigma_bar is None) == (args.target is None):
        raise CliError("give exactly one of --sigma-bar or --target PROBABILITY")
    sb = args.sigma_bar if args.sigma_bar is not None else analysis.sigma_bar_for_bound(cfg, args.target)
    rep = analysis.mc_awgn_dfr(cfg, sb, args.trials, _seed(args), threads=args.threads)
    out = analysis.report_dict(rep)
    out["bound"] = 2.0 ** rep.bound_log2 if math.isfinite(rep.bound_log2) else 0.0
    out["empirical"] = rep.mc_failures / rep.mc_trials
    out["backend"] = BACKEND
    _emit(args, out)


# parser ----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=lambda s: int(s, 0), help=f"64-bit seed (falls back to ${SEED_ENV})")
    p.add_argument("--pretty", action="store_true", help="indent JSON output")
    p.add_argument("--output", "-o", help="write output to this file instead of stdout")


def _code_args(p: argparse.ArgumentParser, default_lattice: str | None = None) -> None:
    p.add_argument("--lattice", required=default_lattice is None, default=default_lattice)
    p.add_argument("--p", type=int, required=True, help="shaping modulus per block")
    p.add_argument("--delta", type=int, default=0, help="fine-lattice scale exponent")
    p.add_argument("--blocks", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="latticode", description="Lattice-coded FrodoPKE toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="list or show parameter sets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _common(p)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("encode", help="message bits or index to a codeword mod q")
    _code_args(p)
    p.add_argument("--bits", help="message as hex, MSB first, zero padded to whole bytes")
    p.add_argument("--index", help="message index as space-separated integers")
    _common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="received word mod q to message bits (hex)")
    _code_args(p)
    p.add_argument("word", help="received word, space- or comma-separated integers")
    _common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("pke", help="key generation, encryption, decryption, round trips")
    p.add_argument("action", choices=["keygen", "encrypt", "decrypt", "roundtrip"])
    p.add_argument("--params")
    p.add_argument("--public")
    p.add_argument("--secret")
    p.add_argument("--ciphertext")
    p.add_argument("--message", help="hex message")
    p.add_argument("--trials", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_pke)

    p = sub.add_parser("dfr", help="failure-rate bound, Monte Carlo, table reproduction")
    p.add_argument("action", choices=["bound", "simulate", "table"])
    p.add_argument("which", nargs="?", type=int, help="table number (2 or 3)")
    p.add_argument("--params")
    p.add_argument("--lattice")
    p.add_argument("--q", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--nprime", type=int)
    p.add_argument("--b", help="bits per entry, e.g. 2 or 9/4")
    p.add_argument("--p", type=int)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--blocks", type=int)
    p.add_argument("--sigma-bar", type=float)
    p.add_argument("--target", type=float, help="tune sigma-bar so the bound equals this probability")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _common(p)
    p.set_defaults(func=cmd_dfr)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "dfr":
        args.blocks_given = args.blocks is not None
        if args.action == "simulate":
            if args.lattice is None or args.p is None:
                print("error: dfr simulate needs --lattice and --p", file=sys.stderr)
                return 2
            if args.blocks is None:
                args.blocks = 1
    try:
        args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OverflowError, NotImplementedError) as e:
        msg = e.args[0] if e.args else type(e).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
