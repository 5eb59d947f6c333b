"""Command-line entry point: ``xtdp <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time

from . import __version__
from .cipher import decrypt_bytes, encrypt_bytes
from .cryptanalysis import tdp_piece_attack_demo
from .errors import FieldTooSmall, NotPrime, XTDPError
from .field import DEFAULT_DIM, DEFAULT_PRIME, FieldParams
from .games import (
    ChiSquareDistinguisher,
    CoinFlipDistinguisher,
    OracleDistinguisher,
    chi_square_uniformity,
    d1_game,
    honest_xtdp_source,
)
from .matrix import MatrixRng, SquareMatrix
from .metrics import keyspace_report
from .net import HandshakeConfig, in_process_handshake, run_handshake
from .protocol import (
    Role,
    initiator_keygen,
    responder_keygen,
    run_session,
    setup_public,
    tdp_legacy_keygen,
    tdp_legacy_shared_key,
)
from .wire import fingerprint, matrix_bytes, matrix_from_bytes


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("XTDP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw, 0)
    except ValueError:
        raise UsageError(f"XTDP_SEED={raw!r} is not an integer") from None


def _params(args) -> FieldParams:
    params = FieldParams(args.prime)
    if hasattr(args, "dim"):
        if not 1 <= args.dim <= 64:
            raise UsageError("--dim must be between 1 and 64")
        params.check_dim(args.dim)
    return params


def _seed(args) -> int:
    return _default_seed() if args.seed is None else args.seed


def key_to_hex(key: SquareMatrix) -> str:
    return matrix_bytes(key).hex()


def key_from_hex(text: str, params: FieldParams) -> SquareMatrix:
    try:
        raw = bytes.fromhex(text.strip())
    except ValueError:
        raise UsageError("key is not valid hex") from None
    count = len(raw) // params.entry_width
    dim = math.isqrt(count)
    if dim == 0 or dim * dim * params.entry_width != len(raw):
        raise UsageError(f"key of {len(raw)} bytes is not a square matrix over F_{params.p}")
    return matrix_from_bytes(raw, dim, params)


def cmd_demo(args) -> int:
    params = _params(args)
    seed = _seed(args)
    if args.legacy:
        rng = MatrixRng(seed)
        setup = setup_public(rng, args.dim, params)
        priv_a, pub_a = tdp_legacy_keygen(rng, setup, Role.INITIATOR)
        priv_b, pub_b = tdp_legacy_keygen(rng, setup, Role.RESPONDER)
        k_a = tdp_legacy_shared_key(priv_a, pub_b, Role.INITIATOR).value
        k_b = tdp_legacy_shared_key(priv_b, pub_a, Role.RESPONDER).value
        print("mode=tdp")
        print(f"initiator_fingerprint={fingerprint(k_a)}")
        print(f"responder_fingerprint={fingerprint(k_b)}")
        print(f"keys_match={k_a == k_b}")
        if args.show_key:
            print(f"key_hex={key_to_hex(k_a)}")
        return 0 if k_a == k_b else 1

    config = HandshakeConfig(args.dim, args.prime, seed)
    init, resp = in_process_handshake(config)
    print("mode=xtdp")
    print(f"initiator_fingerprint={init.key_fingerprint}")
    print(f"responder_fingerprint={resp.key_fingerprint}")
    print(f"keys_match={init.key_fingerprint == resp.key_fingerprint}")
    print(f"message_roundtrip={init.message_fingerprint == resp.message_fingerprint}")
    if args.show_key:
        print(f"key_hex={key_to_hex(init.key)}")
    ok = init.key_fingerprint == resp.key_fingerprint and init.message_fingerprint == resp.message_fingerprint
    return 0 if ok else 1


def _network(args, role: Role) -> int:
    _params(args)
    message = None
    if role is Role.RESPONDER and args.message:
        with open(args.message, "rb") as fh:
            message = fh.read()
    config = HandshakeConfig(args.dim, args.prime, _seed(args), message=message,
                             decode=bool(getattr(args, "out", None)), timeout=args.timeout)

    def ready(port):
        print(f"listening={args.host}:{port}", flush=True)

    summary = run_handshake(role, (args.host, args.port), config, on_listening=ready)
    for line in summary.lines():
        print(line)
    if role is Role.INITIATOR and args.out and summary.message is not None:
        with open(args.out, "wb") as fh:
            fh.write(summary.message)
    return 0


def cmd_encrypt(args) -> int:
    params = FieldParams(args.prime)
    key = key_from_hex(args.key, params)
    if not key.is_invertible():
        raise UsageError("key matrix is singular")
    with open(args.input, "rb") as fh:
        data = fh.read()
    blocks = encrypt_bytes(key, data)
    with open(args.output, "wb") as fh:
        for c in blocks:
            fh.write(matrix_bytes(c.value))
    print(f"blocks={len(blocks)}")
    return 0


def cmd_decrypt(args) -> int:
    params = FieldParams(args.prime)
    key = key_from_hex(args.key, params)
    if not key.is_invertible():
        raise UsageError("key matrix is singular")
    with open(args.input, "rb") as fh:
        raw = fh.read()
    size = key.dim * key.dim * params.entry_width
    if len(raw) % size:
        raise XTDPError(f"ciphertext length {len(raw)} is not a multiple of {size}")
    blocks = [matrix_from_bytes(raw[k:k + size], key.dim, params) for k in range(0, len(raw), size)]
    data = decrypt_bytes(key, blocks)
    with open(args.output, "wb") as fh:
        fh.write(data)
    print(f"bytes={len(data)}")
    return 0


def cmd_attack(args) -> int:
    params = _params(args)
    rng = MatrixRng(_seed(args))
    setup = setup_public(rng, args.dim, params)
    decomposed = attacked = 0
    first_report = None
    for i in range(args.instances):
        role = Role.INITIATOR if i % 2 == 0 else Role.RESPONDER
        if args.mode == "tdp":
            _, pub = tdp_legacy_keygen(rng, setup, role)
        else:
            keygen = initiator_keygen if role is Role.INITIATOR else responder_keygen
            _, pub = keygen(rng, setup)
        report = tdp_piece_attack_demo(setup, pub)
        first_report = first_report or report
        attacked += len(report.pieces)
        decomposed += report.successes
    print(first_report.to_text())
    print(f"instances={args.instances}")
    print(f"outer_pieces_attacked={attacked}")
    print(f"outer_pieces_decomposed={decomposed}")
    return 0


def cmd_stats(args) -> int:
    params = _params(args)
    seed = _seed(args)
    source = honest_xtdp_source(args.dim, params)
    print("evidence=statistical; IND-CCA2 is a conjecture and is not proven here")
    games = [
        ("coin_flip", CoinFlipDistinguisher(seed), False),
        ("chi_square", ChiSquareDistinguisher(), False),
        ("oracle_leaked_key", OracleDistinguisher(), True),
    ]
    for name, dist, leak in games:
        t = d1_game(dist, args.trials, source, seed=seed, leak_secret=leak)
        print(f"d1.{name}.correct={t.guesses_correct}/{t.trials}")
        print(f"d1.{name}.advantage={t.advantage:.4f}")
        print(f"d1.{name}.within_3sigma={t.within(3)}")
    keys = [run_session(args.dim, params, rng_a=MatrixRng(seed, (i, 0)), rng_b=MatrixRng(seed, (i, 1))).key.value
            for i in range(args.trials)]
    try:
        stat, pval = chi_square_uniformity(keys, params)
    except XTDPError as exc:
        print(f"chi_square.skipped={exc}")
    else:
        print(f"chi_square.statistic={stat:.2f}")
        print(f"chi_square.df={params.p - 1}")
        print(f"chi_square.p_value={pval:.4f}")
        print(f"chi_square.reject_at_{args.alpha}={pval < args.alpha}")
    return 0


def cmd_keyspace(args) -> int:
    params = FieldParams(args.prime)
    if args.dim < 1 or args.matrices < 1:
        raise UsageError("--dim and --matrices must be >= 1")
    report = keyspace_report(args.dim, params, args.matrices)
    for line in report.lines():
        print(line)
    return 0


def cmd_bench(args) -> int:
    params = FieldParams(args.prime)
    try:
        dims = [int(x) for x in args.dims.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--dims must be a comma-separated list of integers: {args.dims!r}") from None
    for d in dims:
        params.check_dim(d)
    print(f"{'dim':>4} {'runs':>5} {'ms/session':>11}")
    for d in dims:
        t0 = time.perf_counter()
        for i in range(args.runs):
            run_session(d, params, i)
        ms = (time.perf_counter() - t0) * 1000 / args.runs
        print(f"{d:>4} {args.runs:>5} {ms:>11.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xtdp", description="XTDP key agreement over GL(d, F_p)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def field_opts(p, dim=True):
        if dim:
            p.add_argument("--dim", type=int, default=DEFAULT_DIM)
        p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
        p.add_argument("--seed", type=int, default=None, help="default: $XTDP_SEED or 0")

    p = sub.add_parser("demo", help="full in-process exchange")
    field_opts(p)
    p.add_argument("--legacy", action="store_true", help="single-pass TDP instead of XTDP")
    p.add_argument("--show-key", action="store_true")
    p.set_defaults(func=cmd_demo)

    for name, role in (("listen", Role.RESPONDER), ("connect", Role.INITIATOR)):
        p = sub.add_parser(name, help=f"networked handshake as {role.value}")
        field_opts(p)
        p.add_argument("--host", default="127.0.0.1")
        p.add_argument("--port", type=int, default=7251)
        p.add_argument("--timeout", type=float, default=30.0)
        if role is Role.RESPONDER:
            p.add_argument("--message", help="file whose bytes are sent encrypted")
        else:
            p.add_argument("--out", help="write the decrypted payload here")
        p.set_defaults(func=lambda a, r=role: _network(a, r))

    for name, func in (("encrypt", cmd_encrypt), ("decrypt", cmd_decrypt)):
        p = sub.add_parser(name, help=f"{name} a file under a hex-encoded key matrix")
        p.add_argument("--key", required=True, help="row-major key entries as hex")
        p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
        p.add_argument("--in", dest="input", required=True)
        p.add_argument("--out", dest="output", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("attack-demo", help="two-factor decomposition of outer public pieces")
    field_opts(p)
    p.add_argument("--mode", choices=("tdp", "xtdp"), default="tdp")
    p.add_argument("--instances", type=int, default=1)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("stats", help="indistinguishability game and chi-square suite")
    field_opts(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("keyspace", help="key-space cardinality and security level")
    p.add_argument("--dim", type=int, default=DEFAULT_DIM)
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--matrices", type=int, default=4)
    p.set_defaults(func=cmd_keyspace)

    p = sub.add_parser("bench", help="time full sessions per dimension")
    p.add_argument("--dims", default="2,4,8,16")
    p.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    p.add_argument("--runs", type=int, default=20)
    p.set_defaults(func=cmd_bench)
    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, NotPrime, FieldTooSmall) as exc:
        print(f"xtdp {args.command}: {exc}", file=sys.stderr)
        return 2
    except (XTDPError, OSError) as exc:
        print(f"xtdp {args.command}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())
