import socket
import subprocess
import sys
import threading
import time

import pytest

from xtdp.cli import cli_dispatch, key_from_hex, key_to_hex
from xtdp.field import FieldParams
from xtdp.net import HandshakeConfig, in_process_handshake
from xtdp.protocol import run_session


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_demo_matches_in_process(capsys):
    assert cli_dispatch(["demo", "--dim", "8", "--prime", "251", "--seed", "7"]) == 0
    out = kv(capsys.readouterr().out)
    expected, _ = in_process_handshake(HandshakeConfig(8, 251, 7))
    assert out["initiator_fingerprint"] == out["responder_fingerprint"] == expected.key_fingerprint
    assert out["keys_match"] == "True" and out["message_roundtrip"] == "True"


def test_demo_seed_from_env(capsys, monkeypatch):
    monkeypatch.setenv("XTDP_SEED", "7")
    assert cli_dispatch(["demo"]) == 0
    from_env = kv(capsys.readouterr().out)["initiator_fingerprint"]
    assert cli_dispatch(["demo", "--seed", "7"]) == 0
    assert kv(capsys.readouterr().out)["initiator_fingerprint"] == from_env


def test_demo_legacy(capsys):
    assert cli_dispatch(["demo", "--legacy", "--dim", "4", "--prime", "13"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["mode"] == "tdp" and out["keys_match"] == "True"


def test_field_too_small_is_usage_error(capsys):
    assert cli_dispatch(["demo", "--dim", "8", "--prime", "7"]) == 2
    assert "nonzero residues" in capsys.readouterr().err
    assert cli_dispatch(["demo", "--prime", "250"]) == 2


def test_bad_flags_exit_2(capsys):
    assert cli_dispatch(["demo", "--dim", "eight"]) == 2
    assert cli_dispatch(["frobnicate"]) == 2
    assert cli_dispatch([]) == 2


def test_keyspace(capsys):
    assert cli_dispatch(["keyspace", "--dim", "8", "--prime", "251", "--matrices", "4"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["total_cardinality"] == "4.77e76"
    assert out["classical_level"] == "2^254.7"
    assert out["storage_bits_per_matrix"] == "512"


def test_encrypt_decrypt_files(tmp_path, capsys):
    key = run_session(8, FieldParams(251), seed=4).key.value
    hexkey = key_to_hex(key)
    assert key_from_hex(hexkey, FieldParams(251)) == key
    src, enc, dec = tmp_path / "m.bin", tmp_path / "c.bin", tmp_path / "d.bin"
    src.write_bytes(b"attack at dawn \xfb\xfc\xfd" * 11)
    assert cli_dispatch(["encrypt", "--key", hexkey, "--in", str(src), "--out", str(enc)]) == 0
    assert len(enc.read_bytes()) % 64 == 0
    assert enc.read_bytes() != src.read_bytes()
    assert cli_dispatch(["decrypt", "--key", hexkey, "--in", str(enc), "--out", str(dec)]) == 0
    assert dec.read_bytes() == src.read_bytes()


def test_encrypt_rejects_bad_key(tmp_path, capsys):
    src = tmp_path / "m.bin"
    src.write_bytes(b"x")
    out = str(tmp_path / "c.bin")
    assert cli_dispatch(["encrypt", "--key", "zz", "--in", str(src), "--out", out]) == 2
    assert cli_dispatch(["encrypt", "--key", "010203", "--in", str(src), "--out", out]) == 2
    assert cli_dispatch(["encrypt", "--key", "00000000", "--in", str(src), "--out", out]) == 2
    assert cli_dispatch(["encrypt", "--key", "01000001", "--in", str(tmp_path / "missing"), "--out", out]) == 1


def test_attack_demo_modes(capsys):
    assert cli_dispatch(["attack-demo", "--mode", "tdp", "--instances", "4"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["outer_pieces_decomposed"] == "8"
    assert cli_dispatch(["attack-demo", "--mode", "xtdp", "--instances", "4"]) == 0
    out = kv(capsys.readouterr().out)
    assert out["outer_pieces_decomposed"] == "0"
    assert out["claim"] == "factor_recovery_only"


def test_stats_small(capsys):
    assert cli_dispatch(["stats", "--trials", "40", "--dim", "8"]) == 0
    text = capsys.readouterr().out
    out = kv(text)
    assert "conjecture" in text
    assert out["d1.oracle_leaked_key.advantage"] == "1.0000"
    assert out["chi_square.df"] == "250"


def test_bench(capsys):
    assert cli_dispatch(["bench", "--dims", "2,4", "--runs", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and lines[1].split()[0] == "2"
    assert cli_dispatch(["bench", "--dims", "2,x"]) == 2


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_listen_connect_subprocesses(tmp_path):
    port = str(_free_port())
    msg = tmp_path / "msg.bin"
    msg.write_bytes(b"over the wire \xff" * 5)
    got = tmp_path / "got.bin"
    listener = subprocess.Popen([sys.executable, "-m", "xtdp", "listen", "--port", port, "--seed", "3",
                                 "--message", str(msg)], stdout=subprocess.PIPE, text=True)
    try:
        assert listener.stdout.readline().startswith("listening=")
        conn = subprocess.run([sys.executable, "-m", "xtdp", "connect", "--port", port, "--seed", "3",
                               "--out", str(got)], capture_output=True, text=True, timeout=60)
        l_out, _ = listener.communicate(timeout=60)
    finally:
        listener.kill()
    assert conn.returncode == 0 and listener.returncode == 0
    a, b = kv(conn.stdout), kv(l_out)
    assert a["key_fingerprint"] == b["key_fingerprint"]
    assert a["message_fingerprint"] == b["message_fingerprint"]
    assert got.read_bytes() == msg.read_bytes()


def test_connect_refused_exit_1(capsys):
    assert cli_dispatch(["connect", "--port", str(_free_port()), "--timeout", "2"]) == 1
    assert "cannot connect" in capsys.readouterr().err
