"""Framed TCP handshake running the two-pass exchange and one ciphertext.

Message order on the connection (I = initiator/connector, R = responder/listener)::

    I -> R  SETUP       six public eigenbases
    I -> R  PUBKEY      u, v, w
    R -> I  PUBKEY      p, q, r
    I -> R  TOKEN       t_A
    R -> I  TOKEN       t_B
    R -> I  CIPHERTEXT  message encrypted under K

Either side answers an unexpected frame with an ERROR frame and raises
``PeerProtocolError``.  Randomness is consumed in the same order as
``protocol.run_session`` so a loopback run reproduces the in-process keys.
"""
from __future__ import annotations

import hashlib
import logging
import socket
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

from .cipher import bcsp_decrypt, bcsp_encrypt, decode_payload, encode_payload
from .errors import KeyMismatch, PeerProtocolError, TransportError, Truncated, XTDPError
from .field import FieldParams
from .matrix import MatrixRng, SquareMatrix
from .protocol import (
    PartyState,
    PublicSetup,
    PublicTriple,
    Role,
    Token,
    initiator_rng,
    responder_rng,
    run_session,
    setup_public,
)
from .wire import Frame, MsgType, decode_frame, encode_frame, fingerprint, matrix_bytes, read_frame

log = logging.getLogger(__name__)


@dataclass
class HandshakeConfig:
    dim: int = 8
    prime: int = 251
    seed: int = 0
    message: Optional[bytes] = None
    decode: bool = False
    timeout: float = 10.0

    @property
    def payload(self) -> bool:
        """Whether the ciphertext carries a codec-encoded byte payload."""
        return self.message is not None or self.decode

    @property
    def params(self) -> FieldParams:
        return FieldParams(self.prime)


@dataclass
class SessionSummary:
    role: Role
    key_fingerprint: str
    message_fingerprint: str
    message: Optional[bytes] = None
    key: Optional[SquareMatrix] = field(default=None, repr=False)
    party: Optional[PartyState] = field(default=None, repr=False)

    def lines(self) -> list[str]:
        out = [f"role={self.role.value}", f"key_fingerprint={self.key_fingerprint}",
               f"message_fingerprint={self.message_fingerprint}"]
        if self.message is not None:
            out.append(f"message_bytes={len(self.message)}")
        return out


def message_fingerprint(blocks) -> str:
    return hashlib.sha256(b"".join(matrix_bytes(m) for m in blocks)).hexdigest()[:16]


def responder_plaintext(rng: MatrixRng, config: HandshakeConfig) -> list[SquareMatrix]:
    if config.message is not None:
        return encode_payload(config.message, config.dim, config.params)
    return [rng.random_matrix(config.dim, config.params)]


class Channel:
    """Frame-level wrapper over a connected socket; keeps a log of sent frames."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.reader = sock.makefile("rb")
        self.sent: list[bytes] = []
        self.received: list[bytes] = []

    def send(self, values, msg_type: MsgType, params: FieldParams, dim: int) -> None:
        data = encode_frame(list(values), msg_type, params, dim)
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc
        self.sent.append(data)

    def recv(self) -> Frame:
        try:
            frame = read_frame(self.reader)
        except (OSError, Truncated) as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        self.received.append(encode_frame(frame.matrices, frame.msg_type, frame.params, frame.dim))
        return frame

    def close(self) -> None:
        try:
            self.reader.close()
        finally:
            self.sock.close()


def _expect(ch: Channel, msg_type: MsgType, config: HandshakeConfig, count: int | None = None) -> Frame:
    frame = ch.recv()
    problem = None
    if frame.msg_type is MsgType.ERROR:
        raise PeerProtocolError("peer aborted the handshake")
    if frame.msg_type is not msg_type:
        problem = f"expected {msg_type.name}, got {frame.msg_type.name}"
    elif frame.params.p != config.prime or frame.dim != config.dim:
        problem = f"peer uses d={frame.dim}, p={frame.params.p}; expected d={config.dim}, p={config.prime}"
    elif count is not None and len(frame.matrices) != count:
        problem = f"{msg_type.name} carries {len(frame.matrices)} matrices, expected {count}"
    if problem:
        try:
            ch.send([], MsgType.ERROR, config.params, config.dim)
        except XTDPError:
            pass
        raise PeerProtocolError(problem)
    return frame


def initiator_session(ch: Channel, config: HandshakeConfig) -> SessionSummary:
    params, dim = config.params, config.dim
    rng = initiator_rng(config.seed)
    setup = setup_public(rng, dim, params)
    ch.send(setup.matrices(), MsgType.SETUP, params, dim)
    party = PartyState(Role.INITIATOR, setup, rng)
    ch.send(party.publish(), MsgType.PUBKEY, params, dim)
    peer = _expect(ch, MsgType.PUBKEY, config, 3)
    party.accept_public(PublicTriple(*peer.matrices, role=Role.RESPONDER))
    ch.send([party.make_token().value], MsgType.TOKEN, params, dim)
    t_b = _expect(ch, MsgType.TOKEN, config, 1)
    key = party.accept_token(Token(t_b.matrices[0], Role.RESPONDER))
    cif = _expect(ch, MsgType.CIPHERTEXT, config)
    plain = [bcsp_decrypt(key, c) for c in cif.matrices]
    message = decode_payload(plain, params) if config.payload else None
    return SessionSummary(Role.INITIATOR, fingerprint(key.value), message_fingerprint(plain),
                          message, key.value, party)


def responder_session(ch: Channel, config: HandshakeConfig) -> SessionSummary:
    params, dim = config.params, config.dim
    rng = responder_rng(config.seed)
    setup = PublicSetup.from_matrices(_expect(ch, MsgType.SETUP, config, 6).matrices)
    peer = _expect(ch, MsgType.PUBKEY, config, 3)
    party = PartyState(Role.RESPONDER, setup, rng)
    own = party.publish()
    party.accept_public(PublicTriple(*peer.matrices, role=Role.INITIATOR))
    ch.send(own, MsgType.PUBKEY, params, dim)
    t_a = _expect(ch, MsgType.TOKEN, config, 1)
    ch.send([party.make_token().value], MsgType.TOKEN, params, dim)
    key = party.accept_token(Token(t_a.matrices[0], Role.INITIATOR))
    plain = responder_plaintext(rng, config)
    ch.send([bcsp_encrypt(key, m).value for m in plain], MsgType.CIPHERTEXT, params, dim)
    return SessionSummary(Role.RESPONDER, fingerprint(key.value), message_fingerprint(plain),
                          config.message, key.value, party)


def listen_socket(host: str = "127.0.0.1", port: int = 0) -> socket.socket:
    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        srv.bind((host, port))
        srv.listen()
    except OSError as exc:
        srv.close()
        raise TransportError(f"cannot listen on {host}:{port}: {exc}") from exc
    return srv


def serve_one(srv: socket.socket, config: HandshakeConfig,
              session: Callable[[Channel, HandshakeConfig], SessionSummary] = responder_session
              ) -> SessionSummary:
    srv.settimeout(config.timeout)
    try:
        conn, peer = srv.accept()
    except OSError as exc:
        raise TransportError(f"accept failed: {exc}") from exc
    conn.settimeout(config.timeout)
    log.info("accepted %s:%s", *peer[:2])
    ch = Channel(conn)
    try:
        return session(ch, config)
    finally:
        ch.close()


def connect_channel(host: str, port: int, timeout: float) -> Channel:
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
    return Channel(sock)


def run_handshake(role: Role, endpoint: tuple[str, int], config: HandshakeConfig,
                  on_listening: Callable[[int], None] | None = None) -> SessionSummary:
    """Run one session: the initiator connects to ``endpoint``, the responder listens on it."""
    host, port = endpoint
    if role is Role.INITIATOR:
        ch = connect_channel(host, port, config.timeout)
        try:
            return initiator_session(ch, config)
        finally:
            ch.close()
    srv = listen_socket(host, port)
    try:
        if on_listening:
            on_listening(srv.getsockname()[1])
        return serve_one(srv, config)
    finally:
        srv.close()


def loopback_handshake(config: HandshakeConfig, host: str = "127.0.0.1"
                       ) -> tuple[SessionSummary, SessionSummary]:
    """Both roles over a real loopback TCP connection; returns (initiator, responder)."""
    config.params.check_dim(config.dim)
    srv = listen_socket(host, 0)
    port = srv.getsockname()[1]
    result: dict[str, object] = {}

    def serve():
        try:
            result["responder"] = serve_one(srv, config)
        except BaseException as exc:  # re-raised in the caller's thread
            result["error"] = exc

    thread = threading.Thread(target=serve, daemon=True)
    thread.start()
    try:
        init = run_handshake(Role.INITIATOR, (host, port), config)
    finally:
        thread.join(config.timeout)
        srv.close()
    if "error" in result:
        raise result["error"]
    resp = result["responder"]
    if init.key_fingerprint != resp.key_fingerprint:
        raise KeyMismatch(f"{init.key_fingerprint} != {resp.key_fingerprint}")
    return init, resp


def in_process_handshake(config: HandshakeConfig) -> tuple[SessionSummary, SessionSummary]:
    """Same session without a transport, for comparison against the network path."""
    params = config.params
    run = run_session(config.dim, params, config.seed)
    key = run.key
    if run.responder.require_key() != key:
        raise KeyMismatch("in-process keys differ")
    plain = responder_plaintext(run.responder.rng, config)
    decrypted = [bcsp_decrypt(key, bcsp_encrypt(key, m)) for m in plain]
    message = decode_payload(decrypted, params) if config.message is not None else None
    fp = fingerprint(key.value)
    return (SessionSummary(Role.INITIATOR, fp, message_fingerprint(decrypted), message, key.value),
            SessionSummary(Role.RESPONDER, fp, message_fingerprint(plain), config.message, key.value))
