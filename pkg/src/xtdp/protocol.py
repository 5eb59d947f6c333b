"""Two-pass XTDP key agreement over GL(d, F_p) and the legacy single-pass TDP mode.

Initiator (Alice) holds ``a1 a2 a3 x0 x1 x2 x3`` and publishes
``u = x0^-1 a1 x1, v = x1^-1 a2 x2, w = x2^-1 a3 x3``; the responder (Bob)
mirrors this with ``b1 b2 b3 y0 y1 y2 y3`` and ``p, q, r``.  The second pass
exchanges ``t_A = a1 p a2 q a3 r`` and ``t_B = u b1 v b2 w b3``, from which
both sides strip their outer conjugators to reach ``K = a1 b1 a2 b2 a3 b3``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .commutant import BASIS_LABELS, EigenBasis, conjugated_diag, sample_eigenvalues
from .errors import DimMismatch, ProtocolStateError, WrongTokenOrigin
from .field import FieldParams
from .matrix import MatrixRng, SquareMatrix, random_invertible


class Role(enum.Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"

    @property
    def peer(self) -> Role:
        return Role.RESPONDER if self is Role.INITIATOR else Role.INITIATOR


class Mode(enum.Enum):
    XTDP = "xtdp"
    LEGACY = "tdp"


# Element name -> public eigenbasis it is diagonal in.  Names absent from a
# layout are free uniform invertible matrices.
XTDP_LAYOUT = {
    Role.INITIATOR: {"a1": "O", "a2": "P", "a3": "Q", "x1": "R", "x2": "S", "x3": "T"},
    Role.RESPONDER: {"b1": "R", "b2": "S", "b3": "T", "y0": "O", "y1": "P", "y2": "Q"},
}
XTDP_FREE = {Role.INITIATOR: "x0", Role.RESPONDER: "y3"}

LEGACY_LAYOUT = {
    Role.INITIATOR: {"a1": "O", "a2": "P", "a3": "Q", "x1": "R", "x2": "S"},
    Role.RESPONDER: {"b1": "R", "b2": "S", "b3": "T", "y1": "P", "y2": "Q"},
}

# Symbolic factors of each public piece; the cryptanalysis module reads these.
PIECE_FACTORS = {
    (Mode.XTDP, Role.INITIATOR): (("x0^-1", "a1", "x1"), ("x1^-1", "a2", "x2"), ("x2^-1", "a3", "x3")),
    (Mode.XTDP, Role.RESPONDER): (("y0^-1", "b1", "y1"), ("y1^-1", "b2", "y2"), ("y2^-1", "b3", "y3")),
    (Mode.LEGACY, Role.INITIATOR): (("a1", "x1"), ("x1^-1", "a2", "x2"), ("x2^-1", "a3")),
    (Mode.LEGACY, Role.RESPONDER): (("b1", "y1"), ("y1^-1", "b2", "y2"), ("y2^-1", "b3")),
}


@dataclass(frozen=True)
class PublicSetup:
    params: FieldParams
    dim: int
    bases: Mapping[str, EigenBasis]

    def __post_init__(self):
        if set(self.bases) != set(BASIS_LABELS):
            raise ValueError(f"setup needs bases {BASIS_LABELS}, got {sorted(self.bases)}")
        for b in self.bases.values():
            if b.dim != self.dim or b.matrix.params != self.params:
                raise DimMismatch(f"basis {b.label} does not match ({self.dim}, F_{self.params.p})")

    def basis(self, label: str) -> EigenBasis:
        return self.bases[label]

    def matrices(self) -> list[SquareMatrix]:
        """Bases in canonical O, P, Q, R, S, T order."""
        return [self.bases[k].matrix for k in BASIS_LABELS]

    @classmethod
    def from_matrices(cls, mats: Sequence[SquareMatrix]) -> PublicSetup:
        if len(mats) != len(BASIS_LABELS):
            raise ValueError(f"expected {len(BASIS_LABELS)} basis matrices, got {len(mats)}")
        bases = {k: EigenBasis(k, m) for k, m in zip(BASIS_LABELS, mats)}
        return cls(mats[0].params, mats[0].dim, bases)


def setup_public(rng: MatrixRng, dim: int, params: FieldParams) -> PublicSetup:
    params.check_dim(dim)
    bases = {k: EigenBasis(k, random_invertible(rng, dim, params)) for k in BASIS_LABELS}
    return PublicSetup(params, dim, bases)


@dataclass(frozen=True, repr=False)
class _Private:
    # Eigenvalue diagonals are retained for tests and cryptanalysis checks;
    # nothing in the wire layer serializes a private key.
    eigen: Mapping[str, tuple[int, ...]]

    def matrices(self) -> dict[str, SquareMatrix]:
        return {k: v for k, v in vars(self).items() if isinstance(v, SquareMatrix)}

    def __repr__(self):
        return f"{type(self).__name__}(<{len(self.matrices())} private matrices>)"


@dataclass(frozen=True, repr=False)
class InitiatorPrivate(_Private):
    a1: SquareMatrix
    a2: SquareMatrix
    a3: SquareMatrix
    x0: SquareMatrix
    x1: SquareMatrix
    x2: SquareMatrix
    x3: SquareMatrix


@dataclass(frozen=True, repr=False)
class ResponderPrivate(_Private):
    b1: SquareMatrix
    b2: SquareMatrix
    b3: SquareMatrix
    y0: SquareMatrix
    y1: SquareMatrix
    y2: SquareMatrix
    y3: SquareMatrix


@dataclass(frozen=True, repr=False)
class LegacyInitiatorPrivate(_Private):
    a1: SquareMatrix
    a2: SquareMatrix
    a3: SquareMatrix
    x1: SquareMatrix
    x2: SquareMatrix


@dataclass(frozen=True, repr=False)
class LegacyResponderPrivate(_Private):
    b1: SquareMatrix
    b2: SquareMatrix
    b3: SquareMatrix
    y1: SquareMatrix
    y2: SquareMatrix


@dataclass(frozen=True)
class PublicTriple:
    first: SquareMatrix
    second: SquareMatrix
    third: SquareMatrix
    role: Role
    mode: Mode = Mode.XTDP

    def __iter__(self):
        return iter((self.first, self.second, self.third))

    @property
    def dim(self) -> int:
        return self.first.dim

    @property
    def factors(self) -> tuple[tuple[str, ...], ...]:
        return PIECE_FACTORS[(self.mode, self.role)]

    @property
    def factor_counts(self) -> tuple[int, ...]:
        return tuple(len(f) for f in self.factors)


@dataclass(frozen=True)
class Token:
    value: SquareMatrix
    origin: Role


@dataclass(frozen=True)
class SessionKey:
    value: SquareMatrix

    @property
    def dim(self) -> int:
        return self.value.dim


def _sample_layout(rng: MatrixRng, setup: PublicSetup, layout: Mapping[str, str]) -> dict[str, tuple[int, ...]]:
    return {name: sample_eigenvalues(rng, setup.dim, setup.params).values for name in layout}


def _elements(setup: PublicSetup, layout: Mapping[str, str], eigen: Mapping[str, Sequence[int]]):
    return {name: conjugated_diag(setup.basis(basis), eigen[name]) for name, basis in layout.items()}


def build_initiator(setup: PublicSetup, eigen: Mapping[str, Sequence[int]],
                    x0: SquareMatrix) -> tuple[InitiatorPrivate, PublicTriple]:
    """Assemble an initiator key from explicit eigenvalue diagonals and ``x0``.

    No distinctness check is applied here; ``initiator_keygen`` is the
    sampling entry point.
    """
    layout = XTDP_LAYOUT[Role.INITIATOR]
    eigen = {k: tuple(int(v) for v in eigen[k]) for k in layout}
    el = _elements(setup, layout, eigen)
    priv = InitiatorPrivate(eigen=eigen, x0=x0, **el)
    u = x0.inverse @ priv.a1 @ priv.x1
    v = priv.x1.inverse @ priv.a2 @ priv.x2
    w = priv.x2.inverse @ priv.a3 @ priv.x3
    return priv, PublicTriple(u, v, w, Role.INITIATOR)


def build_responder(setup: PublicSetup, eigen: Mapping[str, Sequence[int]],
                    y3: SquareMatrix) -> tuple[ResponderPrivate, PublicTriple]:
    layout = XTDP_LAYOUT[Role.RESPONDER]
    eigen = {k: tuple(int(v) for v in eigen[k]) for k in layout}
    el = _elements(setup, layout, eigen)
    priv = ResponderPrivate(eigen=eigen, y3=y3, **el)
    p = priv.y0.inverse @ priv.b1 @ priv.y1
    q = priv.y1.inverse @ priv.b2 @ priv.y2
    r = priv.y2.inverse @ priv.b3 @ y3
    return priv, PublicTriple(p, q, r, Role.RESPONDER)


def initiator_keygen(rng: MatrixRng, setup: PublicSetup) -> tuple[InitiatorPrivate, PublicTriple]:
    eigen = _sample_layout(rng, setup, XTDP_LAYOUT[Role.INITIATOR])
    x0 = random_invertible(rng, setup.dim, setup.params)
    return build_initiator(setup, eigen, x0)


def responder_keygen(rng: MatrixRng, setup: PublicSetup) -> tuple[ResponderPrivate, PublicTriple]:
    eigen = _sample_layout(rng, setup, XTDP_LAYOUT[Role.RESPONDER])
    y3 = random_invertible(rng, setup.dim, setup.params)
    return build_responder(setup, eigen, y3)


def _expect_public(pub: PublicTriple, role: Role, mode: Mode, dim: int) -> None:
    if pub.role is not role or pub.mode is not mode:
        raise ProtocolStateError(f"expected a {mode.value} {role.value} public triple, "
                                 f"got {pub.mode.value} {pub.role.value}")
    if pub.dim != dim:
        raise DimMismatch(f"public triple of dimension {pub.dim}, private of {dim}")


def make_token_initiator(priv: InitiatorPrivate, responder_pub: PublicTriple) -> Token:
    """``t_A = a1 p a2 q a3 r``."""
    _expect_public(responder_pub, Role.RESPONDER, Mode.XTDP, priv.a1.dim)
    p, q, r = responder_pub
    return Token(priv.a1 @ p @ priv.a2 @ q @ priv.a3 @ r, Role.INITIATOR)


def make_token_responder(priv: ResponderPrivate, initiator_pub: PublicTriple) -> Token:
    """``t_B = u b1 v b2 w b3``."""
    _expect_public(initiator_pub, Role.INITIATOR, Mode.XTDP, priv.b1.dim)
    u, v, w = initiator_pub
    return Token(u @ priv.b1 @ v @ priv.b2 @ w @ priv.b3, Role.RESPONDER)


def derive_key_initiator(priv: InitiatorPrivate, t_b: Token) -> SessionKey:
    """``K = x0 t_B x3^-1``."""
    if t_b.origin is not Role.RESPONDER:
        raise WrongTokenOrigin(f"initiator needs the responder's token, got {t_b.origin.value}'s")
    if t_b.value.dim != priv.x0.dim:
        raise DimMismatch("token dimension does not match private key")
    return SessionKey(priv.x0 @ t_b.value @ priv.x3.inverse)


def derive_key_responder(priv: ResponderPrivate, t_a: Token) -> SessionKey:
    """``K = y0 t_A y3^-1``."""
    if t_a.origin is not Role.INITIATOR:
        raise WrongTokenOrigin(f"responder needs the initiator's token, got {t_a.origin.value}'s")
    if t_a.value.dim != priv.y0.dim:
        raise DimMismatch("token dimension does not match private key")
    return SessionKey(priv.y0 @ t_a.value @ priv.y3.inverse)


# -- legacy single-pass TDP ------------------------------------------------

def tdp_legacy_keygen(rng: MatrixRng, setup: PublicSetup, role: Role):
    """Legacy keys: ``u = a1 x1, v = x1^-1 a2 x2, w = x2^-1 a3`` (or the ``b, y`` mirror).

    Basis assignment follows the XTDP table with ``x0, x3, y0, y3`` dropped.
    """
    layout = LEGACY_LAYOUT[role]
    eigen = _sample_layout(rng, setup, layout)
    el = _elements(setup, layout, eigen)
    if role is Role.INITIATOR:
        priv = LegacyInitiatorPrivate(eigen=eigen, **el)
        first = priv.a1 @ priv.x1
        second = priv.x1.inverse @ priv.a2 @ priv.x2
        third = priv.x2.inverse @ priv.a3
    else:
        priv = LegacyResponderPrivate(eigen=eigen, **el)
        first = priv.b1 @ priv.y1
        second = priv.y1.inverse @ priv.b2 @ priv.y2
        third = priv.y2.inverse @ priv.b3
    return priv, PublicTriple(first, second, third, role, Mode.LEGACY)


def tdp_legacy_shared_key(priv, counterpart_pub: PublicTriple, role: Role) -> SessionKey:
    if role is Role.INITIATOR:
        _expect_public(counterpart_pub, Role.RESPONDER, Mode.LEGACY, priv.a1.dim)
        p, q, r = counterpart_pub
        return SessionKey(priv.a1 @ p @ priv.a2 @ q @ priv.a3 @ r)
    _expect_public(counterpart_pub, Role.INITIATOR, Mode.LEGACY, priv.b1.dim)
    u, v, w = counterpart_pub
    return SessionKey(u @ priv.b1 @ v @ priv.b2 @ w @ priv.b3)


# -- state machine ---------------------------------------------------------

class Phase(enum.IntEnum):
    FRESH = 0
    KEYED = 1
    EXCHANGED = 2
    TOKEN_SENT = 3
    ESTABLISHED = 4


@dataclass
class PartyState:
    """One side of one XTDP session; each step may run exactly once, in order.

    FRESH -publish-> KEYED -accept_public-> EXCHANGED -make_token-> TOKEN_SENT
    -accept_token-> ESTABLISHED.
    """

    role: Role
    setup: PublicSetup
    rng: MatrixRng
    phase: Phase = Phase.FRESH
    private: InitiatorPrivate | ResponderPrivate | None = field(default=None, repr=False)
    public: PublicTriple | None = field(default=None, repr=False)
    peer_public: PublicTriple | None = field(default=None, repr=False)
    token: Token | None = field(default=None, repr=False)
    session_key: SessionKey | None = field(default=None, repr=False)

    def _advance(self, expected: Phase, step: str) -> None:
        if self.phase is not expected:
            raise ProtocolStateError(f"{self.role.value}: cannot {step} in phase {self.phase.name}")
        self.phase = Phase(expected + 1)

    def publish(self) -> PublicTriple:
        self._advance(Phase.FRESH, "publish")
        keygen = initiator_keygen if self.role is Role.INITIATOR else responder_keygen
        self.private, self.public = keygen(self.rng, self.setup)
        return self.public

    def accept_public(self, pub: PublicTriple) -> None:
        if self.phase is Phase.KEYED:
            _expect_public(pub, self.role.peer, Mode.XTDP, self.setup.dim)
        self._advance(Phase.KEYED, "accept a public triple")
        self.peer_public = pub

    def make_token(self) -> Token:
        self._advance(Phase.EXCHANGED, "make a token")
        if self.role is Role.INITIATOR:
            self.token = make_token_initiator(self.private, self.peer_public)
        else:
            self.token = make_token_responder(self.private, self.peer_public)
        return self.token

    def accept_token(self, token: Token) -> SessionKey:
        if self.phase is Phase.TOKEN_SENT and token.origin is not self.role.peer:
            raise WrongTokenOrigin(f"{self.role.value} received its own role's token")
        self._advance(Phase.TOKEN_SENT, "accept a token")
        if self.role is Role.INITIATOR:
            self.session_key = derive_key_initiator(self.private, token)
        else:
            self.session_key = derive_key_responder(self.private, token)
        return self.session_key

    def require_key(self) -> SessionKey:
        if self.phase is not Phase.ESTABLISHED:
            raise ProtocolStateError(f"{self.role.value}: no session key in phase {self.phase.name}")
        return self.session_key


@dataclass(frozen=True)
class SessionRun:
    setup: PublicSetup
    initiator: PartyState
    responder: PartyState

    @property
    def key(self) -> SessionKey:
        return self.initiator.require_key()


def initiator_rng(seed: int) -> MatrixRng:
    return MatrixRng(seed, (0,))


def responder_rng(seed: int) -> MatrixRng:
    return MatrixRng(seed, (1,))


def run_session(dim: int, params: FieldParams, seed: int = 0, *,
                rng_a: MatrixRng | None = None, rng_b: MatrixRng | None = None) -> SessionRun:
    """Run one honest in-process session.

    The initiator's stream draws the public setup, then her keys; the
    networked handshake consumes randomness in the same order.
    """
    rng_a = rng_a or initiator_rng(seed)
    rng_b = rng_b or responder_rng(seed)
    setup = setup_public(rng_a, dim, params)
    alice = PartyState(Role.INITIATOR, setup, rng_a)
    bob = PartyState(Role.RESPONDER, setup, rng_b)
    pub_a = alice.publish()
    pub_b = bob.publish()
    alice.accept_public(pub_b)
    bob.accept_public(pub_a)
    t_a = alice.make_token()
    t_b = bob.make_token()
    alice.accept_token(t_b)
    bob.accept_token(t_a)
    return SessionRun(setup, alice, bob)
