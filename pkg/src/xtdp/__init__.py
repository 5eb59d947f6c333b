"""XTDP key agreement, conjugation cipher and analysis harnesses over GL(d, F_p)."""

from .cipher import Ciphertext, bcsp_decrypt, bcsp_encrypt, decode_payload, encode_payload
from .commutant import EigenBasis, EigenvalueVector, conjugated_diag, sample_eigenvalues, verify_commutation_pairs
from .field import FieldElement, FieldParams, f_add, f_inv, f_mul, f_sub
from .matrix import (
    MatrixRng,
    SquareMatrix,
    commutator,
    conjugate,
    diag,
    identity,
    m_add,
    m_det,
    m_inv,
    m_mul,
    random_invertible,
    zeros,
)
from .protocol import (
    Mode,
    PartyState,
    PublicSetup,
    PublicTriple,
    Role,
    SessionKey,
    Token,
    derive_key_initiator,
    derive_key_responder,
    initiator_keygen,
    make_token_initiator,
    make_token_responder,
    responder_keygen,
    run_session,
    setup_public,
    tdp_legacy_keygen,
    tdp_legacy_shared_key,
)

__version__ = "0.1.0"
