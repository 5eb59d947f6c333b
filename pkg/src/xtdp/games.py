"""Indistinguishability game and chi-square uniformity test for session keys.

These produce statistical evidence only.  The IND-CCA2 claim for the
framework is a conjecture and nothing here proves it.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from scipy.special import gammaincc

from .errors import InsufficientSamples
from .field import FieldParams
from .matrix import MatrixRng, SquareMatrix, random_invertible
from .protocol import PublicTriple, Token, run_session


@dataclass(frozen=True)
class SessionSample:
    key: SquareMatrix
    publics: tuple[PublicTriple, PublicTriple]
    tokens: tuple[Token, Token]


@dataclass(frozen=True)
class Challenge:
    """What the distinguisher sees in one trial."""

    candidates: tuple[SquareMatrix, SquareMatrix]
    publics: tuple[PublicTriple, PublicTriple]
    tokens: tuple[Token, Token]
    leaked_key: Optional[SquareMatrix] = None


Distinguisher = Callable[[Challenge], int]
SessionSource = Callable[[MatrixRng], SessionSample]


@dataclass(frozen=True)
class GameTranscript:
    trials: int
    guesses_correct: int

    def __post_init__(self):
        if not 0 <= self.guesses_correct <= self.trials:
            raise ValueError("guesses_correct must lie in [0, trials]")

    @property
    def advantage(self) -> float:
        return abs(self.guesses_correct / self.trials - 0.5) * 2

    @property
    def sigma(self) -> float:
        """Standard deviation of ``2*correct/trials`` under pure guessing."""
        return 1 / math.sqrt(self.trials)

    def within(self, k: float = 3.0) -> bool:
        return self.advantage <= k * self.sigma


def honest_xtdp_source(dim: int, params: FieldParams) -> SessionSource:
    def source(rng: MatrixRng) -> SessionSample:
        run = run_session(dim, params, rng_a=rng.spawn(0), rng_b=rng.spawn(1))
        a, b = run.initiator, run.responder
        return SessionSample(run.key.value, (a.public, b.public), (a.token, b.token))
    return source


def d1_game(distinguisher: Distinguisher, trials: int, session_source: SessionSource,
            seed: int = 0, leak_secret: bool = False) -> GameTranscript:
    """Present the real key and a uniform invertible decoy in random order.

    Trial ``i`` draws everything from ``MatrixRng(seed, (i,))`` so any
    subset of trials can be replayed or run elsewhere.  ``leak_secret``
    hands the real key to the distinguisher and exists only to check wiring.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    correct = 0
    for i in range(trials):
        rng = MatrixRng(seed, (i,))
        sample = session_source(rng.spawn(0))
        key = sample.key
        decoy = random_invertible(rng.spawn(1), key.dim, key.params)
        real_index = rng.bit()
        pair = (key, decoy) if real_index == 0 else (decoy, key)
        challenge = Challenge(pair, sample.publics, sample.tokens,
                              leaked_key=key if leak_secret else None)
        if distinguisher(challenge) == real_index:
            correct += 1
    return GameTranscript(trials, correct)


class CoinFlipDistinguisher:
    def __init__(self, seed: int = 0):
        self.rng = MatrixRng(seed, (0xC011,))

    def __call__(self, challenge: Challenge) -> int:
        return self.rng.bit()


class ChiSquareDistinguisher:
    """Guess that the candidate whose entries look less uniform is the real key."""

    def __call__(self, challenge: Challenge) -> int:
        s0, s1 = (chi_square_statistic(c.entries(), c.p) for c in challenge.candidates)
        return 0 if s0 >= s1 else 1


class OracleDistinguisher:
    """Cheats: reads the leaked key. Only meaningful with ``leak_secret=True``."""

    def __call__(self, challenge: Challenge) -> int:
        if challenge.leaked_key is None:
            raise ValueError("oracle distinguisher needs leak_secret=True")
        return 0 if challenge.candidates[0] == challenge.leaked_key else 1


def chi_square_statistic(entries: Iterable[int], p: int) -> float:
    counts = Counter(int(e) for e in entries)
    total = sum(counts.values())
    expected = total / p
    return sum((counts.get(v, 0) - expected) ** 2 for v in range(p)) / expected


def chi_square_sf(stat: float, df: int) -> float:
    """Chi-square survival function as the regularized upper incomplete gamma Q(df/2, x/2)."""
    return float(gammaincc(df / 2, stat / 2))


def chi_square_uniformity(samples: Sequence[SquareMatrix], params: FieldParams,
                          min_expected: float = 5.0) -> tuple[float, float]:
    """Goodness of fit of pooled entries against uniform on ``[0, p)``.

    Returns ``(statistic, p_value)`` with ``p - 1`` degrees of freedom.
    Raises ``InsufficientSamples`` when fewer than ``min_expected * p``
    entries are pooled.
    """
    entries = [e for m in samples for e in m.entries()]
    if not samples or len(entries) < min_expected * params.p:
        raise InsufficientSamples(
            f"{len(entries)} pooled entries; need at least {min_expected * params.p:.0f}")
    stat = chi_square_statistic(entries, params.p)
    return stat, chi_square_sf(stat, params.p - 1)
