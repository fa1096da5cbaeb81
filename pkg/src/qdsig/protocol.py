"""Three-party signature protocol: distribution, symmetrisation, signing and verification.

Positions are 0-based. ``L`` is the length of one private key and must be
even, so that symmetrisation forwards exactly ``L/2`` elements each way and
every eliminated signature has two halves of ``L/2`` elements.

Adversaries are modelled by their per-element mismatch probabilities, which
is all the Hoeffding bounds depend on. The ``*_trials`` functions run many
independent trials at once on a trial axis; the single-trial functions are
the same computation with one trial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .alphabet import ChannelParams, EliminationPair, eliminate_arrays, sample_quadratures

DIRECT = "direct"
FORWARDED = "forwarded"

HONEST = "honest"
REPUDIATE = "repudiate"
FORGE = "forge"


def check_length(L: int) -> int:
    if int(L) != L or L < 2 or L % 2:
        raise ValueError(f"signature length must be a positive even integer, got {L}")
    return int(L)


@dataclass(frozen=True)
class PrivateKey:
    message_bit: int
    phases: np.ndarray

    def __len__(self):
        return len(self.phases)


class SignedMessage(NamedTuple):
    message: int
    phases: np.ndarray


@dataclass(frozen=True)
class EliminatedSignature:
    """One recipient's eliminated signature for one message bit.

    Elimination arrays have shape ``(L/2, 2)`` with columns ``(elim_x, elim_p)``.
    The direct half was measured by the holder; the forwarded half came from
    the other recipient.
    """

    direct_pos: np.ndarray
    direct_elim: np.ndarray
    forwarded_pos: np.ndarray
    forwarded_elim: np.ndarray

    def elements(self) -> Iterator[tuple[int, EliminationPair, str]]:
        for pos, e in zip(self.direct_pos, self.direct_elim):
            yield int(pos), EliminationPair(int(e[0]), int(e[1])), DIRECT
        for pos, e in zip(self.forwarded_pos, self.forwarded_elim):
            yield int(pos), EliminationPair(int(e[0]), int(e[1])), FORWARDED


@dataclass(frozen=True)
class Distribution:
    keys: tuple[PrivateKey, PrivateKey]
    bob: tuple[EliminatedSignature, EliminatedSignature]
    charlie: tuple[EliminatedSignature, EliminatedSignature]


@dataclass(frozen=True)
class AdversaryConfig:
    role: str
    p_B: float = 0.0
    p_C: float = 0.0
    mismatch_prob: float = 0.0

    def __post_init__(self):
        if self.role not in (HONEST, REPUDIATE, FORGE):
            raise ValueError(f"unknown adversary role {self.role!r}")
        for v in (self.p_B, self.p_C, self.mismatch_prob):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"probabilities must lie in [0, 1], got {v}")

    @classmethod
    def honest(cls) -> "AdversaryConfig":
        return cls(HONEST)

    @classmethod
    def repudiating(cls, p_B: float, p_C: float) -> "AdversaryConfig":
        return cls(REPUDIATE, p_B=p_B, p_C=p_C)

    @classmethod
    def forging(cls, mismatch_prob: float) -> "AdversaryConfig":
        return cls(FORGE, mismatch_prob=mismatch_prob)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    mismatch_fraction_direct: float
    mismatch_fraction_forwarded: float
    threshold_used: float


class VerificationError(ValueError):
    pass


def _below(count, half: int, threshold: float):
    """Fewer than ``threshold * half`` mismatches, compared as a fraction."""
    return np.asarray(count) / half < threshold


def gen_private_keys(L: int, rng: np.random.Generator) -> tuple[PrivateKey, PrivateKey]:
    phases = rng.integers(0, 4, size=(2, L), dtype=np.int8)
    return PrivateKey(0, phases[0]), PrivateKey(1, phases[1])


def _measure(phases: np.ndarray, ch: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    x, p = sample_quadratures(phases, ch, rng)
    ex, ep = eliminate_arrays(x, p)
    return np.stack([ex, ep], axis=-1)


def _forward_masks(shape, L: int, rng: np.random.Generator) -> np.ndarray:
    """Boolean masks marking a uniformly random subset of exactly ``L/2`` positions."""
    order = np.argsort(rng.random(tuple(shape) + (L,)), axis=-1)[..., : L // 2]
    mask = np.zeros(tuple(shape) + (L,), dtype=bool)
    np.put_along_axis(mask, order, True, axis=-1)
    return mask


def symmetrize(bob_results, charlie_results, rng: np.random.Generator
               ) -> tuple[EliminatedSignature, EliminatedSignature]:
    """Exchange a random half of each recipient's results with the other.

    ``bob_results`` and ``charlie_results`` are sequences of elimination pairs
    indexed by position. Bob's forwarding subset is drawn first.
    """
    bob = np.asarray(bob_results, dtype=np.int8).reshape(-1, 2)
    charlie = np.asarray(charlie_results, dtype=np.int8).reshape(-1, 2)
    if len(bob) != len(charlie):
        raise ValueError("both recipients must hold results for the same positions")
    L = check_length(len(bob))
    fwd_b = _forward_masks((), L, rng)
    fwd_c = _forward_masks((), L, rng)
    pos = np.arange(L)
    bob_sig = EliminatedSignature(pos[~fwd_b], bob[~fwd_b], pos[fwd_c], charlie[fwd_c])
    charlie_sig = EliminatedSignature(pos[~fwd_c], charlie[~fwd_c], pos[fwd_b], bob[fwd_b])
    return bob_sig, charlie_sig


def run_distribution(L: int, ch_bob: ChannelParams, ch_charlie: ChannelParams,
                     rng: np.random.Generator) -> Distribution:
    """Distribution stage: keys, heterodyne measurement by both recipients, symmetrisation.

    Draw order: keys, then per message bit Bob's then Charlie's outcomes,
    then per message bit the symmetrisation subsets.
    """
    L = check_length(L)
    keys = gen_private_keys(L, rng)
    measured = [(_measure(k.phases, ch_bob, rng), _measure(k.phases, ch_charlie, rng)) for k in keys]
    pairs = [symmetrize(b, c, rng) for b, c in measured]
    return Distribution(keys, (pairs[0][0], pairs[1][0]), (pairs[0][1], pairs[1][1]))


def sign(keys: tuple[PrivateKey, PrivateKey], m: int) -> SignedMessage:
    if m not in (0, 1):
        raise ValueError(f"message must be 0 or 1, got {m}")
    return SignedMessage(m, keys[m].phases)


def _mismatches(phases: np.ndarray, pos: np.ndarray, elim: np.ndarray) -> int:
    declared = phases[pos]
    return int(np.count_nonzero((elim[:, 0] == declared) | (elim[:, 1] == declared)))


def verify(signed: SignedMessage, sig: EliminatedSignature, threshold: float) -> Verdict:
    """Accept iff each half has a mismatch fraction strictly below ``threshold``."""
    n_d, n_f = len(sig.direct_pos), len(sig.forwarded_pos)
    if n_d == 0 or n_f == 0:
        raise VerificationError("an empty signature half cannot certify a message")
    phases = np.asarray(signed.phases)
    if max(sig.direct_pos.max(), sig.forwarded_pos.max()) >= len(phases):
        raise VerificationError("signature positions exceed the declared key length")
    f_d = _mismatches(phases, sig.direct_pos, sig.direct_elim) / n_d
    f_f = _mismatches(phases, sig.forwarded_pos, sig.forwarded_elim) / n_f
    return Verdict(bool(f_d < threshold and f_f < threshold), f_d, f_f, threshold)


def honest_trials(n: int, L: int, ch_bob: ChannelParams, ch_charlie: ChannelParams,
                  s_a: float, s_v: float, rng: np.random.Generator, message: int = 0):
    """Run ``n`` honest protocols end to end.

    Returns boolean arrays ``(bob_accepts, charlie_accepts)``: Bob checks
    Alice's declaration at ``s_a``, Charlie checks the forwarded copy at ``s_v``.
    """
    L = check_length(L)
    half = L // 2
    keys = rng.integers(0, 4, size=(n, 2, L), dtype=np.int8)
    elim_b = _measure(keys, ch_bob, rng)
    elim_c = _measure(keys, ch_charlie, rng)
    fwd_b = _forward_masks((n, 2), L, rng)
    fwd_c = _forward_masks((n, 2), L, rng)

    declared = keys[:, message, :, None]
    mis_b = (elim_b[:, message] == declared).any(-1)
    mis_c = (elim_c[:, message] == declared).any(-1)
    fb, fc = fwd_b[:, message], fwd_c[:, message]
    bob = _below((mis_b & ~fb).sum(1), half, s_a) & _below((mis_c & fc).sum(1), half, s_a)
    charlie = _below((mis_c & ~fc).sum(1), half, s_v) & _below((mis_b & fb).sum(1), half, s_v)
    return bob, charlie


def repudiation_counts(n: int, p_B: float, p_C: float, L: int, rng: np.random.Generator) -> np.ndarray:
    """Mismatch counts when Alice fixes rates ``p_B`` (states sent to Bob) and ``p_C`` (to Charlie).

    Every element carries a latent mismatch indicator that travels with it
    through symmetrisation. Returns an ``(n, 4)`` array of counts in Bob's
    direct, Bob's forwarded, Charlie's direct and Charlie's forwarded halves.
    """
    L = check_length(L)
    mis_b = rng.random((n, L)) < p_B
    mis_c = rng.random((n, L)) < p_C
    fwd_b = _forward_masks((n,), L, rng)
    fwd_c = _forward_masks((n,), L, rng)
    return np.stack([(mis_b & ~fwd_b).sum(1), (mis_c & fwd_c).sum(1),
                     (mis_c & ~fwd_c).sum(1), (mis_b & fwd_b).sum(1)], axis=1)


def repudiation_trials(n: int, p_B: float, p_C: float, s_a: float, s_v: float, L: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Success means Bob accepts both halves at ``s_a`` and Charlie rejects at least one at ``s_v``."""
    half = check_length(L) // 2
    k = repudiation_counts(n, p_B, p_C, L, rng)
    bob = _below(k[:, 0], half, s_a) & _below(k[:, 1], half, s_a)
    charlie = _below(k[:, 2], half, s_v) & _below(k[:, 3], half, s_v)
    return bob & ~charlie


def forging_trials(n: int, mismatch_prob: float, s_v: float, L: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Bob forges a forwarded message to Charlie.

    Bob chose what he forwarded to Charlie, so that half shows no mismatches;
    each element of Charlie's direct half mismatches with ``mismatch_prob``.
    """
    L = check_length(L)
    half = L // 2
    direct = (rng.random((n, half)) < mismatch_prob).sum(1)
    return _below(direct, half, s_v) & _below(np.zeros(n), half, s_v)


def repudiation_trial(p_B, p_C, s_a, s_v, L, rng) -> bool:
    if not s_v > s_a:
        raise ValueError("s_v must exceed s_a")
    return bool(repudiation_trials(1, p_B, p_C, s_a, s_v, L, rng)[0])


def forging_trial(mismatch_prob, s_v, L, rng) -> bool:
    return bool(forging_trials(1, mismatch_prob, s_v, L, rng)[0])
