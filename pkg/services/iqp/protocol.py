"""
The challenge-response game.

Alice builds an obfuscated quadratic-residue challenge and keeps a secret
direction s; Bob answers with samples (honestly by simulation, or with the
classical sampler); Alice accepts when enough filtered samples are
orthogonal to s. On challenges narrow enough to simulate, the acceptance
threshold and sample floor come from the exact filtered biases.
"""

import hashlib
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import rel_entr

from shared.schemas.protocol import DedupMode, ProverTag, VerifyParams, VerifyReport

from .cheat import cheat_sample, classical_bias_exact, classical_zero_probability
from .codes import qr_closed_form_biases, qr_code
from .config import IQPSettings, resolve_settings
from .errors import FormatError, InfeasibleSizeError, ParameterError
from .gf2core import BitMatrix, BitVector, col_echelon_reduce, inverse, parse_matrix, random_permutation, rank
from .simulator import SampleSet, bias_from_distribution, distribution_fourier, exact_bias, sample
from .xprogram import PI_OVER_8, Action, ConstantActionProgram, program_from_matrix, serialize, submatrix_ps

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

QUANTUM_BIAS = math.cos(math.pi / 8) ** 2
CLASSICAL_BIAS = 0.75
DEFAULT_THRESHOLD = (QUANTUM_BIAS + CLASSICAL_BIAS) / 2
DEFAULT_DELTA = 1e-3
# auto dedup applies keep-one once 2^n >= AUTO_DEDUP_RATIO * m_raw
AUTO_DEDUP_RATIO = 50
_EDGE = 1e-12


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class Challenge:
    """Published challenge: the matrix P, its action, and parameters."""

    P: BitMatrix
    theta: Action
    q: int
    challenge_id: str

    @property
    def program(self) -> ConstantActionProgram:
        return ConstantActionProgram(self.P, self.theta)


@dataclass(frozen=True)
class Secret:
    """Alice's hidden direction and the obfuscation row indices."""

    s: BitVector
    obf_rows: Tuple[int, ...]
    seed: int
    q: int


@dataclass(frozen=True)
class ProofTranscript:
    samples: SampleSet
    prover_tag: ProverTag = "external"


# ============================================================================
# Challenge construction
# ============================================================================

def _carry_secret(P: BitMatrix, s: BitVector) -> Tuple[BitMatrix, BitVector]:
    """Column-reduce P and map s so that every p·sᵀ is unchanged."""
    R, T = col_echelon_reduce(P)
    s_full = inverse(T).apply(s)
    return R, BitVector(s_full.value & ((1 << R.n) - 1), R.n)


def _challenge_id(P: BitMatrix, theta: Action, q: int) -> str:
    digest = hashlib.sha256(f"{q}:{theta}:{P}".encode()).hexdigest()
    return digest[:16]


def build_challenge(
    q: int,
    n_obf: Optional[int] = None,
    seed: int = 0,
    sort_rows: bool = True,
) -> Tuple[Challenge, Secret]:
    """
    Build an obfuscated challenge from the quadratic residue code of length q.

    Steps: generator plus an all-ones column; n_obf random nonzero rows with
    0 in that column; random row order; canonical column reduction carrying
    s; optional row sort followed by a second reduction.
    """
    n_obf = q if n_obf is None else n_obf
    if n_obf < 1:
        raise ParameterError(f"n_obf must be at least 1, got {n_obf}")
    rng = np.random.default_rng(seed)

    G = qr_code(q).generator
    base = G.append_column(BitVector((1 << q) - 1, q))
    n = base.n

    obf_rows = []
    while len(obf_rows) < n_obf:
        row = int.from_bytes(
            np.packbits(rng.integers(0, 2, size=n - 1, dtype=np.uint8), bitorder="little").tobytes(),
            "little",
        )
        if row:
            obf_rows.append(row)
    stacked = BitMatrix(base.rows + tuple(obf_rows), n)

    order = random_permutation(stacked.k, rng)
    shuffled = stacked.permute_rows(order)
    is_obf = [order[i] >= q for i in range(shuffled.k)]

    P, s = _carry_secret(shuffled, BitVector.unit(n - 1, n))
    if sort_rows:
        strings = P.to_strings()
        sorted_order = sorted(range(P.k), key=lambda i: strings[i])
        is_obf = [is_obf[i] for i in sorted_order]
        P, s = _carry_secret(P.permute_rows(sorted_order), s)

    challenge = Challenge(P, PI_OVER_8, q, _challenge_id(P, PI_OVER_8, q))
    secret = Secret(s, tuple(i for i, flag in enumerate(is_obf) if flag), seed, q)
    logger.info(
        f"Built challenge {challenge.challenge_id}: q={q}, {P.k}x{P.n}, "
        f"{len(secret.obf_rows)} obfuscation rows"
    )
    return challenge, secret


def check_secret(challenge: Challenge, secret: Secret) -> bool:
    """Every non-obfuscation row has p·sᵀ = 1 and every obfuscation row p·sᵀ = 0."""
    if secret.s.length != challenge.P.n:
        return False
    obf = set(secret.obf_rows)
    return all(
        challenge.P.row(i).dot(secret.s) == (0 if i in obf else 1)
        for i in range(challenge.P.k)
    )


def predicted_biases(
    challenge: Challenge,
    secret: Secret,
    settings: Optional[IQPSettings] = None,
) -> Tuple[float, float]:
    """
    (honest bias, classical-sampler bias) in the secret direction. The honest
    value is enumerated when P_s is within the rank cap, else closed form.
    """
    settings = resolve_settings(settings)
    Ps = submatrix_ps(challenge.P, secret.s)
    classical = classical_bias_exact(challenge.P, secret.s)
    if rank(Ps) <= settings.enumeration_max_rank:
        return exact_bias(challenge.program, secret.s, settings), classical
    quantum, _ = qr_closed_form_biases(challenge.q)
    return quantum, classical


# ============================================================================
# Provers
# ============================================================================

def honest_prove(
    challenge: Challenge,
    m: int,
    rng: np.random.Generator,
    settings: Optional[IQPSettings] = None,
) -> ProofTranscript:
    """Sample the published program at its action by exact simulation."""
    settings = resolve_settings(settings)
    n = challenge.P.n
    if n > settings.fourier_max_qubits:
        raise InfeasibleSizeError("n", n, settings.fourier_max_qubits,
                                  f"honest proving infeasible at this size: n={n} exceeds cap "
                                  f"{settings.fourier_max_qubits}")
    samples = sample(challenge.program, m, rng, settings=settings)
    logger.info(f"Honest prover produced {len(samples)} samples for {challenge.challenge_id}")
    return ProofTranscript(samples, "honest")


def cheat_prove(challenge: Challenge, m: int, rng: np.random.Generator) -> ProofTranscript:
    """Answer with the classical sampler; works at any size."""
    samples = cheat_sample(challenge.P, m, rng)
    logger.info(f"Classical prover produced {len(samples)} samples for {challenge.challenge_id}")
    return ProofTranscript(samples, "cheat")


# ============================================================================
# Verification
# ============================================================================

def default_params(delta: float = DEFAULT_DELTA, dedup: DedupMode = "auto") -> VerifyParams:
    """
    Threshold at the midpoint of the honest/classical gap and the Hoeffding
    sample floor ceil(ln(1/delta) / (2·(T - 3/4)²)), at least 1.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterError(f"confidence delta must lie in (0, 1), got {delta}")
    gap = DEFAULT_THRESHOLD - CLASSICAL_BIAS
    m_min = max(1, math.ceil(math.log(1.0 / delta) / (2.0 * gap * gap)))
    return VerifyParams(threshold=DEFAULT_THRESHOLD, m_min=m_min, delta=delta, dedup=dedup)


@dataclass(frozen=True)
class FilteredBiases:
    """Exact statistics of zero-filtered honest and classical samples."""

    honest: float
    classical: float
    honest_zero: float
    classical_zero: float
    honest_max_outcome: float


@lru_cache(maxsize=32)
def _exact_filtered_biases(P: BitMatrix, theta: Action, s: BitVector) -> Optional[FilteredBiases]:
    caps = IQPSettings(fourier_max_qubits=max(P.n, 1))
    dist = distribution_fourier(ConstantActionProgram(P, theta), caps)
    honest_zero = float(dist.probs[0])
    classical_zero = classical_zero_probability(P, caps)
    if honest_zero >= 1.0 - _EDGE or classical_zero >= 1.0 - _EDGE:
        return None
    return FilteredBiases(
        honest=(bias_from_distribution(dist, s) - honest_zero) / (1.0 - honest_zero),
        classical=(classical_bias_exact(P, s) - classical_zero) / (1.0 - classical_zero),
        honest_zero=honest_zero,
        classical_zero=classical_zero,
        honest_max_outcome=float(dist.probs[1:].max()),
    )


def filtered_biases(
    challenge: Challenge,
    secret: Secret,
    settings: Optional[IQPSettings] = None,
) -> Optional[FilteredBiases]:
    """
    P(X·sᵀ = 0 | X ≠ 0) for the honest prover and the same for the classical
    sampler, or None when n is above the calibration or Fourier cap.
    """
    settings = resolve_settings(settings)
    n = challenge.P.n
    if secret.s.length != n:
        raise FormatError(f"malformed secret: s has {secret.s.length} bits, expected {n}")
    cap = min(settings.calibration_max_qubits, settings.fourier_max_qubits)
    if n > cap:
        logger.debug(f"No exact calibration for {challenge.challenge_id}: n={n} exceeds {cap}")
        return None
    return _exact_filtered_biases(challenge.P, challenge.theta, secret.s)


def bernoulli_kl(t: float, p: float) -> float:
    """Relative entropy KL(Bernoulli(t) || Bernoulli(p))."""
    return float(rel_entr(t, p) + rel_entr(1.0 - t, 1.0 - p))


def calibrate_params(
    challenge: Challenge,
    secret: Secret,
    delta: float = DEFAULT_DELTA,
    dedup: DedupMode = "auto",
    settings: Optional[IQPSettings] = None,
) -> VerifyParams:
    """
    Test constants for this challenge from its exact filtered biases.

    The threshold T sits where KL(T || honest) = KL(T || classical), and
    m_min = ceil(ln(1/delta) / KL(T || honest)), so the Chernoff bound keeps
    both error probabilities below delta once m_min filtered samples are in.
    Wide challenges, and those where filtering leaves the honest bias no
    higher than the classical one, fall back to default_params.
    """
    fallback = default_params(delta, dedup)
    stats = filtered_biases(challenge, secret, settings)
    if stats is None:
        return fallback
    honest = min(stats.honest, 1.0 - _EDGE)
    classical = max(stats.classical, _EDGE)
    if honest <= classical:
        logger.warning(
            f"Filtered biases of {challenge.challenge_id} do not separate "
            f"(honest {stats.honest:.4f}, classical {stats.classical:.4f}); using default parameters"
        )
        return fallback.model_copy(update={"max_outcome_prob": stats.honest_max_outcome})

    threshold = float(brentq(lambda t: bernoulli_kl(t, honest) - bernoulli_kl(t, classical), classical, honest))
    rate = bernoulli_kl(threshold, honest)
    if rate <= 0.0:
        return fallback.model_copy(update={"max_outcome_prob": stats.honest_max_outcome})
    m_min = max(1, math.ceil(math.log(1.0 / delta) / rate))
    logger.debug(
        f"Calibrated {challenge.challenge_id}: honest {stats.honest:.4f}, classical "
        f"{stats.classical:.4f}, threshold {threshold:.4f}, m_min {m_min}"
    )
    return VerifyParams(
        threshold=threshold,
        m_min=m_min,
        delta=delta,
        dedup=dedup,
        calibrated=True,
        max_outcome_prob=stats.honest_max_outcome,
    )


def resolve_dedup(mode: DedupMode, n: int, m_raw: int) -> bool:
    """Whether duplicates are collapsed for a transcript of m_raw samples of width n."""
    if mode == "keep-one":
        return True
    if mode == "off":
        return False
    return (1 << n) >= AUTO_DEDUP_RATIO * max(m_raw, 1)


def replay_cap(m_raw: int, n: int, max_outcome_prob: float, delta: float) -> int:
    """
    Per-outcome multiplicity that an honest transcript exceeds with probability
    at most delta: m·p_max + sqrt(m·ln(2^n / delta) / 2), by Hoeffding with a
    union bound over all outcomes.
    """
    slack = math.sqrt(m_raw * (n * math.log(2.0) + math.log(1.0 / delta)) / 2.0)
    return max(1, math.ceil(m_raw * max_outcome_prob + slack))


def filter_samples(samples: SampleSet, dedup: bool, max_multiplicity: Optional[int] = None) -> SampleSet:
    """
    Drop all-zero samples, then keep only first occurrences (dedup) or at most
    max_multiplicity occurrences of each outcome.
    """
    limit = 1 if dedup else max_multiplicity
    kept = []
    seen: Counter = Counter()
    for x in samples:
        if x.is_zero():
            continue
        if limit is not None:
            if seen[x.value] >= limit:
                continue
            seen[x.value] += 1
        kept.append(x)
    return SampleSet(samples.n, tuple(kept))


def verify(
    challenge: Challenge,
    secret: Secret,
    transcript: ProofTranscript,
    params: Optional[VerifyParams] = None,
    settings: Optional[IQPSettings] = None,
) -> VerifyReport:
    """
    Filter the transcript and test its orthogonal fraction against the
    threshold. Without explicit params the test is calibrated to the challenge.
    """
    n = challenge.P.n
    if transcript.samples.n != n:
        raise FormatError(f"malformed transcript: samples have {transcript.samples.n} bits, expected {n}")
    if secret.s.length != n:
        raise FormatError(f"malformed secret: s has {secret.s.length} bits, expected {n}")
    params = params or calibrate_params(challenge, secret, settings=settings)

    m_raw = len(transcript.samples)
    dedup = resolve_dedup(params.dedup, n, m_raw)
    cap = None
    if params.dedup == "auto" and not dedup and params.max_outcome_prob is not None:
        cap = replay_cap(m_raw, n, params.max_outcome_prob, params.delta)
    filtered = filter_samples(transcript.samples, dedup, cap)
    bias = filtered.fraction_orthogonal(secret.s)

    if len(filtered) < params.m_min:
        decision = "inconclusive"
    elif bias >= params.threshold:
        decision = "accept"
    else:
        decision = "reject"
    logger.info(
        f"Verified {challenge.challenge_id}: {m_raw} raw, {len(filtered)} filtered, "
        f"bias {bias:.4f} vs {params.threshold:.4f} -> {decision}"
    )
    return VerifyReport(
        challenge_id=challenge.challenge_id,
        m_raw=m_raw,
        m_filtered=len(filtered),
        bias_observed=bias,
        threshold=params.threshold,
        m_min=params.m_min,
        dedup_applied=dedup,
        replay_cap=cap,
        calibrated=params.calibrated,
        decision=decision,
    )


# ============================================================================
# Files
# ============================================================================

def format_challenge(challenge: Challenge) -> str:
    return serialize(challenge.program, {"q": str(challenge.q), "challenge_id": challenge.challenge_id})


def write_challenge(challenge: Challenge, path: PathLike) -> None:
    Path(path).write_text(format_challenge(challenge))


def read_challenge(path: PathLike) -> Challenge:
    headers, P = parse_matrix(Path(path).read_text())
    program = program_from_matrix(headers, P)
    try:
        q = int(headers["q"])
    except (KeyError, ValueError) as e:
        raise FormatError("challenge file needs an integer '# q=' header") from e
    challenge_id = headers.get("challenge_id") or _challenge_id(P, program.theta, q)
    return Challenge(P, program.theta, q, challenge_id)


def format_secret(secret: Secret) -> str:
    return (
        f"# q={secret.q}\n"
        f"# seed={secret.seed:x}\n"
        f"{secret.s.to_string()}\n"
        f"{','.join(str(i) for i in secret.obf_rows)}\n"
    )


def write_secret(secret: Secret, path: PathLike) -> None:
    Path(path).write_text(format_secret(secret))


def parse_secret(text: str) -> Secret:
    headers = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, sep, value = line[1:].strip().partition("=")
            if not sep:
                raise FormatError(f"malformed header {line!r}")
            headers[key.strip()] = value.strip()
        else:
            body.append(line.strip())
    while body and not body[-1]:
        body.pop()
    if len(body) != 2 or not body[0]:
        raise FormatError("secret file needs an s line and an obfuscation index line")
    try:
        q = int(headers["q"])
        seed = int(headers["seed"], 16)
        obf = tuple(int(v) for v in body[1].split(",")) if body[1] else ()
    except (KeyError, ValueError) as e:
        raise FormatError(f"malformed secret file: {e}") from e
    return Secret(BitVector.from_string(body[0]), obf, seed, q)


def read_secret(path: PathLike) -> Secret:
    return parse_secret(Path(path).read_text())


def write_transcript(transcript: ProofTranscript, path: PathLike) -> None:
    Path(path).write_text(transcript.samples.to_text())


def read_transcript(path: PathLike, n: int) -> ProofTranscript:
    """Read one 0/1 sample per line; width n comes from the challenge."""
    return ProofTranscript(SampleSet.from_text(Path(path).read_text(), n), "external")
