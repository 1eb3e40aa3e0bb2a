"""
Tests for the challenge-response protocol.

Tests cover:
- challenge construction and the carried secret at every desk-scale q
- exact honest and classical biases of pure and obfuscated challenges
- default and calibrated verification parameters, deduplication, replay caps
- completeness (honest prover) and soundness (classical prover)
- anti-replay filtering
- challenge, secret and transcript files
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from services.iqp.cheat import cheat_sample, classical_bias_exact
from services.iqp.codes import LinearCode, qr_code, weight_distribution
from services.iqp.config import IQPSettings
from services.iqp.errors import FormatError, InfeasibleSizeError, ParameterError
from services.iqp.gf2core import BitVector, col_echelon_reduce
from services.iqp.protocol import (
    CLASSICAL_BIAS,
    DEFAULT_THRESHOLD,
    QUANTUM_BIAS,
    ProofTranscript,
    Secret,
    bernoulli_kl,
    build_challenge,
    calibrate_params,
    cheat_prove,
    check_secret,
    default_params,
    filter_samples,
    filtered_biases,
    honest_prove,
    parse_secret,
    predicted_biases,
    read_challenge,
    read_secret,
    read_transcript,
    replay_cap,
    resolve_dedup,
    verify,
    write_challenge,
    write_secret,
    write_transcript,
)
from services.iqp.simulator import SampleSet, bias_from_distribution, distribution_fourier, exact_bias
from services.iqp.xprogram import PI_OVER_8, ConstantActionProgram, submatrix_ps
from shared.schemas.protocol import VerifyParams


def create_repeated_transcript(challenge, secret, count: int) -> ProofTranscript:
    """A transcript that replays one nonzero sample orthogonal to s."""
    n = challenge.P.n
    x = next(
        BitVector(v, n) for v in range(1, 1 << n) if BitVector(v, n).dot(secret.s) == 0
    )
    return ProofTranscript(SampleSet(n, (x,) * count))


def create_pure_qr_program(q: int):
    """QR generator with an all-ones column; s picks out that column."""
    base = qr_code(q).generator.append_column(BitVector((1 << q) - 1, q))
    return ConstantActionProgram(base, PI_OVER_8), BitVector.unit(base.n - 1, base.n)


# ============================================================================
# Challenge Construction
# ============================================================================

class TestBuildChallenge:
    """Tests for challenge construction at q = 7."""

    def test_shape(self):
        challenge, secret = build_challenge(7, seed=1)
        assert challenge.P.k == 14
        assert challenge.P.n <= 5
        assert challenge.theta == PI_OVER_8
        assert len(secret.obf_rows) == 7

    def test_secret_is_consistent(self):
        challenge, secret = build_challenge(7, seed=2)
        assert check_secret(challenge, secret)

    def test_secret_rows_span_the_q7_code(self):
        challenge, secret = build_challenge(7, seed=3)
        Ps = submatrix_ps(challenge.P, secret.s)
        assert Ps.k == 7
        assert weight_distribution(LinearCode.from_generator(Ps)).counts == (1, 0, 0, 7, 7, 0, 0, 1)

    def test_matrix_is_column_reduced(self):
        challenge, _ = build_challenge(7, seed=4)
        R, _ = col_echelon_reduce(challenge.P)
        assert R == challenge.P

    def test_deterministic_given_seed(self):
        a, sa = build_challenge(7, seed=5)
        b, sb = build_challenge(7, seed=5)
        assert a == b
        assert sa == sb

    def test_unsorted_rows_still_consistent(self):
        challenge, secret = build_challenge(7, seed=6, sort_rows=False)
        assert check_secret(challenge, secret)

    def test_custom_obfuscation_count(self):
        challenge, secret = build_challenge(7, n_obf=3, seed=7)
        assert challenge.P.k == 10
        assert len(secret.obf_rows) == 3

    def test_wrong_secret_detected(self):
        challenge, secret = build_challenge(7, seed=8)
        flipped = Secret(secret.s ^ BitVector.unit(0, secret.s.length), secret.obf_rows, 8, 7)
        assert not check_secret(challenge, flipped)

    @pytest.mark.parametrize("q", [5, 11])
    def test_invalid_q(self, q):
        with pytest.raises(ParameterError):
            build_challenge(q)

    def test_invalid_obfuscation_count(self):
        with pytest.raises(ParameterError):
            build_challenge(7, n_obf=0)

    def test_predicted_biases_q7(self):
        challenge, secret = build_challenge(7, seed=9)
        honest, classical = predicted_biases(challenge, secret)
        assert honest == pytest.approx(math.cos(math.pi / 8) ** 2, abs=1e-12)
        assert classical == 0.75


class TestChallengeBiases:
    """Exact biases and code recovery for every desk-scale q."""

    @pytest.mark.parametrize("q", [7, 23, 31])
    def test_pure_program(self, q):
        prog, s = create_pure_qr_program(q)
        assert exact_bias(prog, s) == pytest.approx(QUANTUM_BIAS, abs=1e-9)
        assert classical_bias_exact(prog.P, s) == CLASSICAL_BIAS

    @pytest.mark.parametrize("q", [7, 23, 31])
    def test_obfuscated_challenges(self, q):
        expected_counts = weight_distribution(qr_code(q)).counts
        for seed in range(10):
            challenge, secret = build_challenge(q, seed=seed)
            assert check_secret(challenge, secret)
            assert exact_bias(challenge.program, secret.s) == pytest.approx(QUANTUM_BIAS, abs=1e-9)
            assert classical_bias_exact(challenge.P, secret.s) == CLASSICAL_BIAS
            Ps = submatrix_ps(challenge.P, secret.s)
            assert weight_distribution(LinearCode.from_generator(Ps)).counts == expected_counts

    def test_classical_sampler_on_challenge(self):
        challenge, secret = build_challenge(23, seed=0)
        samples = cheat_sample(challenge.P, 40000, np.random.default_rng(0))
        assert samples.fraction_orthogonal(secret.s) == pytest.approx(CLASSICAL_BIAS, abs=0.01)


# ============================================================================
# Parameters and Filtering
# ============================================================================

class TestDefaultParams:
    """Tests for the threshold and the sample floor."""

    def test_threshold_is_midpoint(self):
        params = default_params()
        assert params.threshold == pytest.approx(0.8017766953, abs=1e-10)
        assert DEFAULT_THRESHOLD == pytest.approx((QUANTUM_BIAS + CLASSICAL_BIAS) / 2)
        assert params.calibrated is False

    @pytest.mark.parametrize("delta,expected", [(1e-3, 1289), (0.5, 130)])
    def test_sample_floor(self, delta, expected):
        assert default_params(delta).m_min == expected

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 2.0])
    def test_invalid_delta(self, delta):
        with pytest.raises(ParameterError):
            default_params(delta)

    def test_schema_rejects_zero_floor(self):
        with pytest.raises(ValidationError):
            VerifyParams(threshold=0.8, m_min=0, delta=0.1)


class TestCalibration:
    """Tests for thresholds derived from the exact filtered biases."""

    def test_filtered_honest_bias_matches_distribution(self):
        challenge, secret = build_challenge(7, seed=10)
        stats = filtered_biases(challenge, secret)
        dist = distribution_fourier(challenge.program)
        p0 = float(dist.probs[0])
        assert stats.honest_zero == pytest.approx(p0, abs=1e-12)
        assert stats.honest == pytest.approx((bias_from_distribution(dist, secret.s) - p0) / (1 - p0), abs=1e-12)
        assert stats.honest_max_outcome == pytest.approx(float(dist.probs[1:].max()), abs=1e-12)

    def test_filtered_classical_bias_matches_sampler(self):
        challenge, secret = build_challenge(7, seed=11)
        stats = filtered_biases(challenge, secret)
        samples = cheat_sample(challenge.P, 40000, np.random.default_rng(11))
        zero_fraction = sum(x.is_zero() for x in samples) / len(samples)
        assert zero_fraction == pytest.approx(stats.classical_zero, abs=0.01)
        kept = filter_samples(samples, dedup=False)
        assert kept.fraction_orthogonal(secret.s) == pytest.approx(stats.classical, abs=0.01)

    def test_threshold_balances_error_exponents(self):
        for seed in range(10):
            challenge, secret = build_challenge(7, seed=seed)
            params = calibrate_params(challenge, secret)
            if not params.calibrated:
                continue
            stats = filtered_biases(challenge, secret)
            assert stats.classical < params.threshold < stats.honest
            rate = bernoulli_kl(params.threshold, stats.honest)
            assert rate == pytest.approx(bernoulli_kl(params.threshold, stats.classical), rel=1e-6)
            assert params.m_min == math.ceil(math.log(1e3) / rate)

    def test_bernoulli_kl(self):
        assert bernoulli_kl(0.3, 0.3) == 0.0
        assert bernoulli_kl(0.8, 0.75) > 0.0
        assert bernoulli_kl(0.8, 0.75) != bernoulli_kl(0.75, 0.8)

    def test_wide_challenge_uses_defaults(self):
        challenge, secret = build_challenge(7, seed=12)
        params = calibrate_params(challenge, secret, settings=IQPSettings(calibration_max_qubits=2))
        assert params == default_params()
        assert filtered_biases(challenge, secret, IQPSettings(calibration_max_qubits=2)) is None

    def test_invalid_delta(self):
        challenge, secret = build_challenge(7, seed=12)
        with pytest.raises(ParameterError):
            calibrate_params(challenge, secret, delta=1.0)

    def test_secret_width_checked(self):
        challenge, secret = build_challenge(7, seed=12)
        short = Secret(BitVector.zeros(challenge.P.n - 1), secret.obf_rows, 12, 7)
        with pytest.raises(FormatError):
            calibrate_params(challenge, short)


class TestFiltering:
    """Tests for zero removal, deduplication and replay caps."""

    def test_zeros_always_removed(self):
        samples = SampleSet.from_values(3, [0, 1, 0, 2, 1])
        assert [x.value for x in filter_samples(samples, dedup=False)] == [1, 2, 1]

    def test_keep_one(self):
        samples = SampleSet.from_values(3, [0, 1, 0, 2, 1, 2, 4])
        assert [x.value for x in filter_samples(samples, dedup=True)] == [1, 2, 4]

    def test_multiplicity_cap(self):
        samples = SampleSet.from_values(3, [1, 1, 0, 1, 2, 1, 2, 2, 2])
        assert [x.value for x in filter_samples(samples, dedup=False, max_multiplicity=2)] == [1, 1, 2, 2]

    def test_resolve_dedup(self):
        assert resolve_dedup("keep-one", 3, 1000)
        assert not resolve_dedup("off", 30, 10)
        assert not resolve_dedup("auto", 5, 10000)
        assert resolve_dedup("auto", 20, 100)

    def test_replay_cap(self):
        slack = math.sqrt(2000 * (13 * math.log(2) + math.log(1e3)) / 2)
        assert replay_cap(2000, 13, 0.05, 1e-3) == math.ceil(100 + slack)
        assert replay_cap(0, 5, 0.5, 1e-3) == 1


# ============================================================================
# Completeness and Soundness
# ============================================================================

class TestVerifyQ7:
    """End-to-end decisions at q = 7."""

    def test_honest_prover_accepted(self):
        challenge, secret = build_challenge(7, seed=10)
        transcript = honest_prove(challenge, 10000, np.random.default_rng(10))
        report = verify(challenge, secret, transcript)
        assert report.decision == "accept"
        assert report.dedup_applied is False
        assert report.calibrated is True
        assert report.bias_observed == pytest.approx(0.834, abs=0.02)

    def test_classical_prover_not_accepted(self):
        challenge, secret = build_challenge(7, seed=11)
        transcript = cheat_prove(challenge, 5000, np.random.default_rng(11))
        assert verify(challenge, secret, transcript).decision != "accept"

    def test_many_challenges_at_m2000(self):
        calibrated = 0
        for seed in range(20):
            challenge, secret = build_challenge(7, seed=seed)
            params = calibrate_params(challenge, secret)
            if not params.calibrated:
                continue
            calibrated += 1
            rng = np.random.default_rng(100 + seed)
            honest = verify(challenge, secret, honest_prove(challenge, 2000, rng), params)
            cheat = verify(challenge, secret, cheat_prove(challenge, 2000, rng), params)
            if honest.m_filtered >= honest.m_min:
                assert honest.decision == "accept"
            else:
                assert honest.decision == "inconclusive"
            assert cheat.decision != "accept"
        assert calibrated > 0

    def test_too_few_samples_inconclusive(self):
        challenge, secret = build_challenge(7, seed=12)
        transcript = honest_prove(challenge, 50, np.random.default_rng(12))
        report = verify(challenge, secret, transcript)
        assert report.decision == "inconclusive"
        assert report.m_raw == 50

    def test_empty_transcript_inconclusive(self):
        challenge, secret = build_challenge(7, seed=13)
        report = verify(challenge, secret, ProofTranscript(SampleSet(challenge.P.n)))
        assert report.decision == "inconclusive"
        assert report.bias_observed == 0.0

    def test_width_mismatch(self):
        challenge, secret = build_challenge(7, seed=14)
        transcript = ProofTranscript(SampleSet.from_values(challenge.P.n + 1, [1, 2]))
        with pytest.raises(FormatError):
            verify(challenge, secret, transcript)

    def test_honest_sampling_cap(self):
        challenge, _ = build_challenge(7, seed=15)
        with pytest.raises(InfeasibleSizeError):
            honest_prove(challenge, 10, np.random.default_rng(0), IQPSettings(fourier_max_qubits=2))

    def test_honest_run_deterministic_given_seed(self):
        challenge, secret = build_challenge(7, seed=16)
        first = honest_prove(challenge, 500, np.random.default_rng(16))
        second = honest_prove(challenge, 500, np.random.default_rng(16))
        assert first.samples == second.samples
        assert verify(challenge, secret, first) == verify(challenge, secret, second)


class TestVerifyLarger:
    """Soundness, completeness and filtering at q = 23 and q = 31."""

    def test_statistical_decisions_over_many_runs(self):
        honest_accepts = 0
        cheat_accepts = 0
        for seed in range(10):
            challenge, secret = build_challenge(23, seed=20 + seed)
            params = calibrate_params(challenge, secret)
            assert params.calibrated is True
            rng = np.random.default_rng(20 + seed)
            for _ in range(10):
                honest = verify(challenge, secret, honest_prove(challenge, 2000, rng), params)
                cheat = verify(challenge, secret, cheat_prove(challenge, 2000, rng), params)
                honest_accepts += honest.decision == "accept"
                cheat_accepts += cheat.decision == "accept"
        assert honest_accepts >= 99
        assert cheat_accepts <= 1

    def test_honest_fraction_matches_filtered_distribution(self):
        challenge, secret = build_challenge(23, seed=21)
        dist = distribution_fourier(challenge.program)
        p0 = float(dist.probs[0])
        expected = (bias_from_distribution(dist, secret.s) - p0) / (1.0 - p0)
        assert filtered_biases(challenge, secret).honest == pytest.approx(expected, abs=1e-12)
        transcript = honest_prove(challenge, 4000, np.random.default_rng(21))
        report = verify(challenge, secret, transcript)
        assert report.bias_observed == pytest.approx(expected, abs=0.03)
        assert report.m_filtered == sum(not x.is_zero() for x in transcript.samples)

    def test_replay_capped_under_defaults_at_q23(self):
        challenge, secret = build_challenge(23, seed=3)
        report = verify(challenge, secret, create_repeated_transcript(challenge, secret, 2000))
        assert report.dedup_applied is False
        assert report.replay_cap is not None
        assert report.m_filtered == report.replay_cap < 2000
        assert report.decision == "inconclusive"

    def test_keep_one_at_q31(self):
        challenge, secret = build_challenge(31, seed=22)
        transcript = honest_prove(challenge, 1000, np.random.default_rng(22))
        report = verify(challenge, secret, transcript, default_params(dedup="keep-one"))
        assert report.dedup_applied is True
        assert report.replay_cap is None
        assert report.m_filtered <= report.m_raw

    def test_auto_dedup_engages_at_q31(self):
        challenge, secret = build_challenge(31, seed=23)
        transcript = create_repeated_transcript(challenge, secret, 1000)
        report = verify(challenge, secret, transcript)
        assert report.dedup_applied is True
        assert report.m_filtered == 1
        assert report.decision == "inconclusive"

    @pytest.mark.slow
    def test_q487_cheat_rejected_and_honest_infeasible(self):
        challenge, secret = build_challenge(487, seed=24)
        assert check_secret(challenge, secret)
        assert predicted_biases(challenge, secret) == pytest.approx((QUANTUM_BIAS, CLASSICAL_BIAS))
        with pytest.raises(InfeasibleSizeError):
            honest_prove(challenge, 10, np.random.default_rng(24))
        report = verify(challenge, secret, cheat_prove(challenge, 2000, np.random.default_rng(24)))
        assert report.calibrated is False
        assert report.decision == "reject"


class TestAntiReplay:
    """A replayed orthogonal sample passes only with every screen off."""

    def test_replay_accepted_without_dedup(self):
        challenge, secret = build_challenge(7, seed=30)
        transcript = create_repeated_transcript(challenge, secret, 2000)
        report = verify(challenge, secret, transcript, default_params(dedup="off"))
        assert report.replay_cap is None
        assert report.decision == "accept"

    def test_replay_caught_by_keep_one(self):
        challenge, secret = build_challenge(7, seed=30)
        transcript = create_repeated_transcript(challenge, secret, 2000)
        report = verify(challenge, secret, transcript, default_params(dedup="keep-one"))
        assert report.m_filtered == 1
        assert report.decision == "inconclusive"


# ============================================================================
# Files
# ============================================================================

class TestFiles:
    """Tests for challenge, secret and transcript files."""

    def test_challenge_roundtrip(self, tmp_path):
        challenge, _ = build_challenge(7, seed=40)
        path = tmp_path / "challenge.txt"
        write_challenge(challenge, path)
        text = path.read_text()
        assert text.startswith("# theta=1/8\n# q=7\n")
        assert read_challenge(path) == challenge

    def test_secret_roundtrip(self, tmp_path):
        _, secret = build_challenge(7, seed=41)
        path = tmp_path / "secret.txt"
        write_secret(secret, path)
        assert read_secret(path) == secret

    def test_secret_seed_is_hex(self):
        secret = parse_secret("# q=7\n# seed=ff\n10110\n1,3\n")
        assert secret.seed == 255
        assert secret.obf_rows == (1, 3)

    def test_malformed_secret(self):
        with pytest.raises(FormatError):
            parse_secret("# q=7\n# seed=zz\n10110\n1,3\n")
        with pytest.raises(FormatError):
            parse_secret("# q=7\n# seed=1\n10110\n")

    def test_transcript_roundtrip(self, tmp_path):
        challenge, _ = build_challenge(7, seed=42)
        transcript = cheat_prove(challenge, 30, np.random.default_rng(42))
        path = tmp_path / "samples.txt"
        write_transcript(transcript, path)
        assert read_transcript(path, challenge.P.n).samples == transcript.samples

    def test_transcript_wrong_width(self, tmp_path):
        path = tmp_path / "samples.txt"
        path.write_text("101\n11\n")
        with pytest.raises(FormatError):
            read_transcript(path, 3)
