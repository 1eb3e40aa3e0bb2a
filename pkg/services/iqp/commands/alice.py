"""Challenger commands: `gen` and `verify`."""

import argparse
import logging

from shared.schemas.reports import GenRecord

from ..config import IQPSettings
from ..errors import EXIT_ACCEPT, EXIT_INCONCLUSIVE, EXIT_REJECT
from ..protocol import (
    build_challenge,
    calibrate_params,
    read_challenge,
    read_secret,
    read_transcript,
    verify,
    write_challenge,
    write_secret,
)

logger = logging.getLogger(__name__)

DECISION_EXIT_CODES = {
    "accept": EXIT_ACCEPT,
    "reject": EXIT_REJECT,
    "inconclusive": EXIT_INCONCLUSIVE,
}


def register(subparsers) -> None:
    gen = subparsers.add_parser("gen", help="build an obfuscated challenge and its secret")
    gen.add_argument("--q", type=int, required=True, help="prime q with 8 | q+1")
    gen.add_argument("--obf", type=int, default=None, help="obfuscation rows (default q)")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--no-sort", action="store_true", help="skip the final row sort")
    gen.add_argument("--out-challenge", required=True)
    gen.add_argument("--out-secret", required=True)
    gen.set_defaults(handler=handle_gen)

    verify_cmd = subparsers.add_parser("verify", help="test a transcript against the secret")
    verify_cmd.add_argument("--challenge", required=True)
    verify_cmd.add_argument("--secret", required=True)
    verify_cmd.add_argument("--transcript", required=True)
    verify_cmd.add_argument("--delta", type=float, default=1e-3, help="error probability bound")
    verify_cmd.add_argument("--dedup", choices=["auto", "keep-one", "off"], default="auto")
    verify_cmd.set_defaults(handler=handle_verify)


def handle_gen(args: argparse.Namespace, settings: IQPSettings) -> int:
    challenge, secret = build_challenge(args.q, args.obf, args.seed, sort_rows=not args.no_sort)
    write_challenge(challenge, args.out_challenge)
    write_secret(secret, args.out_secret)
    record = GenRecord(
        challenge_id=challenge.challenge_id,
        q=challenge.q,
        rows=challenge.P.k,
        columns=challenge.P.n,
        obfuscation_rows=len(secret.obf_rows),
    )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_verify(args: argparse.Namespace, settings: IQPSettings) -> int:
    challenge = read_challenge(args.challenge)
    secret = read_secret(args.secret)
    transcript = read_transcript(args.transcript, challenge.P.n)
    params = calibrate_params(challenge, secret, args.delta, args.dedup, settings)
    report = verify(challenge, secret, transcript, params, settings)
    print(report.to_record())
    return DECISION_EXIT_CODES[report.decision]
