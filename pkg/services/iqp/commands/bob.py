"""Prover commands: `prove` (honest simulation) and `cheat` (classical sampler)."""

import argparse

import numpy as np

from shared.schemas.reports import ProveRecord

from ..config import IQPSettings
from ..errors import EXIT_ACCEPT, ParameterError
from ..protocol import cheat_prove, honest_prove, read_challenge, write_transcript


def register(subparsers) -> None:
    for name, help_text, handler in (
        ("prove", "sample the challenge by exact simulation", handle_prove),
        ("cheat", "answer the challenge with the classical sampler", handle_cheat),
    ):
        cmd = subparsers.add_parser(name, help=help_text)
        cmd.add_argument("--challenge", required=True)
        cmd.add_argument("--m", type=int, required=True, help="number of samples")
        cmd.add_argument("--seed", type=int, required=True)
        cmd.add_argument("--out", required=True)
        cmd.set_defaults(handler=handler)


def _answer(args: argparse.Namespace, settings: IQPSettings, honest: bool) -> int:
    if args.m < 0:
        raise ParameterError("--m must be non-negative")
    challenge = read_challenge(args.challenge)
    rng = np.random.default_rng(args.seed)
    if honest:
        transcript = honest_prove(challenge, args.m, rng, settings)
    else:
        transcript = cheat_prove(challenge, args.m, rng)
    write_transcript(transcript, args.out)
    record = ProveRecord(
        command=args.command,
        challenge_id=challenge.challenge_id,
        prover=transcript.prover_tag,
        m=len(transcript.samples),
        columns=challenge.P.n,
    )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_prove(args: argparse.Namespace, settings: IQPSettings) -> int:
    return _answer(args, settings, honest=True)


def handle_cheat(args: argparse.Namespace, settings: IQPSettings) -> int:
    return _answer(args, settings, honest=False)
