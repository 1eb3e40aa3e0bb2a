"""Analysis commands: simulate, bias, entropy, reduce, experiment-entropy."""

import argparse
import logging
from pathlib import Path

import numpy as np

from shared.schemas.reports import (
    BiasRecord,
    EntropyExperimentRecord,
    EntropyRecord,
    ReduceRecord,
    SimulateRecord,
)

from ..cheat import classical_bias_exact
from ..config import IQPSettings
from ..errors import EXIT_ACCEPT, ParameterError
from ..gf2core import BitVector, rank
from ..reductions import (
    degree_statistics,
    format_graphprogram,
    format_znetwork,
    xprogram_to_graphprogram,
    xprogram_to_znetwork,
)
from ..simulator import (
    collision_entropy,
    collision_entropy_via_bias,
    distribution,
    exact_bias,
    write_distribution_binary,
    write_distribution_csv,
)
from ..xprogram import PI_OVER_8, ConstantActionProgram, parse, random_program, submatrix_ps

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    simulate = subparsers.add_parser("simulate", help="export the exact output distribution")
    simulate.add_argument("--program", required=True)
    simulate.add_argument("--backend", choices=["fourier", "pathsum"], default="fourier")
    simulate.add_argument("--format", choices=["bin", "csv"], default="bin")
    simulate.add_argument("--out", required=True)
    simulate.set_defaults(handler=handle_simulate)

    bias = subparsers.add_parser("bias", help="exact bias in one direction")
    bias.add_argument("--program", required=True)
    bias.add_argument("--s", required=True, help="direction as a 0/1 string")
    bias.set_defaults(handler=handle_bias)

    entropy = subparsers.add_parser("entropy", help="collision entropy of a program")
    entropy.add_argument("--program", required=True)
    entropy.set_defaults(handler=handle_entropy)

    reduce_cmd = subparsers.add_parser("reduce", help="rewrite a program as a Z-network or graph program")
    reduce_cmd.add_argument("--program", required=True)
    reduce_cmd.add_argument("--target", choices=["znet", "graph"], required=True)
    reduce_cmd.add_argument("--out", required=True)
    reduce_cmd.set_defaults(handler=handle_reduce)

    experiment = subparsers.add_parser("experiment-entropy", help="collision entropy of random pi/8 programs")
    experiment.add_argument("--n", type=int, required=True)
    experiment.add_argument("--k", type=int, required=True)
    experiment.add_argument("--trials", type=int, required=True)
    experiment.add_argument("--seed", type=int, default=0)
    experiment.set_defaults(handler=handle_experiment_entropy)


def _load_program(path: str) -> ConstantActionProgram:
    return parse(Path(path).read_text())


def handle_simulate(args: argparse.Namespace, settings: IQPSettings) -> int:
    program = _load_program(args.program)
    dist = distribution(program, args.backend, settings)
    if args.format == "csv":
        write_distribution_csv(dist, args.out)
    else:
        write_distribution_binary(dist, args.out)
    record = SimulateRecord(
        n=dist.n,
        backend=args.backend,
        collision_entropy=collision_entropy(dist),
        max_probability=float(dist.probs.max()),
    )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_bias(args: argparse.Namespace, settings: IQPSettings) -> int:
    program = _load_program(args.program)
    s = BitVector.from_string(args.s)
    if s.length != program.n:
        raise ParameterError(f"--s has {s.length} bits, program has {program.n} columns")
    Ps = submatrix_ps(program.P, s)
    record = BiasRecord(
        s=s.to_string(),
        n_s=Ps.k,
        code_rank=rank(Ps),
        quantum_bias=exact_bias(program, s, settings),
        classical_bias=classical_bias_exact(program.P, s),
    )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_entropy(args: argparse.Namespace, settings: IQPSettings) -> int:
    program = _load_program(args.program)
    dist = distribution(program, "fourier", settings)
    record = EntropyRecord(
        n=dist.n,
        collision_entropy=collision_entropy(dist),
        collision_entropy_via_bias=collision_entropy_via_bias(dist),
    )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_reduce(args: argparse.Namespace, settings: IQPSettings) -> int:
    program = _load_program(args.program)
    if args.target == "znet":
        net = xprogram_to_znetwork(program)
        Path(args.out).write_text(format_znetwork(net))
        record = ReduceRecord(target="znet", qubits=net.n, gates=len(net.gates))
    else:
        gp, _ = xprogram_to_graphprogram(program)
        Path(args.out).write_text(format_graphprogram(gp))
        stats = degree_statistics(gp)
        record = ReduceRecord(
            target="graph",
            qubits=gp.n_vertices,
            edges=len(gp.edges),
            primal_degree_max=stats.primal_max,
            ancilla_degree_max=stats.ancilla_max,
            ancilla_degree_mean=stats.ancilla_mean,
        )
    print(record.to_record())
    return EXIT_ACCEPT


def handle_experiment_entropy(args: argparse.Namespace, settings: IQPSettings) -> int:
    """Measure collision entropy over random pi/8 programs (reporting only)."""
    if args.n < 1 or args.k < 0 or args.trials < 1:
        raise ParameterError("need n >= 1, k >= 0 and trials >= 1")
    rng = np.random.default_rng(args.seed)
    entropies = []
    for _ in range(args.trials):
        program = random_program(args.n, args.k, PI_OVER_8, rng)
        entropies.append(collision_entropy(distribution(program, "fourier", settings)))
    values = np.array(entropies)
    logger.info(f"Entropy experiment: n={args.n}, k={args.k}, {args.trials} trials")
    record = EntropyExperimentRecord(
        n=args.n,
        k=args.k,
        trials=args.trials,
        mean_entropy=float(values.mean()),
        mean_gap=float(args.n - values.mean()),
        min_entropy=float(values.min()),
        max_entropy=float(values.max()),
    )
    print(record.to_record())
    return EXIT_ACCEPT
