from .gf2core import BitMatrix, BitVector
from .xprogram import Action, ConstantActionProgram, XProgram
from .simulator import OutputDistribution, SampleSet, distribution, exact_bias, sample
from .protocol import Challenge, ProofTranscript, Secret, build_challenge, verify
from .errors import FormatError, InfeasibleSizeError, IQPError, ParameterError

__all__ = [
    "BitMatrix",
    "BitVector",
    "Action",
    "ConstantActionProgram",
    "XProgram",
    "OutputDistribution",
    "SampleSet",
    "distribution",
    "exact_bias",
    "sample",
    "Challenge",
    "ProofTranscript",
    "Secret",
    "build_challenge",
    "verify",
    "FormatError",
    "InfeasibleSizeError",
    "IQPError",
    "ParameterError",
]
