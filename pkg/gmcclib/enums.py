""" Enums used for gmcclib"""

from enum import Enum, auto


class Rule(Enum):
    """Adaptive update rules
    GMCC - generalized maximum correntropy (GGD kernel)
    LMP - least mean p-power (SA p=1, LMS p=2, LMF p=4)
    """

    GMCC = auto()
    LMP = auto()


class NoiseKind(Enum):
    """Noise model variants, named as in the JSON configuration"""

    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    LAPLACE = "laplace"
    BINARY = "binary"
    MIXTURE = "mixture"


class Subcommand(Enum):
    """CLI subcommands"""

    KERNEL_EVAL = "kernel-eval"
    THEORY = "theory"
    POD = "pod"
    EMSE = "emse"
    CONVERGE = "converge"
