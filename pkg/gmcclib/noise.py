""" Noise and input distributions: seeded samplers and densities."""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Tuple

import numpy as np
from scipy import special

from gmcclib.enums import NoiseKind
from gmcclib.exceptions import DomainError, UnsupportedDensityError

logger = logging.getLogger(__name__)

# densities below this are treated as outside the support
DENSITY_CUTOFF = 1e-14
_MASK64 = (1 << 64) - 1
_TWO53 = float(1 << 53)


@dataclass(frozen=True)
class SeededStream:
    """
    Reproducible random stream keyed by (base_seed, stream_index).
    Uses the counter-based Philox generator; each stream index (and channel
    within it) gets its own key through SeedSequence spawn keys, so streams do
    not depend on the order in which they are consumed.
    """

    base_seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise DomainError(f"Stream index must be >= 0, got {self.stream_index}")

    def generator(self, channel: int = 0) -> np.random.Generator:
        """
        :param channel: independent sub-stream within this stream (0 = input, 1 = noise in the harness)
        :return: numpy Generator backed by Philox
        """
        seq = np.random.SeedSequence(
            int(self.base_seed) & _MASK64, spawn_key=(int(self.stream_index), int(channel))
        )
        return np.random.Generator(np.random.Philox(seq))


def _open_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """n uniforms strictly inside (0, 1), one 53-bit draw each"""
    return (rng.integers(0, 1 << 53, size=n, dtype=np.int64) + 0.5) / _TWO53


class NoiseModel(ABC):
    """
    Distribution of a scalar noise (or input) process
    """

    kind: NoiseKind

    @abstractmethod
    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """
        n i.i.d. draws; consumes a fixed number of generator outputs per sample
        :param n: number of samples
        :param rng: generator
        :return: array of n samples
        """

    @abstractmethod
    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        """Probability density (continuous models only)"""

    @abstractmethod
    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        """Interval outside which the density is below cutoff"""

    @abstractmethod
    def scaled(self, factor: float) -> "NoiseModel":
        """Model of factor * v (variance multiplied by factor**2)"""

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        pass

    @property
    @abstractmethod
    def mean(self) -> float:
        pass

    @property
    @abstractmethod
    def variance(self) -> float:
        pass

    @property
    def is_discrete(self) -> bool:
        return False

    @property
    def symmetric(self) -> bool:
        """True when the distribution is symmetric about zero"""
        return False

    def with_variance(self, variance: float) -> "NoiseModel":
        """Same family rescaled to the given variance"""
        if variance <= 0 or self.variance <= 0:
            raise DomainError(f"Cannot rescale to variance {variance}")
        return self.scaled(math.sqrt(variance / self.variance))


def _check_factor(factor: float) -> float:
    if not factor > 0:
        raise DomainError(f"Scale factor must be positive, got {factor}")
    return float(factor)


@dataclass(frozen=True)
class GaussianNoise(NoiseModel):
    """Normal distribution, sampled through the inverse CDF"""

    mu: float = 0.0
    var: float = 1.0
    kind = NoiseKind.GAUSSIAN

    def __post_init__(self) -> None:
        if not self.var > 0:
            raise DomainError(f"Gaussian variance must be positive, got {self.var}")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.mu + math.sqrt(self.var) * special.ndtri(_open_uniform(rng, n))

    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        z = (np.asarray(v, dtype=float) - self.mu) ** 2 / (2.0 * self.var)
        return _scalar(np.exp(-z) / math.sqrt(2.0 * math.pi * self.var))

    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        peak = 1.0 / math.sqrt(2.0 * math.pi * self.var)
        half = math.sqrt(2.0 * self.var * math.log(peak / cutoff)) if peak > cutoff else 0.0
        return self.mu - half, self.mu + half

    def scaled(self, factor: float) -> "GaussianNoise":
        factor = _check_factor(factor)
        return GaussianNoise(self.mu * factor, self.var * factor**2)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mean": self.mu, "variance": self.var}

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.var

    @property
    def symmetric(self) -> bool:
        return self.mu == 0


@dataclass(frozen=True)
class UniformNoise(NoiseModel):
    """Uniform distribution over [lo, hi]"""

    lo: float
    hi: float
    kind = NoiseKind.UNIFORM

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise DomainError(f"Uniform bounds must satisfy lo < hi, got [{self.lo}, {self.hi}]")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.lo + (self.hi - self.lo) * rng.random(n)

    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        v = np.asarray(v, dtype=float)
        inside = (v >= self.lo) & (v <= self.hi)
        return _scalar(np.where(inside, 1.0 / (self.hi - self.lo), 0.0))

    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        return self.lo, self.hi

    def scaled(self, factor: float) -> "UniformNoise":
        factor = _check_factor(factor)
        return UniformNoise(self.lo * factor, self.hi * factor)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "lo": self.lo, "hi": self.hi}

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def variance(self) -> float:
        return (self.hi - self.lo) ** 2 / 12.0

    @property
    def symmetric(self) -> bool:
        return self.lo == -self.hi


@dataclass(frozen=True)
class LaplaceNoise(NoiseModel):
    """Laplace distribution parameterized by its variance, scale b = sqrt(variance/2)"""

    mu: float = 0.0
    var: float = 1.0
    kind = NoiseKind.LAPLACE

    def __post_init__(self) -> None:
        if not self.var > 0:
            raise DomainError(f"Laplace variance must be positive, got {self.var}")

    @property
    def scale(self) -> float:
        return math.sqrt(self.var / 2.0)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = _open_uniform(rng, n) - 0.5
        return self.mu - self.scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))

    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        b = self.scale
        return _scalar(np.exp(-np.abs(np.asarray(v, dtype=float) - self.mu) / b) / (2.0 * b))

    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        b = self.scale
        peak = 1.0 / (2.0 * b)
        half = b * math.log(peak / cutoff) if peak > cutoff else 0.0
        return self.mu - half, self.mu + half

    def scaled(self, factor: float) -> "LaplaceNoise":
        factor = _check_factor(factor)
        return LaplaceNoise(self.mu * factor, self.var * factor**2)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "mean": self.mu, "variance": self.var}

    @property
    def mean(self) -> float:
        return self.mu

    @property
    def variance(self) -> float:
        return self.var

    @property
    def symmetric(self) -> bool:
        return self.mu == 0


@dataclass(frozen=True)
class BinaryNoise(NoiseModel):
    """+magnitude or -magnitude with probability 1/2 each"""

    magnitude: float = 1.0
    kind = NoiseKind.BINARY

    def __post_init__(self) -> None:
        if not self.magnitude > 0:
            raise DomainError(f"Binary magnitude must be positive, got {self.magnitude}")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.where(rng.random(n) < 0.5, -self.magnitude, self.magnitude)

    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        logger.error("Binary noise has no density")
        raise UnsupportedDensityError("Binary noise has no density")

    def atoms(self) -> List[Tuple[float, float]]:
        """Point masses as (value, probability)"""
        return [(-self.magnitude, 0.5), (self.magnitude, 0.5)]

    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        return -self.magnitude, self.magnitude

    def scaled(self, factor: float) -> "BinaryNoise":
        return BinaryNoise(self.magnitude * _check_factor(factor))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "magnitude": self.magnitude}

    @property
    def mean(self) -> float:
        return 0.0

    @property
    def variance(self) -> float:
        return self.magnitude**2

    @property
    def is_discrete(self) -> bool:
        return True

    @property
    def symmetric(self) -> bool:
        return True


@dataclass(frozen=True)
class MixtureNoise(NoiseModel):
    """
    Impulsive two-component model v = (1 - a) A + a B, a ~ Bernoulli(c).
    inner is the nominal process A, outer the outlier process B.
    """

    c: float
    inner: NoiseModel
    outer: NoiseModel
    kind = NoiseKind.MIXTURE

    def __post_init__(self) -> None:
        if not 0 <= self.c <= 1:
            raise DomainError(f"Mixture probability c must be in [0, 1], got {self.c}")
        if isinstance(self.inner, MixtureNoise) or isinstance(self.outer, MixtureNoise):
            raise DomainError("Mixture components cannot themselves be mixtures")

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        gate = rng.random(n) < self.c
        nominal = self.inner.draw(n, rng)
        outliers = self.outer.draw(n, rng)
        return np.where(gate, outliers, nominal)

    def pdf(self, v: float | np.ndarray) -> float | np.ndarray:
        if self.is_discrete:
            raise UnsupportedDensityError("Mixture with a discrete component has no density")
        return (1.0 - self.c) * self.inner.pdf(v) + self.c * self.outer.pdf(v)

    def support(self, cutoff: float = DENSITY_CUTOFF) -> Tuple[float, float]:
        lo_i, hi_i = self.inner.support(cutoff)
        lo_o, hi_o = self.outer.support(cutoff)
        return min(lo_i, lo_o), max(hi_i, hi_o)

    def scaled(self, factor: float) -> "MixtureNoise":
        return MixtureNoise(self.c, self.inner.scaled(factor), self.outer.scaled(factor))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "c": self.c,
            "inner": self.inner.to_dict(),
            "outer": self.outer.to_dict(),
        }

    @property
    def mean(self) -> float:
        return (1.0 - self.c) * self.inner.mean + self.c * self.outer.mean

    @property
    def variance(self) -> float:
        second = (1.0 - self.c) * (self.inner.variance + self.inner.mean**2) + self.c * (
            self.outer.variance + self.outer.mean**2
        )
        return second - self.mean**2

    @property
    def is_discrete(self) -> bool:
        return self.inner.is_discrete or self.outer.is_discrete

    @property
    def symmetric(self) -> bool:
        return self.inner.symmetric and self.outer.symmetric


def _scalar(value: np.ndarray) -> float | np.ndarray:
    return float(value) if np.ndim(value) == 0 else value


def noise_from_dict(spec: Mapping[str, Any], nested: bool = False) -> NoiseModel:
    """
    Build a model from its JSON form {"kind": ..., params}
    :param spec: mapping
    :param nested: True for mixture components (mixtures may not nest)
    :return: NoiseModel
    """
    try:
        kind = NoiseKind(str(spec.get("kind", "")).lower())
    except ValueError as e:
        raise DomainError(f"Unknown noise kind '{spec.get('kind')}'") from e
    if kind == NoiseKind.GAUSSIAN:
        return GaussianNoise(float(spec.get("mean", 0.0)), float(spec.get("variance", 1.0)))
    if kind == NoiseKind.LAPLACE:
        return LaplaceNoise(float(spec.get("mean", 0.0)), float(spec.get("variance", 1.0)))
    if kind == NoiseKind.UNIFORM:
        if spec.get("lo") is None or spec.get("hi") is None:
            raise DomainError("Uniform noise needs lo and hi")
        return UniformNoise(float(spec["lo"]), float(spec["hi"]))
    if kind == NoiseKind.BINARY:
        return BinaryNoise(float(spec.get("magnitude", 1.0)))
    if nested:
        raise DomainError("Mixture components cannot themselves be mixtures")
    if spec.get("c") is None or spec.get("inner") is None or spec.get("outer") is None:
        raise DomainError("Mixture noise needs c, inner and outer")
    return MixtureNoise(
        float(spec["c"]),
        noise_from_dict(spec["inner"], nested=True),
        noise_from_dict(spec["outer"], nested=True),
    )


def sample(model: NoiseModel, n: int, stream: SeededStream) -> np.ndarray:
    """
    n i.i.d. draws from model; identical (model, n, stream) give identical vectors
    :param model: noise model
    :param n: number of samples (>= 0)
    :param stream: seeded stream
    :return: array of length n
    """
    if n < 0:
        raise DomainError(f"Sample count must be >= 0, got {n}")
    return model.draw(n, stream.generator())


def density(model: NoiseModel, v: float | np.ndarray) -> float | np.ndarray:
    """
    Probability density of an absolutely continuous model
    :param model: noise model
    :param v: evaluation point(s)
    :return: p(v)
    """
    if model.is_discrete:
        logger.error("No density for discrete model %s", model.kind.value)
        raise UnsupportedDensityError(f"No density for discrete model {model.kind.value}")
    return model.pdf(v)
