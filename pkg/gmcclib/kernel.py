""" Generalized Gaussian kernel and generalized correntropy estimators."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Mapping

import numpy as np
from scipy import special

from gmcclib.exceptions import DimensionError, DomainError

logger = logging.getLogger(__name__)

# lambda * beta**alpha must equal 1 to this relative tolerance
_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class GgdKernel:
    """
    Generalized Gaussian density kernel gamma * exp(-lam * |e|**alpha)
    Build it with from_lambda or from_beta; the other parameter and the
    normalization constant gamma are derived.
    """

    alpha: float
    beta: float
    lam: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "lam", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                logger.error("Kernel parameter %s must be positive, got %s", name, value)
                raise DomainError(f"Kernel parameter {name} must be positive, got {value}")
        if abs(self.lam * self.beta**self.alpha - 1.0) > _CONSISTENCY_RTOL:
            raise DomainError(
                f"Inconsistent kernel: lambda={self.lam} does not match beta={self.beta}"
            )

    @classmethod
    def from_beta(cls, alpha: float, beta: float) -> "GgdKernel":
        """
        Kernel from shape and bandwidth
        :param alpha: shape parameter (> 0)
        :param beta: bandwidth (> 0, units of the error signal)
        :return: GgdKernel
        """
        alpha, beta = _positive("alpha", alpha), _positive("beta", beta)
        return cls(alpha, beta, beta ** (-alpha), _normalizer(alpha, beta))

    @classmethod
    def from_lambda(cls, alpha: float, lam: float) -> "GgdKernel":
        """
        Kernel from shape and kernel parameter. lambda is kept exactly as given.
        :param alpha: shape parameter (> 0)
        :param lam: kernel parameter (> 0)
        :return: GgdKernel
        """
        alpha, lam = _positive("alpha", alpha), _positive("lambda", lam)
        beta = lam ** (-1.0 / alpha)
        return cls(alpha, beta, lam, _normalizer(alpha, beta))

    @classmethod
    def from_dict(cls, spec: Mapping[str, Any]) -> "GgdKernel":
        """
        Kernel from a configuration mapping with keys alpha and lambda (or beta)
        :param spec: mapping
        :return: GgdKernel
        """
        if "alpha" not in spec:
            raise DomainError("Kernel settings need alpha")
        if spec.get("lambda") is not None:
            return cls.from_lambda(float(spec["alpha"]), float(spec["lambda"]))
        if spec.get("beta") is not None:
            return cls.from_beta(float(spec["alpha"]), float(spec["beta"]))
        raise DomainError("Kernel settings need lambda or beta")

    def to_dict(self) -> Dict[str, float]:
        """lambda is the canonical serialized parameter"""
        return {"alpha": self.alpha, "lambda": self.lam}

    def describe(self) -> Dict[str, float]:
        """All four parameters, for reports"""
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "lambda": self.lam,
            "gamma": self.gamma,
        }


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        logger.error("Kernel parameter %s must be positive, got %s", name, value)
        raise DomainError(f"Kernel parameter {name} must be positive, got {value}")
    return value


def _normalizer(alpha: float, beta: float) -> float:
    return alpha / (2.0 * beta * float(special.gamma(1.0 / alpha)))


def as_samples(values: Iterable[float] | np.ndarray | float) -> np.ndarray:
    """
    Validated sample vector: 1-D float array, at least one entry, finite values only
    :param values: sequence of reals
    :return: read-only numpy array
    """
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size == 0:
        raise DomainError("Sample vector must contain at least one value")
    if not np.all(np.isfinite(arr)):
        logger.error("Sample vector contains non-finite values")
        raise DomainError("Sample vector contains non-finite values")
    arr.setflags(write=False)
    return arr


def _paired(x: Iterable[float], y: Iterable[float]) -> np.ndarray:
    x, y = as_samples(x), as_samples(y)
    if x.shape != y.shape:
        logger.error("Sample vectors differ in length: %d vs %d", x.size, y.size)
        raise DimensionError(f"Sample vectors differ in length: {x.size} vs {y.size}")
    return x - y


def ggd_density(e: float | np.ndarray, k: GgdKernel) -> float | np.ndarray:
    """
    Kernel value gamma * exp(-lambda * |e|**alpha), elementwise for arrays
    :param e: error value(s)
    :param k: kernel
    :return: density in (0, gamma]
    """
    value = k.gamma * np.exp(-k.lam * np.abs(e) ** k.alpha)
    if np.ndim(value) == 0:
        return float(value)
    return value


def correntropy_estimate(x: Iterable[float], y: Iterable[float], k: GgdKernel) -> float:
    """
    Sample estimator of the generalized correntropy, (1/N) * sum G(x_i - y_i)
    :param x: samples of X
    :param y: samples of Y, same length
    :param k: kernel
    :return: estimate in (0, gamma]
    """
    return float(np.mean(ggd_density(_paired(x, y), k)))


def parzen_density(e: float, errors: Iterable[float], k: GgdKernel) -> float:
    """
    Parzen window estimate of the error density at e, with the kernel as window
    :param e: evaluation point
    :param errors: error samples
    :param k: kernel
    :return: (1/N) * sum G(e - e_i)
    """
    return float(np.mean(ggd_density(e - as_samples(errors), k)))


def gc_loss(x: Iterable[float], y: Iterable[float], k: GgdKernel) -> float:
    """
    Sample GC-loss gamma - correntropy_estimate(x, y).
    Evaluated as gamma * mean(1 - exp(-lambda*|e|**alpha)) through expm1, which keeps
    precision for small lambda.
    """
    e = _paired(x, y)
    return float(k.gamma * np.mean(-np.expm1(-k.lam * np.abs(e) ** k.alpha)))


def gcim(x: Iterable[float], y: Iterable[float], k: GgdKernel) -> float:
    """
    Generalized correntropy induced metric, sqrt(gc_loss(x, y)).
    A metric for 0 < alpha <= 2 only; larger alpha is accepted.
    """
    if k.alpha > 2:
        logger.debug("GCIM with alpha=%s > 2 is not a metric", k.alpha)
    return float(np.sqrt(gc_loss(x, y, k)))


def l_alpha_beta(x: Iterable[float], k: GgdKernel) -> float:
    """
    (N / (lambda * gamma) * gc_loss(x, 0)) ** (1 / alpha)
    Approaches the l_alpha norm of x as lambda -> 0 and ranks vectors like the
    l_0 count as lambda -> infinity.
    :param x: sample vector
    :param k: kernel
    :return: nonnegative real
    """
    x = as_samples(x)
    loss = gc_loss(x, np.zeros_like(x), k)
    return float((x.size / (k.lam * k.gamma) * loss) ** (1.0 / k.alpha))


def gc_loss_gradient(e: Iterable[float], k: GgdKernel) -> np.ndarray:
    """
    Gradient of the GC-loss with respect to the error vector
    :param e: error vector
    :param k: kernel
    :return: (lambda*alpha*gamma/N) * exp(-lambda|e_i|^alpha) * |e_i|^(alpha-1) * sign(e_i)
    """
    e = as_samples(e)
    if k.alpha <= 1 and np.any(e == 0):
        logger.error("GC-loss gradient undefined at zero error for alpha=%s", k.alpha)
        raise DomainError(f"GC-loss gradient undefined at zero error for alpha={k.alpha}")
    ae = np.abs(e)
    with np.errstate(divide="ignore"):
        slope = np.exp(-k.lam * ae**k.alpha) * ae ** (k.alpha - 1.0) * np.sign(e)
    return (k.lam * k.alpha * k.gamma / e.size) * slope


def gc_loss_hessian_diag(e: Iterable[float], k: GgdKernel) -> np.ndarray:
    """
    Diagonal of the GC-loss Hessian (off-diagonal entries are identically zero)
    :param e: error vector, no zero entries when alpha < 2
    :param k: kernel
    :return: -(alpha*lambda*gamma/N) * T(e_i) * (alpha*lambda*|e_i|^alpha - (alpha-1))
    """
    e = as_samples(e)
    if k.alpha < 2 and np.any(e == 0):
        logger.error("GC-loss Hessian singular at zero error for alpha=%s", k.alpha)
        raise DomainError(f"GC-loss Hessian singular at zero error for alpha={k.alpha}")
    ae = np.abs(e)
    pw = ae**k.alpha
    curvature = np.exp(-k.lam * pw) * ae ** (k.alpha - 2.0)
    return -(k.alpha * k.lam * k.gamma / e.size) * curvature * (
        k.alpha * k.lam * pw - (k.alpha - 1.0)
    )
