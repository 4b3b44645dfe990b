""" Steady-state EMSE of the GMCC algorithm and the empirical step-size bound."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Literal, Optional

import numpy as np
from scipy import integrate

from gmcclib.exceptions import (
    DegenerateTraceError,
    DimensionError,
    DomainError,
    PrecisionError,
    UnsupportedDensityError,
)
from gmcclib.filters import gmcc_nonlinearity
from gmcclib.kernel import GgdKernel, as_samples
from gmcclib.noise import BinaryNoise, MixtureNoise, NoiseModel

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200

Parity = Optional[Literal["even", "odd"]]


@dataclass(frozen=True)
class TheoryInputs:
    """
    Kernel, step-size, trace of the input autocorrelation matrix and noise model.
    For white input of variance s2 and filter length m the trace is m * s2.
    """

    kernel: GgdKernel
    eta: float
    trace_rxx: float
    noise: NoiseModel

    def __post_init__(self) -> None:
        if not self.trace_rxx > 0:
            raise DomainError(f"trace_rxx must be positive, got {self.trace_rxx}")
        if not self.eta >= 0:
            raise DomainError(f"Step-size must be nonnegative, got {self.eta}")


@dataclass(frozen=True)
class EmseDiagnostics:
    """Noise expectations entering the EMSE expressions"""

    e_f_squared: float
    e_f_prime: float
    e_zeta: float
    denominator_full: float
    denominator_simplified: float


@dataclass(frozen=True)
class EmseResult:
    """
    Theoretical steady-state EMSE: full expression and small-step simplification.
    valid is False when the full denominator is not positive (outside the validity
    region of the expansion); the numeric value is kept for inspection.
    """

    eta: float
    trace_rxx: float
    full: float
    simplified: float
    valid: bool
    simplified_valid: bool
    diagnostics: EmseDiagnostics


def _check_point(v: float, k: GgdKernel, strict: bool) -> float:
    v = float(v)
    if v == 0 and (strict or k.alpha < 2):
        logger.error("Singular point v=0 for alpha=%s", k.alpha)
        raise DomainError(f"Singular point v=0 for alpha={k.alpha}")
    return v


def f_prime(v: float, k: GgdKernel) -> float:
    """
    Derivative of the GMCC nonlinearity
    :param v: noise value, nonzero when alpha < 2
    :param k: kernel
    :return: exp(-lambda|v|^alpha) |v|^(alpha-2) ((alpha-1) - lambda*alpha*|v|^alpha)
    """
    av = abs(_check_point(v, k, strict=False))
    a, lam = k.alpha, k.lam
    pw = av**a
    return math.exp(-lam * pw) * av ** (a - 2.0) * ((a - 1.0) - lam * a * pw)


def f_double_prime(v: float, k: GgdKernel) -> float:
    """
    Second derivative of the GMCC nonlinearity (odd in v)
    :param v: nonzero noise value
    :param k: kernel
    :return: f''(v)
    """
    v = _check_point(v, k, strict=True)
    av = abs(v)
    a, lam = k.alpha, k.lam
    bracket = -lam * a * ((a - 1.0) * av ** (2 * a - 3) - lam * a * av ** (3 * a - 3)) + (
        (a - 1.0) * (a - 2.0) * av ** (a - 3) - lam * a * (2 * a - 2) * av ** (2 * a - 3)
    )
    return math.copysign(1.0, v) * math.exp(-lam * av**a) * bracket


def zeta(v: float, k: GgdKernel) -> float:
    """
    f(v) f''(v) + f'(v)^2 in closed form
    :param v: noise value, nonzero when alpha < 2
    :param k: kernel
    :return: exp(-2 lambda|v|^a) |v|^(2a-4) [(a-1)(2a-3) - 5 lambda a (a-1)|v|^a + 2 lambda^2 a^2 |v|^(2a)]
    """
    av = abs(_check_point(v, k, strict=False))
    a, lam = k.alpha, k.lam
    pw = av**a
    bracket = (a - 1.0) * (2 * a - 3.0) - 5.0 * lam * a * (a - 1.0) * pw + 2.0 * (lam * a * pw) ** 2
    return math.exp(-2.0 * lam * pw) * av ** (2 * a - 4.0) * bracket


def _quad(integrand: Callable[[float], float], lo: float, hi: float) -> float:
    if hi <= lo:
        return 0.0
    out = integrate.quad(
        integrand,
        lo,
        hi,
        epsabs=QUAD_EPSABS,
        epsrel=QUAD_EPSREL,
        limit=QUAD_LIMIT,
        full_output=1,
    )
    value, abserr = float(out[0]), float(out[1])
    # a fourth element is quad's warning message
    if len(out) > 3 or not math.isfinite(value):
        reason = out[3] if len(out) > 3 else "non-finite estimate"
        logger.error("Quadrature over [%s, %s] did not converge: %s", lo, hi, reason)
        raise PrecisionError(
            f"Quadrature over [{lo}, {hi}] did not converge (estimate {value}, error {abserr})",
            value,
            abserr,
        )
    return value


def expect_over_noise(
    g: Callable[[float], float], noise: NoiseModel, parity: Parity = None
) -> float:
    """
    E[g(v)] under the noise model.
    Mixtures are the c-weighted sum of component expectations, binary noise is the
    exact point-mass sum, continuous models use adaptive Gauss-Kronrod quadrature
    over the support (density above DENSITY_CUTOFF) split at 0, where integrands
    such as |v|^(alpha-2) may be singular.
    :param g: integrand
    :param noise: noise model
    :param parity: "even" or "odd" to fold a symmetric model onto [0, hi]
    :return: expectation
    """
    if isinstance(noise, MixtureNoise):
        return (1.0 - noise.c) * expect_over_noise(g, noise.inner, parity) + (
            noise.c * expect_over_noise(g, noise.outer, parity)
        )
    if isinstance(noise, BinaryNoise):
        return math.fsum(p * g(v) for v, p in noise.atoms())

    lo, hi = noise.support()
    pdf = noise.pdf

    def weighted(v: float) -> float:
        return g(v) * pdf(v)

    if parity is not None and noise.symmetric:
        if parity == "odd":
            return 0.0
        return 2.0 * _quad(weighted, 0.0, hi)
    if lo < 0 < hi:
        return _quad(weighted, lo, 0.0) + _quad(weighted, 0.0, hi)
    return _quad(weighted, lo, hi)


def _density_at_zero(noise: NoiseModel) -> bool:
    """True when a continuous part of the model puts positive density at v = 0"""
    if isinstance(noise, MixtureNoise):
        return (noise.c < 1 and _density_at_zero(noise.inner)) or (
            noise.c > 0 and _density_at_zero(noise.outer)
        )
    if noise.is_discrete:
        return False
    return float(noise.pdf(0.0)) > 0


def noise_expectations(k: GgdKernel, noise: NoiseModel) -> EmseDiagnostics:
    """
    The three noise expectations of the EMSE expressions; independent of eta and the trace.
    Denominators are filled in by steady_state_emse.
    """
    if k.alpha <= 1:
        logger.error("Steady-state theory needs alpha > 1, got %s", k.alpha)
        raise UnsupportedDensityError(f"Steady-state theory needs alpha > 1, got {k.alpha}")
    if k.alpha <= 1.5 and _density_at_zero(noise):
        logger.error("E[zeta] diverges at v=0 for alpha=%s", k.alpha)
        raise UnsupportedDensityError(
            f"Steady-state theory needs alpha > 1.5 for noise with density at 0, got {k.alpha}: "
            f"E[zeta] integrates |v|^{2 * k.alpha - 4:g} across v=0"
        )
    if abs(noise.mean) > 1e-12:
        raise DomainError(f"Steady-state theory assumes zero-mean noise, mean is {noise.mean}")
    a, lam = k.alpha, k.lam

    def f_squared(v: float) -> float:
        av = abs(v)
        return math.exp(-2.0 * lam * av**a) * av ** (2.0 * a - 2.0)

    e_f2 = expect_over_noise(f_squared, noise, "even")
    e_fp = expect_over_noise(lambda v: f_prime(v, k), noise, "even")
    e_zeta = expect_over_noise(lambda v: zeta(v, k), noise, "even")
    logger.debug("E[f^2]=%s E[f']=%s E[zeta]=%s", e_f2, e_fp, e_zeta)
    return EmseDiagnostics(e_f2, e_fp, e_zeta, math.nan, math.nan)


def _assemble(eta: float, trace: float, terms: EmseDiagnostics) -> EmseResult:
    load = eta * trace
    den_simplified = 2.0 * terms.e_f_prime
    den_full = den_simplified - load * terms.e_zeta
    numerator = load * terms.e_f_squared
    full = numerator / den_full if den_full != 0 else math.copysign(math.inf, numerator)
    simplified = (
        numerator / den_simplified if den_simplified != 0 else math.copysign(math.inf, numerator)
    )
    valid = den_full > 0
    if not valid:
        logger.warning(
            "EMSE denominator %s <= 0 at eta=%s: outside the validity region", den_full, eta
        )
    return EmseResult(
        eta=eta,
        trace_rxx=trace,
        full=full,
        simplified=simplified,
        valid=valid,
        simplified_valid=den_simplified > 0,
        diagnostics=replace(
            terms, denominator_full=den_full, denominator_simplified=den_simplified
        ),
    )


def steady_state_emse(inputs: TheoryInputs) -> EmseResult:
    """
    Theoretical steady-state EMSE
    full = eta Tr E[f^2] / (2 E[f'] - eta Tr E[zeta]), simplified drops the eta Tr E[zeta] term
    :param inputs: TheoryInputs (alpha > 1, zero-mean noise)
    :return: EmseResult
    """
    terms = noise_expectations(inputs.kernel, inputs.noise)
    return _assemble(inputs.eta, inputs.trace_rxx, terms)


def emse_curve(inputs: TheoryInputs, etas: Iterable[float]) -> List[EmseResult]:
    """EMSE for several step-sizes; noise expectations are computed once"""
    terms = noise_expectations(inputs.kernel, inputs.noise)
    results = []
    for eta in etas:
        if not eta >= 0:
            raise DomainError(f"Step-size must be nonnegative, got {eta}")
        results.append(_assemble(float(eta), inputs.trace_rxx, terms))
    return results


def lms_emse(eta: float, trace_rxx: float, noise_variance: float) -> float:
    """Classical LMS steady-state EMSE eta Tr var / (2 - eta Tr)"""
    return eta * trace_rxx * noise_variance / (2.0 - eta * trace_rxx)


def empirical_step_bound(
    ea_samples: Iterable[float],
    e_samples: Iterable[float],
    xnorm2_samples: Iterable[float],
    k: GgdKernel,
) -> float:
    """
    Sample estimate of the mean-square stability bound on the step-size,
    2 mean[e_a f(e)] / mean[||X||^2 f(e)^2]
    :param ea_samples: a priori errors
    :param e_samples: errors
    :param xnorm2_samples: squared input norms
    :param k: kernel
    :return: step-size bound
    """
    ea, e, xn = as_samples(ea_samples), as_samples(e_samples), as_samples(xnorm2_samples)
    if not ea.shape == e.shape == xn.shape:
        raise DimensionError("Trace columns differ in length")
    f = np.asarray(gmcc_nonlinearity(e, k))
    denominator = float(np.mean(xn * f**2))
    if denominator == 0:
        logger.error("Trace has zero mean ||X||^2 f(e)^2")
        raise DegenerateTraceError("Trace has zero mean ||X||^2 f(e)^2")
    return 2.0 * float(np.mean(ea * f)) / denominator
