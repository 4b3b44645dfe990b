""" FIR adaptive filters under the GMCC and LMP criteria, and the batch fixed-point solver."""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from gmcclib.enums import Rule
from gmcclib.exceptions import DimensionError, DomainError, SolverError
from gmcclib.kernel import GgdKernel

logger = logging.getLogger(__name__)

# errors smaller than this contribute nothing to a GMCC update
ZERO_ERROR = 1e-12
# exp(-x) underflows to zero beyond this
_EXP_UNDERFLOW = 745.0

# rule aliases accepted in configuration: name -> (rule, fixed parameters)
RULE_ALIASES: Dict[str, Tuple[str, Dict[str, float]]] = {
    "gmcc": ("gmcc", {}),
    "mcc": ("gmcc", {"alpha": 2.0}),
    "lmp": ("lmp", {}),
    "sa": ("lmp", {"p": 1.0}),
    "lms": ("lmp", {"p": 2.0}),
    "lmf": ("lmp", {"p": 4.0}),
}


@dataclass(frozen=True)
class FirFilterState:
    """
    Weight vector of a length-m FIR filter. Treated as an immutable value:
    update() returns a new state.
    """

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise DomainError("Filter weights must be a non-empty finite vector")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, m: int) -> "FirFilterState":
        """Null initial weight vector"""
        if m < 1:
            raise DomainError(f"Filter length must be at least 1, got {m}")
        return cls(np.zeros(m))

    @property
    def m(self) -> int:
        return self.weights.size


@dataclass(frozen=True)
class Regressand:
    """Input vector X(i) and desired value d(i)"""

    input_vector: np.ndarray
    desired: float


@dataclass(frozen=True)
class AlgorithmSpec:
    """
    Update rule and step-size.
    GMCC carries a kernel, LMP carries the power p. The step-size eta absorbs the
    constant mu*lambda*alpha of the stochastic gradient.
    """

    rule: Rule
    eta: float
    kernel: Optional[GgdKernel] = None
    p: Optional[float] = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.eta) or self.eta < 0:
            raise DomainError(f"Step-size must be nonnegative, got {self.eta}")
        if self.rule == Rule.GMCC and self.kernel is None:
            raise DomainError("GMCC rule needs a kernel")
        if self.rule == Rule.LMP and (self.p is None or not self.p > 0):
            raise DomainError(f"LMP rule needs p > 0, got {self.p}")

    @classmethod
    def gmcc(cls, alpha: float, lam: float, eta: float) -> "AlgorithmSpec":
        return cls(Rule.GMCC, float(eta), kernel=GgdKernel.from_lambda(alpha, lam))

    @classmethod
    def lmp(cls, p: float, eta: float) -> "AlgorithmSpec":
        return cls(Rule.LMP, float(eta), p=float(p))

    @classmethod
    def from_dict(cls, spec: Mapping[str, Any]) -> "AlgorithmSpec":
        """
        Parse {"rule": "gmcc", "alpha", "lambda", "eta"} or {"rule": "lmp", "p", "eta"};
        aliases sa, lms, lmf and mcc fix p or alpha.
        :param spec: mapping
        :return: AlgorithmSpec
        """
        name = str(spec.get("rule", "")).lower()
        if name not in RULE_ALIASES:
            raise DomainError(
                f"Unknown rule '{spec.get('rule')}', expecting one of {sorted(RULE_ALIASES)}"
            )
        base, fixed = RULE_ALIASES[name]
        params = dict(spec)
        params.update(fixed)
        if "eta" not in params or params["eta"] is None:
            raise DomainError(f"Rule '{name}' needs a step-size eta")
        if base == "gmcc":
            return cls(Rule.GMCC, float(params["eta"]), kernel=GgdKernel.from_dict(params))
        if params.get("p") is None:
            raise DomainError("LMP rule needs p")
        return cls.lmp(params["p"], params["eta"])

    def to_dict(self) -> Dict[str, Any]:
        if self.rule == Rule.GMCC:
            return {"rule": "gmcc", "eta": self.eta, **self.kernel.to_dict()}
        return {"rule": "lmp", "p": self.p, "eta": self.eta}

    def with_eta(self, eta: float) -> "AlgorithmSpec":
        return replace(self, eta=float(eta))

    def with_lambda(self, lam: float) -> "AlgorithmSpec":
        if self.rule != Rule.GMCC:
            raise DomainError("Only GMCC rules have a kernel parameter")
        return replace(self, kernel=GgdKernel.from_lambda(self.kernel.alpha, lam))

    def gain(self, e: float) -> float:
        """
        Scalar error nonlinearity of this rule, the factor multiplying eta*X in the update
        :param e: a posteriori error d - W'X
        :return: f(e) for GMCC, |e|^(p-1) sign(e) for LMP
        """
        if self.rule == Rule.GMCC:
            return _gmcc_gain(e, self.kernel.alpha, self.kernel.lam)
        return _lmp_gain(e, self.p)

    @property
    def label(self) -> str:
        if self.rule == Rule.GMCC:
            return f"GMCC(alpha={self.kernel.alpha:g},lambda={self.kernel.lam:g})"
        return f"LMP(p={self.p:g})"


def _gmcc_gain(e: float, alpha: float, lam: float) -> float:
    ae = abs(e)
    if ae < ZERO_ERROR:
        return 0.0
    try:
        z = lam * ae**alpha
    except OverflowError:
        return 0.0
    if z > _EXP_UNDERFLOW:
        # also covers e = inf, where 0 * inf would give nan
        return 0.0
    return math.copysign(math.exp(-z) * ae ** (alpha - 1.0), e)


def _lmp_gain(e: float, p: float) -> float:
    try:
        return math.copysign(abs(e) ** (p - 1.0), e) if e != 0 else 0.0
    except OverflowError:
        return math.copysign(math.inf, e)


def predict(state: FirFilterState, x: Sequence[float] | np.ndarray) -> float:
    """
    Filter output W'X
    :param state: filter weights
    :param x: input vector of length m
    :return: output y
    """
    x = np.asarray(x, dtype=float)
    if x.shape != state.weights.shape:
        logger.error("Input vector length %d does not match filter length %d", x.size, state.m)
        raise DimensionError(
            f"Input vector length {x.size} does not match filter length {state.m}"
        )
    return float(state.weights @ x)


def gmcc_nonlinearity(e: float | np.ndarray, k: GgdKernel) -> float | np.ndarray:
    """
    GMCC error nonlinearity f(e) = exp(-lambda|e|^alpha) * |e|^(alpha-1) * sign(e).
    Odd and bounded; f(e) = 0 for |e| below ZERO_ERROR. Elementwise for arrays.
    """
    e_arr = np.asarray(e, dtype=float)
    ae = np.abs(e_arr)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = k.lam * ae**k.alpha
        value = np.exp(-z) * ae ** (k.alpha - 1.0)
    value = np.where((ae < ZERO_ERROR) | (z > _EXP_UNDERFLOW), 0.0, value)
    value = np.copysign(value, e_arr)
    if value.ndim == 0:
        return float(value)
    return value


def lmp_nonlinearity(e: float, p: float) -> float:
    """|e|^(p-1) * sign(e)"""
    return _lmp_gain(float(e), float(p))


def update(
    state: FirFilterState, spec: AlgorithmSpec, sample: Regressand
) -> Tuple[FirFilterState, float]:
    """
    One adaptation step W <- W + eta * gain(e) * X with e = d - W'X
    :param state: weights before the sample
    :param spec: update rule and step-size
    :param sample: input vector and desired value
    :return: (weights after the sample, error e)
    """
    x = np.asarray(sample.input_vector, dtype=float)
    e = float(sample.desired) - predict(state, x)
    step = spec.eta * spec.gain(e)
    if step == 0.0:
        return state, e
    return FirFilterState(state.weights + step * x), e


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of gmcc_fixed_point. Non-convergence is reported here, not raised."""

    state: FirFilterState
    iterations: int
    converged: bool
    relative_change: float


def _design(samples: Sequence[Regressand]) -> Tuple[np.ndarray, np.ndarray]:
    if len(samples) == 0:
        raise DimensionError("No samples given")
    xs = np.array([np.asarray(s.input_vector, dtype=float) for s in samples])
    if xs.ndim != 2:
        raise DimensionError("Input vectors must all have the same length")
    ds = np.array([float(s.desired) for s in samples])
    if xs.shape[0] < xs.shape[1]:
        raise DimensionError(
            f"Need at least m={xs.shape[1]} samples, got {xs.shape[0]}"
        )
    return xs, ds


def _weighted_solve(xs: np.ndarray, ds: np.ndarray, h: np.ndarray) -> np.ndarray:
    r = (xs * h[:, None]).T @ xs
    p = xs.T @ (h * ds)
    try:
        return scipy.linalg.solve(r, p, assume_a="sym")
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.error("Weighted autocorrelation matrix is singular")
        raise SolverError("Weighted autocorrelation matrix is singular") from e


def wiener_solution(samples: Sequence[Regressand]) -> FirFilterState:
    """
    Sample Wiener solution R^-1 P
    :param samples: regressands
    :return: least-squares weights
    """
    xs, ds = _design(samples)
    return FirFilterState(_weighted_solve(xs, ds, np.ones_like(ds)))


def gmcc_fixed_point(
    samples: Sequence[Regressand],
    k: GgdKernel,
    tol: float = 1e-10,
    max_iter: int = 500,
    eps_reg: float = 1e-8,
    relaxation: Optional[float] = None,
    initial: Optional[FirFilterState] = None,
) -> FixedPointResult:
    """
    Batch GMCC-optimal weights by the reweighted normal equations
    W <- [sum h(e_i) X_i X_i']^-1 [sum h(e_i) d_i X_i], h(e) = exp(-lambda|e|^alpha) max(|e|, eps_reg)^(alpha-2)

    The new iterate is W + relaxation * (W_solve - W). Without relaxation the map
    contracts only for alpha < 3, so the default is 1 for alpha <= 2 and
    1/(alpha-1) above; fixed points are the same for every relaxation.

    :param samples: regressands, at least m of them
    :param k: kernel
    :param tol: stop when ||dW|| / ||W|| < tol
    :param max_iter: iteration cap
    :param eps_reg: floor for |e| inside |e|^(alpha-2)
    :param relaxation: step factor in (0, 1]
    :param initial: starting weights (zero vector by default)
    :return: FixedPointResult
    """
    xs, ds = _design(samples)
    if relaxation is None:
        relaxation = 1.0 if k.alpha <= 2 else 1.0 / (k.alpha - 1.0)
    if not 0 < relaxation <= 1:
        raise DomainError(f"Relaxation must be in (0, 1], got {relaxation}")
    w = np.zeros(xs.shape[1]) if initial is None else initial.weights.copy()
    if w.size != xs.shape[1]:
        raise DimensionError("Initial weights do not match the input length")

    change = math.inf
    for iteration in range(1, max_iter + 1):
        ae = np.abs(ds - xs @ w)
        h = np.exp(-k.lam * ae**k.alpha) * np.maximum(ae, eps_reg) ** (k.alpha - 2.0)
        step = _weighted_solve(xs, ds, h) - w
        w = w + relaxation * step
        norm = np.linalg.norm(w)
        change = float(np.linalg.norm(relaxation * step) / norm) if norm > 0 else 0.0
        logger.debug("Fixed-point iteration %d, relative change %.3e", iteration, change)
        if change < tol:
            return FixedPointResult(FirFilterState(w), iteration, True, change)
    logger.info("Fixed-point solver stopped after %d iterations (change %.3e)", max_iter, change)
    return FixedPointResult(FirFilterState(w), max_iter, False, change)


def regressands(xs: np.ndarray, ds: np.ndarray) -> List[Regressand]:
    """Pair rows of an input matrix with desired values"""
    xs = np.asarray(xs, dtype=float)
    ds = np.asarray(ds, dtype=float).reshape(-1)
    if xs.ndim != 2 or xs.shape[0] != ds.size:
        raise DimensionError("Input matrix rows must match the desired values")
    return [Regressand(row, float(d)) for row, d in zip(xs, ds)]
