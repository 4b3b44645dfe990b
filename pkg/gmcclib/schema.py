""" Configuration templates of the gmcc subcommands, and builders for library objects."""

import logging
import math
import numbers
import re
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from gmcclib.config_node import ConfigNode, as_plain
from gmcclib.enums import NoiseKind, Subcommand
from gmcclib.filters import AlgorithmSpec, RULE_ALIASES
from gmcclib.harness import (
    DEFAULT_DIVERGENCE_THRESHOLD,
    DEFAULT_W0,
    RunConfig,
    SystemIdSetup,
)
from gmcclib.kernel import GgdKernel
from gmcclib.noise import noise_from_dict
from gmcclib.template_attr_fixed import TemplateAttributeFixed
from gmcclib.template_node_fixed import TemplateNodeFixed
from gmcclib.template_node_set import TemplateNodeSet

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
# labels become CSV column names and must not need quoting
LABEL_PATTERN = re.compile(r"^[A-Za-z0-9_+\-]+$")
RESERVED_LABELS = ("iteration",)
DEFAULT_ETA_GRID = {"start": 1e-3, "stop": 0.3, "num": 10}


def _positive(x: float) -> bool:
    return x > 0


def _nonnegative(x: float) -> bool:
    return x >= 0


def _numbers(values: List[Any], check: Callable[[float], bool] = math.isfinite) -> bool:
    if len(values) == 0:
        raise ValueError("list is empty")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, numbers.Real) or not math.isfinite(v):
            raise ValueError(f"{v!r} is not a finite number")
        if not check(v):
            raise ValueError(f"{v!r} is out of range")
    return True


def _number_list(name: str, optional: bool = True, check: Callable[[float], bool] = math.isfinite,
                 default: Any = None) -> TemplateAttributeFixed:
    return TemplateAttributeFixed(
        name,
        optional=optional,
        value_type=list,
        validator=lambda x: _numbers(x, check),
        default_value=default,
    )


def kernel_template(name: str = "kernel") -> TemplateNodeFixed:
    """alpha plus lambda or beta"""
    node = TemplateNodeFixed(name, optional=False, validator=GgdKernel.from_dict, strict=True)
    node.add(TemplateAttributeFixed("alpha", optional=False, value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("lambda", value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("beta", value_type=float, validator=_positive))
    return node


def noise_template(name: str = "noise", nested: bool = False) -> TemplateNodeFixed:
    """
    Noise model node; mixtures carry inner and outer component nodes
    :param name: node name
    :param nested: component of a mixture (no further nesting)
    """
    node = TemplateNodeFixed(
        name,
        optional=nested,
        validator=lambda spec: noise_from_dict(spec, nested=nested),
        strict=True,
    )
    node.add(
        TemplateAttributeFixed(
            "kind",
            optional=False,
            validator=lambda x: x.lower() in [k.value for k in NoiseKind],
        )
    )
    node.add(TemplateAttributeFixed("mean", value_type=float))
    node.add(TemplateAttributeFixed("variance", value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("lo", value_type=float))
    node.add(TemplateAttributeFixed("hi", value_type=float))
    node.add(TemplateAttributeFixed("magnitude", value_type=float, validator=_positive))
    if not nested:
        node.add(TemplateAttributeFixed("c", value_type=float, validator=lambda x: 0 <= x <= 1))
        node.add(noise_template("inner", nested=True))
        node.add(noise_template("outer", nested=True))
    return node


def _algorithm_check(spec: Mapping[str, Any], eta_required: bool, gmcc_only: bool) -> bool:
    spec = dict(spec)
    if not eta_required:
        spec.setdefault("eta", 0.0)
    algorithm = AlgorithmSpec.from_dict(spec)
    if gmcc_only and algorithm.kernel is None:
        raise ValueError("this experiment needs a gmcc (or mcc) algorithm")
    return True


def algorithm_template(
    name: str = "algorithm", eta_required: bool = True, gmcc_only: bool = False
) -> TemplateNodeFixed:
    """
    Update rule node: rule (gmcc, mcc, lmp, sa, lms, lmf), eta, and alpha with lambda
    or beta for the correntropy rules, p for lmp
    """
    node = TemplateNodeFixed(
        name,
        optional=False,
        validator=lambda spec: _algorithm_check(spec, eta_required, gmcc_only),
        strict=True,
    )
    node.add(
        TemplateAttributeFixed(
            "rule", optional=False, validator=lambda x: x.lower() in RULE_ALIASES
        )
    )
    node.add(
        TemplateAttributeFixed(
            "eta", optional=not eta_required, value_type=float, validator=_nonnegative
        )
    )
    node.add(TemplateAttributeFixed("alpha", value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("lambda", value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("beta", value_type=float, validator=_positive))
    node.add(TemplateAttributeFixed("p", value_type=float, validator=_positive))
    return node


def _labels(spec: Mapping[str, Any]) -> bool:
    if len(spec) == 0:
        raise ValueError("at least one algorithm is needed")
    for label in spec:
        if not LABEL_PATTERN.match(label) or label in RESERVED_LABELS:
            raise ValueError(f"label '{label}' must match {LABEL_PATTERN.pattern} and not be reserved")
    return True


def algorithms_template(config: ConfigNode, eta_required: bool = True) -> TemplateNodeFixed:
    """Labelled algorithm entries, label names taken from the loaded configuration"""
    node = TemplateNodeFixed("algorithms", optional=False, validator=_labels)
    names = config.list_nodes("algorithms") if isinstance(config._get_obj("algorithms"), ConfigNode) else []
    node.add(TemplateNodeSet("members", algorithm_template("algorithm", eta_required), names))
    return node


def setup_template() -> TemplateNodeFixed:
    node = TemplateNodeFixed("setup", optional=False, validator=SystemIdSetup.from_dict, strict=True)
    node.add(_number_list("w0", default=list(DEFAULT_W0)))
    node.add(TemplateAttributeFixed("m", value_type=int, validator=lambda x: x >= 1))
    node.add(TemplateAttributeFixed("input_variance", value_type=float, validator=_positive, default_value=1.0))
    node.add(noise_template())
    return node


def _root(runs: Optional[int] = None, iterations: Optional[int] = None) -> TemplateNodeFixed:
    root = TemplateNodeFixed("root", optional=False, strict=True)
    root.add(
        TemplateAttributeFixed(
            "schema",
            optional=False,
            value_type=int,
            validator=lambda x: x == SCHEMA_VERSION,
            description=f"configuration schema version, must be {SCHEMA_VERSION}",
        )
    )
    if runs is not None:
        root.add(TemplateAttributeFixed("runs", value_type=int, validator=lambda x: x >= 1, default_value=runs))
        root.add(
            TemplateAttributeFixed(
                "iterations", value_type=int, validator=lambda x: x >= 1, default_value=iterations
            )
        )
        root.add(TemplateAttributeFixed("seed", value_type=int, validator=_nonnegative, default_value=0))
    return root


def kernel_eval_template(config: ConfigNode) -> TemplateNodeFixed:
    """kernel-eval: kernel, x and optional y of the same length"""

    def same_length(spec: Mapping[str, Any]) -> bool:
        if spec.get("y") is not None and len(spec["y"]) != len(spec["x"]):
            raise ValueError("x and y must have the same length")
        return True

    root = _root()
    root.validator = same_length
    root.add(kernel_template())
    root.add(_number_list("x", optional=False))
    root.add(_number_list("y"))
    return root


def theory_template(config: ConfigNode) -> TemplateNodeFixed:
    """theory: kernel, eta (or etas), trace_rxx or m with input_variance, noise"""

    def has_trace(spec: Mapping[str, Any]) -> bool:
        if spec.get("trace_rxx") is None and spec.get("m") is None:
            raise ValueError("either trace_rxx or m must be given")
        if spec.get("eta") is None and spec.get("etas") is None:
            raise ValueError("either eta or etas must be given")
        return True

    root = _root()
    root.validator = has_trace
    root.add(kernel_template())
    root.add(TemplateAttributeFixed("eta", value_type=float, validator=_nonnegative))
    root.add(_number_list("etas", check=_nonnegative))
    root.add(TemplateAttributeFixed("trace_rxx", value_type=float, validator=_positive))
    root.add(TemplateAttributeFixed("m", value_type=int, validator=lambda x: x >= 1))
    root.add(TemplateAttributeFixed("input_variance", value_type=float, validator=_positive, default_value=1.0))
    root.add(noise_template())
    return root


def pod_template(config: ConfigNode) -> TemplateNodeFixed:
    """pod: setup, labelled algorithms (eta taken from the grid), etas or eta_grid"""

    def one_grid(spec: Mapping[str, Any]) -> bool:
        if spec.get("etas") is not None and spec.get("eta_grid") is not None:
            raise ValueError("give either etas or eta_grid, not both")
        return True

    root = _root(runs=200, iterations=1000)
    root.validator = one_grid
    root.add(setup_template())
    root.add(algorithms_template(config, eta_required=False))
    root.add(_number_list("etas", check=_nonnegative))
    grid = TemplateNodeFixed(
        "eta_grid",
        validator=lambda spec: 0 < spec["start"] <= spec["stop"],
        strict=True,
    )
    grid.add(TemplateAttributeFixed("start", value_type=float, default_value=DEFAULT_ETA_GRID["start"]))
    grid.add(TemplateAttributeFixed("stop", value_type=float, default_value=DEFAULT_ETA_GRID["stop"]))
    grid.add(TemplateAttributeFixed("num", value_type=int, validator=lambda x: x >= 1, default_value=DEFAULT_ETA_GRID["num"]))
    root.add(grid)
    root.add(
        TemplateAttributeFixed(
            "divergence_threshold",
            value_type=float,
            validator=_positive,
            default_value=DEFAULT_DIVERGENCE_THRESHOLD,
        )
    )
    return root


def emse_template(config: ConfigNode) -> TemplateNodeFixed:
    """emse: setup, one gmcc algorithm, etas, optional noise_variances, steady_window"""

    def window_fits(spec: Mapping[str, Any]) -> bool:
        if not spec["steady_window"] < spec["iterations"]:
            raise ValueError("steady_window must be smaller than iterations")
        return True

    root = _root(runs=50, iterations=20000)
    root.validator = window_fits
    root.add(setup_template())
    root.add(algorithm_template(gmcc_only=True))
    root.add(_number_list("etas", check=_nonnegative))
    root.add(_number_list("noise_variances", check=_positive))
    root.add(TemplateAttributeFixed("steady_window", value_type=int, validator=lambda x: x >= 1, default_value=500))
    return root


def converge_template(config: ConfigNode) -> TemplateNodeFixed:
    """converge: setup, labelled algorithms, optional step-size calibration and lambda grid"""
    calibrated = isinstance(config._get_obj("calibration"), ConfigNode)
    root = _root(runs=100, iterations=5000)
    root.add(setup_template())
    root.add(algorithms_template(config, eta_required=not calibrated))
    root.add(
        TemplateAttributeFixed(
            "divergence_threshold",
            value_type=float,
            validator=_positive,
            default_value=DEFAULT_DIVERGENCE_THRESHOLD,
        )
    )
    calibration = TemplateNodeFixed("calibration", strict=True)
    calibration.add(TemplateAttributeFixed("target_wep", optional=False, value_type=float, validator=_positive))
    calibration.add(TemplateAttributeFixed("at_iteration", value_type=int, validator=lambda x: x >= 1, default_value=200))
    calibration.add(TemplateAttributeFixed("runs", value_type=int, validator=lambda x: x >= 1, default_value=20))
    calibration.add(TemplateAttributeFixed("seed", value_type=int, validator=_nonnegative))
    root.add(calibration)
    root.add(_number_list("lambda_grid", check=_positive))
    return root


TEMPLATES: Dict[Subcommand, Callable[[ConfigNode], TemplateNodeFixed]] = {
    Subcommand.KERNEL_EVAL: kernel_eval_template,
    Subcommand.THEORY: theory_template,
    Subcommand.POD: pod_template,
    Subcommand.EMSE: emse_template,
    Subcommand.CONVERGE: converge_template,
}


def kernel_from(config: ConfigNode, path: str = "kernel") -> GgdKernel:
    return GgdKernel.from_dict(as_plain(config.get(path)))


def setup_from(config: ConfigNode) -> SystemIdSetup:
    return SystemIdSetup.from_dict(as_plain(config.get("setup")))


def algorithm_from(config: ConfigNode, path: str = "algorithm") -> AlgorithmSpec:
    return AlgorithmSpec.from_dict(as_plain(config.get(path)))


def labelled_algorithms(config: ConfigNode, default_eta: float = 0.0) -> List[Tuple[str, AlgorithmSpec]]:
    """(label, AlgorithmSpec) pairs in configuration order; entries without eta get default_eta"""
    result = []
    for label, spec in config.get("algorithms").items():
        spec = as_plain(spec)
        spec.setdefault("eta", default_eta)
        result.append((label, AlgorithmSpec.from_dict(spec)))
    return result


def run_config_from(config: ConfigNode, algorithm: AlgorithmSpec) -> RunConfig:
    return RunConfig(
        iterations=config.get("iterations"),
        num_runs=config.get("runs"),
        base_seed=config.get("seed"),
        algorithm=algorithm,
        setup=setup_from(config),
    )


def pod_etas(config: ConfigNode) -> List[float]:
    """Explicit etas, or the logarithmic grid (defaults when neither is given)"""
    if config.get("etas") is not None:
        return [float(x) for x in config.get("etas")]
    grid = dict(DEFAULT_ETA_GRID)
    grid.update(config.get("eta_grid") or {})
    return np.geomspace(grid["start"], grid["stop"], int(grid["num"])).tolist()
