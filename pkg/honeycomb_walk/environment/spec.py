"""
Environment description, validation and materialisation.
"""
import hashlib
import importlib
import json
import logging
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from ..contract import BaseOrientation
from ..exception import (
    ConfigException,
    InvalidArgumentException,
    InvalidParamException,
    InvalidPeriodException,
    NonZeroSumException,
    RangeException,
)

log = logging.getLogger(__name__)

_U64_MAX = (1 << 64) - 1


class Orientation(IntEnum):
    """
    行方向
    """
    LEFT = -1    # 向左的行
    RIGHT = 1    # 向右的行


class Regime(Enum):
    """
    方向环境类型
    """
    RADEMACHER = "rademacher"   # 独立同分布 ±1
    PERIODIC = "periodic"       # 周期表 f(y mod Q)
    PERTURBED = "perturbed"     # 周期表加随机扰动

    @classmethod
    def parse(cls, value: Union[str, 'Regime']) -> 'Regime':
        if isinstance(value, Regime):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgumentException(f"unknown regime: {value}")

    @property
    def uses_table(self) -> bool:
        return self is not Regime.RADEMACHER

    @property
    def uses_seed(self) -> bool:
        return self is not Regime.PERIODIC


@dataclass(frozen=True)
class EnvironmentSpec:
    """
    环境描述 (不可变)

    Two specs with equal fields give identical orientation functions; nothing is stored
    beyond the parameters, rows are computed on demand.
    """
    regime: Regime
    seed: int = 0                                # Rademacher / Perturbed
    period: Optional[int] = None                 # Q, Periodic / Perturbed
    f_table: Optional[Tuple[int, ...]] = None    # 周期表
    c: float = 0.0                               # 扰动强度
    beta: float = 1.0                            # 扰动衰减指数

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        if self.f_table is not None:
            object.__setattr__(self, "f_table", tuple(int(v) for v in self.f_table))

    def to_dict(self) -> Dict[str, Any]:
        """
        转换为环境 JSON 格式

        Returns:
            {"regime", "seed", "Q", "f", "c", "beta"} 中与类型相关的字段
        """
        data: Dict[str, Any] = {"regime": self.regime.value}
        if self.regime.uses_seed:
            data["seed"] = int(self.seed)
        if self.regime.uses_table:
            data["Q"] = self.period
            data["f"] = list(self.f_table) if self.f_table is not None else None
        if self.regime is Regime.PERTURBED:
            data["c"] = float(self.c)
            data["beta"] = float(self.beta)
        return data

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EnvironmentSpec':
        """
        从环境 JSON 对象创建

        Args:
            data: 解析后的 JSON 对象

        Returns:
            环境描述 (未校验不变量，调用 validate)

        Raises:
            ConfigException: 字段类型错误时抛出
        """
        if not isinstance(data, dict):
            raise ConfigException("must be an object")
        unknown = set(data) - {"regime", "seed", "Q", "f", "c", "beta"}
        if unknown:
            raise ConfigException(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
        if "regime" not in data:
            raise ConfigException("is required", "regime")
        try:
            regime = Regime.parse(data["regime"])
        except InvalidArgumentException as e:
            raise ConfigException(e.message, "regime")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigException("must be an integer", "seed")
        period = data.get("Q")
        if period is not None and (not isinstance(period, int) or isinstance(period, bool)):
            raise ConfigException("must be an integer", "Q")
        f_table = data.get("f")
        if f_table is not None:
            if not isinstance(f_table, list):
                raise ConfigException("must be a list", "f")
            for i, v in enumerate(f_table):
                if not isinstance(v, int) or isinstance(v, bool):
                    raise ConfigException("must be an integer", f"f[{i}]")
        for key in ("c", "beta"):
            if key in data and (not isinstance(data[key], (int, float)) or isinstance(data[key], bool)):
                raise ConfigException("must be a number", key)
        return cls(regime=regime, seed=seed, period=period,
                   f_table=tuple(f_table) if f_table is not None else None,
                   c=float(data.get("c", 0.0)), beta=float(data.get("beta", 1.0)))

    @classmethod
    def from_file(cls, path: str) -> 'EnvironmentSpec':
        from ..config import load_json
        return cls.from_dict(load_json(path))

    def to_file(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def _validate_table(spec: EnvironmentSpec) -> None:
    q = spec.period
    if q is None or q <= 1 or q % 2 != 0:
        raise InvalidPeriodException(f"period Q={q} must be an even integer > 1")
    if spec.f_table is None:
        raise InvalidParamException("periodic table f is required")
    if len(spec.f_table) != q:
        raise InvalidParamException(f"table has {len(spec.f_table)} entries, expected Q={q}")
    if any(v not in (-1, 1) for v in spec.f_table):
        raise InvalidParamException("table entries must be +1 or -1")
    total = sum(spec.f_table)
    if total != 0:
        raise NonZeroSumException(f"table sums to {total}, expected 0")


def _validate_perturbation(c: float, beta: float) -> None:
    if not c >= 0:
        raise InvalidParamException(f"c={c} must be nonnegative")
    if not beta > 0:
        raise InvalidParamException(f"beta={beta} must be positive")


def validate(spec: EnvironmentSpec) -> None:
    """
    检查环境描述的全部不变量

    Args:
        spec: 环境描述

    Raises:
        InvalidPeriodException: Q 为奇数或 Q <= 1
        NonZeroSumException: 周期表之和不为 0
        InvalidParamException: c < 0, beta <= 0, 种子或表项无效
    """
    if spec.regime.uses_table:
        _validate_table(spec)
    if spec.regime.uses_seed and not 0 <= spec.seed <= _U64_MAX:
        raise InvalidParamException(f"seed={spec.seed} must be a 64-bit unsigned integer")
    if spec.regime is Regime.PERTURBED:
        _validate_perturbation(spec.c, spec.beta)


_orientations: Dict[Regime, BaseOrientation] = {}


def _create_orientation(regime: Regime) -> BaseOrientation:
    """
    创建方向实现实例

    Args:
        regime: 环境类型

    Returns:
        方向实现实例 (模块 environment.<name> 中的 <Name>Orientation 类)

    Raises:
        InvalidArgumentException: 无法创建时抛出
    """
    if regime in _orientations:
        return _orientations[regime]
    name = regime.value
    try:
        module = importlib.import_module(f".environment.{name}", package="honeycomb_walk")
        class_name = "".join(word.capitalize() for word in name.split("_")) + "Orientation"
        if hasattr(module, class_name):
            _orientations[regime] = getattr(module, class_name)()
            return _orientations[regime]
    except ImportError:
        pass
    raise InvalidArgumentException(f"未找到方向实现: {name}")


def orientations(spec: EnvironmentSpec, ys) -> np.ndarray:
    """
    Vectorised orientation lookup.

    Args:
        spec: a valid environment description
        ys: integer level(s)

    Returns:
        int64 array of ±1 with the shape of ``ys``
    """
    return _create_orientation(spec.regime).orientations(spec, np.asarray(ys, dtype=np.int64))


def orientation(spec: EnvironmentSpec, y: int) -> Orientation:
    """Orientation of row ``y``."""
    validate(spec)
    return Orientation(int(orientations(spec, y)))


def perturbation_probability(c: float, beta: float, y):
    """
    Probability that row y is re-drawn at random: min(1, c/|y|^beta), and min(1, c) at y=0.

    Args:
        c: strength, c >= 0
        beta: decay exponent, beta > 0
        y: level or integer array of levels

    Returns:
        float, or float array for array input
    """
    _validate_perturbation(c, beta)
    ys = np.abs(np.asarray(y, dtype=np.float64))
    with np.errstate(divide="ignore"):
        p = np.where(ys == 0, c, c / np.power(np.where(ys == 0, 1.0, ys), beta))
    p = np.minimum(1.0, p)
    return float(p) if np.ndim(p) == 0 else p


def perturbed_levels(spec: EnvironmentSpec, y_min: int, y_max: int) -> np.ndarray:
    """
    Levels in [y_min, y_max] whose periodic value is replaced by the random one.

    Args:
        spec: a valid environment description
        y_min: lower end (inclusive)
        y_max: upper end (inclusive)

    Returns:
        sorted int64 array, empty unless the regime is Perturbed
    """
    if y_min > y_max:
        raise RangeException(f"y_min={y_min} > y_max={y_max}")
    ys = np.arange(y_min, y_max + 1, dtype=np.int64)
    mask = _create_orientation(spec.regime).perturbed_mask(spec, ys)
    return ys[mask]


@dataclass(frozen=True, eq=False)
class MaterializedEnvironment:
    """
    物化的方向表
    """
    spec: EnvironmentSpec
    levels: np.ndarray
    values: np.ndarray
    digest: str

    @property
    def rows(self) -> List[Tuple[int, Orientation]]:
        return [(int(y), Orientation(int(v))) for y, v in zip(self.levels, self.values)]

    def to_csv(self) -> str:
        """
        CSV 表示

        Returns:
            "y,orientation" 表头、逐行数据与结尾摘要行
        """
        return _table_text(self.levels, self.values) + f"# digest: {self.digest}\n"


def _table_text(levels: np.ndarray, values: np.ndarray) -> str:
    lines = ["y,orientation"]
    lines.extend(f"{int(y)},{int(v):+d}" for y, v in zip(levels, values))
    return "\n".join(lines) + "\n"


def materialize(spec: EnvironmentSpec, y_min: int, y_max: int) -> MaterializedEnvironment:
    """
    物化闭区间 [y_min, y_max] 的方向表

    Args:
        spec: 环境描述
        y_min: 下端
        y_max: 上端

    Returns:
        方向表及其 sha256 摘要

    Raises:
        RangeException: y_min > y_max
    """
    validate(spec)
    if y_min > y_max:
        raise RangeException(f"y_min={y_min} > y_max={y_max}")
    levels = np.arange(y_min, y_max + 1, dtype=np.int64)
    values = orientations(spec, levels)
    digest = hashlib.sha256(_table_text(levels, values).encode("utf-8")).hexdigest()
    log.debug("materialized %s on [%d, %d]: %s", spec.regime.value, y_min, y_max, digest[:12])
    return MaterializedEnvironment(spec=spec, levels=levels, values=values, digest=digest)
