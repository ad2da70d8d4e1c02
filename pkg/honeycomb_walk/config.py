"""
配置类 - 统一配置管理
"""
import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from .exception import ConfigException, HoneycombException


def _fields_to_dict(obj: Any) -> Dict[str, Any]:
    result = {}
    for f in dataclasses.fields(obj.__class__):
        value = getattr(obj, f.name)
        if dataclasses.is_dataclass(value):
            value = value.to_dict()
        if value is not None:
            result[f.name] = value
    return result


@dataclass
class OracleConfig:
    """
    精确计算 (DP / 积分) 配置
    """
    tail_tol: float = 1e-12          # 几何跳跃尾部截断容差
    max_cells: int = 50_000_000      # DP 网格单元数上限
    quad_tol: float = 1e-12          # 积分加倍收敛容差
    max_quad: int = 2 ** 20          # 积分节点数上限
    guard: int = 24                  # x 窗口边缘保护列数

    def __post_init__(self):
        """
        初始化后的处理，验证必要的配置
        """
        if self.max_cells < 1:
            raise ConfigException("must be positive", "max_cells")
        if self.quad_tol <= 0:
            raise ConfigException("must be positive", "quad_tol")
        if self.max_quad < 64:
            raise ConfigException("must be at least 64", "max_quad")

    def to_dict(self) -> Dict[str, Any]:
        """
        将配置转换为字典

        Returns:
            配置字典
        """
        return _fields_to_dict(self)


@dataclass
class SimulationConfig:
    """
    模拟配置
    """
    record_limit: int = 1_000_000    # 超过此步数的轨迹只保留摘要
    chunk_size: int = 1 << 20        # 每次向量化抽取的步数
    batch_size: int = 4096           # Monte Carlo 每批路径数
    bridge_max_cells: int = 30_000_000  # 桥采样 h 表单元数上限

    def __post_init__(self):
        if self.record_limit < 0:
            raise ConfigException("must be nonnegative", "record_limit")
        if self.chunk_size < 1:
            raise ConfigException("must be positive", "chunk_size")
        if self.batch_size < 1:
            raise ConfigException("must be positive", "batch_size")

    def to_dict(self) -> Dict[str, Any]:
        return _fields_to_dict(self)


@dataclass
class EventConfig:
    """
    事件 A_n / B_n 与泛函约束的参数

    delta1 bounds max|Y|, delta2 bounds the occupation maximum, delta3 is the drift threshold
    and C scales the functional constraint |S_e| + |S_o| <= C sqrt(n).
    """
    delta1: float = 0.1
    delta2: float = 0.1
    delta3: float = 0.15
    C: float = 4.0

    def __post_init__(self):
        """
        初始化后的处理，检查可容许条件 2*delta3 + delta1 < 1/2
        """
        for name in ("delta1", "delta2", "delta3", "C"):
            if not getattr(self, name) > 0:
                raise ConfigException("must be positive", f"events.{name}")
        if not 2 * self.delta3 + self.delta1 < 0.5:
            raise ConfigException(
                f"2*delta3 + delta1 = {2 * self.delta3 + self.delta1} must be < 1/2", "events.delta3")

    def to_dict(self) -> Dict[str, Any]:
        return _fields_to_dict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EventConfig':
        if not isinstance(data, dict):
            raise ConfigException("must be an object", "events")
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigException(f"unknown keys {sorted(unknown)}", "events")
        kwargs = {}
        for key, value in data.items():
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigException("must be a number", f"events.{key}")
            kwargs[key] = float(value)
        return cls(**kwargs)


EXPERIMENT_KINDS = ("recurrence", "s_probability")
METHODS = ("ExactDP", "MonteCarlo")


@dataclass
class ExperimentConfig:
    """
    实验配置 (从 JSON 文件加载)
    """
    environment: Dict[str, Any]                       # 环境描述 (与环境 JSON 文件格式相同)
    n_grid: List[int]                                 # 递增的 n 序列
    kind: str = "recurrence"                          # 实验类型
    method: str = "ExactDP"                           # 计算方法
    seeds: List[int] = field(default_factory=list)    # 环境种子 (Rademacher / Perturbed)
    master_seed: int = 0                              # Monte Carlo 主种子
    events: EventConfig = field(default_factory=EventConfig)
    n_samples: int = 2000                             # Monte Carlo 样本数
    tail_tol: float = 1e-12                           # DP 尾部容差
    workers: int = 1                                  # 并行进程数

    def __post_init__(self):
        """
        初始化后的处理，验证字段并给出字段路径
        """
        from .environment import EnvironmentSpec, validate

        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigException(f"must be one of {EXPERIMENT_KINDS}", "kind")
        if self.method not in METHODS:
            raise ConfigException(f"must be one of {METHODS}", "method")
        if not isinstance(self.n_grid, list) or not self.n_grid:
            raise ConfigException("must be a non-empty list", "n_grid")
        for i, n in enumerate(self.n_grid):
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ConfigException("must be a positive integer", f"n_grid[{i}]")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigException("must be strictly increasing", "n_grid")
        for i, s in enumerate(self.seeds):
            if not isinstance(s, int) or isinstance(s, bool) or s < 0:
                raise ConfigException("must be a nonnegative integer", f"seeds[{i}]")
        if self.n_samples < 1:
            raise ConfigException("must be positive", "n_samples")
        if self.workers < 1:
            raise ConfigException("must be positive", "workers")
        if isinstance(self.events, dict):
            self.events = EventConfig.from_dict(self.events)
        try:
            spec = EnvironmentSpec.from_dict(self.environment)
            validate(spec)
        except ConfigException as e:
            raise ConfigException(e.message.split(": ", 1)[-1], f"environment.{e.field}" if e.field else "environment")
        except HoneycombException as e:
            raise ConfigException(str(e), "environment")
        if self.kind == "s_probability" and spec.f_table is None:
            raise ConfigException("s_probability needs a periodic table", "environment.f")

    def environment_spec(self):
        from .environment import EnvironmentSpec
        return EnvironmentSpec.from_dict(self.environment)

    def to_dict(self) -> Dict[str, Any]:
        return _fields_to_dict(self)

    def digest(self) -> str:
        """
        配置摘要 (用于运行清单)

        Returns:
            规范 JSON 的 sha256 十六进制摘要
        """
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """
        从字典创建配置

        Args:
            data: 解析后的 JSON 对象

        Returns:
            实验配置

        Raises:
            ConfigException: 字段缺失或无效时抛出，消息包含字段路径
        """
        if not isinstance(data, dict):
            raise ConfigException("top level must be an object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigException(f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
        for required in ("environment", "n_grid"):
            if required not in data:
                raise ConfigException("is required", required)
        if not isinstance(data["environment"], dict):
            raise ConfigException("must be an object", "environment")
        for key in ("master_seed", "n_samples", "workers"):
            if key in data and (not isinstance(data[key], int) or isinstance(data[key], bool)):
                raise ConfigException("must be an integer", key)
        if "tail_tol" in data and not isinstance(data["tail_tol"], (int, float)):
            raise ConfigException("must be a number", "tail_tol")
        if "seeds" in data and not isinstance(data["seeds"], list):
            raise ConfigException("must be a list", "seeds")
        kwargs = dict(data)
        if "events" in kwargs:
            kwargs["events"] = EventConfig.from_dict(kwargs["events"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> 'ExperimentConfig':
        """
        从 JSON 文件加载配置

        Args:
            path: 文件路径

        Returns:
            实验配置
        """
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigException(f"invalid JSON at line {e.lineno}: {e.msg}")
        return cls.from_dict(data)


def load_json(path: str) -> Optional[Dict[str, Any]]:
    """Read a JSON object from disk, mapping syntax errors to ConfigException."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigException(f"invalid JSON at line {e.lineno}: {e.msg}")
