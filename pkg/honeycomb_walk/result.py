"""
结果类 - 统一的数值结果与运行清单
"""
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional


def fmt(value: Optional[float]) -> str:
    """17 significant digits, round-trip safe; empty for a missing value."""
    if value is None:
        return ""
    return format(float(value), ".17g")


class Method(Enum):
    """
    计算方法枚举
    """
    EXACT_DP = "ExactDP"         # 精确动态规划
    MONTE_CARLO = "MonteCarlo"   # 蒙特卡洛模拟

    @classmethod
    def parse(cls, value: Any) -> 'Method':
        if isinstance(value, cls):
            return value
        return cls(str(value))


@dataclass
class ExperimentResult:
    """
    单个 n 的估计结果
    """
    n: int                          # 半时间长度
    estimate: float                 # p_n 估计值
    stderr: float                   # 标准误 (精确方法为 0)
    method: Method                  # 计算方法
    env_digest: str                 # 环境摘要
    seed: Optional[int] = None      # 环境种子
    deficit: float = 0.0            # DP 截断亏损

    @classmethod
    def exact(cls, n: int, estimate: float, env_digest: str, seed: Optional[int] = None,
              deficit: float = 0.0) -> 'ExperimentResult':
        """
        创建精确结果

        Args:
            n: 半时间长度
            estimate: 概率值
            env_digest: 环境摘要
            seed: 环境种子
            deficit: 截断亏损

        Returns:
            结果对象
        """
        return cls(n=n, estimate=estimate, stderr=0.0, method=Method.EXACT_DP, env_digest=env_digest,
                   seed=seed, deficit=deficit)

    @classmethod
    def monte_carlo(cls, n: int, estimate: float, stderr: float, env_digest: str,
                    seed: Optional[int] = None) -> 'ExperimentResult':
        """
        创建蒙特卡洛结果

        Args:
            n: 半时间长度
            estimate: 样本均值
            stderr: 标准误
            env_digest: 环境摘要
            seed: 环境种子

        Returns:
            结果对象
        """
        return cls(n=n, estimate=estimate, stderr=stderr, method=Method.MONTE_CARLO, env_digest=env_digest,
                   seed=seed)

    def to_row(self) -> str:
        return ",".join([str(self.n), fmt(self.estimate), fmt(self.stderr), self.method.value, self.env_digest])

    def __str__(self) -> str:
        return f"p_{self.n} = {self.estimate:.6g} +- {self.stderr:.2g} [{self.method.value}]"


CSV_HEADER = "n,p,stderr,method,env_digest"


@dataclass
class ResultTable:
    """
    结果表
    按加入顺序保存结果
    """
    results: List[ExperimentResult] = field(default_factory=list)

    def add_result(self, result: ExperimentResult) -> None:
        self.results.append(result)

    def extend(self, other: 'ResultTable') -> None:
        self.results.extend(other.results)

    def get_method_results(self, method: Method) -> List[ExperimentResult]:
        """
        获取指定方法的结果

        Args:
            method: 计算方法

        Returns:
            结果列表
        """
        return [r for r in self.results if r.method is method]

    def get_digest_results(self, env_digest: str) -> List[ExperimentResult]:
        return [r for r in self.results if r.env_digest == env_digest]

    def to_csv(self, manifest: Optional['RunManifest'] = None) -> str:
        """
        CSV 文本 "n,p,stderr,method,env_digest"

        Args:
            manifest: 运行清单, 作为 # 注释行写在表头之前

        Returns:
            CSV 文本
        """
        lines = manifest.comment_lines() if manifest else []
        lines.append(CSV_HEADER)
        lines.extend(r.to_row() for r in self.results)
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return len(self.results)

    def __str__(self) -> str:
        digests = {r.env_digest for r in self.results}
        return f"结果表 [行数: {len(self.results)}] [环境数: {len(digests)}]"


@dataclass(frozen=True)
class RunManifest:
    """
    运行清单
    随每个输出文件一起写出
    """
    command: str
    config_digest: str
    master_seed: int
    tool_version: str
    timestamp: str

    @classmethod
    def create(cls, command: str, config_digest: str, master_seed: int, tool_version: str,
               timestamp: Optional[str] = None) -> 'RunManifest':
        """
        创建运行清单

        Args:
            command: 子命令名称
            config_digest: 配置摘要
            master_seed: 主种子
            tool_version: 工具版本
            timestamp: ISO-8601 时间戳, 默认当前 UTC 时间

        Returns:
            清单对象
        """
        if timestamp is None:
            timestamp = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        return cls(command=command, config_digest=config_digest, master_seed=int(master_seed),
                   tool_version=tool_version, timestamp=timestamp)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "master_seed": self.master_seed,
            "tool_version": self.tool_version,
            "timestamp": self.timestamp,
        }

    def comment_lines(self) -> List[str]:
        return [f"# {key}: {value}" for key, value in self.to_dict().items()]

    def to_json(self) -> str:
        return json.dumps({"manifest": self.to_dict()}, sort_keys=True)


def clean_float(value: float) -> Optional[float]:
    """NaN and infinities become None so summaries stay valid JSON."""
    if value is None or not math.isfinite(value):
        return None
    return float(value)
