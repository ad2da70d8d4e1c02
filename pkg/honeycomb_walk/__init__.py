"""
honeycomb-walk - 定向蜂窝格上的随机游走: 模拟、精确动态规划与递归性诊断
"""

from .environment import EnvironmentSpec, MaterializedEnvironment, Orientation, Regime, materialize
from .builder import EnvironmentBuilder
from .config import EventConfig, ExperimentConfig, OracleConfig, SimulationConfig
from .lattice import Vertex, WalkTrace, simulate_walk
from .skeleton import SkeletonPath, SkeletonState
from .embedded import GeomKind, PathStats, Support
from .oracle import DistributionGrid
from .result import ExperimentResult, Method, ResultTable, RunManifest

__version__ = "0.1.0"
__author__ = "honeycomb-walk developers"

__all__ = [
    "EnvironmentSpec",          # 环境描述
    "MaterializedEnvironment",  # 物化的方向表
    "Orientation",              # 行方向枚举
    "Regime",                   # 环境类型枚举
    "materialize",              # 物化方向表
    "EnvironmentBuilder",       # 环境构建器
    "EventConfig",              # 事件参数
    "ExperimentConfig",         # 实验配置
    "OracleConfig",             # 精确计算配置
    "SimulationConfig",         # 模拟配置
    "Vertex",                   # 格点
    "WalkTrace",                # 游走轨迹
    "simulate_walk",            # 模拟完整游走
    "SkeletonPath",             # 竖直骨架路径
    "SkeletonState",            # 骨架状态
    "GeomKind",                 # 奇/偶几何分布类型
    "PathStats",                # 路径跳跃统计
    "Support",                  # 支撑集枚举
    "DistributionGrid",         # 概率网格
    "ExperimentResult",         # 单个结果
    "Method",                   # 计算方法枚举
    "ResultTable",              # 结果表
    "RunManifest",              # 运行清单
]
