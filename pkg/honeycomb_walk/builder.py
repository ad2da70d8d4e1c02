"""
环境构建器 - 便于构建和校验环境描述
"""
import logging
from typing import Optional, Sequence

from .environment import EnvironmentSpec, Regime, validate
from .exception import InvalidArgumentException

log = logging.getLogger(__name__)


class EnvironmentBuilder:
    """
    环境构建器
    支持链式调用
    """

    def __init__(self):
        """
        初始化
        """
        self._regime: Optional[Regime] = None
        self._seed = 0
        self._period: Optional[int] = None
        self._f_table: Optional[Sequence[int]] = None
        self._c = 0.0
        self._beta = 1.0

    @classmethod
    def builder(cls) -> 'EnvironmentBuilder':
        """
        创建构建器实例

        Returns:
            构建器实例
        """
        return cls()

    def rademacher(self, seed: int = 0) -> 'EnvironmentBuilder':
        """
        独立同分布 ±1 行方向

        Args:
            seed: 64 位无符号种子

        Returns:
            构建器实例
        """
        self._regime = Regime.RADEMACHER
        self._seed = seed
        return self

    def periodic(self, f_table: Sequence[int], period: Optional[int] = None) -> 'EnvironmentBuilder':
        """
        周期行方向

        Args:
            f_table: 一个周期内的方向表
            period: 周期 Q (默认取表长)

        Returns:
            构建器实例
        """
        self._regime = Regime.PERIODIC
        self._f_table = list(f_table)
        self._period = len(self._f_table) if period is None else period
        return self

    def perturbed(self, f_table: Sequence[int], c: float, beta: float, seed: int = 0,
                  period: Optional[int] = None) -> 'EnvironmentBuilder':
        """
        扰动周期行方向

        Args:
            f_table: 一个周期内的方向表
            c: 扰动强度
            beta: 扰动衰减指数
            seed: 64 位无符号种子
            period: 周期 Q (默认取表长)

        Returns:
            构建器实例
        """
        self.periodic(f_table, period)
        self._regime = Regime.PERTURBED
        self._c = c
        self._beta = beta
        self._seed = seed
        return self

    def seed(self, seed: int) -> 'EnvironmentBuilder':
        """
        设置种子

        Args:
            seed: 64 位无符号种子

        Returns:
            构建器实例
        """
        self._seed = seed
        return self

    def build(self) -> EnvironmentSpec:
        """
        构建并校验环境描述

        Returns:
            环境描述

        Raises:
            InvalidArgumentException: 未选择环境类型
            ValidationException: 不变量不成立
        """
        if self._regime is None:
            raise InvalidArgumentException("no regime selected")
        if self._regime is Regime.PERIODIC and self._seed:
            log.warning("seed %d is ignored by the periodic regime", self._seed)
        spec = EnvironmentSpec(
            regime=self._regime,
            seed=self._seed,
            period=self._period,
            f_table=tuple(self._f_table) if self._f_table is not None else None,
            c=self._c,
            beta=self._beta,
        )
        validate(spec)
        return spec
