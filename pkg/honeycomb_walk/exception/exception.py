"""Base exceptions for honeycomb-walk."""
from typing import Any, Dict, Optional


class HoneycombException(Exception):
    """
    基础异常

    All exceptions raised by the honeycomb_walk package inherit from this class,
    so callers can catch every package error with a single except clause.
    """

    code: str = "HoneycombError"

    def __init__(self, message: str, code: Optional[str] = None, data: Optional[Dict[str, Any]] = None):
        """
        初始化

        Args:
            message: 错误消息
            code: 错误代码 (默认使用类属性 code)
            data: 附加数据
        """
        self.message = message
        if code is not None:
            self.code = code
        self.data = data or {}

        super().__init__(message)

    def __str__(self) -> str:
        """
        字符串表示

        Returns:
            异常的字符串表示
        """
        if self.code:
            return f"{self.message} ({self.code})"
        return self.message


class ValidationException(HoneycombException):
    """
    环境校验异常

    Parent of the errors raised when an EnvironmentSpec breaks one of its invariants.
    """

    code = "ValidationError"


class InvalidPeriodException(ValidationException):
    """Period Q is odd or not larger than 1."""

    code = "InvalidPeriod"


class NonZeroSumException(ValidationException):
    """The periodic table does not sum to zero over one period."""

    code = "NonZeroSum"


class InvalidParamException(ValidationException):
    """A numeric environment parameter is out of range (c < 0, beta <= 0, bad table entry)."""

    code = "InvalidParam"


class InvalidArgumentException(HoneycombException):
    """
    无效参数异常

    当提供的参数无效时抛出
    """

    code = "InvalidArgument"


class RangeException(InvalidArgumentException):
    """Inclusive range with y_min > y_max."""

    code = "RangeError"


class DomainException(InvalidArgumentException):
    """Argument outside the domain where a transform is finite."""

    code = "DomainError"


class DegenerateVarianceException(InvalidArgumentException):
    """Gaussian approximation requested for a path without jumps."""

    code = "DegenerateVariance"


class OverflowException(HoneycombException):
    """A value left the double precision range."""

    code = "Overflow"


class TruncationTooCoarseException(HoneycombException):
    """A truncated series cannot meet the requested tolerance."""

    code = "TruncationTooCoarse"


class QuadratureNotConvergedException(HoneycombException):
    """Resolution doubling stopped before the inversion integral settled."""

    code = "QuadratureNotConverged"


class TailTolTooLooseException(InvalidArgumentException):
    """Tail tolerance is not a usable truncation threshold."""

    code = "TailTolTooLoose"


class LTooSmallException(InvalidArgumentException):
    """A perturbed level beyond the cutoff L was visited."""

    code = "LTooSmall"


class ZeroAcceptanceException(HoneycombException):
    """Rejection sampling never hit the conditioning event."""

    code = "ZeroAcceptance"


class InvariantViolationException(HoneycombException):
    """An identity that must hold on every path failed."""

    code = "InvariantViolation"


class ResourceLimitException(HoneycombException):
    """
    资源限制异常

    当 DP 网格超过配置的单元数上限时抛出
    """

    code = "ResourceLimit"

    def __init__(self, message: str, dimension: str, requested: int, limit: int):
        """
        初始化

        Args:
            message: 错误消息
            dimension: 超限的维度名称 (例如 "rows x cols")
            requested: 请求的单元数
            limit: 允许的单元数
        """
        self.dimension = dimension
        self.requested = requested
        self.limit = limit
        super().__init__(message, data={"dimension": dimension, "requested": requested, "limit": limit})

    def __str__(self) -> str:
        return f"{self.message} [{self.dimension}: {self.requested} > {self.limit}] ({self.code})"


class ConfigException(HoneycombException):
    """
    配置异常

    Raised for malformed experiment or environment files; ``field`` holds the dotted path
    of the offending entry.
    """

    code = "ConfigError"

    def __init__(self, message: str, field: str = ""):
        """
        初始化

        Args:
            message: 错误消息
            field: 出错字段的路径 (例如 "events.delta1")
        """
        self.field = field
        super().__init__(f"{field}: {message}" if field else message, data={"field": field})
