"""
异常层级

所有数值模块通过以下异常报告问题；协调层（main.py）根据异常类型决定退出码：
ParameterError → 2，NumericalError → 3。
"""

from typing import Optional


class NovikovError(Exception):
    """
    根异常
    :param message: 错误信息
    :param stage: 出错的流程阶段（profile / fields / lambda_minus / contours / winding ...）
    """

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        self.stage = stage

    def with_stage(self, stage: str) -> "NovikovError":
        if self.stage is None:
            self.stage = stage
        return self


class ParameterError(NovikovError, ValueError):
    """参数不可容许"""


class DomainError(ParameterError):
    """函数在定义域外被调用"""


class NumericalError(NovikovError):
    """数值失败的基类"""


class BracketError(NumericalError):
    """求根区间两端函数值不变号"""


class IntegrationError(NumericalError):
    """ODE 积分失败（步长下溢，通常意味着奇点或刚性）"""

    def __init__(self, message: str, x: float, stage: Optional[str] = None):
        super().__init__(f"{message} (x = {x:.6g})", stage)
        self.x = x


class QuadratureError(NumericalError):
    """自适应求积未收敛"""

    def __init__(self, message: str, estimate: float, stage: Optional[str] = None):
        super().__init__(f"{message} (最后估计值 = {estimate:.12e})", stage)
        self.estimate = estimate


class ShootingError(NumericalError):
    """打靶轨道离开 φ² < c 区域或未到达波峰"""


class EssentialSpectrumError(NumericalError):
    """λ 位于本质谱上：渐近矩阵存在纯虚特征值"""


class ContourError(NumericalError):
    """Evans 函数在围道上接近零，或环绕数不是整数"""
