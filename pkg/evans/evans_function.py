"""
Evans 函数

D(λ)：四阶特征值问题 (1−∂²)(L0−λ)v + 2ω0 v = 0 的 Evans 函数，用二阶外幂（compound matrix）
方法计算，衰减子空间以 2-形式 W± 表示，增长率 μ1± + μ2± 预先扣除，分段重归一化。

D̃(λ)：局部 Sturm-Liouville 算子 L̃ = L0 + 2ω0 f 的 2×2 Evans 函数。
"""

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from numerics import (
    DEFAULT_TOLERANCES,
    EssentialSpectrumError,
    Tolerances,
    biquadratic_roots,
    integrate_ode,
)
from operators import CoefficientField

from .compound import companion_lift, pairing


@dataclass(frozen=True)
class EvansEvaluation:
    """
    :param lam: 谱参数
    :param value: 重归一化后的 Evans 函数值
    :param renorm_log: 累计的重归一化指数，完整值 D = value·exp(renorm_log)
    :param ok: 诊断标志
    """
    lam: complex
    value: complex
    renorm_log: float
    ok: bool = True

    @property
    def full(self) -> complex:
        return self.value * np.exp(self.renorm_log)


@dataclass(frozen=True)
class Splitting:
    """渐近矩阵的根：左右半平面各两个"""
    plus: Tuple[complex, complex]
    minus: Tuple[complex, complex]
    roots: np.ndarray

    @property
    def margin(self) -> float:
        """根到虚轴的最小距离"""
        return float(np.min(np.abs(self.roots.real)))


def vandermonde(mu) -> np.ndarray:
    """伴随矩阵关于特征值 μ 的特征向量 (1, μ, μ², μ³)"""
    return np.array([1.0, mu, mu * mu, mu ** 3])


def asymptotic_coefficients(lam, field: CoefficientField) -> Tuple[complex, complex]:
    """
    A∞(λ) 第 4 行的非零元 (A43∞, A41∞)，由内部系数在 x→±∞ 的极限得到
    """
    F, G = field.F_inf, field.G_inf
    a41 = (G + 2.0 * field.omega0 - lam) / F
    a43 = (F - G + lam) / F
    return a43, a41


def asymptotic_matrix(lam, field: CoefficientField) -> np.ndarray:
    a43, a41 = asymptotic_coefficients(lam, field)
    A = np.eye(4, k=1, dtype=complex)
    A[3] = [a41, 0.0, a43, 0.0]
    return A


def asymptotic_splitting(lam, field: CoefficientField, previous: Optional[np.ndarray] = None) -> Splitting:
    """
    μ⁴ − A43∞μ² − A41∞ = 0 的四个根按实部符号分组
    :param previous: 围道上前一点的根，用于分支连续
    """
    a43, a41 = asymptotic_coefficients(lam, field)
    roots = biquadratic_roots(a43, a41, previous=previous)
    if np.min(np.abs(roots.real)) < 1e-12:
        raise EssentialSpectrumError(f"λ = {complex(lam):.6g} 位于本质谱上")
    plus = roots[roots.real > 0]
    minus = roots[roots.real < 0]
    if plus.size != 2 or minus.size != 2:
        raise EssentialSpectrumError(f"λ = {complex(lam):.6g} 处根的分裂不是 2+2")
    return Splitting(tuple(plus), tuple(minus), roots)


def symmetric_wedge(mu1, mu2) -> np.ndarray:
    """
    v(μ1)∧v(μ2)/(μ2 − μ1)，以 s = μ1+μ2、p = μ1μ2 表示；
    对两根的交换对称，因此在 λ 上解析，不需要分支延拓。
    """
    s, p = mu1 + mu2, mu1 * mu2
    return np.array([1.0, s, s * s - p, p, p * s, p * p], dtype=complex)


def _integrate_normalized(rhs: Callable, y0: np.ndarray, x_start: float, segments: int,
                          tol: Tolerances) -> Tuple[np.ndarray, float]:
    y = np.asarray(y0)
    scale = np.max(np.abs(y))
    y = y / scale
    log_scale = float(np.log(scale))
    nodes = np.linspace(x_start, 0.0, segments + 1)
    for xa, xb in zip(nodes[:-1], nodes[1:]):
        y = integrate_ode(rhs, y, (xa, xb), tol, dense=False).final
        scale = np.max(np.abs(y))
        y = y / scale
        log_scale += float(np.log(scale))
    return y, log_scale


class EvansSystem:
    """
    四阶特征值问题的一阶伴随系统 U′ = A(x, λ)U
    实例可被 pickle，供进程池并行求值。
    """

    def __init__(self, field: CoefficientField, tol: Tolerances = DEFAULT_TOLERANCES, segments: int = 8):
        self.field = field
        self.L = field.L
        self.tol = tol.for_evans()
        self.segments = segments

    def row4(self, x: float, lam) -> np.ndarray:
        F, F1, F2, F3, G, G1, G2, _ = self.field.at(x)
        w0 = self.field.omega0
        return np.array([
            (G - G2 + 2.0 * w0 - lam) / F,
            (F1 - 2.0 * G1 - F3) / F,
            (F - G - 3.0 * F2 + lam) / F,
            -3.0 * F1 / F,
        ])

    def matrix(self, x: float, lam) -> np.ndarray:
        A = np.eye(4, k=1, dtype=np.result_type(lam, float))
        A[3] = self.row4(x, lam)
        return A

    def evaluate(self, lam) -> EvansEvaluation:
        lam = complex(lam)
        split = asymptotic_splitting(lam, self.field)

        def wedge_rhs(shift):
            def rhs(x, W):
                return companion_lift(self.row4(x, lam)) @ W - shift * W
            return rhs

        w_plus, log_plus = _integrate_normalized(
            wedge_rhs(sum(split.plus)), symmetric_wedge(*split.plus), -self.L, self.segments, self.tol)
        w_minus, log_minus = _integrate_normalized(
            wedge_rhs(sum(split.minus)), symmetric_wedge(*split.minus), self.L, self.segments, self.tol)
        return EvansEvaluation(lam, complex(pairing(w_plus, w_minus)), log_plus + log_minus)

    def __call__(self, lam) -> complex:
        return self.evaluate(lam).full


def evans_eval(lam, system: EvansSystem) -> EvansEvaluation:
    """D(λ) = det(U1+, U2+, U1−, U2−)|_{x=0}"""
    return system.evaluate(lam)


def evans_eval_SL(lam, field: CoefficientField, tol: Tolerances = DEFAULT_TOLERANCES,
                  segments: int = 4) -> EvansEvaluation:
    """
    D̃(λ) = det[U+(0), U−(0)]，系统 v′ = w，w′ = ((λ − G − 2ω0 f)v − F′w)/F。
    实 λ 时全程实数运算，D̃ 为实数。
    :param lam: λ < σ0/4（实），或复 λ 不在 [σ0/4, ∞) 上
    """
    edge = field.sl_edge
    is_real = np.isrealobj(lam) or np.imag(lam) == 0
    if is_real:
        lam = float(np.real(lam))
        if lam >= edge:
            raise EssentialSpectrumError(f"λ = {lam:.6g} ≥ σ0/4 = {edge:.6g}，位于 L̃ 的本质谱上")
        nu = np.sqrt((edge - lam) * field.params.k ** (8.0 / 3.0) / 2.0)
    else:
        lam = complex(lam)
        nu = np.sqrt((edge - lam) * field.params.k ** (8.0 / 3.0) / 2.0)
        if nu.real <= 1e-12:
            raise EssentialSpectrumError(f"λ = {lam:.6g} 位于 L̃ 的本质谱上")

    w0 = field.omega0
    evans_tol = tol.for_evans()

    def rhs(shift):
        def f(x, y):
            F, F1, _, _, G, _, _, fw = field.at(x)
            return np.array([y[1], ((lam - G - 2.0 * w0 * fw) * y[0] - F1 * y[1]) / F]) - shift * y
        return f

    dtype = float if is_real else complex
    u_plus, log_plus = _integrate_normalized(rhs(nu), np.array([1.0, nu], dtype=dtype),
                                             -field.L, segments, evans_tol)
    u_minus, log_minus = _integrate_normalized(rhs(-nu), np.array([1.0, -nu], dtype=dtype),
                                               field.L, segments, evans_tol)
    value = u_plus[0] * u_minus[1] - u_plus[1] * u_minus[0]
    return EvansEvaluation(lam, value, log_plus + log_minus)


class SLEvansFunction:
    """可 pickle 的 D̃ 包装，用于围道求值"""

    def __init__(self, field: CoefficientField, tol: Tolerances = DEFAULT_TOLERANCES):
        self.field = field
        self.tol = tol

    def __call__(self, lam) -> complex:
        return complex(evans_eval_SL(lam, self.field, self.tol).full)
