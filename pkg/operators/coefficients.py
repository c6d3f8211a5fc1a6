"""
线性化算子的系数场

L0 v = (F v′)′ + G v，L̃ = L0 + 2ω0 f。F、G 及其导数全部以 μ 的闭式导数表示，
网格差分只用作测试对照。
"""

import warnings
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from numerics import DomainError
from solitary import WaveParams, WaveProfile


class GridResolutionWarning(UserWarning):
    """网格过粗，有限差分误差估计超过容差"""


def lagrange_multipliers(params: WaveParams) -> Tuple[float, float]:
    """
    作用泛函 ω0𝓔 + ω1F1 + F2 的 Lagrange 乘子
    :return: (ω0, ω1) = (−9a^{−2/3}, 9c·a^{−4/3}(2E + c))
    """
    a, c, E = params.a, params.c, params.E
    omega0 = -9.0 * a ** (-2.0 / 3.0)
    omega1 = 9.0 * c * a ** (-4.0 / 3.0) * (2.0 * E + c)
    return float(omega0), float(omega1)


def _field_derivatives(m0, m1, m2, m3, m4, omega1):
    """F、G 的闭式导数（链式法则，变量为 μ 及其导数）"""
    r = m0 ** (-1.0 / 3.0)
    p8, p11, p14, p17, p20 = r ** 8, r ** 11, r ** 14, r ** 17, r ** 20
    p4, p7, p10 = r ** 4, r ** 7, r ** 10

    F = -2.0 * p8
    F1 = 16.0 / 3.0 * p11 * m1
    F2 = 16.0 / 3.0 * (p11 * m2 - 11.0 / 3.0 * p14 * m1 * m1)
    F3 = 16.0 / 3.0 * (p11 * m3 - 11.0 * p14 * m1 * m2 + 154.0 / 9.0 * p17 * m1 ** 3)

    G = 2.0 / 9.0 * (24.0 * m2 * p11 - 44.0 * m1 * m1 * p14 + 45.0 * p8 - omega1 * p4)
    G1 = 2.0 / 9.0 * (24.0 * m3 * p11 - 176.0 * m1 * m2 * p14 + 616.0 / 3.0 * m1 ** 3 * p17
                      - 120.0 * m1 * p11 + 4.0 / 3.0 * omega1 * m1 * p7)
    G2 = 2.0 / 9.0 * (24.0 * m4 * p11 - 264.0 * m1 * m3 * p14 - 176.0 * m2 * m2 * p14
                      + 4312.0 / 3.0 * m1 * m1 * m2 * p17 - 10472.0 / 9.0 * m1 ** 4 * p20
                      - 120.0 * m2 * p11 + 440.0 * m1 * m1 * p14
                      + 4.0 / 3.0 * omega1 * m2 * p7 - 28.0 / 9.0 * omega1 * m1 * m1 * p10)
    return F, F1, F2, F3, G, G1, G2


# 样条插值与导出表共用的列顺序
FIELD_COLUMNS = ("F", "dF", "d2F", "d3F", "G", "dG", "d2G", "f")


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """
    网格上的系数场与渐近常数
    """
    profile: WaveProfile
    omega0: float
    omega1: float
    Fx: np.ndarray
    dFx: np.ndarray
    d2Fx: np.ndarray
    d3Fx: np.ndarray
    Gx: np.ndarray
    dGx: np.ndarray
    d2Gx: np.ndarray
    fx: np.ndarray
    F_inf: float
    G_inf: float
    f_inf: float
    f0: float
    sigma0: float
    spline: CubicSpline = field(repr=False)

    @property
    def params(self) -> WaveParams:
        return self.profile.params

    @property
    def L(self) -> float:
        return self.profile.L

    @property
    def sl_edge(self) -> float:
        """L̃ 的本质谱下端 G∞ + 2ω0 f∞ = σ0/4"""
        return self.sigma0 / 4.0

    def at(self, x) -> np.ndarray:
        """在任意 x 处插值 (F, F′, F″, F‴, G, G′, G″, f)"""
        return self.spline(x)

    def columns(self) -> dict:
        stack = (self.Fx, self.dFx, self.d2Fx, self.d3Fx, self.Gx, self.dGx, self.d2Gx, self.fx)
        return {"x": self.profile.x, **dict(zip(FIELD_COLUMNS, stack))}


def coefficient_fields(profile: WaveProfile) -> CoefficientField:
    """
    由孤立波剖面计算 F、G、f 及其导数
    :param profile: WaveProfile
    :return: CoefficientField
    """
    params = profile.params
    if np.any(profile.mu0 <= 0):
        raise DomainError("μ 必须处处为正")
    omega0, omega1 = lagrange_multipliers(params)
    F, F1, F2, F3, G, G1, G2 = _field_derivatives(
        profile.mu0, profile.mu1, profile.mu2, profile.mu3, profile.mu4, omega1)

    a, c, k = params.a, params.c, params.k
    phi = profile.phi
    f = (c - phi * phi) ** 2.5 / (3.0 * a * phi)
    phi_m = params.phi_max

    k83 = k ** (8.0 / 3.0)
    F_inf = -2.0 / k83
    G_inf = (8.0 * c - 14.0 * k * k) / ((c - k * k) * k83)
    f_inf = (c - k * k) / (3.0 * k * k)
    f0 = (c - phi_m * phi_m) ** 2.5 / (3.0 * a * phi_m)
    sigma0 = 8.0 * (c - 4.0 * k * k) / (k83 * (c - k * k))

    spline = CubicSpline(profile.x, np.column_stack([F, F1, F2, F3, G, G1, G2, f]), axis=0)
    return CoefficientField(profile, omega0, omega1, F, F1, F2, F3, G, G1, G2, f,
                            float(F_inf), float(G_inf), float(f_inf), float(f0), float(sigma0), spline)


def dispersion(r, field: CoefficientField):
    """本质谱曲线 λ(r) = G∞ − r²F∞ + 2ω0/(1+r²)"""
    r = np.asarray(r, dtype=float)
    return field.G_inf - r * r * field.F_inf + 2.0 * field.omega0 / (1.0 + r * r)


def s_operator_bounds(field: CoefficientField) -> Tuple[float, float]:
    """S = f − (1−∂²)^{-1} 的谱包含区间 [f0 − 1, f∞]"""
    return field.f0 - 1.0, field.f_inf


def _d1(v, h):
    out = np.zeros_like(v)
    out[2:-2] = (-v[4:] + 8.0 * v[3:-1] - 8.0 * v[1:-3] + v[:-4]) / (12.0 * h)
    return out


def _d2(v, h):
    out = np.zeros_like(v)
    out[2:-2] = (-v[4:] + 16.0 * v[3:-1] - 30.0 * v[2:-2] + 16.0 * v[1:-3] - v[:-4]) / (12.0 * h * h)
    return out


def _d2_low(v, h):
    out = np.zeros_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    return out


def apply_eigensystem_discrete(v, lam, field: CoefficientField, tol: float = 1e-3) -> np.ndarray:
    """
    四阶中心差分计算 (1−∂²)(L0−λ)v + 2ω0 v，仅用于验证
    :param v: 网格函数（在 ±L 附近为零）
    :param lam: 谱参数
    :param field: 系数场
    :param tol: 二阶/四阶差分之差相对大小的警告阈值
    :return: 残差（距边界 4 个点以内置零）
    """
    v = np.asarray(v)
    h = field.profile.h
    dv = _d1(v, h)
    d2v = _d2(v, h)

    scale = np.max(np.abs(d2v))
    if scale > 0:
        estimate = np.max(np.abs(d2v - _d2_low(v, h))[2:-2]) / scale
        if estimate > tol:
            warnings.warn(f"网格过粗: h² 误差估计 {estimate:.2e} 超过 {tol:.0e}", GridResolutionWarning)

    u = field.Fx * d2v + field.dFx * dv + (field.Gx - lam) * v
    residual = u - _d2(u, h) + 2.0 * field.omega0 * v
    residual[:4] = 0.0
    residual[-4:] = 0.0
    return residual


def eigensystem_scale(v, field: CoefficientField) -> float:
    """残差的归一化尺度 ‖∂²(F∂²v)‖∞（(1−∂²)L0 v 的主项）"""
    h = field.profile.h
    return float(np.max(np.abs(_d2(field.Fx * _d2(np.asarray(v), h), h))))


def sl_kernel_residual(field: CoefficientField) -> np.ndarray:
    """
    L̃μ′ = F′μ″ + Fμ‴ + (G + 2ω0 f)μ′，全部为闭式量；平移模在 L̃ 的核中，残差应为舍入误差量级。
    返回按 |Fμ‴| 最大值归一化的残差。
    """
    profile = field.profile
    residual = (field.dFx * profile.mu2 + field.Fx * profile.mu3
                + (field.Gx + 2.0 * field.omega0 * field.fx) * profile.mu1)
    scale = np.max(np.abs(field.Fx * profile.mu3))
    return residual / scale
