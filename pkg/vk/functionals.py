"""
守恒量与 Vakhitov-Kolokolov 条件

孤立波族上的积分在 φ 变量下计算：dx = dφ/√(2(E−V))，
x ∈ (−∞, ∞) 对应 φ ∈ (k, φ_M] 的两次遍历，因此结果乘以 2。
"""

from concurrent.futures import Executor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from scipy.integrate import simpson

from numerics import DEFAULT_TOLERANCES, DomainError, ParameterError, Tolerances, quad_singular
from solitary import (
    GridSpec,
    WaveParams,
    WaveProfile,
    crest_orbit,
    energy_gap,
    params_from_k,
    shoot_profile,
)

# 下端点截断比例：积分区间为 [k + CLIP·(φ_M−k), φ_M]
CLIP = 1e-8


def _wave_quadrature(params: WaveParams, numerator: Callable, slope_at_k: float, tol: Tolerances) -> float:
    """
    2∫_k^{φ_M} numerator(φ)/√(2(E−V(φ))) dφ。
    numerator(k) = 0，被积函数在 k 处为 0/0 型，极限为 slope_at_k / C(k)；
    首段 [k, k+clip] 用梯形公式配合该极限。
    """
    k, phi_m = params.k, params.phi_max
    clip = CLIP * (phi_m - k)
    lower = k + clip

    def integrand(phi):
        return numerator(phi) / np.sqrt(2.0 * energy_gap(phi, params))

    body = quad_singular(integrand, lower, phi_m, mode="sqrt_upper", tol=tol.quad_tol)
    first = 0.5 * clip * (slope_at_k / params.decay_rate + integrand(lower))
    return 2.0 * (body + first)


def functional_E(params: WaveParams, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """𝓔(μ) = ∫(μφ − k²)dx"""
    a, c, k = params.a, params.c, params.k
    wk = c - k * k
    return _wave_quadrature(params, lambda p: a * p / (c - p * p) ** 1.5 - k * k,
                            k * (c + 2.0 * k * k) / wk, tol)


def functional_F1(params: WaveParams, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """F1(μ) = ∫(μ^{2/3} − k^{2/3})dx"""
    a, c, k = params.a, params.c, params.k
    a23, k23 = a ** (2.0 / 3.0), k ** (2.0 / 3.0)
    return _wave_quadrature(params, lambda p: a23 / (c - p * p) - k23,
                            2.0 * k ** (5.0 / 3.0) / (c - k * k), tol)


def calF(params: WaveParams, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """𝓕 = 𝓔 − 3k^{4/3}F1，合并为单个积分"""
    a, c, k = params.a, params.c, params.k
    coupling = 3.0 * k ** (4.0 / 3.0) * a ** (2.0 / 3.0)

    def numerator(p):
        w = c - p * p
        return a * p / w ** 1.5 - coupling / w + 2.0 * k * k

    return _wave_quadrature(params, numerator, k * (c - 4.0 * k * k) / (c - k * k), tol)


def functional_E_grid(profile: WaveProfile) -> float:
    k = profile.params.k
    return float(simpson(profile.mu0 * profile.phi - k * k, x=profile.x))


def functional_F1_grid(profile: WaveProfile) -> float:
    k = profile.params.k
    return float(simpson(profile.mu0 ** (2.0 / 3.0) - k ** (2.0 / 3.0), x=profile.x))


def functional_F2(params: WaveParams, grid: GridSpec = GridSpec(), tol: Tolerances = DEFAULT_TOLERANCES,
                  profile: Optional[WaveProfile] = None) -> float:
    """F2(μ) = ∫(μ^{−8/3}μ′² + 9(μ^{−2/3} − k^{−2/3}))dx，在 x 网格上计算，μ′ 用闭式值"""
    profile = profile or shoot_profile(params, grid, tol)
    k = params.k
    integrand = (profile.mu0 ** (-8.0 / 3.0) * profile.mu1 ** 2
                 + 9.0 * (profile.mu0 ** (-2.0 / 3.0) - k ** (-2.0 / 3.0)))
    return float(simpson(integrand, x=profile.x))


def variation_density(profile: WaveProfile) -> np.ndarray:
    """δ𝓕/δm = 2φ − 2k^{4/3}μ^{−1/3} = 2φ − 2k√((c−φ²)/(c−k²))"""
    p = profile.params
    return 2.0 * profile.phi - 2.0 * p.k * np.sqrt((p.c - profile.phi ** 2) / (p.c - p.k ** 2))


def variation_positivity(profile: WaveProfile) -> bool:
    """δ𝓕/δm ≥ 2(φ − k) > 0"""
    eta = variation_density(profile)
    lower = 2.0 * (profile.phi - profile.params.k)
    interior = lower > 1e-9
    return bool(np.all(eta >= lower - 1e-12) and np.all(eta[interior] > 0))


@dataclass(frozen=True)
class WitnessValue:
    """
    :param value: f(z)
    :param derivative: f′(z)
    :param margin: c²(c−k²)³ − 16k²z²(c−z²)³，为正时 f′(z) > 0
    """
    value: float
    derivative: float
    margin: float


def positivity_witness(params: WaveParams, z: float) -> WitnessValue:
    """
    f(z) = z√((c−k²)/(c−z²)) − 3k + 2k(c−z²)/(c−k²)，f(k) = 0 且在 (k, √c) 上递增
    """
    c, k = params.c, params.k
    if not k <= z < np.sqrt(c):
        raise DomainError(f"z = {z} 不在 [k, √c) 内")
    wk, wz = c - k * k, c - z * z
    value = z * np.sqrt(wk / wz) - 3.0 * k + 2.0 * k * wz / wk
    derivative = c * np.sqrt(wk) * wz ** -1.5 - 4.0 * k * z / wk
    margin = c * c * wk ** 3 - 16.0 * k * k * z * z * wz ** 3
    return WitnessValue(float(value), float(derivative), float(margin))


def witness_bound_holds(params: WaveParams) -> bool:
    """16k²z²(c−z²)³ 在 z = √c/2 处取最大值 27k²c⁴/16，且 c²(c−k²)³ 严格大于它"""
    c, k = params.c, params.k
    return c * c * (c - k * k) ** 3 > 27.0 * k * k * c ** 4 / 16.0


def _calF_at(k: float, c: float, tol: Tolerances) -> float:
    return calF(params_from_k(k, c, tol), tol)


def inner_product_prefactor(k, c):
    return k ** (11.0 / 3.0) * (c - k * k) ** 2 / (18.0 * c)


@dataclass
class VKScan:
    c: float
    k_grid: np.ndarray
    calF_values: np.ndarray
    dcalF_dk: np.ndarray
    inner_products: np.ndarray
    verdict: bool

    def columns(self) -> dict:
        return {"k": self.k_grid, "calF": self.calF_values, "dcalF_dk": self.dcalF_dk,
                "inner_product": self.inner_products}


def vk_scan(c: float, k_grid, tol: Tolerances = DEFAULT_TOLERANCES,
            executor: Optional[Executor] = None) -> VKScan:
    """
    在 k 网格上计算 𝓕 及其中心差分导数，并由表示式
    ⟨L⁻¹δ𝓕/δm, δ𝓕/δm⟩ = (k^{11/3}(c−k²)²/18c)·d/dk[k^{−2}𝓕] 给出内积
    :param c: 波速
    :param k_grid: (0, √c/2) 内严格递增，至少 3 个点
    :param executor: 可选并行执行器
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or k_grid.size < 3:
        raise ParameterError("k 网格至少需要 3 个点才能计算中心差分")
    if np.any(np.diff(k_grid) <= 0):
        raise ParameterError("k 网格必须严格递增")
    if k_grid[0] <= 0 or k_grid[-1] >= np.sqrt(c) / 2.0:
        raise ParameterError(f"k 网格必须位于 (0, √c/2 = {np.sqrt(c) / 2:.6g}) 内")

    worker = partial(_calF_at, c=c, tol=tol)
    mapper = executor.map if executor is not None else map
    values = np.array(list(mapper(worker, k_grid)))

    derivative = np.gradient(values, k_grid, edge_order=2)
    # d/dk[k^{-2}𝓕] = 𝓕′/k² − 2𝓕/k³
    inner = inner_product_prefactor(k_grid, c) * (derivative / k_grid ** 2 - 2.0 * values / k_grid ** 3)
    verdict = bool(np.all(values > 0) and np.all(derivative < 0))
    return VKScan(float(c), k_grid, values, derivative, inner, verdict)


@dataclass(frozen=True)
class InnerProductCheck:
    """
    :param integral: ∫δ𝓕/δm·(kμ_k − μ)dx（网格 + k 方向差分）
    :param representation: k³·d/dk[k^{−2}𝓕]（求积 + k 方向差分）
    :param inner_product: (k^{2/3}(c−k²)²/18c)·integral
    """
    integral: float
    representation: float
    inner_product: float


def vk_inner_product_direct(params: WaveParams, dk: float = 1e-4, grid: GridSpec = GridSpec(),
                            tol: Tolerances = DEFAULT_TOLERANCES) -> InnerProductCheck:
    """
    在网格上直接计算 ∫η(kμ_k − μ)dx，与 𝓕 的 k 导数给出的表示式相互校验
    """
    c, k = params.c, params.k
    if not (0 < k - dk and k + dk < np.sqrt(c) / 2.0):
        raise ParameterError("dk 过大，扰动后的 k 不可容许")
    center = shoot_profile(params, grid, tol)
    fixed = GridSpec(half_points=grid.half_points, length=center.L)
    up = shoot_profile(params_from_k(k + dk, c, tol), fixed, tol)
    down = shoot_profile(params_from_k(k - dk, c, tol), fixed, tol)

    mu_k = (up.mu0 - down.mu0) / (2.0 * dk)
    eta = variation_density(center)
    integral = float(simpson(eta * (k * mu_k - center.mu0), x=center.x))

    value = calF(params, tol)
    slope = (_calF_at(k + dk, c, tol) - _calF_at(k - dk, c, tol)) / (2.0 * dk)
    representation = k * slope - 2.0 * value
    prefactor = k ** (2.0 / 3.0) * (c - k * k) ** 2 / (18.0 * c)
    return InnerProductCheck(integral, representation, prefactor * integral)


@dataclass(frozen=True)
class RescaleCheck:
    """
    :param x: 内部网格
    :param profile: 2aμ_a + Eμ_E + cμ_c − μ/2
    :param route_c: d/dt μ(t²a, tE, tc) − μ/2
    :param route_a: 2·d/ds μ(sa, √sE, √sc) − μ/2
    :param residual: profile 的上确界范数
    :param mu_norm: μ 的上确界范数
    """
    x: np.ndarray
    profile: np.ndarray
    route_c: np.ndarray
    route_a: np.ndarray
    residual: float
    mu_norm: float


def rescale_identity_check(params: WaveParams, h: float = 1e-5, points: int = 201,
                           extent: Optional[float] = None,
                           tol: Optional[Tolerances] = None) -> RescaleCheck:
    """
    恒等式 ½μ = 2aμ_a + Eμ_E + cμ_c 的有限差分检查。
    偏导数在固定 x 处取，轨道来自独立参数 (a, E, c) 的波峰对齐族。
    :param h: 相对步长
    :param points: 内部网格点数
    :param extent: 内部网格半宽，默认 4/C(k)
    """
    a, E, c = params.a, params.E, params.c
    extent = extent or 4.0 / params.decay_rate
    x = np.linspace(-extent, extent, points)

    def mu(a_, E_, c_):
        phi, _ = crest_orbit(a_, E_, c_, x, tol)
        return a_ / (c_ - phi * phi) ** 1.5

    base = mu(a, E, c)
    mu_a = (mu(a * (1 + h), E, c) - mu(a * (1 - h), E, c)) / (2.0 * a * h)
    mu_E = (mu(a, E * (1 + h), c) - mu(a, E * (1 - h), c)) / (2.0 * E * h)
    mu_c = (mu(a, E, c * (1 + h)) - mu(a, E, c * (1 - h))) / (2.0 * c * h)
    profile = 2.0 * a * mu_a + E * mu_E + c * mu_c - 0.5 * base

    tp, tm = 1.0 + h, 1.0 - h
    route_c = (mu(tp * tp * a, tp * E, tp * c) - mu(tm * tm * a, tm * E, tm * c)) / (2.0 * h) - 0.5 * base
    route_a = 2.0 * (mu(tp * a, np.sqrt(tp) * E, np.sqrt(tp) * c)
                     - mu(tm * a, np.sqrt(tm) * E, np.sqrt(tm) * c)) / (2.0 * h) - 0.5 * base
    return RescaleCheck(x, profile, route_c, route_a, float(np.max(np.abs(profile))),
                        float(np.max(np.abs(base))))


class VKAnalyzer:
    """
    VK 条件分析协调器
    """

    def __init__(self, tol: Tolerances = DEFAULT_TOLERANCES, grid: GridSpec = GridSpec(),
                 console: Optional[Console] = None):
        self.tol = tol
        self.grid = grid
        self.console = console or Console()

    def scan(self, c: float, k_grid, executor: Optional[Executor] = None) -> VKScan:
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=self.console
        ) as progress:
            task = progress.add_task(f"计算 𝓕(μ(·;k))，{len(k_grid)} 个 k 值...", total=None)
            result = vk_scan(c, k_grid, self.tol, executor)
            progress.update(task, description="✅ VK 扫描完成")

        if result.verdict:
            self.console.print("[green]✅ 𝓕 在网格上为正且严格递减，VK 条件成立[/green]")
        else:
            self.console.print("[red]❌ VK 条件在网格上不成立[/red]")
        return result

    def check_wave(self, params: WaveParams) -> dict:
        """单个波上的求积/网格交叉检查"""
        profile = shoot_profile(params, self.grid, self.tol)
        quad_E, grid_E = functional_E(params, self.tol), functional_E_grid(profile)
        quad_F1, grid_F1 = functional_F1(params, self.tol), functional_F1_grid(profile)
        value = calF(params, self.tol)
        checks = {
            "E_quadrature": quad_E,
            "E_grid": grid_E,
            "F1_quadrature": quad_F1,
            "F1_grid": grid_F1,
            "F2": functional_F2(params, profile=profile),
            "calF": value,
            "calF_consistency": abs(value - (quad_E - 3.0 * params.k ** (4.0 / 3.0) * quad_F1)) / abs(value),
            "variation_positive": variation_positivity(profile),
        }
        for name in ("E", "F1"):
            rel = abs(checks[f"{name}_quadrature"] - checks[f"{name}_grid"]) / abs(checks[f"{name}_quadrature"])
            color = "green" if rel < 1e-5 else "yellow"
            self.console.print(f"[{color}]{name}: 求积与网格相对差 {rel:.2e}[/{color}]")
        return checks
