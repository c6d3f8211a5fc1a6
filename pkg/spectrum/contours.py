"""
矩形围道与辐角原理环绕数
"""

from concurrent.futures import Executor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from numerics import ContourError, ParameterError


@dataclass(frozen=True)
class ContourSettings:
    """
    :param initial_points: 每个矩形的初始采样点数
    :param max_points: 加密后的采样点上限
    :param integer_tol: 环绕数与最近整数的允许偏差
    :param shrink: δ = min(σ0, |σ1|)/shrink
    :param left_margin: Γ2 左边 = left_margin·σ1
    :param zero_ratio: |D_i| ≤ zero_ratio·min(|D_{i−1}|, |D_{i+1}|) 视为围道上有零点
    """
    initial_points: int = 64
    max_points: int = 4096
    integer_tol: float = 0.05
    shrink: float = 20.0
    left_margin: float = 1.05
    zero_ratio: float = 1e-6

    def __post_init__(self):
        if self.initial_points < 8 or self.max_points < self.initial_points:
            raise ParameterError("围道采样点数设置无效")
        if not 0 < self.integer_tol < 0.5:
            raise ParameterError("integer_tol 必须在 (0, 0.5) 内")
        if self.shrink <= 2 or self.left_margin <= 1:
            raise ParameterError("shrink 必须大于 2，left_margin 必须大于 1")
        if not 0 < self.zero_ratio < 1:
            raise ParameterError("zero_ratio 必须在 (0, 1) 内")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Contour:
    """
    矩形 [re_min, re_max] × [−im_half, im_half]，逆时针采样
    """
    re_min: float
    re_max: float
    im_half: float
    name: str = ""
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex), repr=False)
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex), repr=False)
    refined: bool = False

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_half > 0):
            raise ParameterError(f"围道 {self.name} 的尺寸无效")

    @property
    def corners(self) -> np.ndarray:
        lo, hi, h = self.re_min, self.re_max, self.im_half
        return np.array([lo - 1j * h, hi - 1j * h, hi + 1j * h, lo + 1j * h])

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max and abs(z.imag) < self.im_half

    def initial_points(self, n: int) -> np.ndarray:
        """按边长比例分配采样点，四个角点总被包含"""
        corners = self.corners
        lengths = np.abs(np.roll(corners, -1) - corners)
        counts = np.maximum(2, np.round(n * lengths / lengths.sum()).astype(int))
        points = [corners[i] + (corners[(i + 1) % 4] - corners[i]) * np.arange(counts[i]) / counts[i]
                  for i in range(4)]
        return np.concatenate(points)

    def describe(self) -> dict:
        return {"name": self.name, "re_min": self.re_min, "re_max": self.re_max,
                "im_half": self.im_half, "points": int(self.samples.size), "refined": self.refined}


def _evaluate(evans_fn: Callable, points: np.ndarray, executor: Optional[Executor]) -> np.ndarray:
    if executor is None:
        return np.array([evans_fn(z) for z in points], dtype=complex)
    return np.array(list(executor.map(evans_fn, points)), dtype=complex)


def dip_ratios(values: np.ndarray) -> np.ndarray:
    """闭路上每个采样点的 |D_i| / min(|D_{i−1}|, |D_{i+1}|)"""
    magnitudes = np.abs(values)
    neighbours = np.minimum(np.roll(magnitudes, 1), np.roll(magnitudes, -1))
    return magnitudes / neighbours


def winding_number(contour: Contour, evans_fn: Callable, settings: ContourSettings = ContourSettings(),
                   executor: Optional[Executor] = None) -> int:
    """
    累计相位 / 2π。相邻两点相位差 ≥ π/2 的段取中点加密，直到全部满足或达到上限。
    采样点与函数值写回 contour。
    :param contour: 围道
    :param evans_fn: 在围道上解析且不为零的函数
    :param settings: 采样设置
    :param executor: 可选的并行执行器
    :return: 环绕数
    """
    points = contour.initial_points(settings.initial_points)
    values = _evaluate(evans_fn, points, executor)
    refined = False

    while True:
        if np.any(values == 0) or not np.all(np.isfinite(values)):
            raise ContourError(f"eigenvalue on contour {contour.name}: Evans 函数为零或非有限值")
        steps = np.angle(np.roll(values, -1) / values)
        bad = np.flatnonzero(np.abs(steps) >= np.pi / 2)
        if bad.size == 0:
            break
        if points.size + bad.size > settings.max_points:
            raise ContourError(f"围道 {contour.name} 加密到 {points.size} 点后相位步长仍过大")
        following = points[(bad + 1) % points.size]
        midpoints = 0.5 * (points[bad] + following)
        mid_values = _evaluate(evans_fn, midpoints, executor)
        points = np.insert(points, bad + 1, midpoints)
        values = np.insert(values, bad + 1, mid_values)
        refined = True

    contour.samples, contour.values, contour.refined = points, values, refined

    # |D| 沿长围道可跨越十几个数量级，只与相邻采样点比较
    dips = dip_ratios(values)
    worst = int(np.argmin(dips))
    if dips[worst] <= settings.zero_ratio:
        raise ContourError(f"eigenvalue on contour {contour.name}: |D| 在 λ = {points[worst]:.6g} 处"
                           f"只有相邻点的 {dips[worst]:.2e}")

    total = steps.sum() / (2.0 * np.pi)
    count = int(round(total))
    if abs(total - count) >= settings.integer_tol:
        raise ContourError(f"围道 {contour.name} 的环绕数 {total:.4f} 不是整数")
    return count


def default_contours(sigma0: float, sigma1: float,
                     settings: ContourSettings = ContourSettings()) -> Tuple[Contour, Contour]:
    """
    Γ1 = [−δ, δ]²，Γ2 = [left_margin·σ1, δ/2] × [−δ, δ]，δ = min(σ0, |σ1|)/shrink
    """
    if not (sigma0 > 0 and sigma1 < 0):
        raise ParameterError("default_contours 需要 σ0 > 0 且 σ1 < 0")
    delta = min(sigma0, abs(sigma1)) / settings.shrink
    gamma1 = Contour(-delta, delta, delta, name="gamma1")
    gamma2 = Contour(settings.left_margin * sigma1, delta / 2.0, delta, name="gamma2")
    return gamma1, gamma2
