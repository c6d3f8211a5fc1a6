"""
谱假设 H1 的数值验证

流程：剖面 → 系数场 → λ−(L̃) → σ1 → 围道 Γ1/Γ2 → 4×4 Evans 函数环绕数。
判定为真当且仅当 winding(Γ1) = 1 且 winding(Γ2) = 2。
"""

import warnings
from concurrent.futures import Executor, ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from rich.console import Console

from evans import EvansSystem, SLEvansFunction, asymptotic_splitting, evans_eval_SL
from numerics import DEFAULT_TOLERANCES, NovikovError, NumericalError, Tolerances, find_root
from operators import (
    CoefficientField,
    GridResolutionWarning,
    apply_eigensystem_discrete,
    coefficient_fields,
    eigensystem_scale,
    sl_kernel_residual,
)
from solitary import GridSpec, WaveParams, shoot_profile

from .contours import Contour, ContourSettings, default_contours, winding_number


@dataclass
class SpectralReport:
    """单个波的验证结果"""
    params: WaveParams
    sigma0: float
    lambda_minus_SL: float
    sigma1: float
    energy_bound: float
    winding_gamma1: int
    winding_gamma2: int
    h1_verdict: bool
    label: str = ""
    diagnostics: Dict = field(default_factory=dict)
    contours: List[Contour] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "params": self.params.to_dict(),
            "sigma0": self.sigma0,
            "lambda_minus_SL": self.lambda_minus_SL,
            "sigma1": self.sigma1,
            "energy_bound": self.energy_bound,
            "winding_gamma1": self.winding_gamma1,
            "winding_gamma2": self.winding_gamma2,
            "h1_verdict": self.h1_verdict,
            "diagnostics": self.diagnostics,
        }


@dataclass
class BScan:
    """固定右边、逐步左移左边时 D̃ 的环绕数"""
    lefts: np.ndarray
    windings: List[int]

    @property
    def jump_bracket(self) -> Optional[Tuple[float, float]]:
        for i in range(1, len(self.windings)):
            if self.windings[i - 1] == 1 and self.windings[i] == 2:
                return float(self.lefts[i]), float(self.lefts[i - 1])
        return None


def bound_energy(field: CoefficientField) -> float:
    """2ω0 − sup|G|，上确界包含渐近值 |G∞|"""
    sup_g = max(float(np.max(np.abs(field.Gx))), abs(field.G_inf))
    return 2.0 * field.omega0 - sup_g


def bound_sigma1(field: CoefficientField, lambda_minus: float) -> float:
    """σ1 = λ−(L̃) + 2ω0(1 − f0)"""
    return lambda_minus + 2.0 * field.omega0 * (1.0 - field.f0)


def scan_start(field: CoefficientField) -> float:
    """负实轴扫描起点 −ε 的 ε"""
    return 1e-4 * min(field.sl_edge, abs(2.0 * field.omega0))


def locate_lambda_minus(field: CoefficientField, tol: Tolerances = DEFAULT_TOLERANCES,
                        epsilon: Optional[float] = None, growth: float = 2.0) -> float:
    """
    L̃ 唯一的负特征值：从 −ε 开始按几何步长向左扫描 D̃ 的符号，变号后二分
    :param field: 系数场
    :param tol: 容差
    :param epsilon: 扫描起点，默认见 scan_start
    :param growth: 几何步长倍数
    :return: λ−(L̃)
    """
    eps = epsilon if epsilon is not None else scan_start(field)
    floor = -10.0 * abs(bound_energy(field))

    def d(lam: float) -> float:
        return float(np.real(evans_eval_SL(lam, field, tol).value))

    upper = -eps
    sign_upper = np.sign(d(upper))
    while True:
        lower = upper * growth
        if lower < floor:
            raise NumericalError(f"在 {floor:.6g} 之前未找到 D̃ 的变号", stage="lambda_minus")
        sign_lower = np.sign(d(lower))
        if sign_lower != sign_upper:
            break
        upper = lower
    return find_root(d, (lower, upper), tol=max(tol.root_tol, 1e-10))


def scan_B_contour(field: CoefficientField, lambda_minus: float, steps: int = 8,
                   settings: ContourSettings = ContourSettings(),
                   executor: Optional[Executor] = None) -> BScan:
    """
    B = [left, ε_B] × [−ε_B, ε_B]，left 从 λ−/2 线性移动到 1.5·λ−。
    环绕数从 1（只含原点）跳到 2 的位置给出 λ−(L̃) 的独立区间。
    """
    eps_b = min(field.sl_edge, abs(lambda_minus)) / 4.0
    fn = SLEvansFunction(field)
    lefts = np.linspace(0.5 * lambda_minus, 1.5 * lambda_minus, steps)
    windings = [winding_number(Contour(left, eps_b, eps_b, name=f"B[{left:.4g}]"), fn, settings, executor)
                for left in lefts]
    return BScan(lefts, windings)


def lambda_minus_winding_check(field: CoefficientField, lambda_minus: float,
                               settings: ContourSettings = ContourSettings(),
                               executor: Optional[Executor] = None) -> Tuple[int, int]:
    """小矩形 B（只含原点）与扩大后的 B（同时含 λ−）上 D̃ 的环绕数，应为 (1, 2)"""
    eps_b = min(field.sl_edge, abs(lambda_minus)) / 4.0
    fn = SLEvansFunction(field)
    small = winding_number(Contour(0.5 * lambda_minus, eps_b, eps_b, name="B_small"), fn, settings, executor)
    large = winding_number(Contour(1.5 * lambda_minus, eps_b, eps_b, name="B_large"), fn, settings, executor)
    return small, large


class SpectralVerifier:
    """
    H1 验证协调器
    """

    def __init__(self, grid: GridSpec = GridSpec(), tol: Tolerances = DEFAULT_TOLERANCES,
                 settings: ContourSettings = ContourSettings(), workers: int = 1,
                 cross_check: bool = False, console: Optional[Console] = None):
        """
        :param grid: 剖面网格设置
        :param tol: 容差
        :param settings: 围道设置
        :param workers: 围道求值的进程数（1 表示串行）
        :param cross_check: 是否额外计算 D̃ 的 B 围道环绕数
        :param console: rich 控制台
        """
        self.grid = grid
        self.tol = tol
        self.settings = settings
        self.workers = workers
        self.cross_check = cross_check
        self.console = console or Console()

    def _stage(self, stage: str, fn: Callable, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NovikovError as e:
            raise e.with_stage(stage)

    def verify(self, params: WaveParams, label: str = "") -> SpectralReport:
        """
        对单个波执行完整流程
        :param params: 波参数
        :param label: 报告标签（例如 j=3）
        :return: SpectralReport
        """
        name = label or f"a={params.a:.6g}"
        self.console.print(f"[cyan]🌊 构造孤立波 {name} (k = {params.k:.6f})[/cyan]")
        profile = self._stage("profile", shoot_profile, params, self.grid, self.tol)
        field = self._stage("fields", coefficient_fields, profile)

        self.console.print(f"[cyan]🔍 定位 L̃ 的负特征值...[/cyan]")
        lambda_minus = self._stage("lambda_minus", locate_lambda_minus, field, self.tol)
        sigma1 = bound_sigma1(field, lambda_minus)
        energy = bound_energy(field)
        gamma1, gamma2 = self._stage("contours", default_contours, field.sigma0, sigma1, self.settings)

        diagnostics = self._diagnostics(field, lambda_minus)
        system = EvansSystem(field, self.tol)

        pool = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else nullcontext()
        with pool as executor:
            self.console.print(f"[cyan]🔄 计算 Γ1 上的环绕数...[/cyan]")
            w1 = self._stage("winding_gamma1", winding_number, gamma1, system, self.settings, executor)
            self.console.print(f"[cyan]🔄 计算 Γ2 上的环绕数...[/cyan]")
            w2 = self._stage("winding_gamma2", winding_number, gamma2, system, self.settings, executor)
            if self.cross_check:
                self.console.print(f"[cyan]🔄 B 围道交叉检查 λ−(L̃)...[/cyan]")
                diagnostics["lambda_minus_windings"] = list(self._stage(
                    "lambda_minus", lambda_minus_winding_check, field, lambda_minus, self.settings, executor))
                scan = self._stage("lambda_minus", scan_B_contour, field, lambda_minus,
                                   settings=self.settings, executor=executor)
                diagnostics["lambda_minus_bracket"] = scan.jump_bracket

        d_zero = abs(system(0.0))
        diagnostics["evans_zero_ratio"] = float(d_zero / np.max(np.abs(gamma1.values)))
        diagnostics["contours"] = [gamma1.describe(), gamma2.describe()]

        verdict = (w1 == 1) and (w2 == 2)
        status = "[green]✅ H1 成立" if verdict else "[red]❌ H1 不成立"
        self.console.print(f"{status}[/] {name}: winding = ({w1}, {w2}), σ1 = {sigma1:.3f}")
        return SpectralReport(params, field.sigma0, lambda_minus, sigma1, energy, w1, w2, verdict,
                              label=label, diagnostics=diagnostics, contours=[gamma1, gamma2])

    def _diagnostics(self, field: CoefficientField, lambda_minus: float) -> dict:
        params = field.params
        profile = field.profile
        roots = np.sort(asymptotic_splitting(0.0, field).roots.real)
        C = params.decay_rate
        expected = np.array([-2.0, -C, C, 2.0])

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", GridResolutionWarning)
            residual = apply_eigensystem_discrete(profile.mu1, 0.0, field)
        for warning in caught:
            self.console.print(f"[yellow]⚠️ {warning.message}[/yellow]")
        scale = eigensystem_scale(profile.mu1, field)
        sl_zero = abs(evans_eval_SL(0.0, field, self.tol).full)
        sl_scale = abs(evans_eval_SL(0.5 * lambda_minus, field, self.tol).full)

        return {
            "omega0": field.omega0,
            "omega1": field.omega1,
            "f0": field.f0,
            "f_inf": field.f_inf,
            "L": profile.L,
            "grid_points": profile.n,
            "root_error_at_zero": float(np.max(np.abs(roots - expected))),
            "edge_identity_error": abs(field.G_inf + 2.0 * field.omega0 * field.f_inf - field.sl_edge),
            "sl_kernel_residual": float(np.max(np.abs(sl_kernel_residual(field)))),
            "discrete_residual": float(np.max(np.abs(residual)) / scale),
            "sl_zero_ratio": float(sl_zero / sl_scale),
        }


def verify_H1(params: WaveParams, **kwargs) -> SpectralReport:
    """SpectralVerifier(**kwargs).verify(params) 的函数形式"""
    label = kwargs.pop("label", "")
    return SpectralVerifier(**kwargs).verify(params, label=label)
