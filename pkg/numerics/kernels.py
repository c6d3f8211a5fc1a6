"""
共享数值内核：自适应 ODE 积分、标量求根、端点奇异求积、双二次多项式求根。

全部为纯函数，可在多个 worker 中并发调用。
"""

from dataclasses import asdict, dataclass, replace
from itertools import permutations
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq, newton

from .errors import BracketError, IntegrationError, ParameterError, QuadratureError


@dataclass(frozen=True)
class Tolerances:
    """
    数值容差（全部为无量纲正数）
    :param ode_rel: ODE 相对步长容差
    :param ode_abs: ODE 绝对步长容差
    :param root_tol: 求根容差
    :param quad_tol: 求积相对容差
    :param evans_rel: Evans 函数积分的相对容差
    :param evans_abs: Evans 函数积分的绝对容差
    """
    ode_rel: float = 1e-10
    ode_abs: float = 1e-12
    root_tol: float = 1e-12
    quad_tol: float = 1e-9
    evans_rel: float = 1e-8
    evans_abs: float = 1e-10

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ParameterError(f"容差 {name} 必须为正数，当前为 {value}")

    def for_evans(self) -> "Tolerances":
        """返回 ODE 容差替换为 Evans 容差后的副本"""
        return replace(self, ode_rel=self.evans_rel, ode_abs=self.evans_abs)

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()


class Trajectory:
    """
    ODE 积分结果，可在积分区间内任意位置查询（稠密输出）
    """

    def __init__(self, solution, size: int, is_complex: bool):
        self._solution = solution
        self._size = size
        self._complex = is_complex
        self.t = solution.t
        self.t_events = solution.t_events
        self.status = solution.status

    def _unstack(self, z: np.ndarray) -> np.ndarray:
        if self._complex:
            return z[:self._size] + 1j * z[self._size:]
        return z

    @property
    def final(self) -> np.ndarray:
        return self._unstack(self._solution.y[:, -1])

    @property
    def x_end(self) -> float:
        return float(self._solution.t[-1])

    def __call__(self, x):
        if self._solution.sol is None:
            raise ValueError("该轨道未保存稠密输出")
        return self._unstack(self._solution.sol(x))


def integrate_ode(rhs: Callable, y0, x_span: Tuple[float, float],
                  tol: Tolerances = DEFAULT_TOLERANCES, events=None,
                  dense: bool = True, max_step: float = np.inf) -> Trajectory:
    """
    Dormand-Prince 5(4) 自适应积分（scipy RK45），复数状态按实部/虚部堆叠后使用同一实积分器。
    :param rhs: 向量场 rhs(x, y)
    :param y0: 初值（实或复）
    :param x_span: 积分区间，可以是递减区间
    :param tol: 容差
    :param events: 传给 solve_ivp 的事件函数（作用于堆叠后的实状态）
    :param dense: 是否保存稠密输出
    :return: Trajectory
    """
    y0 = np.asarray(y0)
    size = y0.size
    is_complex = np.iscomplexobj(y0)

    if is_complex:
        def fun(x, z):
            dy = np.asarray(rhs(x, z[:size] + 1j * z[size:]))
            return np.concatenate([dy.real, dy.imag])
        z0 = np.concatenate([y0.real, y0.imag]).astype(float)
    else:
        fun = rhs
        z0 = y0.astype(float)

    solution = solve_ivp(fun, x_span, z0, method="RK45", rtol=tol.ode_rel, atol=tol.ode_abs,
                         dense_output=dense, events=events, max_step=max_step)
    if solution.status == -1:
        raise IntegrationError(f"ODE 积分失败: {solution.message}", x=float(solution.t[-1]))
    return Trajectory(solution, size, is_complex)


def find_root(f: Callable[[float], float], bracket: Sequence[float],
              tol: float = DEFAULT_TOLERANCES.root_tol,
              fprime: Optional[Callable[[float], float]] = None) -> float:
    """
    有界区间求根：Brent 法保证收敛，提供导数时再用 Newton 迭代加速/抛光。
    :param f: 连续标量函数
    :param bracket: 区间 (lo, hi)，两端函数值必须变号
    :param tol: 绝对容差（按区间尺度缩放）
    :param fprime: 可选导数
    :return: 根
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi) or not (np.isfinite(f_lo) and np.isfinite(f_hi)):
        raise BracketError(f"bracket invalid: f({lo:.6g})={f_lo:.3e}, f({hi:.6g})={f_hi:.3e}")

    scale = max(1.0, abs(lo), abs(hi))
    root = brentq(f, lo, hi, xtol=tol * scale, rtol=4 * np.finfo(float).eps, maxiter=500)

    if fprime is not None:
        try:
            polished = newton(f, root, fprime=fprime, tol=tol * scale, maxiter=8)
        except (RuntimeError, ZeroDivisionError):
            polished = root
        if min(lo, hi) <= polished <= max(lo, hi) and abs(f(polished)) <= abs(f(root)):
            root = polished
    return float(root)


def quad_singular(g: Callable[[float], float], a: float, b: float, mode: str = "plain",
                  tol: float = DEFAULT_TOLERANCES.quad_tol, limit: int = 400) -> float:
    """
    自适应求积（QUADPACK）。mode="sqrt_upper" 时 g 在上端点 b 处有逆平方根奇性，
    先做代换 φ = b - s² 使被积函数光滑。
    :param g: 被积函数
    :param a: 下限
    :param b: 上限
    :param mode: "plain" 或 "sqrt_upper"
    :param tol: 相对容差
    :param limit: 最大子区间数
    :return: 积分值
    """
    if mode == "plain":
        integrand, lo, hi = g, a, b
    elif mode == "sqrt_upper":
        def integrand(s):
            return 2.0 * s * g(b - s * s)
        lo, hi = 0.0, float(np.sqrt(b - a))
    else:
        raise ParameterError(f"未知求积模式: {mode}")

    result = quad(integrand, lo, hi, epsabs=1e-15, epsrel=tol, limit=limit, full_output=1)
    value = float(result[0])
    if len(result) > 3:
        # ier != 0 时 quad 额外返回收敛信息
        raise QuadratureError(f"自适应求积未收敛: {result[3]}", estimate=value)
    return value


def biquadratic_roots(a2: complex, a0: complex, previous: Optional[np.ndarray] = None) -> np.ndarray:
    """
    求 μ⁴ - a2·μ² - a0 = 0 的四个根 μ = ±√z±，z± = (a2 ± √(a2² + 4a0))/2。
    :param a2: 二次项系数
    :param a0: 常数项系数
    :param previous: 上一个围道点的根；给出时按最近匹配排列（分支连续）
    :return: 长度为 4 的复数组；默认按实部降序排列
    """
    a2, a0 = complex(a2), complex(a0)
    disc = np.sqrt(a2 * a2 + 4.0 * a0)
    big = (a2 + disc) / 2.0 if abs(a2 + disc) >= abs(a2 - disc) else (a2 - disc) / 2.0
    # Vieta: z1·z2 = -a0，避免相消
    small = -a0 / big if big != 0 else 0j
    r1, r2 = np.sqrt(big), np.sqrt(small)
    roots = np.array([r1, -r1, r2, -r2], dtype=complex)

    if previous is None:
        order = np.lexsort((-roots.imag, -roots.real))
        return roots[order]

    previous = np.asarray(previous, dtype=complex)
    best = min(permutations(range(4)), key=lambda p: np.sum(np.abs(roots[list(p)] - previous)))
    return roots[list(best)]
