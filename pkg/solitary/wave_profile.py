"""
光滑孤立波剖面

剖面方程 φ″ = φ − a/(c−φ²)^{3/2} 在鞍点 (k, 0) 处有一条同宿轨道，即孤立波。
本模块负责：参数映射 k ↔ a、势函数 V、打靶求解、求积反演 x(φ)、μ 的闭式导数、
以及独立参数 (a, E, c) 下从波峰出发的轨道族。
"""

from dataclasses import asdict, dataclass, field
from typing import Optional, Tuple

import numpy as np

from numerics import (
    DEFAULT_TOLERANCES,
    DomainError,
    ParameterError,
    ShootingError,
    Tolerances,
    Trajectory,
    find_root,
    integrate_ode,
    quad_singular,
)


def admissible_a_max(c: float) -> float:
    """a(k) = k(c−k²)^{3/2} 在 k=√c/2 处的最大值 3√3c²/16"""
    return 3.0 * np.sqrt(3.0) * c * c / 16.0


def _check_speed(c: float):
    if not (np.isfinite(c) and c > 0):
        raise ParameterError(f"波速 c 必须为正数，当前为 {c}")


@dataclass(frozen=True)
class WaveParams:
    """
    孤立波参数
    :param c: 波速
    :param a: 积分常数
    :param k: 无穷远处的端点值（鞍点 φ−）
    :param E: 能量水平
    :param phi_minus: 势函数 V 的第一个临界点（= k）
    :param phi_plus: V 的第二个临界点（中心）
    :param phi_max: 波峰值 φ_M
    :param decay_rate: 尾部衰减率 C(k)
    """
    c: float
    a: float
    k: float
    E: float
    phi_minus: float
    phi_plus: float
    phi_max: float
    decay_rate: float

    @property
    def sqrt_c(self) -> float:
        return float(np.sqrt(self.c))

    def to_dict(self) -> dict:
        return asdict(self)


def potential(phi, a: float, c: float):
    """V(φ; a, c) = −φ²/2 + aφ/(c√(c−φ²))"""
    phi = np.asarray(phi, dtype=float)
    w = c - phi * phi
    if np.any(w <= 0):
        raise DomainError(f"potential 需要 |φ| < √c = {np.sqrt(c):.6g}")
    return -0.5 * phi * phi + a * phi / (c * np.sqrt(w))


def dpotential(phi, a: float, c: float):
    """V′(φ) = −φ + a/(c−φ²)^{3/2} = D(φ)/(c−φ²)^{3/2}"""
    phi = np.asarray(phi, dtype=float)
    w = c - phi * phi
    if np.any(w <= 0):
        raise DomainError(f"dpotential 需要 |φ| < √c = {np.sqrt(c):.6g}")
    return -phi + a / w ** 1.5


def _critical_gap(phi: float, a: float, c: float) -> float:
    """D(φ; a, c) = a − φ(c−φ²)^{3/2}"""
    return a - phi * max(c - phi * phi, 0.0) ** 1.5


def _phi_plus(a: float, c: float, tol: float) -> float:
    sqrt_c = np.sqrt(c)
    return find_root(lambda p: _critical_gap(p, a, c), (sqrt_c / 2.0, sqrt_c), tol=tol)


def crest_value(a: float, E: float, c: float, tol: float = DEFAULT_TOLERANCES.root_tol) -> float:
    """
    一般参数 (a, E, c) 下的波峰值：E − V(φ) 在 (φ+, √c) 上的根。
    要求 E > V(φ+)，否则不存在经过中心右侧的有界轨道。
    """
    _check_speed(c)
    if not 0 < a < admissible_a_max(c):
        raise ParameterError(f"a = {a} 不在 (0, 3√3c²/16) 内")
    phi_plus = _phi_plus(a, c, tol)
    if E <= potential(phi_plus, a, c):
        raise ParameterError(f"能量 E = {E} 不高于中心处的势能，轨道不存在")
    upper = np.sqrt(c) * (1.0 - 1e-14)
    return find_root(lambda p: E - float(potential(p, a, c)), (phi_plus, upper), tol=tol)


def k_from_a(a: float, c: float, tol: float = DEFAULT_TOLERANCES.root_tol) -> float:
    """
    在 (0, √c/2) 上求 k(c−k²)^{3/2} = a 的唯一根（两个解中较小者）
    """
    _check_speed(c)
    if not 0 < a < admissible_a_max(c):
        raise ParameterError(f"a = {a} 不在 (0, 3√3c²/16 = {admissible_a_max(c):.6g}) 内")
    return find_root(lambda k: k * (c - k * k) ** 1.5 - a, (0.0, np.sqrt(c) / 2.0), tol=tol,
                     fprime=lambda k: np.sqrt(c - k * k) * (c - 4.0 * k * k))


def params_from_k(k: float, c: float, tol: Tolerances = DEFAULT_TOLERANCES) -> WaveParams:
    """
    由端点值 k 构造参数：a、E 解析给出，φ+ 与 φ_M 由有界求根给出
    """
    _check_speed(c)
    if not 0 < k < np.sqrt(c) / 2.0:
        raise ParameterError(f"k = {k} 不在 (0, √c/2 = {np.sqrt(c) / 2:.6g}) 内")

    a = k * (c - k * k) ** 1.5
    E = k * k * (c - 2.0 * k * k) / (2.0 * c)
    phi_plus = _phi_plus(a, c, tol.root_tol)
    upper = np.sqrt(c) * (1.0 - 1e-14)
    phi_max = find_root(lambda p: E - float(potential(p, a, c)), (phi_plus, upper), tol=tol.root_tol)
    decay_rate = np.sqrt((c - 4.0 * k * k) / (c - k * k))
    return WaveParams(c=float(c), a=float(a), k=float(k), E=float(E), phi_minus=float(k),
                      phi_plus=float(phi_plus), phi_max=float(phi_max), decay_rate=float(decay_rate))


def params_from_a(a: float, c: float, tol: Tolerances = DEFAULT_TOLERANCES) -> WaveParams:
    return params_from_k(k_from_a(a, c, tol.root_tol), c, tol)


def energy_gap(phi, params: WaveParams):
    """
    E − V(φ) 沿孤立波分支的无相消形式。
    E = V(k) = V(φ_M)，故 V(p) − V(φ) 可以对两个端点分别因式分解：
    靠近 k 的一半用 p = k，靠近 φ_M 的一半用 p = φ_M。
    """
    phi = np.asarray(phi, dtype=float)
    c, a = params.c, params.a
    middle = 0.5 * (params.k + params.phi_max)
    p = np.where(phi < middle, params.k, params.phi_max)
    w_phi = c - phi * phi
    if np.any(w_phi <= 0):
        raise DomainError("energy_gap 需要 φ² < c")
    w_p = c - p * p
    s_phi, s_p = np.sqrt(w_phi), np.sqrt(w_p)
    bracket = 0.5 - a / (s_phi * s_p * (phi * s_p + p * s_phi))
    return (phi * phi - p * p) * bracket


def x_of_phi(params: WaveParams, phi: float, tol: Tolerances = DEFAULT_TOLERANCES) -> float:
    """
    求积反演：x(φ) = ∫_φ^{φ_M} dξ/√(2(E−V(ξ)))，返回 x ≥ 0
    :param params: 波参数
    :param phi: k < φ ≤ φ_M
    """
    if phi == params.phi_max:
        return 0.0
    if not params.k < phi < params.phi_max:
        raise DomainError(f"φ = {phi} 不在 (k, φ_M) = ({params.k:.6g}, {params.phi_max:.6g}) 内")

    def integrand(xi):
        return 1.0 / np.sqrt(2.0 * energy_gap(xi, params))

    return quad_singular(integrand, phi, params.phi_max, mode="sqrt_upper", tol=tol.quad_tol)


def derivatives_closed_form(phi, dphi, params: WaveParams) -> Tuple[np.ndarray, ...]:
    """
    μ = M(φ) = a(c−φ²)^{−3/2} 的闭式 0~4 阶导数。
    链式法则中的 φ″、φ‴ 用剖面方程消去：φ″ = φ − μ，φ‴ = φ′(1 − M′)。
    :return: (μ, μ′, μ″, μ‴, μ⁗)
    """
    phi = np.asarray(phi, dtype=float)
    dphi = np.asarray(dphi, dtype=float)
    a, c = params.a, params.c
    w = c - phi * phi
    if np.any(w <= 0):
        raise DomainError("derivatives_closed_form 需要 φ² < c")

    phi2 = phi * phi
    m0 = a * w ** -1.5
    m1 = 3.0 * a * phi * w ** -2.5
    m2 = 3.0 * a * (c + 4.0 * phi2) * w ** -3.5
    m3 = 3.0 * a * phi * (15.0 * c + 20.0 * phi2) * w ** -4.5
    m4 = 3.0 * a * (15.0 * c * c + 180.0 * c * phi2 + 120.0 * phi2 * phi2) * w ** -5.5

    P = dphi * dphi
    q = phi - m0
    inner = m3 * P + 3.0 * m2 * q + m1 * (1.0 - m1)

    mu0 = m0
    mu1 = m1 * dphi
    mu2 = m2 * P + m1 * q
    mu3 = dphi * inner
    mu4 = q * inner + P * (m4 * P + 5.0 * m3 * q + m2 * (4.0 - 5.0 * m1))
    return mu0, mu1, mu2, mu3, mu4


@dataclass(frozen=True)
class GridSpec:
    """
    截断区间与网格设置
    :param half_points: 半区间 [−L, 0] 上的网格间隔数
    :param min_length: L 的下限
    :param decay_factor: L ≥ decay_factor / C(k)
    :param tail_tol: |φ(±L) − k| ≤ tail_tol·√c
    :param length: 直接指定 L（覆盖自动选择）
    """
    half_points: int = 8192
    min_length: float = 25.0
    decay_factor: float = 12.0
    tail_tol: float = 1e-10
    length: Optional[float] = None

    def __post_init__(self):
        if self.half_points < 16:
            raise ParameterError("half_points 至少为 16")
        if self.length is not None and not self.length > 0:
            raise ParameterError("截断长度必须为正数")
        if not (self.min_length > 0 and self.decay_factor > 0 and self.tail_tol > 0):
            raise ParameterError("GridSpec 的长度与容差参数必须为正数")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class WaveProfile:
    """
    网格上的孤立波：x ∈ [−L, L]，φ 偶，φ′ 奇，以及 μ 的 0~4 阶导数
    """
    params: WaveParams
    L: float
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    mu3: np.ndarray
    mu4: np.ndarray
    crest_time: float
    tol: Tolerances = DEFAULT_TOLERANCES
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n(self) -> int:
        return int(self.x.size)

    def phi_at(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """用打靶轨道的稠密输出在任意 x 处取 (φ, φ′)"""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        s = np.clip(self.crest_time - np.abs(x), 0.0, self.crest_time)
        state = self.trajectory(s)
        sign = np.where(x > 0, -1.0, 1.0)
        return state[0], sign * state[1]

    def energy_residual(self) -> np.ndarray:
        p = self.params
        return 0.5 * self.dphi ** 2 - p.E + potential(self.phi, p.a, p.c)

    def header(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "L": self.L,
            "grid_points": self.n,
            "h": self.h,
            "tolerances": self.tol.to_dict(),
        }

    def columns(self) -> dict:
        return {
            "x": self.x, "phi": self.phi, "dphi": self.dphi,
            "mu0": self.mu0, "mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "mu4": self.mu4,
        }


def _profile_rhs(a: float, c: float):
    def rhs(x, y):
        return np.array([y[1], y[0] - a / (c - y[0] * y[0]) ** 1.5])
    return rhs


class _CrestShooter:
    """沿不稳定方向 (1, C) 离开鞍点，积分到第一个波峰 φ′ = 0"""

    def __init__(self, params: WaveParams, tol: Tolerances):
        self.params = params
        self.tol = tol
        self.rhs = _profile_rhs(params.a, params.c)
        c = params.c

        def crest(x, y):
            return y[1]
        crest.terminal = True
        crest.direction = -1

        def wall(x, y):
            return c * (1.0 - 1e-10) - y[0] * y[0]
        wall.terminal = True
        wall.direction = -1

        self.events = [crest, wall]

    def shoot(self, eps: float, x_max: float) -> Tuple[float, Trajectory]:
        p = self.params
        y0 = np.array([p.k + eps, eps * p.decay_rate])
        trajectory = integrate_ode(self.rhs, y0, (0.0, x_max), self.tol, events=self.events)
        if trajectory.t_events[1].size:
            raise ShootingError(f"打靶轨道离开 φ² < c 区域 (ε = {eps:.3e})")
        if not trajectory.t_events[0].size:
            raise ShootingError(f"积分到 x = {x_max:.3g} 仍未到达波峰 (ε = {eps:.3e})")
        return float(trajectory.t_events[0][0]), trajectory


def shoot_profile(params: WaveParams, grid: GridSpec = GridSpec(),
                  tol: Tolerances = DEFAULT_TOLERANCES) -> WaveProfile:
    """
    打靶求解孤立波：调整偏移量 ε 使波峰恰好落在 x = 0，再对称延拓到 [−L, L]
    :param params: 波参数
    :param grid: 网格设置
    :param tol: 容差
    :return: WaveProfile
    """
    C = params.decay_rate
    shooter = _CrestShooter(params, tol)
    sqrt_c = params.sqrt_c

    eps_start = 1e-8 * sqrt_c
    t_start, _ = shooter.shoot(eps_start, x_max=200.0 / C)

    if grid.length is not None:
        L = float(grid.length)
    else:
        # 线性化尾部：T(ε) ≈ T(ε0) + ln(ε0/ε)/C
        eps_tail = 0.5 * grid.tail_tol * sqrt_c
        t_tail = t_start + np.log(eps_start / eps_tail) / C
        L = float(max(grid.min_length, grid.decay_factor / C, t_tail))

    x_limit = 2.0 * L + 60.0 / C

    def mismatch(u):
        t, _ = shooter.shoot(np.exp(u), x_limit)
        return t - L

    u_guess = np.log(eps_start) + C * (t_start - L)
    lo, hi = u_guess - 1.0, u_guess + 1.0
    for _ in range(40):
        if mismatch(lo) > 0:
            break
        lo -= 2.0
    else:
        raise ShootingError("无法找到使波峰落后于 x = 0 的偏移量")
    for _ in range(40):
        if hi >= np.log(params.phi_plus - params.k) or mismatch(hi) < 0:
            break
        hi += 1.0
    u_star = find_root(mismatch, (lo, hi), tol=tol.root_tol)
    crest_time, trajectory = shooter.shoot(np.exp(u_star), x_limit)

    x_left = np.linspace(-L, 0.0, grid.half_points + 1)
    s = np.clip(x_left + crest_time, 0.0, crest_time)
    state = trajectory(s)
    phi_left, dphi_left = state[0].copy(), state[1].copy()
    dphi_left[-1] = 0.0

    x = np.concatenate([x_left, -x_left[-2::-1]])
    phi = np.concatenate([phi_left, phi_left[-2::-1]])
    dphi = np.concatenate([dphi_left, -dphi_left[-2::-1]])
    mus = derivatives_closed_form(phi, dphi, params)
    return WaveProfile(params, L, x, phi, dphi, *mus, crest_time=crest_time, tol=tol,
                       trajectory=trajectory)


def crest_orbit(a: float, E: float, c: float, x, tol: Optional[Tolerances] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    独立参数 (a, E, c) 的二参数轨道族：从波峰 (φ_M(a,E,c), 0) 出发积分，
    所有轨道在 x = 0 处对齐（φ′(0) = 0），按偶对称取值。
    :param x: 采样点（可正可负）
    :return: (φ, φ′)
    """
    tol = tol or Tolerances(ode_rel=1e-12, ode_abs=1e-14, root_tol=1e-15)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi_top = crest_value(a, E, c, tol.root_tol)
    x_max = float(np.max(np.abs(x))) if x.size else 0.0
    if x_max == 0.0:
        return np.full(x.shape, phi_top), np.zeros(x.shape)

    trajectory = integrate_ode(_profile_rhs(a, c), np.array([phi_top, 0.0]), (0.0, x_max), tol)
    state = trajectory(np.abs(x))
    sign = np.where(x < 0, -1.0, 1.0)
    return state[0], sign * state[1]
