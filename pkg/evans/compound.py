"""
二阶外幂（compound matrix）

2-形式坐标按 (12, 13, 14, 23, 24, 34) 排列（代码中为 0 起始的下标对）。
"""

from itertools import combinations

import numpy as np

PAIRS = tuple(combinations(range(4), 2))
_INDEX = {pair: i for i, pair in enumerate(PAIRS)}


def _accumulate(out, i, j, value, col):
    if i == j or value == 0:
        return
    if i < j:
        out[_INDEX[(i, j)], col] += value
    else:
        out[_INDEX[(j, i)], col] -= value


def compound_lift(M) -> np.ndarray:
    """
    U′ = MU 诱导的 W′ = M⁽²⁾W：M⁽²⁾(e_k∧e_l) = Me_k∧e_l + e_k∧Me_l
    :param M: 4×4 矩阵
    :return: 6×6 矩阵
    """
    M = np.asarray(M)
    if M.shape != (4, 4):
        raise ValueError(f"compound_lift 需要 4×4 矩阵，得到 {M.shape}")
    out = np.zeros((6, 6), dtype=np.result_type(M, float))
    for col, (k, l) in enumerate(PAIRS):
        for m in range(4):
            _accumulate(out, m, l, M[m, k], col)
            _accumulate(out, k, m, M[m, l], col)
    return out


def wedge(u, v) -> np.ndarray:
    u, v = np.asarray(u), np.asarray(v)
    return np.array([u[i] * v[j] - u[j] * v[i] for i, j in PAIRS])


def pairing(w, z):
    """Λ²⊗Λ² → Λ⁴：w∧z 在 e1∧e2∧e3∧e4 上的系数"""
    return (w[0] * z[5] - w[1] * z[4] + w[2] * z[3]
            + w[3] * z[2] - w[4] * z[1] + w[5] * z[0])


# 伴随矩阵的移位部分与第 4 行各元素的提升，预先计算
SHIFT_LIFT = compound_lift(np.eye(4, k=1))
ROW4_LIFTS = np.stack([compound_lift(np.eye(4)[:, [3]] @ np.eye(4)[[j], :]) for j in range(4)])


def companion_lift(row) -> np.ndarray:
    """第 4 行为 row 的伴随矩阵的提升（提升对矩阵线性）"""
    return SHIFT_LIFT + np.tensordot(np.asarray(row), ROW4_LIFTS, axes=1)
