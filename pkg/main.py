#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Novikov Analyzer - Novikov 方程光滑孤立波的谱稳定性分析工具
主程序入口文件

功能:
- wave:   打靶构造孤立波剖面并导出
- verify: Evans 函数环绕数验证谱假设 H1（λ−(L̃)、σ1、能量界、Γ1/Γ2）
- vk:     𝓕(μ(·;k)) 的 k 扫描与 Vakhitov-Kolokolov 条件

退出码: 0 成功/判定为真，1 判定为假，2 参数错误，3 数值失败
"""

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn

# 导入自定义模块
from numerics import NovikovError, NumericalError, ParameterError, Tolerances
from report.report_generator import ReportGenerator
from solitary import GridSpec, admissible_a_max, params_from_a, params_from_k, shoot_profile
from operators import coefficient_fields
from spectrum import ContourSettings, SpectralVerifier
from vk import VKAnalyzer

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
EXIT_INTERRUPTED = 130


@dataclass
class RunConfig:
    """
    一次运行的完整配置，随结果一起写入 run_config.json
    """
    command: str
    c: float = 1.0
    a_values: List[float] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    k: Optional[float] = None
    k_min: Optional[float] = None
    k_max: Optional[float] = None
    n: Optional[int] = None
    output_dir: str = "output"
    workers: int = 1
    cross_check: bool = False
    tolerances: Tolerances = field(default_factory=Tolerances)
    grid: GridSpec = field(default_factory=GridSpec)
    contours: ContourSettings = field(default_factory=ContourSettings)

    def to_dict(self) -> dict:
        return asdict(self)


def parse_j_list(text: str, allow_near_peakon: bool = False) -> List[int]:
    """
    解析 "3..15"、"3,5,7" 或二者混合
    :param text: j 列表
    :param allow_near_peakon: 是否允许 j = 1, 2
    :return: 升序去重后的 j 值
    """
    values = set()
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ".." in part:
            lo, hi = (int(v) for v in part.split("..", 1))
            values.update(range(lo, hi + 1))
        else:
            values.add(int(part))
    if not values:
        raise ParameterError(f"j 列表为空: '{text}'")
    lowest = 1 if allow_near_peakon else 3
    bad = [j for j in values if not lowest <= j <= 15]
    if bad:
        raise ParameterError(f"j 必须位于 {lowest}..15，得到 {sorted(bad)}")
    return sorted(values)


def a_for_j(j: int, c: float) -> float:
    """a_j = j·(3√3c²/16)/16"""
    return j * admissible_a_max(c) / 16.0


def resolve_workers(requested: Optional[int]) -> int:
    if requested is not None:
        return max(1, requested)
    try:
        return max(1, int(os.environ.get("NOVIKOV_WORKERS", "1")))
    except ValueError:
        return 1


def _verify_wave(task) -> dict:
    """进程池中执行的单波验证（模块级函数以便 pickle）"""
    params, label, config, quiet = task
    console = Console(quiet=True) if quiet else None
    verifier = SpectralVerifier(config.grid, config.tolerances, config.contours, workers=1,
                                cross_check=config.cross_check, console=console)
    try:
        report = verifier.verify(params, label=label)
        return {'success': True, 'label': label, 'a': params.a, 'report': report}
    except NovikovError as e:
        return {'success': False, 'label': label, 'a': params.a, 'stage': e.stage or 'unknown',
                'error': str(e), 'kind': 'parameter' if isinstance(e, ParameterError) else 'numerical'}


class NovikovAnalyzer:
    """
    Novikov 分析器主类，协调各个模块完成剖面、谱验证与 VK 分析任务
    """

    def __init__(self, config: RunConfig, console: Optional[Console] = None):
        """
        初始化分析器
        :param config: 运行配置
        :param console: Rich Console对象
        """
        self.config = config
        self.console = console or Console()
        self.output_dir = Path(config.output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.reporter = ReportGenerator(console=self.console)
        self.vk_analyzer = VKAnalyzer(config.tolerances, config.grid, console=self.console)

        # 设置输出路径
        self.profiles_dir = self.output_dir / "profiles"
        self.reports_dir = self.output_dir / "reports"
        self.evans_dir = self.output_dir / "evans"
        self.vk_dir = self.output_dir / "vk"

        for directory in [self.profiles_dir, self.reports_dir, self.evans_dir, self.vk_dir]:
            directory.mkdir(exist_ok=True)

        self.reporter.generate_json_report(config.to_dict(), self.output_dir / "run_config.json")

    def _csv_header(self, L=None) -> dict:
        return {"tolerances": self.config.tolerances.to_dict(), "L": L}

    def analyze_wave(self, c: float, a: Optional[float] = None, k: Optional[float] = None) -> dict:
        """
        构造单个孤立波并导出剖面与系数场
        :param c: 波速
        :param a: 积分常数（与 k 二选一）
        :param k: 端点值
        :return: 结果字典
        """
        try:
            tol = self.config.tolerances
            params = params_from_k(k, c, tol) if k is not None else params_from_a(a, c, tol)

            with Progress(
                SpinnerColumn(),
                TextColumn("[progress.description]{task.description}"),
                console=self.console
            ) as progress:
                task = progress.add_task("打靶求解孤立波...", total=None)
                profile = shoot_profile(params, self.config.grid, tol)
                coeffs = coefficient_fields(profile)
                progress.update(task, description="✅ 孤立波构造完成")

            stem = f"wave_c{c:g}_k{params.k:.8f}"
            paths = self.reporter.write_profile(profile, self.profiles_dir, stem)
            paths['coefficients'] = self.reporter.write_coefficients(coeffs, self.profiles_dir / f"{stem}_fields.csv")
            functionals = self.vk_analyzer.check_wave(params)
            paths['functionals'] = self.reporter.generate_json_report(
                functionals, self.profiles_dir / f"{stem}_functionals.json")

            self.console.print(Panel(
                f"k = {params.k:.10f}\na = {params.a:.10f}\nE = {params.E:.10f}\n"
                f"φ_M = {params.phi_max:.10f}\nC(k) = {params.decay_rate:.10f}\nL = {profile.L:.4f}",
                title="🌊 孤立波构造完成",
                border_style="green"
            ))
            return {'success': True, 'params': params, 'paths': paths, 'functionals': functionals}

        except NovikovError as e:
            self.console.print(f"[red]❌ 孤立波构造失败: {str(e)}[/]")
            return {'success': False, 'error': str(e),
                    'kind': 'parameter' if isinstance(e, ParameterError) else 'numerical'}

    def verify_waves(self, c: float, a_values: Sequence[float], labels: Sequence[str]) -> List[dict]:
        """
        批量验证 H1；单个波失败不影响其余波
        :param c: 波速
        :param a_values: 积分常数列表
        :param labels: 对应的标签
        :return: 逐波结果
        """
        self.console.print(Panel(
            f"📋 开始验证 {len(a_values)} 个孤立波 (c = {c:g})",
            title="谱假设 H1",
            border_style="blue"
        ))

        tasks, results = [], []
        for a, label in zip(a_values, labels):
            try:
                params = params_from_a(a, c, self.config.tolerances)
            except ParameterError as e:
                self.console.print(f"[red]❌ {label}: {str(e)}[/]")
                results.append({'success': False, 'label': label, 'a': a, 'stage': 'params',
                                'error': str(e), 'kind': 'parameter'})
                continue
            tasks.append((params, label, self.config, self.config.workers > 1))

        workers = self.config.workers
        pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 and len(tasks) > 1 else nullcontext()
        with pool as executor:
            mapper = executor.map if executor is not None else map
            for result in mapper(_verify_wave, tasks):
                if not result['success']:
                    self.console.print(f"[yellow]⚠️ {result['label']} 在阶段 {result['stage']} 失败: "
                                       f"{result['error']}，继续处理下一个[/]")
                results.append(result)

        # 输出串行写出
        for result in results:
            report = result.get('report')
            if report is None:
                continue
            stem = report.label or f"a{report.params.a:.8f}"
            self.reporter.generate_json_report(report.to_dict(), self.reports_dir / f"{stem}.json")
            for contour in report.contours:
                self.reporter.write_evans_samples(contour, self.evans_dir / f"{stem}_{contour.name}.csv",
                                                  self._csv_header(report.diagnostics.get("L")))

        # 每个波的 L 各不相同，写在 L 列
        self.reporter.write_summary_csv(results, self.reports_dir / "summary.csv",
                                        {"tolerances": self.config.tolerances.to_dict()})
        self.reporter.generate_markdown_report(results, self.reports_dir / "summary.md")
        self.reporter.display_summary(results)

        success_count = sum(1 for r in results if r['success'])
        self.console.print(Panel(
            f"✅ 完成: {success_count}/{len(results)}\n❌ 失败: {len(results) - success_count}/{len(results)}",
            title="批量验证完成",
            border_style="green"
        ))
        return results

    def scan_vk(self, c: float, k_min: float, k_max: float, n: int) -> dict:
        """
        在 [k_min, k_max] 的均匀网格上扫描 𝓕
        :return: 结果字典
        """
        try:
            if not 0 < k_min < k_max < np.sqrt(c) / 2.0:
                raise ParameterError(f"需要 0 < kmin < kmax < √c/2 = {np.sqrt(c) / 2:.6g}")
            k_grid = np.linspace(k_min, k_max, n)
            workers = self.config.workers
            pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else nullcontext()
            with pool as executor:
                scan = self.vk_analyzer.scan(c, k_grid, executor)
            path = self.reporter.write_vk_scan(scan, self.vk_dir / f"vk_scan_c{c:g}.csv",
                                               self.config.tolerances.to_dict())
            self.reporter.display_vk(scan)
            return {'success': True, 'scan': scan, 'path': path}

        except NovikovError as e:
            self.console.print(f"[red]❌ VK 扫描失败: {str(e)}[/]")
            return {'success': False, 'error': str(e),
                    'kind': 'parameter' if isinstance(e, ParameterError) else 'numerical'}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Novikov Analyzer - 光滑孤立波谱稳定性分析工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例用法:
  python main.py wave --c 1 --a 0.16238
  python main.py verify --c 1 --j 3..15 --workers 4
  python main.py vk --c 1 --kmin 0.02 --kmax 0.48 --n 24
        """
    )
    parser.add_argument("-o", "--output", default="output", help="输出目录（默认: output）")
    parser.add_argument("--workers", type=int, default=None,
                        help="并行进程数（默认取环境变量 NOVIKOV_WORKERS，否则为 1）")
    parser.add_argument("--ode-rel", type=float, default=1e-10, help="ODE 相对容差")
    parser.add_argument("--ode-abs", type=float, default=1e-12, help="ODE 绝对容差")
    parser.add_argument("--evans-rel", type=float, default=1e-8, help="Evans 积分相对容差")
    parser.add_argument("--evans-abs", type=float, default=1e-10, help="Evans 积分绝对容差")
    parser.add_argument("--quad-tol", type=float, default=1e-9, help="求积相对容差")
    parser.add_argument("--half-points", type=int, default=8192, help="半区间网格间隔数")
    parser.add_argument("--length", type=float, default=None, help="截断长度 L（默认自动选择）")

    sub = parser.add_subparsers(dest="command", required=True)

    wave = sub.add_parser("wave", help="构造孤立波剖面")
    wave.add_argument("--c", type=float, default=1.0, help="波速（默认: 1）")
    group = wave.add_mutually_exclusive_group(required=True)
    group.add_argument("--a", type=float, help="积分常数 a")
    group.add_argument("--k", type=float, help="端点值 k")

    verify = sub.add_parser("verify", help="验证谱假设 H1")
    verify.add_argument("--c", type=float, default=1.0, help="波速（默认: 1）")
    group = verify.add_mutually_exclusive_group(required=True)
    group.add_argument("--j", help="波编号列表，例如 3..15 或 3,5,7（a_j = j·a_max/16）")
    group.add_argument("--a", type=float, nargs="+", help="积分常数列表")
    verify.add_argument("--near-peakon", action="store_true", help="允许 j = 1, 2（接近尖峰波，数值困难）")
    verify.add_argument("--contour-points", type=int, default=64, help="每个围道的初始采样点数")
    verify.add_argument("--cross-check", action="store_true", help="额外计算 D̃ 在 B 围道上的环绕数")

    vk = sub.add_parser("vk", help="Vakhitov-Kolokolov 条件扫描")
    vk.add_argument("--c", type=float, default=1.0, help="波速（默认: 1）")
    vk.add_argument("--kmin", type=float, required=True, help="k 网格下端")
    vk.add_argument("--kmax", type=float, required=True, help="k 网格上端")
    vk.add_argument("--n", type=int, required=True, help="k 网格点数（至少 3）")
    return parser


def build_config(args) -> RunConfig:
    tolerances = Tolerances(ode_rel=args.ode_rel, ode_abs=args.ode_abs, quad_tol=args.quad_tol,
                            evans_rel=args.evans_rel, evans_abs=args.evans_abs)
    config = RunConfig(command=args.command, c=args.c, output_dir=args.output,
                       workers=resolve_workers(args.workers), tolerances=tolerances,
                       grid=GridSpec(half_points=args.half_points, length=args.length))

    if args.command == "wave":
        config.k = args.k
        config.a_values = [args.a] if args.a is not None else []
    elif args.command == "verify":
        if args.j is not None:
            js = parse_j_list(args.j, args.near_peakon)
            config.a_values = [a_for_j(j, args.c) for j in js]
            config.labels = [f"j{j:02d}" for j in js]
        else:
            if not args.a:
                raise ParameterError("a 列表为空")
            config.a_values = list(args.a)
            config.labels = [f"a{i + 1:02d}" for i in range(len(args.a))]
        config.contours = ContourSettings(initial_points=args.contour_points)
        config.cross_check = args.cross_check
    else:
        if args.n < 3:
            raise ParameterError("k 网格至少需要 3 个点")
        config.k_min, config.k_max, config.n = args.kmin, args.kmax, args.n
    return config


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    """
    主函数，处理命令行参数并执行分析
    :return: 退出码
    """
    console = console or Console()
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = build_config(args)
    except (ParameterError, ValueError) as e:
        console.print(f"[red]❌ 参数错误: {str(e)}[/]")
        return EXIT_USAGE

    try:
        analyzer = NovikovAnalyzer(config, console=console)

        if config.command == "wave":
            result = analyzer.analyze_wave(config.c, a=config.a_values[0] if config.a_values else None,
                                           k=config.k)
            if result['success']:
                return EXIT_OK
            return EXIT_USAGE if result['kind'] == 'parameter' else EXIT_NUMERICAL

        if config.command == "verify":
            results = analyzer.verify_waves(config.c, config.a_values, config.labels)
            if all(r['success'] and r['report'].h1_verdict for r in results):
                return EXIT_OK
            if any(not r['success'] and r['kind'] == 'parameter' for r in results):
                return EXIT_USAGE
            if any(not r['success'] for r in results):
                return EXIT_NUMERICAL
            return EXIT_FALSE

        result = analyzer.scan_vk(config.c, config.k_min, config.k_max, config.n)
        if not result['success']:
            return EXIT_USAGE if result['kind'] == 'parameter' else EXIT_NUMERICAL
        return EXIT_OK if result['scan'].verdict else EXIT_FALSE

    except KeyboardInterrupt:
        console.print("\n用户中断操作")
        return EXIT_INTERRUPTED
    except NumericalError as e:
        console.print(f"[red]❌ 数值失败: {str(e)}[/]")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
