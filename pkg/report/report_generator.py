import csv
import json
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table


def _to_jsonable(value):
    """numpy 标量/数组与复数转为 JSON 可写类型"""
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


class ReportGenerator:
    """
    报告生成器，负责把剖面、系数场、Evans 采样、谱验证与 VK 扫描结果写成 CSV / JSON / Markdown
    """

    NUMBER_FORMAT = "%.12e"

    def __init__(self, console: Console = None):
        """
        初始化报告生成器
        :param console: Rich Console对象
        """
        self.console = console or Console()

    def write_table(self, columns: Dict[str, np.ndarray], output_path: str, header: Optional[Dict] = None) -> str:
        """
        写出数值表格：`#` 注释头 + 列名行 + %.12e 数据
        :param columns: 列名 → 等长数组
        :param output_path: 输出路径
        :param header: 写入注释头的键值对（容差、截断长度等）
        :return: 文件路径
        """
        try:
            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])

            with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
                for key, value in (header or {}).items():
                    f.write(f"# {key}: {json.dumps(_to_jsonable(value), ensure_ascii=False, sort_keys=True)}\n")
                f.write(",".join(columns.keys()) + "\n")
                np.savetxt(f, data, fmt=self.NUMBER_FORMAT, delimiter=",")

            self.console.print(f"[green]📊 CSV 已生成: {output_path.name}[/]")
            return str(output_path)

        except Exception as e:
            self.console.print(f"[red]❌ CSV 生成失败: {str(e)}[/]")
            raise e

    def generate_json_report(self, data: Dict, output_path: str) -> str:
        """
        生成 JSON 格式的结构化报告
        :param data: 报告内容
        :param output_path: 报告保存路径
        :return: 报告文件路径
        """
        try:
            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump(_to_jsonable(data), f, ensure_ascii=False, indent=2)

            self.console.print(f"[green]📊 JSON报告已生成: {output_path.name}[/]")
            return str(output_path)

        except Exception as e:
            self.console.print(f"[red]❌ JSON报告生成失败: {str(e)}[/]")
            raise e

    def write_profile(self, profile, output_dir: str, stem: str = "profile") -> Dict[str, str]:
        """WaveProfile → CSV 表格 + JSON 头"""
        header = profile.header()
        output_dir = Path(output_dir)
        csv_path = self.write_table(profile.columns(), output_dir / f"{stem}.csv",
                                    {"tolerances": header["tolerances"], "L": header["L"],
                                     "params": header["params"]})
        json_path = self.generate_json_report(header, output_dir / f"{stem}.json")
        return {"csv": csv_path, "json": json_path}

    def write_coefficients(self, field, output_path: str) -> str:
        """系数场调试表（x, F, F′, F″, F‴, G, G′, G″, f）"""
        header = {"L": field.L, "tolerances": field.profile.tol.to_dict(),
                  "omega0": field.omega0, "omega1": field.omega1, "sigma0": field.sigma0}
        return self.write_table(field.columns(), output_path, header)

    def write_evans_samples(self, contour, output_path: str, header: Optional[Dict] = None) -> str:
        """围道上的 Evans 值（Re λ, Im λ, Re D, Im D, renorm_log）"""
        values = contour.values
        magnitude = np.abs(values)
        columns = {
            "re_lambda": contour.samples.real,
            "im_lambda": contour.samples.imag,
            "re_D": (values / magnitude).real,
            "im_D": (values / magnitude).imag,
            "renorm_log": np.log(magnitude),
        }
        meta = dict(header or {})
        meta["contour"] = contour.describe()
        return self.write_table(columns, output_path, meta)

    def write_vk_scan(self, scan, output_path: str, tolerances: Dict) -> str:
        header = {"c": scan.c, "tolerances": tolerances, "L": "none (quadrature in phi)",
                  "verdict": scan.verdict}
        return self.write_table(scan.columns(), output_path, header)

    def write_summary_csv(self, results: List[Dict], output_path: str, header: Optional[Dict] = None) -> str:
        """
        每个波一行：label, k, σ0, λ−(L̃), σ1, 能量界, 两个环绕数, 判定, 该波实际使用的 L；失败的波记录阶段与错误
        """
        fields = ["label", "a", "k", "sigma0", "lambda_minus_SL", "sigma1", "energy_bound",
                  "winding_gamma1", "winding_gamma2", "h1_verdict", "L", "stage", "error"]
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, 'w', encoding='utf-8', newline='') as f:
            for key, value in (header or {}).items():
                f.write(f"# {key}: {json.dumps(_to_jsonable(value), ensure_ascii=False, sort_keys=True)}\n")
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(fields)
            for result in results:
                report = result.get('report')
                if report is not None:
                    writer.writerow([
                        report.label, self.NUMBER_FORMAT % report.params.a, self.NUMBER_FORMAT % report.params.k,
                        self.NUMBER_FORMAT % report.sigma0, self.NUMBER_FORMAT % report.lambda_minus_SL,
                        self.NUMBER_FORMAT % report.sigma1, self.NUMBER_FORMAT % report.energy_bound,
                        report.winding_gamma1, report.winding_gamma2, report.h1_verdict,
                        self.NUMBER_FORMAT % report.diagnostics.get("L", np.nan), "", "",
                    ])
                else:
                    writer.writerow([result.get('label', ''), self.NUMBER_FORMAT % result.get('a', np.nan),
                                     "", "", "", "", "", "", "", False, "",
                                     result.get('stage', ''), result.get('error', '')])
        self.console.print(f"[green]📊 汇总 CSV 已生成: {output_path.name}[/]")
        return str(output_path)

    def generate_markdown_report(self, results: List[Dict], output_path: str) -> str:
        """
        生成 Markdown 格式的验证摘要
        :param results: verify 流程的逐波结果
        :param output_path: 报告保存路径
        :return: 报告文件路径
        """
        try:
            lines = [
                "# 谱假设 H1 验证报告",
                "",
                f"生成时间: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}",
                "",
                "| 波 | k | σ0 | λ−(L̃) | σ1 | 能量界 | Γ1 | Γ2 | 判定 |",
                "|----|---|----|--------|----|--------|----|----|------|",
            ]
            for result in results:
                report = result.get('report')
                if report is None:
                    lines.append(f"| {result.get('label', '')} | - | - | - | - | - | - | - | "
                                 f"❌ {result.get('stage', '')}: {result.get('error', '')} |")
                    continue
                verdict = "✅" if report.h1_verdict else "❌"
                lines.append(
                    f"| {report.label} | {report.params.k:.6f} | {report.sigma0:.4f} | "
                    f"{report.lambda_minus_SL:.4f} | {report.sigma1:.3f} | {report.energy_bound:.2f} | "
                    f"{report.winding_gamma1} | {report.winding_gamma2} | {verdict} |")

            passed = sum(1 for r in results if r.get('report') is not None and r['report'].h1_verdict)
            lines += ["", f"**{passed}/{len(results)}** 个波满足 winding(Γ1) = 1 且 winding(Γ2) = 2。", ""]

            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
                f.write("\n".join(lines))

            self.console.print(f"[green]📊 Markdown报告已生成: {output_path.name}[/]")
            return str(output_path)

        except Exception as e:
            self.console.print(f"[red]❌ 报告生成失败: {str(e)}[/]")
            raise e

    def display_summary(self, results: List[Dict]):
        """
        在控制台显示验证摘要
        """
        table = Table(title="🌊 谱假设 H1 验证")
        table.add_column("波", style="cyan")
        table.add_column("k", justify="right")
        table.add_column("σ1", justify="right")
        table.add_column("能量界", justify="right")
        table.add_column("环绕数", justify="center")
        table.add_column("判定", justify="center")

        for result in results:
            report = result.get('report')
            if report is None:
                table.add_row(result.get('label', ''), "-", "-", "-", "-",
                              f"[red]❌ {result.get('stage', '')}[/red]")
                continue
            table.add_row(report.label, f"{report.params.k:.6f}", f"{report.sigma1:.3f}",
                          f"{report.energy_bound:.2f}", f"({report.winding_gamma1}, {report.winding_gamma2})",
                          "[green]✅[/green]" if report.h1_verdict else "[red]❌[/red]")
        self.console.print(table)

    def display_vk(self, scan):
        """VK 扫描结果面板"""
        verdict = "[green]✅ 成立[/green]" if scan.verdict else "[red]❌ 不成立[/red]"
        body = (f"c = {scan.c}\n"
                f"k ∈ [{scan.k_grid[0]:.4f}, {scan.k_grid[-1]:.4f}]，{scan.k_grid.size} 个点\n"
                f"𝓕 ∈ [{scan.calF_values.min():.6e}, {scan.calF_values.max():.6e}]\n"
                f"max d𝓕/dk = {scan.dcalF_dk.max():.6e}\n"
                f"max 内积 = {scan.inner_products.max():.6e}\n"
                f"VK 条件: {verdict}")
        self.console.print(Panel(body, title="📉 Vakhitov-Kolokolov 扫描", border_style="green"))
