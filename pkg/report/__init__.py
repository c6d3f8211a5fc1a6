# Report generation module
from .report_generator import ReportGenerator
