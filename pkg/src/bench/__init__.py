"""Benchmarks, EOC and the experiment runner."""
from .cases import TestCase, kellogg_case, lshaped_case, smooth_case
from .eoc import EocReport, eoc, loglog_slope, window_slopes
from .grading import AnnulusStats, annulus_grading
from .registry import CASES, case_names, get_case

__all__ = [
    "TestCase",
    "kellogg_case",
    "lshaped_case",
    "smooth_case",
    "EocReport",
    "eoc",
    "loglog_slope",
    "window_slopes",
    "AnnulusStats",
    "annulus_grading",
    "CASES",
    "case_names",
    "get_case",
]
