"""Benchmark harness, performance profiles and the command line tool."""

from .harness import SUITES, run_suite
from .profile import (ProfileCurve, RunRecord, emit_csv, performance_profile, read_curves_csv,
                      read_records_csv)

__all__ = ["SUITES", "run_suite", "ProfileCurve", "RunRecord", "emit_csv",
           "performance_profile", "read_curves_csv", "read_records_csv"]
