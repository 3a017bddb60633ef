from .experiment import build_corpus, build_table, curves_frame, run_all, run_experiment, run_one
from .report import format_report, goal_report, report
from .stats import GoalHit, average_curve, describe, net_savings, savings, sign_test, tests_to_goal

__all__ = [
    "GoalHit",
    "average_curve",
    "build_corpus",
    "build_table",
    "curves_frame",
    "describe",
    "format_report",
    "goal_report",
    "net_savings",
    "report",
    "run_all",
    "run_experiment",
    "run_one",
    "savings",
    "sign_test",
    "tests_to_goal",
]
