"""Exact toolkit for preemptive two-machine scheduling of unit jobs with
in-tree precedences and release dates, minimizing total completion time."""

__version__ = "0.1.0"

from .timeline import BlockPartition, Instance, IntervalSchedule, Job, derive_partition, realize  # noqa: E402
from .solver import grid_dp_solve, solve_exact  # noqa: E402

__all__ = [
    "BlockPartition", "Instance", "IntervalSchedule", "Job",
    "derive_partition", "realize", "grid_dp_solve", "solve_exact",
]
