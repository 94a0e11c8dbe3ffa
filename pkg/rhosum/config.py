# -*- coding: utf-8 -*-
"""Run configuration of the summation pipeline."""
from dataclasses import dataclass, field
from typing import Mapping, Optional, Tuple

from rhosum.utils.run_utils import thread_count

"""Tactic names accepted on the command line; "ladder" selects the escalation ladder."""
TACTICS = ("rpt1", "rpt2", "rpt3", "rpt4", "ladder")
"""Output formats."""
FORMATS = ("human", "sexp")


@dataclass(frozen=True)
class RunConfig:
    """Limits and switches of one pipeline run."""

    ladder: Tuple[str, ...] = ("ladder",)
    d_max: int = 6
    delta_limit: Optional[int] = None
    time_budget: Optional[float] = 600.0
    verify_start: int = 0
    verify_length: int = 21
    strict: bool = False
    output_format: str = "human"
    reduce_inner: bool = True
    kernel_radius: int = 3
    definite_depth: int = 2
    threads: int = field(default_factory=thread_count)

    def __post_init__(self):
        if self.d_max < 1:
            raise ValueError(f"d_max must be at least 1, got {self.d_max}")
        unknown = [t for t in self.ladder if t not in TACTICS]
        if unknown:
            raise ValueError(f"unknown tactic(s) {', '.join(unknown)}; choose from {', '.join(TACTICS)}")
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.verify_length < 1:
            raise ValueError("the verification window must not be empty")
        if self.kernel_radius < 0:
            raise ValueError(f"kernel_radius must not be negative, got {self.kernel_radius}")

    @property
    def escalate(self) -> bool:
        """True if the tactic ladder is chosen automatically."""
        return "ladder" in self.ladder

    def check_window(self, order: int):
        """The verification window must exceed the recurrence order by at least 5."""
        if self.verify_length < order + 5:
            raise ValueError(f"verification window of length {self.verify_length} is too short "
                             f"for a recurrence of order {order}")

    @classmethod
    def from_arguments(cls, arguments: Mapping[str, object]) -> "RunConfig":
        """Build a configuration from docopt arguments; missing options keep their defaults."""
        values = {}
        tactic = arguments.get("--tactic")
        if tactic:
            values["ladder"] = (str(tactic),)
        if arguments.get("--max-order"):
            values["d_max"] = int(arguments["--max-order"])
        if arguments.get("--delta-limit"):
            values["delta_limit"] = int(arguments["--delta-limit"])
        if arguments.get("--time-budget"):
            budget = float(arguments["--time-budget"])
            values["time_budget"] = budget if budget > 0 else None
        window = arguments.get("--verify-window")
        if window:
            start, _, length = str(window).partition(":")
            values["verify_start"] = int(start) if length else 0
            values["verify_length"] = int(length) if length else int(start)
        if arguments.get("--strict"):
            values["strict"] = True
        if arguments.get("--format"):
            values["output_format"] = str(arguments["--format"])
        if arguments.get("--kernel-radius"):
            values["kernel_radius"] = int(arguments["--kernel-radius"])
        if arguments.get("--no-reduce"):
            values["reduce_inner"] = False
        return cls(**values)
