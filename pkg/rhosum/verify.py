# -*- coding: utf-8 -*-
"""Numeric verification of recurrences and telescoping certificates against the exact oracle."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ

from rhosum.config import RunConfig
from rhosum.errors import NotFound, OracleError, PoleAtPoint, VerificationFailed
from rhosum.exact_arith import BigRat
from rhosum.hol_core import HolExtension, LiftedElem, Recurrence, default_bindings, eval_lifted, sigma_lifted
from rhosum.oracle import eval_spec
from rhosum.sum_expr import SumSpec
from rhosum.utils.run_utils import parallel_map

"""Points at which a telescoping certificate is checked inside the pipeline."""
CERTIFICATE_CHECKS = 6


@dataclass
class VerificationReport:
    """Exact residuals of a recurrence over a window of the distinguished parameter.

    The report passes iff at least one point was checked and every residual is zero.
    """

    window: Tuple[int, int]
    residuals: Dict[int, BigRat] = field(default_factory=dict)
    skipped: List[int] = field(default_factory=list)
    certificate_checks: int = 0

    @property
    def failures(self) -> List[int]:
        return [point for point, value in sorted(self.residuals.items()) if value != 0]

    @property
    def ok(self) -> bool:
        return bool(self.residuals) and not self.failures

    def lines(self) -> List[str]:
        start, length = self.window
        lines = [f"window {start}..{start + length - 1}: {len(self.residuals)} points checked, "
                 f"{len(self.skipped)} skipped"]
        if self.skipped:
            lines.append(f"skipped: {', '.join(str(p) for p in self.skipped)}")
        for point in self.failures:
            lines.append(f"residual at {point}: {self.residuals[point]}")
        if self.certificate_checks:
            lines.append(f"certificate checked at {self.certificate_checks} points")
        lines.append("PASS" if self.ok else "FAIL")
        return lines


def verify_recurrence(spec: SumSpec, recurrence: Recurrence, config: Optional[RunConfig] = None,
                      bindings: Optional[Mapping[str, int]] = None) -> VerificationReport:
    """Plug oracle values of the sum into the recurrence over the configured window.

    Points below the recurrence's start, roots of the leading coefficient and poles of the
    coefficients or the right-hand side are skipped.
    """
    config = config or RunConfig()
    bindings = dict(bindings or default_bindings(recurrence.ground))
    start, length = config.verify_start, config.verify_length
    report = VerificationReport((start, length))
    needed = list(range(start, start + length + recurrence.order))

    def value(point: int) -> Optional[BigRat]:
        try:
            return eval_spec(spec, {**bindings, spec.distinguished: point})
        except OracleError as ex:
            logging.debug("no oracle value at %d: %s", point, ex)
            return None

    values = dict(zip(needed, parallel_map(value, needed, config.threads)))
    roots = set(recurrence.roots())
    for point in range(start, start + length):
        window = [values[point + i] for i in range(recurrence.order + 1)]
        if point < recurrence.start or point in roots or any(v is None for v in window):
            report.skipped.append(point)
            continue
        try:
            report.residuals[point] = recurrence.residual(window, point, bindings)
        except (PoleAtPoint, OracleError) as ex:
            logging.debug("skipping %d: %s", point, ex)
            report.skipped.append(point)
    if report.ok:
        logging.info("Recurrence verified at %d points (%d skipped)", len(report.residuals), len(report.skipped))
    else:
        logging.warning("Recurrence fails at %s", report.failures or "every point")
    return report


def check_certificate(ext: HolExtension, fs: Sequence[LiftedElem], constants: Sequence, certificate: LiftedElem,
                      points: Iterable[int], bindings: Optional[Mapping[str, int]] = None) -> int:
    """Check sigma(g) - g = c_1 f_1 + ... + c_d f_d at the given points.

    Points where something has a pole are skipped. Returns the number of points checked and
    raises VerificationFailed on the first mismatch.
    """
    bindings = dict(bindings or default_bindings(ext.ground))
    gf = ext.ground
    shifted = sigma_lifted(ext, certificate)
    checked = 0
    for point in points:
        try:
            lhs = eval_lifted(ext, shifted, point, bindings) - eval_lifted(ext, certificate, point, bindings)
            rhs = sum((gf.evaluate(c, point, bindings) * eval_lifted(ext, f, point, bindings)
                       for c, f in zip(constants, fs) if c), QQ(0))
        except (PoleAtPoint, OracleError, NotFound) as ex:
            logging.debug("certificate not checked at %d: %s", point, ex)
            continue
        if lhs != rhs:
            raise VerificationFailed(f"certificate fails at t = {point}: {lhs} != {rhs}")
        checked += 1
    return checked

