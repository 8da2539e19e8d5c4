"""
Study orchestration for sphere-moments.

Runs the linearization and convergence studies described by a RunConfig,
with progress callbacks and cancellation between evaluation points.
"""

import logging
import signal
import time
from contextlib import contextmanager
from typing import Callable, Iterator, List, Optional

from core.errors import UsageError
from core.models import Benchmark, Example1Config, MomentQuantity, RunConfig, StudyKind, StudyReport
from core.validation import convergence_study, linearization_error_study

logger = logging.getLogger("sphere_moments")


class StudyRunner:
    """
    Orchestrates the error studies for one run configuration.

    A convergence study produces one report per evaluation point; a
    linearization study produces a single report over all points.
    Supports cancellation via cancel(), or Ctrl+C inside cancel_on_interrupt().
    """

    def __init__(self, settings: RunConfig):
        self.settings = settings
        self._cancelled = False
        self._progress_callback: Optional[Callable[[str, int], None]] = None
        self._reports_done = 0

    def cancel(self):
        """Request cancellation; the current study finishes first."""
        self._cancelled = True

    @property
    def is_cancelled(self) -> bool:
        return self._cancelled

    @contextmanager
    def cancel_on_interrupt(self) -> Iterator["StudyRunner"]:
        """Turn Ctrl+C into cancel() while the block runs, so finished reports are kept."""
        def handler(signum, frame):
            logger.warning("Interrupt received; stopping after the current evaluation point")
            self.cancel()

        previous = signal.signal(signal.SIGINT, handler)
        try:
            yield self
        finally:
            signal.signal(signal.SIGINT, previous)

    def set_progress_callback(self, callback: Callable[[str, int], None]):
        """Set a callback for progress updates: callback(label, reports_done)."""
        self._progress_callback = callback

    def _report_progress(self, label: str):
        if self._progress_callback:
            self._progress_callback(label, self._reports_done)

    def run(self, kind: Optional[StudyKind] = None) -> List[StudyReport]:
        """Run the configured study and return its reports."""
        kind = StudyKind(kind or self.settings.study)
        start_time = time.time()
        self._cancelled = False
        self._reports_done = 0
        reports: List[StudyReport] = []

        try:
            if kind is StudyKind.LINEARIZATION:
                self._run_linearization(reports)
            else:
                self._run_convergence(reports)
        except Exception as e:
            logger.error(f"Study error: {e}", exc_info=True)
            raise

        for report in reports:
            report.metadata["seed"] = self.settings.seed
        logger.info(
            f"Study complete: {kind.value}, {len(reports)} report(s), "
            f"{time.time() - start_time:.1f}s"
            + (" (cancelled)" if self.is_cancelled else "")
        )
        return reports

    def _run_linearization(self, reports: List[StudyReport]):
        cfg = self.settings
        if cfg.benchmark != Benchmark.EXAMPLE1.value:
            raise UsageError("The linearization study needs the example1 benchmark")
        logger.info(f"Linearization study of the {cfg.quantity} over epsilons {cfg.epsilons}")
        self._report_progress("linearization")
        report = linearization_error_study(
            Example1Config(cfg.tc, cfg.epsilon),
            cfg.epsilons,
            cfg.evaluation_points,
            MomentQuantity(cfg.quantity),
            cross_order=cfg.cross_order,
            band_limit=cfg.band_limit,
            nodes=cfg.quadrature_nodes,
        )
        reports.append(report)
        self._reports_done += 1

    def _run_convergence(self, reports: List[StudyReport]):
        cfg = self.settings
        if cfg.benchmark != Benchmark.EXAMPLE2.value:
            raise UsageError("The convergence study needs the example2 benchmark")
        for point in cfg.evaluation_points:
            if self.is_cancelled:
                logger.warning("Convergence study cancelled")
                return
            self._report_progress(f"convergence at {tuple(point)}")
            reports.append(convergence_study(cfg.tc, cfg.p_list, point, cfg.reference_p))
            self._reports_done += 1
