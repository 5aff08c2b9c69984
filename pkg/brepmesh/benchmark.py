"""Timing of the pipeline stages"""

import contextlib
import logging
import time
from collections import OrderedDict
from typing import Callable, Dict, Optional, Tuple

from dantro.tools import format_time as _format_time

from .exceptions import ResourceLimitError

log = logging.getLogger(__name__)

STAGE_TIMERS: Tuple[str, ...] = (
    "sampling",
    "embedding",
    "stitching",
    "remeshing",
    "validation",
)
"""Names of the stage timers of a run. Stages 2 and 3 (snapping and loop
embedding) are grouped into ``embedding``."""


# -----------------------------------------------------------------------------


class Timer:
    """A timer that can be paused and continued. One-shot timers can only
    be started and stopped once."""

    _time_func: Callable = time.perf_counter

    def __init__(
        self,
        name: str,
        *,
        time_func: Callable = None,
        one_shot: bool = False,
        start: bool = False,
    ):
        self._name = name
        self._one_shot = one_shot
        if time_func is not None:
            self._time_func = time_func

        self.reset()
        if start:
            self.start()

    def __str__(self) -> str:
        parts = [f"Timer '{self.name}'", f"{self.elapsed:.3g}s elapsed"]
        if self.running:
            parts.append("running")
        if self.finished:
            parts.append("finished")
        return f"<{', '.join(parts)}>"

    def _check_not_finished(self):
        if self.finished:
            raise RuntimeError(
                f"Tried to update timer '{self}' that was already marked "
                "as finished."
            )

    def start(self):
        self._check_not_finished()
        self._resume()

    def unpause(self):
        if self.one_shot:
            raise RuntimeError(
                f"{self} is a one-shot timer and cannot be unpaused!"
            )
        self._check_not_finished()
        self._resume()

    def _resume(self):
        self._latest = self._time_func()
        self._running = True

    def pause(self) -> float:
        self._check_not_finished()
        if not self.running:
            raise RuntimeError(f"Cannot pause already paused timer {self}!")

        self._elapsed += self._time_func() - self._latest
        self._latest = None
        self._running = False
        if self.one_shot:
            self._finished = True
        return self.elapsed

    def stop(self) -> float:
        self._check_not_finished()
        if self.running:
            self.pause()
        self._finished = True
        return self.elapsed

    def reset(self):
        self._latest = None
        self._running = False
        self._finished = False
        self._elapsed = 0.0

    @property
    def name(self) -> str:
        return self._name

    @property
    def one_shot(self) -> bool:
        return self._one_shot

    @property
    def running(self) -> bool:
        return self._running

    @property
    def finished(self) -> bool:
        return self._finished

    @property
    def elapsed(self) -> float:
        if self._running:
            return self._elapsed + (self._time_func() - self._latest)
        return self._elapsed


class StageTimers:
    """A set of cumulative timers, one per pipeline stage, with an optional
    wall-time budget for the whole run"""

    def __init__(
        self,
        names: Tuple[str, ...] = STAGE_TIMERS,
        *,
        time_budget: Optional[float] = None,
        time_func: Callable = None,
    ):
        self._timers: Dict[str, Timer] = OrderedDict(
            (name, Timer(name, time_func=time_func)) for name in names
        )
        self._total = Timer("total", time_func=time_func, start=True)
        self.time_budget = time_budget

    def __getitem__(self, name: str) -> Timer:
        return self._timers[name]

    @contextlib.contextmanager
    def stage(self, name: str):
        """Context manager that times the given stage"""
        timer = self._timers[name]
        if timer.elapsed == 0.0 and not timer.running:
            timer.start()
        else:
            timer.unpause()
        try:
            yield timer
        finally:
            timer.pause()
            log.remark(
                "Stage '%s' took %s.", name, _format_time(timer.elapsed)
            )

    def check_budget(self, *, face: Optional[int] = None):
        """Raises if the total elapsed time exceeds the time budget"""
        if self.time_budget is None:
            return
        if self._total.elapsed > self.time_budget:
            raise ResourceLimitError(
                f"Time budget of {self.time_budget:g}s exceeded after "
                f"{self._total.elapsed:.3g}s",
                face=face,
            )

    @property
    def elapsed(self) -> float:
        return self._total.elapsed

    def to_dict(self) -> Dict[str, float]:
        d = {name: float(t.elapsed) for name, t in self._timers.items()}
        d["total"] = float(self._total.elapsed)
        return d
