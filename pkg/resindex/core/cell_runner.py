"""
Cell runner for independent grid evaluations (placement tables, sweeps).

Core responsibility: evaluate independent cells, optionally in parallel, and hand
results back in input order. Service layer decides what a cell computes.

Threads rather than processes: the heavy lifting happens inside numpy/scipy,
which release the GIL, and cell closures capture unpicklable service objects.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Generic, List, Optional, Sequence, TypeVar

from loguru import logger

from .exceptions import ResindexError

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class CellOutcome(Generic[R]):
    """Result of one cell: either a value or the error that stopped it."""
    value: Optional[R] = None
    error: Optional[ResindexError] = None

    @property
    def success(self) -> bool:
        return self.error is None


class CellRunner:
    """
    Evaluates a function over independent cells.

    Example usage:
        runner = CellRunner(max_workers=4)
        outcomes = runner.run(compute_cell, cells)
        values = [o.value for o in outcomes if o.success]

    Results are bitwise independent of worker count: every cell is a pure
    computation and outcomes are re-assembled in input order.
    """

    def __init__(self, max_workers: int = 1):
        if max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        self.max_workers = max_workers
        self.logger = logger

    def _guarded(self, func: Callable[[T], R]) -> Callable[[T], CellOutcome[R]]:
        def call(cell: T) -> CellOutcome[R]:
            try:
                return CellOutcome(value=func(cell))
            except ResindexError as e:
                self.logger.debug(f"Cell {cell!r} failed: {e}")
                return CellOutcome(error=e)
        return call

    def run(self, func: Callable[[T], R], cells: Sequence[T]) -> List[CellOutcome[R]]:
        """Evaluate every cell; domain errors are captured per cell, others propagate"""
        guarded = self._guarded(func)
        if self.max_workers == 1 or len(cells) <= 1:
            return [guarded(cell) for cell in cells]

        self.logger.debug(f"Evaluating {len(cells)} cells on {self.max_workers} threads")
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            return list(executor.map(guarded, cells))

    def run_strict(self, func: Callable[[T], R], cells: Sequence[T]) -> List[Any]:
        """Like run() but re-raises the first captured domain error (input order)"""
        outcomes = self.run(func, cells)
        for outcome in outcomes:
            if not outcome.success:
                raise outcome.error
        return [outcome.value for outcome in outcomes]
