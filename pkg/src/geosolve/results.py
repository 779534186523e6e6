from dataclasses import dataclass, field
from typing import Any

LIVE_STATE_EXPONENT = 3
LIVE_MONOMIAL_FACTOR = 10


@dataclass
class SolverStats:
    """Instrumentation counters shared by every solver.

    ``peak_states`` is the largest number of vertices held at once across
    all live recursion frames, and ``peak_monomials`` the largest number
    of polynomial terms held at once. Both are what the polynomial-space
    audits look at.
    """

    calls: int = 0
    depth: int = 0
    peak_states: int = 0
    peak_monomials: int = 0
    trials: int = 0
    family_sizes: dict[int, int] = field(default_factory=dict)
    branching: dict[int, int] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)
    _frames: int = field(default=0, init=False, repr=False)
    _live_states: int = field(default=0, init=False, repr=False)
    _live_monomials: int = field(default=0, init=False, repr=False)

    def push(self, states: int = 0) -> None:
        self.calls += 1
        self._frames += 1
        self._live_states += states
        self.depth = max(self.depth, self._frames)
        self.peak_states = max(self.peak_states, self._live_states)

    def pop(self, states: int = 0) -> None:
        self._frames -= 1
        self._live_states -= states

    def hold(self, monomials: int) -> None:
        self._live_monomials += monomials
        self.peak_monomials = max(self.peak_monomials, self._live_monomials)

    def release(self, monomials: int) -> None:
        self._live_monomials -= monomials

    def within_space_bound(self, n: int) -> bool:
        """Whether the peaks stay below ``n ** LIVE_STATE_EXPONENT`` live
        states and ``LIVE_MONOMIAL_FACTOR`` times as many monomials."""
        bound = n**LIVE_STATE_EXPONENT
        return (
            self.peak_states <= bound
            and self.peak_monomials <= LIVE_MONOMIAL_FACTOR * bound
        )

    def merge(self, other: "SolverStats") -> None:
        self.calls += other.calls
        self.trials += other.trials
        self.depth = max(self.depth, other.depth)
        self.peak_states = max(self.peak_states, other.peak_states)
        self.peak_monomials = max(self.peak_monomials, other.peak_monomials)
        for key, value in other.family_sizes.items():
            self.family_sizes[key] = max(self.family_sizes.get(key, 0), value)
        for key, value in other.branching.items():
            self.branching[key] = max(self.branching.get(key, 0), value)
        self.extra.update(other.extra)

    def to_dict(self) -> dict:
        return {
            "calls": self.calls,
            "depth": self.depth,
            "peak_states": self.peak_states,
            "peak_monomials": self.peak_monomials,
            "trials": self.trials,
            **self.extra,
        }


@dataclass
class SolverResult:
    problem: str
    answer: bool
    value: float | int | None = None
    witness: list[int] | None = None
    stats: SolverStats = field(default_factory=SolverStats)
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.witness is not None:
            self.witness = sorted(int(v) for v in self.witness)

    def __bool__(self):
        return bool(self.answer)

    def to_dict(self) -> dict:
        return {
            "problem": self.problem,
            "answer": bool(self.answer),
            "value": self.value,
            "witness": self.witness,
            "params": self.params,
            "stats": self.stats.to_dict(),
        }

    def __str__(self):
        witness = "-" if self.witness is None else len(self.witness)
        return (
            f"Problem: {self.problem}\n"
            f"Answer: {self.answer}\n"
            f"Value: {self.value}\n"
            f"Witness size: {witness}\n"
            f"Recursive calls: {self.stats.calls}\n"
            f"Max depth: {self.stats.depth}"
        )
