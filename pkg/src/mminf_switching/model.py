"""Instance parameters, states and stationary switching policies.

A state is ``(i, delta)``: ``i`` customers in the system and ``delta`` the
on/off status chosen at the last jump epoch. Actions are 0 (off) and 1 (on).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Tuple, Union


class ValidationError(ValueError):
    """Raised when an instance or policy violates its invariants.

    ``field`` names the offending parameter, if any.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


OFF = 0
ON = 1


@dataclass(frozen=True)
class ModelParams:
    lam: float
    mu: float
    h: float
    c: float
    s0: float
    s1: float

    @property
    def rho(self) -> float:
        return self.lam / self.mu

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "ModelParams":
        """Build from a flat mapping; ``lambda`` is accepted as an alias for ``lam``."""
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        missing = [k for k in ("lam", "mu", "h", "c", "s0", "s1") if k not in d]
        if missing:
            name = "lambda" if missing[0] == "lam" else missing[0]
            raise ValidationError(f"missing parameter: {name}", field=name)
        return cls(**{k: float(d[k]) for k in ("lam", "mu", "h", "c", "s0", "s1")})


def validate_params(p: ModelParams) -> ModelParams:
    checks = [
        ("lambda", p.lam, p.lam > 0, "lambda > 0"),
        ("mu", p.mu, p.mu > 0, "mu > 0"),
        ("h", p.h, p.h > 0, "h > 0"),
        ("c", p.c, p.c > 0, "c > 0"),
        ("s0", p.s0, p.s0 >= 0, "s0 >= 0"),
        ("s1", p.s1, p.s1 >= 0, "s1 >= 0"),
    ]
    for name, value, ok, rule in checks:
        if not (math.isfinite(value) and ok):
            raise ValidationError(f"{name}={value!r} violates {rule}", field=name)
    if not p.s0 + p.s1 > 0:
        raise ValidationError("switching costs violate s0 + s1 > 0", field="s0+s1")
    return p


@dataclass(frozen=True)
class State:
    i: int
    delta: int

    def __post_init__(self):
        if self.i < 0 or self.delta not in (0, 1):
            raise ValidationError(f"invalid state ({self.i}, {self.delta})")


@dataclass(frozen=True)
class MN:
    """Switch off when the count drops to ``M``; switch on when it reaches ``N``."""

    M: int
    N: int

    def __post_init__(self):
        if not (0 <= self.M < self.N):
            raise ValidationError(f"MN policy needs 0 <= M < N, got ({self.M}, {self.N})")

    def action(self, i: int, delta: int) -> int:
        if delta == ON:
            return int(i > self.M)
        return int(i >= self.N)

    @property
    def cutoff(self) -> int:
        return self.N

    def __str__(self):
        return f"({self.M},{self.N})"


@dataclass(frozen=True)
class FullService:
    """Never switch a running system off; switch on once ``n`` customers are present."""

    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"full-service threshold must be >= 0, got {self.n}")

    def action(self, i: int, delta: int) -> int:
        if delta == ON:
            return ON
        return int(i >= self.n)

    @property
    def cutoff(self) -> int:
        return self.n

    def __str__(self):
        return f"full-service({self.n})"


@dataclass(frozen=True)
class Table:
    """Explicit actions for ``i < cutoff``; every state with ``i >= cutoff`` runs.

    ``on_actions[i]`` is the action at ``(i, 1)`` and ``off_actions[i]`` at ``(i, 0)``.
    """

    on_actions: Tuple[int, ...]
    off_actions: Tuple[int, ...]
    cutoff: int = field(init=False)

    def __post_init__(self):
        if len(self.on_actions) != len(self.off_actions):
            raise ValidationError("action tables must have equal length")
        if any(a not in (0, 1) for a in self.on_actions + self.off_actions):
            raise ValidationError("actions must be 0 or 1")
        object.__setattr__(self, "on_actions", tuple(int(a) for a in self.on_actions))
        object.__setattr__(self, "off_actions", tuple(int(a) for a in self.off_actions))
        object.__setattr__(self, "cutoff", len(self.on_actions))

    def action(self, i: int, delta: int) -> int:
        if i >= self.cutoff:
            return ON
        return self.on_actions[i] if delta == ON else self.off_actions[i]

    def __str__(self):
        return f"table(cutoff={self.cutoff})"


StationaryPolicy = Union[MN, FullService, Table]


def policy_action(pol: StationaryPolicy, s: State) -> int:
    return pol.action(s.i, s.delta)


def action_arrays(pol: StationaryPolicy, size: int):
    """Actions at ``(i, 1)`` and ``(i, 0)`` for ``i < size`` as two int lists."""
    on = [pol.action(i, ON) for i in range(size)]
    off = [pol.action(i, OFF) for i in range(size)]
    return on, off


def parse_policy(text: str) -> StationaryPolicy:
    """Parse ``"M,N"``, ``"mn:M,N"``, ``"full"`` or ``"full:n"``."""
    t = text.strip().lower().replace(" ", "")
    if t.startswith("full"):
        rest = t[4:].lstrip(":-_(").rstrip(")")
        if rest.startswith("service"):
            rest = rest[7:].lstrip(":-_(")
        return FullService(int(rest) if rest else 0)
    if t.startswith("mn:"):
        t = t[3:]
    t = t.strip("()")
    try:
        m, n = (int(x) for x in t.split(","))
    except ValueError:
        raise ValidationError(f"cannot parse policy {text!r}", field="policy") from None
    return MN(m, n)
