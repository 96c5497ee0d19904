"""Bell distribution primitives: pmf, moments, parameter transforms, sampling.

The distribution is parameterized either by its mean ``mu`` or by the pmf
parameter ``theta`` (the two are linked by ``mu = theta * exp(theta)``, i.e.
``theta`` is the principal Lambert W value of ``mu``). The pmf at count ``y``
is ``theta**y * exp(1 - exp(theta)) * B_y / y!`` with ``B_y`` the Bell
numbers, and the variance ``mu * (1 + theta)`` always exceeds the mean, so
the law is a natural fit for over-dispersed counts.

All pmf work happens in log space. Bell numbers come from the exact integer
triangle recurrence and are cached as logs, so ``log_bell_number`` is exact
to well below 1e-10 relative error over the whole supported range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from bellshrink.errors import DomainError, OverflowGuardError
from bellshrink.kernel import lambert_w0

DEFAULT_BELL_CAP = 400

# log B_0, log B_1, ... grown on demand; _row is the latest triangle row,
# whose last entry is the highest Bell number computed so far (exact int).
_log_bell: list[float] = [0.0]
_row: list[int] | None = None


def log_bell_number(y: int, y_max: int = DEFAULT_BELL_CAP) -> float:
    """Natural log of the Bell number ``B_y`` (number of set partitions).

    Values are derived from the exact integer triangle recurrence and cached.
    Counts above ``y_max`` raise :class:`OverflowGuardError` so that callers
    notice pmf evaluations drifting into an unplanned range.
    """
    global _row
    y = int(y)
    if y < 0:
        raise DomainError(f"count must be nonnegative, got {y}")
    if y > y_max:
        raise OverflowGuardError(f"count {y} above the Bell-number cap {y_max}")
    while len(_log_bell) <= y:
        if _row is None:
            _row = [1]
        else:
            new = [_row[-1]]
            for v in _row:
                new.append(new[-1] + v)
            _row = new
        _log_bell.append(math.log(_row[-1]))
    return _log_bell[y]


@dataclass(frozen=True)
class BellParam:
    """Bell distribution parameters: mean ``mu`` and pmf parameter ``theta``.

    Construct via :meth:`from_mu` or :meth:`from_theta`; the two fields must
    satisfy ``mu = theta * exp(theta)``.
    """

    mu: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise DomainError(f"mu must be positive and finite, got {self.mu}")
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise DomainError(f"theta must be positive and finite, got {self.theta}")
        if abs(self.theta * math.exp(self.theta) - self.mu) > 1e-12 * max(1.0, self.mu):
            raise DomainError(
                f"inconsistent parameters: theta*exp(theta)={self.theta * math.exp(self.theta)!r} "
                f"but mu={self.mu!r}"
            )

    @classmethod
    def from_mu(cls, mu: float) -> "BellParam":
        mu = float(mu)
        if not (math.isfinite(mu) and mu > 0.0):
            raise DomainError(f"mu must be positive and finite, got {mu}")
        return cls(mu=mu, theta=lambert_w0(mu))

    @classmethod
    def from_theta(cls, theta: float) -> "BellParam":
        theta = float(theta)
        if not (math.isfinite(theta) and theta > 0.0):
            raise DomainError(f"theta must be positive and finite, got {theta}")
        return cls(mu=theta * math.exp(theta), theta=theta)


def log_pmf(y: int, param: BellParam, y_max: int = DEFAULT_BELL_CAP) -> float:
    """Log probability of count ``y``: ``y log(theta) + 1 - exp(theta) + log B_y - log y!``."""
    y = int(y)
    if y < 0:
        raise DomainError(f"count must be nonnegative, got {y}")
    return (
        y * math.log(param.theta)
        + 1.0
        - math.exp(param.theta)
        + log_bell_number(y, y_max)
        - math.lgamma(y + 1.0)
    )


def pmf(y: int, param: BellParam, y_max: int = DEFAULT_BELL_CAP) -> float:
    return math.exp(log_pmf(y, param, y_max))


def moments(param: BellParam) -> tuple[float, float]:
    """Mean and variance ``(mu, mu * (1 + theta))``; the variance is strictly larger."""
    return param.mu, param.mu * (1.0 + param.theta)


def sample(rng, param: BellParam) -> int:
    """One draw via the compound representation.

    The event count is Poisson(``exp(theta) - 1``) and each event contributes
    an independent zero-truncated Poisson(``theta``) term; no events means a
    zero count. This avoids Bell-number overflow at large counts.
    """
    return int(rng.bell(param.theta))
