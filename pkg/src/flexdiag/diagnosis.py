"""FlexDiag: anytime direct diagnosis with a granularity parameter ``m``."""
from __future__ import annotations

import enum
import itertools
import math
import time
from dataclasses import dataclass, field

from .engine import CheckSession


class Status(str, enum.Enum):
    FOUND = "found"
    NONE_EXISTS = "none-exists"
    NOT_NEEDED = "not-needed"
    PARTIAL = "partial"


class GranularityError(ValueError):
    """Block size ``m`` is too coarse for the instance (delta * m > n)."""


class InstanceTooLarge(ValueError):
    pass


@dataclass
class Diagnosis:
    elements: tuple
    m_used: int
    checks: int = 0
    guard_checks: int = 0
    elapsed: float = 0.0
    status: Status = Status.FOUND
    blocks: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def ids(self) -> frozenset:
        return frozenset(self.elements)

    def report(self, n=None) -> dict:
        bound = None
        if n and self.elements:
            try:
                bound = estimate_checks(n, len(self.elements), self.m_used)
            except GranularityError:
                bound = None
        return {
            "status": self.status.value,
            "delta": list(self.elements),
            "m": self.m_used,
            "checks": self.checks,
            "guard_checks": self.guard_checks,
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
            "bound": bound,
        }


def _check_m(m):
    if not isinstance(m, int) or m < 1:
        raise ValueError(f"granularity m must be an integer >= 1, got {m!r}")


def flexdiag(model, S, C, R=(), m: int = 1, session: CheckSession | None = None,
             precheck: bool = False) -> Diagnosis:
    """Compute one diagnosis of the ordered candidates ``S`` against ``C`` and ``R``.

    ``S`` lists constraint ids from lowest to highest importance; ``C`` and
    ``R`` are background ids that are never part of a diagnosis. With
    ``precheck`` the full set is tested first and an already consistent
    task comes back as ``not-needed``. Guard checks and recursion checks
    are reported separately.
    """
    _check_m(m)
    if session is None:
        session = CheckSession()
    S = tuple(S)
    background = frozenset(C) | frozenset(R)
    AC = background | frozenset(S)
    rank = {cid: i for i, cid in enumerate(S)}
    start = time.perf_counter()
    base = session.counter

    if precheck and model.is_consistent(AC, session):
        return Diagnosis((), m, 0, session.counter - base, time.perf_counter() - start, Status.NOT_NEEDED)
    if not S or not model.is_consistent(background, session):
        return Diagnosis((), m, 0, session.counter - base, time.perf_counter() - start, Status.NONE_EXISTS)

    guards = session.counter - base
    blocks = []

    def flexd(D, Sq, ac):
        if D and model.is_consistent(ac, session):
            return ()
        if len(Sq) <= m:
            blocks.append(Sq)
            return Sq
        k = math.ceil(len(Sq) / 2)
        S1, S2 = Sq[:k], Sq[k:]
        D1 = flexd(S1, S2, ac - frozenset(S1))
        D2 = flexd(D1, S1, ac - frozenset(D1))
        return D1 + D2

    delta = flexd((), S, AC)
    elements = tuple(sorted(delta, key=rank.__getitem__))
    return Diagnosis(elements, m, session.counter - base - guards, guards,
                     time.perf_counter() - start, Status.FOUND, blocks)


def estimate_checks(n: int, delta: int, m: int = 1) -> int:
    """Worst-case number of consistency checks for one diagnosis.

    ``2d*log2(n/d) + 2d`` for m=1 and ``2d*log2(2n/(d*m))`` for m>1, where
    ``d`` is the diagnosis size and ``n`` the number of candidates. Raises
    GranularityError when ``d*m > n`` for m>1.
    """
    if n < 1 or not 1 <= delta <= n:
        raise ValueError(f"need n >= 1 and 1 <= delta <= n, got n={n}, delta={delta}")
    _check_m(m)
    if m == 1:
        x = 2 * delta * math.log2(n / delta) + 2 * delta
    else:
        if delta * m > n:
            raise GranularityError(f"granularity exceeds instance: delta*m = {delta * m} > n = {n}")
        x = 2 * delta * math.log2(2 * n / (delta * m))
    r = round(x)
    if abs(x - r) < 1e-9:
        return int(r)
    return math.ceil(x)


def brute_force_min_diagnoses(model, S, C, R=(), session: CheckSession | None = None,
                              limit: int = 20) -> list:
    """All subset-minimal diagnoses of ``S`` by exhaustive subset enumeration.

    Subsets are visited by ascending cardinality; supersets of a found
    diagnosis are skipped. Returns a list of frozensets (``[frozenset()]``
    when no diagnosis is needed, ``[]`` when none exists).
    """
    S = list(S)
    if len(S) > limit:
        raise InstanceTooLarge(f"|S| = {len(S)} exceeds the brute-force limit of {limit}")
    background = frozenset(C) | frozenset(R)
    found = []
    for size in range(len(S) + 1):
        for combo in itertools.combinations(S, size):
            cand = frozenset(combo)
            if any(f <= cand for f in found):
                continue
            if model.is_consistent(background | (frozenset(S) - cand), session):
                found.append(cand)
    return found
