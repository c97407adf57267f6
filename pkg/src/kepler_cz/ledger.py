"""Symplectic-homology bookkeeping for the rotating Kepler problem.

Generators are read off the orbit catalog with closed-form degrees and
compared with the ranks of the positive part of the S^1-equivariant
symplectic homology of T*S^3.  This is a combinatorial comparison: no
differentials are computed.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .catalog import FamilyId, OrbitRecord, bifurcation_energies, circular_energies
from .errors import DomainError, NonGenericEnergyError, ResonantEnergyError
from .halfint import HalfInteger
from .index import cz_circular, indexed_catalog, mu_ratio, rs_family

__all__ = [
    "FAMILY_QUOTIENT_DIM",
    "sh_reference",
    "GeneratorEntry",
    "generator_table",
    "degree_counts",
    "mbss_shift",
    "shift_consistency",
    "verified_degree",
    "LedgerRow",
    "LedgerReport",
    "compare_with_reference",
    "BifurcationCheck",
    "bifurcation_invariance",
]

# Sigma_{k,l} / S^1 is 3-dimensional; its homology (that of S^3) sits in degrees 0 and 3
FAMILY_QUOTIENT_DIM = FamilyId.PHASE_DIM - 1
_FAMILY_HOMOLOGY = (0, 3)


def sh_reference(degree: int) -> int:
    """Rank of SH^{S^1,+}(T*S^3) in the given degree."""
    if degree == 2:
        return 1
    if degree >= 4 and degree % 2 == 0:
        return 2
    return 0


def mbss_shift(k: int, l: int) -> int:  # noqa: E741
    """sh(Sigma_{k,l}) = 4k - 2."""
    return int(shift_consistency(k, l))


def shift_consistency(k: int, l: int) -> HalfInteger:  # noqa: E741
    """mu_RS(Sigma_{k,l}) - dim(Sigma/S^1) / 2, exact; must equal 4k - 2."""
    sh = rs_family(k, l) - HalfInteger(FAMILY_QUOTIENT_DIM)
    if not sh.is_integer or sh != 4 * k - 2:
        raise AssertionError(f"family shift {sh} differs from 4k - 2 = {4 * k - 2}")
    return sh


@dataclass(frozen=True)
class GeneratorEntry:
    """One generator source.

    Isolated orbits contribute once, at their (even) index.  A family
    contributes at ``shift`` and ``shift + 3``.
    """

    source: OrbitRecord
    degree: HalfInteger
    period: float
    shift: int | None = None

    @property
    def is_family(self) -> bool:
        return self.source.kind == "family"

    @property
    def contributions(self) -> tuple[int, ...]:
        if self.is_family:
            return tuple(self.shift + h for h in _FAMILY_HOMOLOGY)
        return (int(self.degree),)

    @property
    def label(self) -> str:
        return self.source.label

    def sort_key(self):
        return (min(self.contributions), self.period, self.label)

    def to_dict(self):
        return {
            "label": self.label,
            "kind": self.source.kind,
            "degree": str(self.degree),
            "contributions": list(self.contributions),
            "period": self.period,
            "shift": self.shift,
        }


def _covers_needed(c: float, degree_cap: int) -> int:
    roots = circular_energies(c)
    mu_p = float(mu_ratio(roots.retrograde, "+"))
    mu_m = float(mu_ratio(roots.direct, "-"))
    N = 1
    # every cover beyond N must land above the cap (degrees grow with the cover)
    while (
        4 * (N + 1) <= degree_cap
        or 2 + 4 * math.floor((N + 1) * mu_p) <= degree_cap
        or 2 + 4 * math.floor((N + 1) * mu_m) <= degree_cap
    ):
        N += 1
    return N


def generator_table(
    c: float,
    degree_cap: int,
    N_max: int | None = None,
    k_max: int | None = None,
) -> list[GeneratorEntry]:
    """Generators with at least one contribution at degree <= ``degree_cap``.

    ``N_max`` defaults to the number of covers needed to exhaust the cap and
    ``k_max`` to the largest k whose family shift 4k - 2 fits under it.
    """
    if degree_cap < 0:
        raise ValueError("degree_cap must be non-negative")
    if not c < -1.5:
        raise DomainError("the ledger is defined below the critical energy -3/2")
    N_max = N_max if N_max is not None else _covers_needed(c, degree_cap)
    k_max = k_max if k_max is not None else max(1, (degree_cap + 2) // 4)
    try:
        records = indexed_catalog(c, N_max, k_max)
    except ResonantEnergyError as exc:
        raise NonGenericEnergyError(f"c = {c!r} is not generic: {exc}", []) from exc
    out = []
    for rec in records:
        if rec.kind == "family":
            entry = GeneratorEntry(rec, rec.index, rec.period, mbss_shift(rec.family.k, rec.family.l))
        else:
            entry = GeneratorEntry(rec, rec.index, rec.total_period)
            if not (rec.index.is_integer and int(rec.index) % 2 == 0):
                raise AssertionError(f"{rec.label} has odd or fractional degree {rec.index}")
        if min(entry.contributions) <= degree_cap:
            out.append(entry)
    out.sort(key=GeneratorEntry.sort_key)
    return out


def degree_counts(entries, degree_cap: int | None = None) -> Counter:
    counts = Counter()
    for e in entries:
        for d in e.contributions:
            if degree_cap is None or d <= degree_cap:
                counts[d] += 1
    return counts


def verified_degree(c: float) -> int:
    """Largest degree up to which the ledger is guaranteed to agree with the reference.

    For c < c^-_{N,1} no family with k <= N exists and gamma_-^j has index
    4j + 2 for j < N, so the generators match up to 4N - 2.  N = 1 holds
    throughout c < -3/2.
    """
    best = 2
    N = 2
    while c < bifurcation_energies(N, 1)[0]:
        best = 4 * N - 2
        N += 1
    return best


@dataclass(frozen=True)
class LedgerRow:
    degree: int
    count: int
    reference: int
    status: str  # match | mismatch | unverified
    generators: tuple[str, ...]

    def to_dict(self):
        return {
            "degree": self.degree,
            "count": self.count,
            "reference": self.reference,
            "status": self.status,
            "generators": list(self.generators),
        }


@dataclass(frozen=True)
class LedgerReport:
    c: float
    degree_cap: int
    verified_up_to: int
    rows: tuple[LedgerRow, ...]
    entries: tuple[GeneratorEntry, ...]

    @property
    def all_match(self) -> bool:
        return all(r.status == "match" for r in self.rows)

    @property
    def mismatches(self) -> list[LedgerRow]:
        return [r for r in self.rows if r.status == "mismatch"]

    @property
    def unverified(self) -> list[LedgerRow]:
        return [r for r in self.rows if r.status == "unverified"]

    def counts(self) -> dict[int, int]:
        return {r.degree: r.count for r in self.rows if r.count}


def compare_with_reference(
    c: float,
    degree_cap: int,
    N_max: int | None = None,
    k_max: int | None = None,
) -> LedgerReport:
    """Per-degree generator counts against :func:`sh_reference`, degrees 0..cap."""
    entries = generator_table(c, degree_cap, N_max, k_max)
    bound = verified_degree(c)
    by_degree: dict[int, list[str]] = {}
    for e in entries:
        for d in e.contributions:
            if d <= degree_cap:
                by_degree.setdefault(d, []).append(e.label)
    rows = []
    for d in range(degree_cap + 1):
        names = tuple(by_degree.get(d, ()))
        ref = sh_reference(d)
        if d > bound:
            status = "unverified"
        else:
            status = "match" if len(names) == ref else "mismatch"
        rows.append(LedgerRow(d, len(names), ref, status, names))
    return LedgerReport(c, degree_cap, bound, tuple(rows), tuple(entries))


# ---------------------------------------------------------------------------
# bifurcation invariance


@dataclass(frozen=True)
class BifurcationCheck:
    family: FamilyId
    c_birth: float
    eps: float
    before: tuple[int, ...]
    after: tuple[int, ...]
    expected_after: tuple[int, ...]
    euler_before: int
    euler_after: int

    @property
    def passed(self) -> bool:
        return self.after == self.expected_after and self.euler_before == self.euler_after

    def __bool__(self):
        return self.passed


def _euler(degrees) -> int:
    return sum((-1) ** d for d in degrees)


def bifurcation_invariance(k: int, l: int, eps: float = 1e-3) -> BifurcationCheck:  # noqa: E741
    """Compare the generators born at c^-_{k,l} on either side of the birth.

    Before: gamma_-^{k-l} alone.  After: gamma_-^{k-l} and the family's two
    contributions.  Expected after = before with 4k - 2 moved to 4k + 2,
    plus {4k - 2, 4k + 1}; the Euler characteristic is unchanged.
    """
    fam, _ = FamilyId.reduced(k, l)
    k, l = fam.k, fam.l  # noqa: E741
    if k <= l:
        raise DomainError("births need k > l")
    cover = k - l
    c_birth, _ = bifurcation_energies(k, l)
    if not c_birth - eps < -1.5:
        raise DomainError("birth energy is not below -3/2")

    def direct_degree(c):
        E = circular_energies(c).direct
        return int(cz_circular(E, "-", cover))

    before = (direct_degree(c_birth - eps),)
    sh = mbss_shift(k, l)
    after = tuple(sorted((direct_degree(c_birth + eps), sh, sh + 3)))
    moved = [4 * k + 2 if d == 4 * k - 2 else d for d in before]
    expected = tuple(sorted(moved + [4 * k - 2, 4 * k + 1]))
    return BifurcationCheck(fam, c_birth, eps, before, after, expected, _euler(before), _euler(after))

