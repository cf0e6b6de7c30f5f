"""Assignment-probability procedures that steer allocation toward a target."""

from __future__ import annotations

from dataclasses import dataclass

from .proportions import TargetProportion

# Equality band for comparing the realized allocation count n1 with rho * j;
# exact float equality of a rational and a product is measure zero.
TIE_TOL = 1e-12


@dataclass(frozen=True)
class AssignmentProbability:
    """Probability that the next patient receives the treatment arm."""

    p_treat: float


def smle_probability(target: TargetProportion) -> AssignmentProbability:
    """Sequential maximum likelihood: use the estimated target directly."""
    return AssignmentProbability(target.rho)


def erade_probability(target: TargetProportion, n1_so_far: int, j: int,
                      erade_alpha: float) -> AssignmentProbability:
    """Discretized biased coin nudging the realized allocation toward the target.

    With estimated target rho after ``j`` allocated patients of which
    ``n1_so_far`` went to treatment: over-allocated replications get
    ``alpha * rho``, under-allocated get ``1 - alpha * (1 - rho)``, exact
    balance keeps ``rho``. As ``alpha`` approaches 1 this collapses to
    :func:`smle_probability`.
    """
    rho = target.rho
    excess = n1_so_far - rho * j
    if excess > TIE_TOL:
        p = erade_alpha * rho
    elif excess < -TIE_TOL:
        p = 1.0 - erade_alpha * (1.0 - rho)
    else:
        p = rho
    return AssignmentProbability(p)
