"""Range-ambiguity arithmetic: per-group unambiguous distances, candidate
lattices, and resolution of a common range across subcarrier groups.

The phase-match range score of a group with M+1 subcarriers repeats every
R_u = c*M/(2W) meters, so one group only pins the range modulo R_u.  With
several groups of distinct M (same W), the true range is the single point
below the sensing limit where all candidate lattices coincide.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InconsistentGroupsError, UnresolvedAmbiguityError
from .scene import SPEED_OF_LIGHT, BandPlan


def max_unambiguous_distance(plan: BandPlan) -> float:
    """R_u = c*M/(2W), the period of the phase-match range score."""
    return SPEED_OF_LIGHT * plan.n_subcarriers_minus_one / (2.0 * plan.bandwidth)


def combined_unambiguous_distance(plans) -> float:
    """Exact combined period of several groups sharing one bandwidth.

    All R_u,q share the factor c/(2W), so the least common multiple is the
    integer lcm of the subcarrier counts scaled back by c/(2W).  Computed in
    integer arithmetic; no floating-point lcm heuristics.
    """
    plans = list(plans)
    if not plans:
        raise ConfigError("need at least one band plan")
    w = plans[0].bandwidth
    if any(p.bandwidth != w for p in plans):
        raise ConfigError("groups with mixed bandwidths are unsupported")
    counts = [p.n_subcarriers_minus_one for p in plans]
    return SPEED_OF_LIGHT / (2.0 * w) * math.lcm(*counts)


def near_coincidence_distance(plans, tol: float, r_cap: float) -> float | None:
    """Smallest D > 0 below ``r_cap`` where all group lattices (anchored at
    zero) agree within ``tol``.

    This is the tolerance-based reading of the combined unambiguous
    distance; the exact lattice value from
    :func:`combined_unambiguous_distance` can be astronomically larger when
    the subcarrier counts are nearly coprime.
    """
    r_units = [max_unambiguous_distance(p) for p in plans]
    base = min(r_units)
    k = 1
    while k * base <= r_cap:
        d = k * base
        worst = max(_lattice_distance(d, 0.0, ru) for ru in r_units)
        if worst < tol:
            return d
        k += 1
    return None


def candidate_ranges(principal: float, r_unambiguous: float,
                     r_max: float) -> np.ndarray:
    """All aliases principal + l*R_u inside [0, r_max]."""
    if not 0.0 <= principal < r_unambiguous * (1.0 + 1e-9):
        raise ValueError("principal peak must lie in [0, R_u)")
    count = int(math.floor((r_max - principal) / r_unambiguous)) + 1
    return principal + np.arange(max(count, 0)) * r_unambiguous


def _lattice_distance(r: float, principal: float, r_unit: float) -> float:
    """Distance from r to the nearest point of principal + l*R_u."""
    return abs((r - principal + 0.5 * r_unit) % r_unit - 0.5 * r_unit)


@dataclass(frozen=True)
class Resolution:
    """Outcome of multi-group range resolution."""

    range_m: float
    residual: float
    branch_indices: tuple[int, ...]
    group_ranges: tuple[float, ...]
    unambiguous: tuple[float, ...]


def resolve(principals, plans, r_sense_max: float, tol: float = 0.5) -> Resolution:
    """Pick the unique range all groups agree on.

    ``principals`` are the per-group principal peaks in [0, R_u,q).  Among
    all candidate aliases below ``r_sense_max`` the one minimizing the
    worst-group distance wins, and must beat ``tol``; if several mutually
    distant candidates beat ``tol`` the groups are inconsistent.  The
    returned range is the mean of the groups' nearest candidates, which
    halves uncorrelated per-group errors.
    """
    principals = [float(p) for p in principals]
    plans = list(plans)
    if len(principals) != len(plans):
        raise ValueError("one principal peak per group required")
    r_units = [max_unambiguous_distance(p) for p in plans]
    for p, ru in zip(principals, r_units):
        if not 0.0 <= p < ru * (1.0 + 1e-9):
            raise ValueError(f"principal {p} outside [0, {ru})")

    pool = np.concatenate([
        candidate_ranges(p, ru, r_sense_max) for p, ru in zip(principals, r_units)])
    if len(pool) == 0:
        raise UnresolvedAmbiguityError("no candidates below the sensing limit")
    objective = np.array([
        max(_lattice_distance(r, p, ru) for p, ru in zip(principals, r_units))
        for r in pool])
    hits = pool[objective < tol]
    if len(hits) == 0:
        raise UnresolvedAmbiguityError(
            f"worst-group residual {objective.min():.3f} m exceeds tol {tol} m")
    if hits.max() - hits.min() > tol:
        raise InconsistentGroupsError(
            "several well-separated ranges fit all groups; increase the "
            "combined unambiguous distance or tighten the tolerance")

    best = float(pool[int(np.argmin(objective))])
    nearest = []
    branches = []
    for p, ru in zip(principals, r_units):
        l = int(round((best - p) / ru))
        nearest.append(p + l * ru)
        branches.append(l)
    r_final = float(np.mean(nearest))
    residual = max(_lattice_distance(r_final, p, ru)
                   for p, ru in zip(principals, r_units))
    return Resolution(range_m=r_final, residual=float(residual),
                      branch_indices=tuple(branches),
                      group_ranges=tuple(float(x) for x in nearest),
                      unambiguous=tuple(r_units))
