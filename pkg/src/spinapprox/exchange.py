"""Gradual exchange of two shift orbits over a window of levels.

One exchange interchanges the continuations of two orbits by composing a
planar rotation per window level, with the rotation angle advancing
linearly from 0 to pi/2.  Weight squares interpolate linearly across the
window and the tails beyond it swap.  The perturbation and self-commutator
growth obey explicit window-local formulas, which the returned record
carries alongside the measured values.

The braided schedule arranges many such exchanges in columns so that m
orbit heads are interchanged pairwise without ever reusing a basis vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError
from .shifts import OrbitChain, self_commutator_norm, superdiagonal_norm

__all__ = [
    "ExchangePlan",
    "PerturbationRecord",
    "ScheduleColumn",
    "exchange_two_orbits",
    "braided_schedule",
    "schedule_net_permutation",
]


@dataclass(frozen=True)
class ExchangePlan:
    """Two orbit ids plus the closed level window [i0, i1]."""

    orbit_a: int
    orbit_b: int
    i0: int
    i1: int

    @property
    def steps(self) -> int:
        return self.i1 - self.i0

    def angle(self, level: int) -> float:
        """Rotation angle at a window level: pi(level - i0) / (2 steps)."""
        return 0.5 * math.pi * (level - self.i0) / self.steps

    def validate(self):
        if self.orbit_a == self.orbit_b:
            raise PreconditionError("need two distinct orbits", orbit=self.orbit_a)
        if self.steps < 2:
            raise PreconditionError(
                "window must span at least 2 steps", i0=self.i0, i1=self.i1
            )


class PerturbationRecord(NamedTuple):
    measured_norm: float
    bound: float
    support: tuple
    commutator_before: float
    commutator_after: float
    commutator_bound: float


def exchange_two_orbits(system, plan):
    """Apply one gradual exchange; returns (new system, PerturbationRecord).

    Requires the window inside both orbits' active ranges with nonnegative
    weights there (phase-normalize first).  Window vectors are single-use:
    reusing a (level, orbit) slot from an earlier plan raises.
    """
    plan.validate()
    a, b, i0, i1 = plan.orbit_a, plan.orbit_b, plan.i0, plan.i1
    n0 = plan.steps
    for r in (a, b):
        if not (0 <= r < system.n_orbits):
            raise PreconditionError("orbit id out of range", orbit=r)
        lo, hi = system.orbit_levels(r)
        if not (lo <= i0 and i1 <= hi):
            raise PreconditionError(
                "window must sit inside both orbit ranges",
                orbit=r, range=(lo, hi), window=(i0, i1),
            )
        for level in range(i0, i1 + 1):
            if (level, r) in system.used:
                raise PreconditionError(
                    "window vectors were already used by an earlier exchange",
                    orbit=r, level=level,
                )
    lo_a, hi_a = system.orbit_levels(a)
    lo_b, hi_b = system.orbit_levels(b)

    def w_of(r, level):
        return system.weight_at(r, level)

    for level in range(i0, i1):
        if w_of(a, level) < 0 or w_of(b, level) < 0:
            raise PreconditionError(
                "window weights must be nonnegative; run phase_normalize",
                level=level,
            )

    out = system.clone()

    # weights: squares interpolate inside the window, tails swap beyond it
    def rebuild(lo, hi_new, own, other):
        vals = np.empty(hi_new - lo)
        for level in range(lo, hi_new):
            if level < i0:
                vals[level - lo] = w_of(own, level)
            elif level < i1:
                t = (level - i0) / n0
                sq = (1.0 - t) * w_of(own, level) ** 2 + t * w_of(other, level) ** 2
                vals[level - lo] = math.sqrt(max(sq, 0.0))
            else:
                vals[level - lo] = w_of(other, level)
        return vals

    new_a = rebuild(lo_a, hi_b, a, b)
    new_b = rebuild(lo_b, hi_a, b, a)
    out.orbits[a] = OrbitChain(out.two_m_of(lo_a), out.two_m_of(hi_b), new_a)
    out.orbits[b] = OrbitChain(out.two_m_of(lo_b), out.two_m_of(hi_a), new_b)

    # frames: Givens factors through the window, completed swaps beyond it
    def compose(level, theta):
        ids = out.traj_ids[level]
        pa, pb = ids.index(a), ids.index(b)
        f = np.array(out.frames[level], dtype=float)
        ca, cb = f[:, pa].copy(), f[:, pb].copy()
        if theta == 0.5 * math.pi:
            c, s = 0.0, 1.0  # the completed swap must be exact
        else:
            c, s = math.cos(theta), math.sin(theta)
        f[:, pa] = c * ca + s * cb
        f[:, pb] = -s * ca + c * cb
        out.frames[level] = f

    for level in range(i0 + 1, i1 + 1):
        compose(level, plan.angle(level))
    shared_top = min(hi_a, hi_b)
    for level in range(i1 + 1, shared_top + 1):
        compose(level, 0.5 * math.pi)
    # the raised trajectory carries the -1; record it so serialized
    # rotations stay plain
    for level in range(i1, shared_top + 1):
        pb = out.traj_ids[level].index(b)
        out.signs[level] = np.array(out.signs[level])
        out.signs[level][pb] *= -1.0
    # beyond the shorter original range only one of the two survives:
    # relabel the leftover column for the trajectory that took the tail
    if hi_a != hi_b:
        longer, shorter = (a, b) if hi_a > hi_b else (b, a)
        for level in range(shared_top + 1, max(hi_a, hi_b) + 1):
            ids = out.traj_ids[level]
            pos = ids.index(longer)
            ids[pos] = shorter
            if longer == a:
                # the second-listed orbit inherits -v on the leftover tail
                f = np.array(out.frames[level], dtype=float)
                f[:, pos] *= -1.0
                out.frames[level] = f
                out.signs[level] = np.array(out.signs[level])
                out.signs[level][pos] *= -1.0

    for level in range(i0, i1 + 1):
        out.used.add((level, a))
        out.used.add((level, b))

    bound = 0.0
    for level in range(i0, i1):
        wa, wb = w_of(a, level), w_of(b, level)
        bound = max(
            bound, abs(wa - wb) + 0.5 * math.pi / n0 * max(abs(wa), abs(wb))
        )
    growth = 0.0
    for level in range(i0 + 1, i1 + 1):
        if level < hi_a and level < hi_b:
            growth = max(
                growth, abs(w_of(b, level) ** 2 - w_of(a, level) ** 2)
            )
    before = self_commutator_norm(system)
    record = PerturbationRecord(
        measured_norm=superdiagonal_norm(out, system),
        bound=bound,
        support=(i0, i1),
        commutator_before=before,
        commutator_after=self_commutator_norm(out),
        commutator_bound=before + growth / n0,
    )
    return out, record


# ---------------------------------------------------------------------------
# the braided schedule


class ScheduleColumn(NamedTuple):
    column: int
    rel_lo: int
    rel_hi: int
    pairs: tuple


def braided_schedule(m: int, n0: int):
    """Columns of slot pairs interchanging m orbit heads.

    Column j (1-based, j = 1..2m-3) exchanges the orbits currently sitting
    at slot pairs (j+1-e, j-e) for even e below j when j <= m-1, and at
    (2m-j-1-e, 2m-j-2-e) for even e below 2m-j-2 otherwise.  Slots are
    1-based from the bottom; the first slot of each pair holds the
    trajectory that moves down.  The window of column j covers relative
    levels 3 + (n0+1)(j-1) .. 2 + (n0+1)j, so windows are disjoint and no
    vector is used twice.  Net effect: the trajectory entering at slot r
    leaves at slot m + 1 - r.
    """
    if m < 2:
        raise PreconditionError("schedule needs at least 2 orbits", m=m)
    if n0 < 2:
        raise PreconditionError("need at least 2 steps per window", n0=n0)
    columns = []
    for j in range(1, 2 * m - 2):
        if j <= m - 1:
            pairs = tuple((j + 1 - e, j - e) for e in range(0, j, 2))
        else:
            pairs = tuple(
                (2 * m - j - 1 - e, 2 * m - j - 2 - e)
                for e in range(0, 2 * m - j - 2, 2)
            )
        rel_lo = 3 + (n0 + 1) * (j - 1)
        rel_hi = 2 + (n0 + 1) * j
        columns.append(ScheduleColumn(j, rel_lo, rel_hi, pairs))
    return columns


def schedule_net_permutation(m: int):
    """Slot occupancy after the whole braid: result[slot] = entering slot.

    Slots and trajectories are 1-based; used to audit the reversal claim.
    """
    slots = list(range(m + 1))  # slots[p] = trajectory currently at slot p
    for col in braided_schedule(m, 2):
        for p_down, p_up in col.pairs:
            slots[p_down], slots[p_up] = slots[p_up], slots[p_down]
    return slots[1:]
