"""Direct sums of weighted shifts over a shared eigenvalue grid.

The structured representation the whole package runs on.  A ShiftSystem is
a block-superdiagonal operator: basis vectors live on integer levels (the
eigenvalue grid two_m, stepping by 2), and the operator maps level ``l``
strictly into level ``l + 1``.  Each *orbit* is a chain of current basis
vectors with one real weight per transition.  Orbits start out as the
original direct summands; exchanges rotate the per-level frames, so an
orbit's chain may wander through the physical coordinates while the
operator stays an exact direct sum of weighted shifts in the rotated basis.

Frames are stored per level as real orthogonal matrices whose columns are
labeled by orbit (trajectory) ids and whose rows are the active physical
coordinates at that level.  A separate per-level sign ledger records the
-1 factors produced by completed exchanges and by phase normalization, so
serialized rotations stay free of them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .spin import as_two, d_weight

__all__ = [
    "LevelDiagonal",
    "OrbitChain",
    "ShiftSystem",
    "build_system",
    "system_from_orbits",
    "phase_normalize",
    "phase_matrix",
    "plain_commutator_norm",
    "self_commutator_norm",
    "superdiagonal_norm",
    "to_dense",
    "certified_top_singular",
    "system_to_json",
    "system_from_json",
]

DENSE_CAP = 4096

SCHEMA = "spinapprox/shift-system/1"


def certified_top_singular(block: np.ndarray) -> float:
    """Largest singular value with an explicit residual certificate.

    Blocks here are tiny (at most the number of orbits on a side), so a
    dense SVD does the work; the certificate keeps bound checks honest.
    """
    block = np.atleast_2d(np.asarray(block, dtype=float))
    if block.size == 0:
        return 0.0
    u, s, vt = np.linalg.svd(block)
    top = float(s[0])
    if top == 0.0:
        return 0.0
    r1 = np.linalg.norm(block @ vt[0] - top * u[:, 0])
    r2 = np.linalg.norm(block.T @ u[:, 0] - top * vt[0])
    if max(r1, r2) > 1e-12 * max(1.0, top):
        raise ArithmeticError(f"singular-value certificate failed: {r1}, {r2}")
    return top


@dataclass(frozen=True)
class LevelDiagonal:
    """Block-scalar diagonal operator: eigenvalue two_m/(2N) per level."""

    divisor: int
    two_m_min: int
    dims: tuple

    @property
    def n_levels(self):
        return len(self.dims)

    def two_m(self, level: int) -> int:
        return self.two_m_min + 2 * level

    def eigenvalue(self, level: int) -> float:
        return self.two_m(level) / (2.0 * self.divisor)

    def eigenvalues(self) -> np.ndarray:
        return np.array([self.eigenvalue(k) for k in range(self.n_levels)])

    def to_dense(self) -> np.ndarray:
        entries = []
        for level, dim in enumerate(self.dims):
            entries.extend([self.eigenvalue(level)] * dim)
        return np.diag(entries)


@dataclass
class OrbitChain:
    """One trajectory: active two_m range plus one weight per transition."""

    two_m_lo: int
    two_m_hi: int
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        span = (self.two_m_hi - self.two_m_lo) // 2
        if self.two_m_hi < self.two_m_lo or (self.two_m_hi - self.two_m_lo) % 2:
            raise PreconditionError(
                "orbit range must be an even nonnegative span",
                two_m_lo=self.two_m_lo,
                two_m_hi=self.two_m_hi,
            )
        if len(self.weights) != span:
            raise PreconditionError(
                "orbit needs one weight per transition",
                expected=span,
                got=len(self.weights),
            )


class ShiftSystem:
    """Immutable-by-convention structured shift operator.

    Transformations return fresh systems; nothing mutates a published
    instance.  ``orbits[r]`` is the trajectory currently labeled r, while
    ``phys_ranges[r]`` remembers the physical layout fixed at construction.
    """

    def __init__(self, divisor, two_m_min, n_levels, phys_ranges, orbits,
                 frames=None, traj_ids=None, signs=None, used=None):
        if divisor <= 0:
            raise PreconditionError("divisor must be positive", divisor=divisor)
        self.divisor = int(divisor)
        self.two_m_min = int(two_m_min)
        self.n_levels = int(n_levels)
        self.phys_ranges = tuple((int(a), int(b)) for a, b in phys_ranges)
        self.orbits = list(orbits)
        if frames is None:
            frames = [np.eye(len(self._phys_at(k))) for k in range(n_levels)]
        self.frames = frames
        if traj_ids is None:
            traj_ids = [list(self._phys_at(k)) for k in range(n_levels)]
        self.traj_ids = traj_ids
        if signs is None:
            signs = [np.ones(len(self.traj_ids[k])) for k in range(n_levels)]
        self.signs = signs
        self.used = set() if used is None else set(used)
        self._validate()

    # -- level bookkeeping ------------------------------------------------

    def level_of(self, two_m: int) -> int:
        if (two_m - self.two_m_min) % 2:
            raise PreconditionError("two_m off the level grid", two_m=two_m)
        return (two_m - self.two_m_min) // 2

    def two_m_of(self, level: int) -> int:
        return self.two_m_min + 2 * level

    def _phys_at(self, level):
        return tuple(
            s for s, (lo, hi) in enumerate(self.phys_ranges) if lo <= level <= hi
        )

    def active_phys(self, level):
        return self._phys_at(level)

    def orbit_levels(self, r):
        rec = self.orbits[r]
        return self.level_of(rec.two_m_lo), self.level_of(rec.two_m_hi)

    def weight_at(self, r, level):
        """Weight of trajectory r on the transition level -> level + 1."""
        lo, hi = self.orbit_levels(r)
        if not (lo <= level < hi):
            raise PreconditionError(
                "no transition at this level", orbit=r, level=level
            )
        return float(self.orbits[r].weights[level - lo])

    def frame(self, level):
        return self.frames[level]

    def column(self, r, level):
        """Current basis vector of trajectory r at a level, in physical coords."""
        ids = self.traj_ids[level]
        return np.asarray(self.frames[level])[:, ids.index(r)]

    @property
    def n_orbits(self):
        return len(self.orbits)

    @property
    def dims(self):
        return tuple(len(self._phys_at(k)) for k in range(self.n_levels))

    @property
    def total_dimension(self):
        return sum(self.dims)

    # -- structural blocks -------------------------------------------------

    def transiting(self, level):
        """Trajectory ids with an arrow level -> level + 1, with weights."""
        ids, weights = [], []
        for r in range(self.n_orbits):
            lo, hi = self.orbit_levels(r)
            if lo <= level < hi:
                ids.append(r)
                weights.append(self.orbits[r].weights[level - lo])
        return ids, np.asarray(weights, dtype=float)

    def level_block(self, level):
        """Physical-coordinate matrix of the transition level -> level + 1."""
        ids, weights = self.transiting(level)
        rows = len(self._phys_at(level + 1))
        cols = len(self._phys_at(level))
        if not ids:
            return np.zeros((rows, cols))
        src = np.asarray(self.frames[level])
        dst = np.asarray(self.frames[level + 1])
        src_cols = [self.traj_ids[level].index(r) for r in ids]
        dst_cols = [self.traj_ids[level + 1].index(r) for r in ids]
        return (dst[:, dst_cols] * weights) @ src[:, src_cols].T

    def _validate(self):
        if len(self.orbits) != len(self.phys_ranges):
            raise PreconditionError(
                "one trajectory per physical slot",
                orbits=len(self.orbits),
                slots=len(self.phys_ranges),
            )
        for level in range(self.n_levels):
            k = len(self._phys_at(level))
            ids = self.traj_ids[level]
            if len(ids) != k or np.asarray(self.frames[level]).shape != (k, k):
                raise PreconditionError(
                    "frame size must match active coordinates", level=level
                )
        for r, rec in enumerate(self.orbits):
            lo, hi = self.level_of(rec.two_m_lo), self.level_of(rec.two_m_hi)
            if lo < 0 or hi >= self.n_levels:
                raise PreconditionError("orbit range off the grid", orbit=r)
            for level in range(lo, hi + 1):
                if r not in self.traj_ids[level]:
                    raise PreconditionError(
                        "trajectory missing from its level", orbit=r, level=level
                    )

    def check_frames(self, tol=1e-12):
        for level in range(self.n_levels):
            f = np.asarray(self.frames[level])
            if f.size and np.max(np.abs(f.T @ f - np.eye(f.shape[0]))) > tol:
                raise ArithmeticError(f"frame at level {level} lost orthogonality")
        return True

    def clone(self):
        return ShiftSystem(
            self.divisor,
            self.two_m_min,
            self.n_levels,
            self.phys_ranges,
            [OrbitChain(o.two_m_lo, o.two_m_hi, o.weights.copy()) for o in self.orbits],
            [np.array(f, dtype=float) for f in self.frames],
            [list(t) for t in self.traj_ids],
            [np.array(s) for s in self.signs],
            set(self.used),
        )

    def same_grid(self, other) -> bool:
        return (
            self.divisor == other.divisor
            and self.two_m_min == other.two_m_min
            and self.n_levels == other.n_levels
            and self.phys_ranges == other.phys_ranges
        )


# ---------------------------------------------------------------------------
# constructors


def build_system(spins, divisor):
    """Direct sum (1/N) * oplus_r S^{lam_r}(s+) over the shared weight grid.

    ``spins`` are spin values (half-integers, ascending, equal parity);
    returns the matching LevelDiagonal (eigenvalues m/N) and ShiftSystem.
    """
    if not spins:
        raise PreconditionError("need at least one spin")
    two_lams = [as_two(v) for v in spins]
    if any(b < a for a, b in zip(two_lams, two_lams[1:])):
        raise PreconditionError("spins must be sorted ascending", spins=two_lams)
    if len({t % 2 for t in two_lams}) > 1:
        raise PreconditionError("mixed parity; split the family first",
                                spins=two_lams)
    two_max = two_lams[-1]
    n_levels = two_max + 1
    ranges, orbits = [], []
    for two_lam in two_lams:
        lo = (two_max - two_lam) // 2
        hi = (two_max + two_lam) // 2
        ranges.append((lo, hi))
        weights = np.array(
            [d_weight(two_lam, -two_lam + 2 * j) for j in range(two_lam)]
        ) / float(divisor)
        orbits.append(OrbitChain(-two_lam, two_lam, weights))
    system = ShiftSystem(divisor, -two_max, n_levels, ranges, orbits)
    dims = system.dims
    diag = LevelDiagonal(divisor, -two_max, dims)
    return diag, system


def system_from_orbits(orbit_specs, divisor=1, two_m_min=None):
    """General constructor from (two_m_lo, two_m_hi, weights) triples."""
    if not orbit_specs:
        raise PreconditionError("need at least one orbit")
    lows = [int(t[0]) for t in orbit_specs]
    highs = [int(t[1]) for t in orbit_specs]
    if two_m_min is None:
        two_m_min = min(lows)
    if any((lo - two_m_min) % 2 for lo in lows):
        raise PreconditionError("orbit ranges must share the grid parity")
    n_levels = (max(highs) - two_m_min) // 2 + 1
    ranges = [((lo - two_m_min) // 2, (hi - two_m_min) // 2)
              for lo, hi in zip(lows, highs)]
    orbits = [OrbitChain(lo, hi, np.asarray(w, dtype=float))
              for (lo, hi, w) in orbit_specs]
    return ShiftSystem(divisor, two_m_min, n_levels, ranges, orbits)


# ---------------------------------------------------------------------------
# transformations and norms


def phase_normalize(system):
    """Flip weight signs positive; the phases go into the sign ledger.

    Along each orbit the phase recursion is w_{k+1} = sign(c_k) * w_k,
    starting from +1 and resetting at zero weights.  The result is a new
    system, unitarily equivalent to the input through the diagonal phase
    matrix the returned per-orbit phase sequences describe (one phase per
    active level): dense(out) = W dense(in) W.
    """
    out = system.clone()
    records = []
    for r, rec in enumerate(out.orbits):
        lo, hi = out.orbit_levels(r)
        phases = np.ones(hi - lo + 1)
        for j in range(hi - lo):
            c = rec.weights[j]
            if c == 0.0:
                phases[j + 1] = 1.0
            else:
                phases[j + 1] = phases[j] * math.copysign(1.0, c)
        for j, level in enumerate(range(lo, hi + 1)):
            if phases[j] < 0:
                pos = out.traj_ids[level].index(r)
                out.signs[level] = np.array(out.signs[level])
                out.signs[level][pos] *= -1.0
        rec.weights = np.abs(rec.weights)
        records.append(phases)
    return out, records


def phase_matrix(system, records, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense diagonal-in-the-rotated-basis unitary from a phase record."""
    dim = system.total_dimension
    if dim > cap:
        raise PreconditionError("dense materialization over cap", dimension=dim)
    dims = system.dims
    offsets = np.concatenate([[0], np.cumsum(dims)])
    out = np.zeros((dim, dim))
    for level in range(system.n_levels):
        f = np.asarray(system.frames[level])
        omega = np.ones(dims[level])
        for pos, r in enumerate(system.traj_ids[level]):
            lo, _ = system.orbit_levels(r)
            omega[pos] = records[r][level - lo]
        block = (f * omega) @ f.T
        sl = slice(offsets[level], offsets[level] + dims[level])
        out[sl, sl] = block
    return out


def plain_commutator_norm(weights) -> float:
    """Exact ||[S*, S]|| for one unilateral weighted shift.

    max(|c_1|^2, |c_last|^2, max |c_{i+1}|^2 - |c_i|^2|); zero for an
    empty chain.
    """
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return 0.0
    sq = w * w
    vals = [sq[0], sq[-1]]
    if sq.size > 1:
        vals.append(float(np.max(np.abs(np.diff(sq)))))
    return float(max(vals))


def self_commutator_norm(system) -> float:
    """||[S*, S]|| of a ShiftSystem.

    For a plain direct sum (identity frames) this is the exact per-orbit
    max formula.  In a rotated basis [S*, S] is still block diagonal per
    level, so the general path takes the largest eigenvalue magnitude of
    the per-level blocks S*S - SS* instead; no dense matrix is formed.
    """
    if _frames_trivial(system):
        return max(
            plain_commutator_norm(rec.weights) for rec in system.orbits
        )
    best = 0.0
    for level in range(system.n_levels):
        up = system.level_block(level) if level < system.n_levels - 1 else None
        down = system.level_block(level - 1) if level > 0 else None
        k = len(system.active_phys(level))
        block = np.zeros((k, k))
        if up is not None:
            block += up.T @ up
        if down is not None:
            block -= down @ down.T
        if k:
            eigs = np.linalg.eigvalsh((block + block.T) / 2.0)
            best = max(best, float(np.max(np.abs(eigs))) if eigs.size else 0.0)
    return best


def _frames_trivial(system):
    for level in range(system.n_levels):
        f = np.asarray(system.frames[level])
        if f.size and not np.array_equal(f, np.eye(f.shape[0])):
            return False
    return True


def superdiagonal_norm(system_a, system_b=None) -> float:
    """Operator norm of a block-superdiagonal system or of a difference.

    ||X|| = max over levels of the top singular value of the per-level
    block; exact because X*X is block diagonal.
    """
    if system_b is not None and not system_a.same_grid(system_b):
        raise PreconditionError("systems live on different level grids")
    best = 0.0
    for level in range(system_a.n_levels - 1):
        block = system_a.level_block(level)
        if system_b is not None:
            block = block - system_b.level_block(level)
        best = max(best, certified_top_singular(block))
    return best


def to_dense(system, cap: int = DENSE_CAP) -> np.ndarray:
    """Materialize the operator in physical coordinates, level-major order."""
    dim = system.total_dimension
    if dim > cap:
        raise PreconditionError(
            "dense materialization over cap", dimension=dim, cap=cap
        )
    dims = system.dims
    offsets = np.concatenate([[0], np.cumsum(dims)])
    out = np.zeros((dim, dim))
    for level in range(system.n_levels - 1):
        block = system.level_block(level)
        out[
            offsets[level + 1] : offsets[level + 1] + dims[level + 1],
            offsets[level] : offsets[level] + dims[level],
        ] = block
    return out


def frame_dense(system, cap: int = DENSE_CAP) -> np.ndarray:
    """Block-diagonal matrix of all level frames (basis change, level-major)."""
    dim = system.total_dimension
    if dim > cap:
        raise PreconditionError(
            "dense materialization over cap", dimension=dim, cap=cap
        )
    dims = system.dims
    offsets = np.concatenate([[0], np.cumsum(dims)])
    out = np.zeros((dim, dim))
    for level in range(system.n_levels):
        f = np.asarray(system.frames[level])
        out[
            offsets[level] : offsets[level] + dims[level],
            offsets[level] : offsets[level] + dims[level],
        ] = f
    return out


# ---------------------------------------------------------------------------
# serialization


def system_to_json(system) -> dict:
    """Documented JSON form: grid, orbits, non-identity rotations, signs.

    Rotations are the per-level frames, row-major; the sign ledger records
    where exchanges raised a trajectory or phase normalization flipped a
    weight.  Levels without an entry carry the identity and all +1.
    """
    rotations = {}
    signs = {}
    traj = {}
    for level in range(system.n_levels):
        f = np.asarray(system.frames[level])
        s = np.asarray(system.signs[level])
        if f.size and not np.array_equal(f, np.eye(f.shape[0])):
            rotations[str(level)] = [float(x) for x in f.ravel()]
        if np.any(s != 1.0):
            signs[str(level)] = [int(x) for x in s]
        if list(system.traj_ids[level]) != list(system.active_phys(level)):
            traj[str(level)] = list(map(int, system.traj_ids[level]))
    return {
        "schema": SCHEMA,
        "divisor": system.divisor,
        "two_m_min": system.two_m_min,
        "n_levels": system.n_levels,
        "phys_ranges": [list(p) for p in system.phys_ranges],
        "orbits": [
            {
                "two_m_lo": rec.two_m_lo,
                "two_m_hi": rec.two_m_hi,
                "weights": [float(w) for w in rec.weights],
            }
            for rec in system.orbits
        ],
        "rotations": rotations,
        "signs": signs,
        "traj_ids": traj,
    }


def system_from_json(doc) -> ShiftSystem:
    if doc.get("schema") != SCHEMA:
        raise PreconditionError("unknown schema", schema=doc.get("schema"))
    n_levels = doc["n_levels"]
    phys_ranges = [tuple(p) for p in doc["phys_ranges"]]
    orbits = [
        OrbitChain(o["two_m_lo"], o["two_m_hi"], np.asarray(o["weights"]))
        for o in doc["orbits"]
    ]
    system = ShiftSystem(
        doc["divisor"], doc["two_m_min"], n_levels, phys_ranges, orbits
    )
    for key, ids in doc.get("traj_ids", {}).items():
        system.traj_ids[int(key)] = list(ids)
    for key, entries in doc.get("signs", {}).items():
        system.signs[int(key)] = np.asarray(entries, dtype=float)
    for key, flat in doc.get("rotations", {}).items():
        level = int(key)
        k = len(system.active_phys(level))
        system.frames[level] = np.asarray(flat, dtype=float).reshape(k, k)
    system._validate()
    system.check_frames()
    return system


def system_to_json_text(system) -> str:
    return json.dumps(system_to_json(system), sort_keys=True)
