"""Nearest-normal surgery for cyclic weighted shift matrices.

A cyclic weighted shift on C^n maps e_k to c_k e_{k+1} with indices mod n
(a unilateral shift embeds by appending a zero weight).  When the self
commutator is small the weights are nearly constant on long stretches, so
they can be rounded to a coarse grid and the grid level sets stitched into
closed orbits of constant modulus.  The result is a normal matrix, written
as a weighted permutation in a basis that differs from the standard one by
a diagonal phase and a set of disjoint plane rotations.

normalize_shift runs the construction for a prescribed even grid count M.
nearest_normal / nearest_normal_sigma wrap it with the rescaling that
yields distance bounds in terms of norm and self-commutator alone.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .errors import PreconditionError

CUBIC_CONSTANT = 5.3308
CUBIC_SCALE = 0.162
CUBIC_GRID_FLOOR = 15.937
SIGMA_CONSTANT = 4.8573
SIGMA_SCALE = 0.2897
SIGMA_GRID_FLOOR = 10.762


def shift_dense(weights):
    """Dense cyclic shift: column k holds c_k at row k+1 mod n."""
    c = np.asarray(weights)
    n = c.size
    out = np.zeros((n, n), dtype=c.dtype)
    for k in range(n):
        out[(k + 1) % n, k] = c[k]
    return out


def shift_sparse(weights):
    c = np.asarray(weights)
    n = c.size
    rows = (np.arange(n) + 1) % n
    return sp.csc_matrix((c, (rows, np.arange(n))), shape=(n, n))


def shift_norm(weights):
    c = np.asarray(weights)
    return float(np.abs(c).max()) if c.size else 0.0


def shift_commutator_norm(weights):
    """Exact self-commutator norm: max cyclic gap of the squared moduli."""
    sq = np.abs(np.asarray(weights)) ** 2
    if sq.size <= 1:
        return 0.0
    return float(np.abs(sq - np.roll(sq, 1)).max())


def embed_unilateral(weights):
    """View a unilateral shift with n-1 weights as cyclic on n vectors."""
    c = np.asarray(weights)
    return np.concatenate([c, np.zeros(1, dtype=c.dtype)])


def _unit(z):
    a = abs(z)
    return z / a if a else type(z)(1)


def _angle(k, k0):
    th = 0.5 * math.pi * k / k0
    if k == k0:
        return th, 0.0, 1.0  # snap the quarter turn so swaps are exact
    return th, math.cos(th), math.sin(th)


def gel_for_normal(matrix, v_indices, w_indices, weight, target):
    """Reroute two parallel runs of a dense operator onto rotated vectors.

    The runs are standard basis columns: matrix sends e_{v_i} to
    weight*e_{v_{i+1}} and e_{w_j} to weight*e_{w_{j+1}}.  The returned
    operator acts with modulus `target` along the rotated ladder
    xi_k = cos(pi k/2k0) v_k + sin(pi k/2k0) w_k, keeps modulus `weight`
    along the complementary eta ladder, and is unchanged elsewhere.  The
    perturbation norm is at most |weight-target| + |weight| pi/(2 k0).
    """
    s = np.asarray(matrix)
    n = s.shape[0]
    v = list(v_indices)
    w = list(w_indices)
    k0 = len(v) - 1
    if k0 < 1 or len(w) != k0 + 2:
        raise PreconditionError(
            "need k0+1 lower and k0+2 upper run indices with k0 >= 1",
            v=len(v),
            w=len(w),
        )
    if len(set(v) | set(w)) != len(v) + len(w):
        raise PreconditionError("run indices must be distinct")
    scale = max(1.0, abs(weight))
    for run in (v, w):
        for cur, nxt in zip(run[:-1], run[1:]):
            col = s[:, cur]
            want = np.zeros(n, dtype=s.dtype)
            want[nxt] = weight
            if not np.allclose(col, want, atol=1e-12 * scale):
                raise PreconditionError(
                    "runs are not aligned with the stated weight",
                    index=int(cur),
                )
    out = s.copy()
    b, a = weight, target

    def basis(i):
        e = np.zeros(n, dtype=out.dtype)
        e[i] = 1.0
        return e

    rotations = []
    for k in range(k0):
        _, ca, sa = _angle(k, k0)
        _, cb, sb = _angle(k + 1, k0)
        xi_next = cb * basis(v[k + 1]) + sb * basis(w[k + 1])
        eta_next = -sb * basis(v[k + 1]) + cb * basis(w[k + 1])
        out[:, v[k]] = ca * a * xi_next - sa * b * eta_next
        out[:, w[k]] = sa * a * xi_next + ca * b * eta_next
        if k:
            rotations.append((v[k], w[k], ca, sa))
    out[:, w[k0]] = a * basis(w[k0 + 1])
    rotations.append((v[k0], w[k0], 0.0, 1.0))
    bound = abs(b - a) + abs(b) * math.pi / (2 * k0)
    measured = float(np.linalg.norm(out - s, 2))
    support = tuple(sorted(v + w[:-1]))
    return out, GelRecord(measured, bound, support, tuple(rotations))


@dataclass(frozen=True)
class GelRecord:
    measured_norm: float
    bound: float
    support: tuple
    rotations: tuple


@dataclass(frozen=True)
class LevelStructure:
    """Rounding of cyclic shift moduli onto the grid norm - r/m.

    Positions are the cyclically relabeled indices: position p is original
    index (offset + p) mod n, chosen so the interval holding the first
    maximal weight sits at the front with the remainder indices before it.
    Intervals and merged intervals carry (start position, length, grid r);
    merged neighbours always sit one grid step apart.
    """

    m: int
    n: int
    norm: float
    offset: int
    k_tilde: int
    intervals: tuple
    merged: tuple
    j_low: int
    k_low: int
    r_low: int

    @property
    def grid(self):
        r0 = math.ceil(self.m * self.norm)
        return self.norm - np.arange(r0 + 1) / self.m

    def a_value(self, r):
        return self.norm - r / self.m

    @property
    def a_low(self):
        return self.a_value(self.r_low)

    def position_r(self):
        """Grid index of every position's interval."""
        out = np.empty(self.n, dtype=int)
        for start, length, r in self.intervals:
            for t in range(length):
                out[(start + t) % self.n] = r
        return out


def round_levels(weights, m):
    _check_grid_count(m)
    mod = np.abs(np.asarray(weights, dtype=complex))
    n = mod.size
    if n <= 2 * m:
        raise PreconditionError("level rounding needs more than 2M weights", n=n, m=m)
    norm = float(mod.max())
    k_tilde = int(np.argmax(mod))
    q, d = divmod(n, m)
    offset = (k_tilde - d) % n
    pos_mod = np.roll(mod, -offset)

    starts = [0] + [m + d + m * j for j in range(q - 1)]
    lengths = [m + d] + [m] * (q - 1)
    intervals = []
    for start, length in zip(starts, lengths):
        lo = float(pos_mod[start : start + length].min())
        r = int(math.floor((norm - lo) * m))
        while norm - r / m < lo:
            r -= 1
        while norm - (r + 1) / m >= lo:
            r += 1
        if r < 0 or float(pos_mod[start : start + length].max()) >= norm - (r - 1) / m:
            raise PreconditionError(
                "weights vary by a full grid step inside one interval; "
                "the commutator precondition does not hold",
                interval=start,
            )
        intervals.append((start, length, r))

    rs = [r for _, _, r in intervals]
    r_low = max(rs)
    j_low = rs.index(r_low)
    k_low = (offset + intervals[j_low][0]) % n

    merged = []
    for start, length, r in intervals:
        if merged and merged[-1][2] == r:
            merged[-1] = (merged[-1][0], merged[-1][1] + length, r)
        else:
            merged.append((start, length, r))
    if len(merged) > 1 and merged[0][2] == merged[-1][2]:
        first = merged.pop(0)
        merged[-1] = (merged[-1][0], merged[-1][1] + first[1], merged[-1][2])
    for (_, _, ra), (_, _, rb) in zip(merged, merged[1:] + merged[:1]):
        if len(merged) > 1 and abs(ra - rb) != 1:
            raise AssertionError("merged neighbours must sit one grid step apart")

    return LevelStructure(
        m=m,
        n=n,
        norm=norm,
        offset=offset,
        k_tilde=k_tilde,
        intervals=tuple(intervals),
        merged=tuple(merged),
        j_low=j_low,
        k_low=k_low,
        r_low=r_low,
    )


def _check_grid_count(m):
    if m < 4 or m % 2:
        raise PreconditionError("grid count must be an even integer >= 4", m=m)


@dataclass
class NormalAssembly:
    """A normal matrix assembled from closed constant-modulus orbits.

    The matrix factors as B D B* where B is the recorded basis (a cyclic
    relabeling, a diagonal phase, and disjoint plane rotations) and D is a
    weighted permutation: succ gives each position's image, edge_modulus
    and edge_factor its coefficient.  Orbits lists the cycles as
    (positions, modulus, negative sign count).
    """

    n: int
    m: int
    branch: str
    weights: np.ndarray
    norm: float
    commutator: float
    sigma: float
    level: LevelStructure
    offset: int
    phases: np.ndarray
    rotations: list
    succ: np.ndarray
    edge_modulus: np.ndarray
    edge_factor: np.ndarray
    orbits: list = field(default_factory=list)
    distance: float = 0.0
    distance_bound: float = 0.0
    rounding_distance: float = 0.0
    surgery_distance: float = 0.0
    residual: float = 0.0

    @property
    def is_real(self):
        return not (
            np.iscomplexobj(self.weights)
            or np.iscomplexobj(self.edge_factor)
            or np.iscomplexobj(self.phases)
        )

    def permutation_sparse(self):
        vals = self.edge_modulus * self.edge_factor
        return sp.csc_matrix(
            (vals, (self.succ, np.arange(self.n))), shape=(self.n, self.n)
        )

    def basis_sparse(self):
        dtype = float if self.is_real else complex
        g = sp.identity(self.n, format="lil", dtype=dtype)
        for i, j, c, s in self.rotations:
            g[i, i] = c
            g[j, i] = s
            g[i, j] = -s
            g[j, j] = c
        g = g.tocsc()
        w = sp.diags(self.phases.astype(dtype))
        perm = (self.offset + np.arange(self.n)) % self.n
        p = sp.csc_matrix(
            (np.ones(self.n, dtype=dtype), (perm, np.arange(self.n))),
            shape=(self.n, self.n),
        )
        return p @ w @ g

    def to_sparse(self):
        b = self.basis_sparse()
        return b @ self.permutation_sparse().astype(b.dtype) @ b.conj().T

    def to_dense(self):
        return self.to_sparse().toarray()

    def basis_dense(self):
        return self.basis_sparse().toarray()

    def input_sparse(self):
        return shift_sparse(self.weights)


def _surgery_norm(b, a, k0):
    """Exact perturbation norm of one run rerouting at level weight b."""
    best = abs(b - a)
    for k in range(k0):
        _, c0, s0 = _angle(k, k0)
        _, c1, s1 = _angle(k + 1, k0)
        block = np.array(
            [[a * c1 - b * c0, -b * (s1 - s0)], [a * s1 - b * s0, b * (c1 - c0)]]
        )
        best = max(best, float(np.linalg.svd(block, compute_uv=False)[0]))
    return best


def _certified_norm(a, tol=1e-8):
    """Largest singular value of a sparse matrix with a residual check."""
    if a.nnz == 0 or not np.abs(a.data).max():
        return 0.0
    n = min(a.shape)
    if n <= 600:
        return float(np.linalg.norm(a.toarray(), 2))
    u, s, vt = svds(a.tocsc(), k=1, tol=0)
    s = float(s[0])
    u = u[:, 0]
    v = vt[0].conj()
    r1 = float(np.linalg.norm(a @ v - s * u))
    r2 = float(np.linalg.norm(a.conj().T @ u - s * v))
    if max(r1, r2) > tol * max(1.0, s):
        raise ArithmeticError("sparse norm estimate failed its residual check")
    return s


def _frobenius(a):
    return float(np.sqrt(np.sum(np.abs(a.data) ** 2))) if a.nnz else 0.0


def _audit_orbits(succ, edge_r, edge_factor, r_low):
    """Decompose the successor map into cycles and check the invariants."""
    n = succ.size
    seen = np.zeros(n, dtype=bool)
    hit = np.zeros(n, dtype=bool)
    hit[succ] = True
    if not hit.all():
        raise AssertionError("successor map is not a permutation")
    orbits = []
    for start in range(n):
        if seen[start]:
            continue
        cycle = []
        p = start
        while not seen[p]:
            seen[p] = True
            cycle.append(p)
            p = succ[p]
        if p != start:
            raise AssertionError("orbit did not close on its starting vector")
        rs = {int(edge_r[q]) for q in cycle}
        if len(rs) != 1:
            raise AssertionError("orbit mixes grid levels")
        r = rs.pop()
        negatives = sum(1 for q in cycle if np.real(edge_factor[q]) < 0)
        if r != r_low and negatives != 1:
            raise AssertionError("inner orbit must carry exactly one sign flip")
        orbits.append((tuple(cycle), r, negatives))
    if sum(len(c) for c, _, _ in orbits) != n:
        raise AssertionError("orbits do not partition the basis")
    return orbits


def _measure(asm):
    diff = asm.to_sparse() - asm.input_sparse().astype(
        complex if not asm.is_real else float
    )
    asm.distance = _certified_norm(diff)
    nn = asm.to_sparse()
    asm.residual = _frobenius(nn.conj().T @ nn - nn @ nn.conj().T)


def _trivial_assembly(weights, m, branch, moduli, factors, sigma):
    c = np.asarray(weights)
    n = c.size
    real = not np.iscomplexobj(c)
    asm = NormalAssembly(
        n=n,
        m=m,
        branch=branch,
        weights=c.copy(),
        norm=shift_norm(c),
        commutator=shift_commutator_norm(c),
        sigma=sigma,
        level=None,
        offset=0,
        phases=np.ones(n, dtype=float if real else complex),
        rotations=[],
        succ=(np.arange(n) + 1) % n,
        edge_modulus=np.asarray(moduli, dtype=float),
        edge_factor=np.asarray(factors),
        distance_bound=(shift_norm(c) * math.pi * m / (m - 2) + 2) / m,
    )
    asm.orbits = _audit_orbits(
        asm.succ, np.zeros(n, dtype=int), asm.edge_factor, 0
    ) if n else []
    _measure(asm)
    return asm


def normalize_shift(weights, m, *, sigma=None):
    """Round a cyclic shift's weights and stitch the levels into a normal.

    The commutator precondition is |[S*, S]| < 1/M^3, or < 2 sigma/M^2 when
    every modulus is at least sigma.  The distance satisfies
    |N - S| < (|S| pi M/(M-2) + 2)/M and the output orbits all have
    constant modulus inside [min |c_k|, max |c_k|].
    """
    _check_grid_count(m)
    c = np.asarray(weights)
    if c.ndim != 1 or c.size < 1:
        raise PreconditionError("need a one dimensional weight list")
    c = c.astype(complex) if np.iscomplexobj(c) else c.astype(float)
    n = c.size
    comm = shift_commutator_norm(c)
    if sigma is not None:
        if sigma <= 0:
            raise PreconditionError("sigma must be positive", sigma=sigma)
        low = float(np.abs(c).min())
        if low < sigma:
            raise PreconditionError(
                "a weight modulus falls below sigma", sigma=sigma, found=low
            )
        if comm >= 2 * sigma / m**2:
            raise PreconditionError(
                "self-commutator too large for the sigma grid",
                commutator=comm,
                limit=2 * sigma / m**2,
            )
    elif comm >= 1 / m**3:
        raise PreconditionError(
            "self-commutator too large for the grid", commutator=comm, limit=m**-3
        )

    mod = np.abs(c)
    if n <= 2 * m:
        mid = (mod.max() + mod.min()) / 2 if n else 0.0
        factors = np.array([_unit(z) for z in c]) if n else np.zeros(0)
        if not np.iscomplexobj(c):
            factors = factors.real
        return _trivial_assembly(c, m, "radial", np.full(n, mid), factors, sigma)

    lv = round_levels(c, m)
    pos_r = lv.position_r()
    pos_of = lambda k: (k - lv.offset) % n

    # diagonal phase that clears every weight's argument except the one at
    # k_low, which absorbs the loop's total phase
    phases = np.ones(n, dtype=complex)
    k = (lv.k_low + 1) % n
    for _ in range(n - 1):
        phases[(k + 1) % n] = phases[k] * _unit(c[k])
        k = (k + 1) % n
    special = phases[lv.k_low] * c[lv.k_low]
    special_factor = _unit(special)
    phases_pos = phases[(lv.offset + np.arange(n)) % n]
    real = not np.iscomplexobj(c)
    if real:
        phases_pos = phases_pos.real
        special_factor = float(np.real(special_factor))

    succ = (np.arange(n) + 1) % n
    edge_r = pos_r.copy()
    edge_factor = np.ones(n, dtype=float if real else complex)
    edge_factor[pos_of(lv.k_low)] = special_factor

    rotations = []
    surgery_distance = 0.0
    k0 = (m - 2) // 2
    q0 = len(lv.merged)
    touched = set()
    if q0 > 1:
        merged_r = [r for _, _, r in lv.merged]
        for r_level in range(min(merged_r), lv.r_low):
            marked = [j for j in range(q0) if merged_r[j] <= r_level]
            marked_set = set(marked)
            components = []
            for j in marked:
                if (j - 1) % q0 in marked_set:
                    continue
                run = [j]
                while (run[-1] + 1) % q0 in marked_set:
                    run.append((run[-1] + 1) % q0)
                components.append(run)
            if components:
                b_val = lv.a_value(r_level)
                surgery_distance = max(
                    surgery_distance, _surgery_norm(b_val, b_val - 1 / m, k0)
                )
            for run in components:
                p0 = lv.merged[run[0]][0]
                last_start, last_len, _ = lv.merged[run[-1]]
                q1 = (last_start + last_len - 1) % n
                v_pos = [(p0 + t) % n for t in range(k0 + 1)]
                w_pos = [(q1 - k0 + t) % n for t in range(k0 + 1)]
                fresh = set(v_pos) | set(w_pos)
                if touched & fresh:
                    raise AssertionError("surgeries overlapped on a basis vector")
                touched |= fresh
                succ[v_pos[k0]], succ[q1] = succ[q1], succ[v_pos[k0]]
                edge_r[v_pos] = r_level + 1
                edge_factor[q1] = -edge_factor[q1]
                for t in range(1, k0 + 1):
                    _, ca, sa = _angle(t, k0)
                    rotations.append((v_pos[t], w_pos[t], ca, sa))
        branch = "full"
    else:
        branch = "single"

    edge_modulus = lv.norm - edge_r / m
    asm = NormalAssembly(
        n=n,
        m=m,
        branch=branch,
        weights=c.copy(),
        norm=lv.norm,
        commutator=comm,
        sigma=sigma,
        level=lv,
        offset=lv.offset,
        phases=phases_pos,
        rotations=rotations,
        succ=succ,
        edge_modulus=edge_modulus,
        edge_factor=edge_factor,
        distance_bound=(lv.norm * math.pi * m / (m - 2) + 2) / m,
        surgery_distance=surgery_distance,
    )
    pos_index = (np.arange(n) - lv.offset) % n
    rounded = lv.norm - pos_r[pos_index] / m
    asm.rounding_distance = float(np.abs(np.abs(c) - rounded).max())
    asm.orbits = _audit_orbits(succ, edge_r, edge_factor, lv.r_low)
    _measure(asm)
    return asm


def _rescale(asm, factor, original):
    asm.weights = np.asarray(original).copy()
    asm.norm *= factor
    asm.commutator *= factor**2
    asm.edge_modulus = asm.edge_modulus * factor
    asm.distance *= factor
    asm.distance_bound *= factor
    asm.rounding_distance *= factor
    asm.surgery_distance *= factor
    asm.residual *= factor**2
    if asm.sigma is not None:
        asm.sigma *= factor
    asm.orbits = [(cyc, r, neg) for cyc, r, neg in asm.orbits]
    return asm


def nearest_normal(weights):
    """Normal matrix within 5.3308 |S|^(1/3) |[S*,S]|^(1/3) of the shift.

    Total on every weight list: an exactly normal input comes back as
    itself and a violently non-normal one collapses to the zero matrix,
    which still meets the bound.
    """
    c = np.asarray(weights)
    norm = shift_norm(c)
    x = shift_commutator_norm(c)
    bound = CUBIC_CONSTANT * norm ** (1 / 3) * x ** (1 / 3)
    if norm == 0.0 or x == 0.0:
        factors = np.array([_unit(z) for z in c]) if c.size else np.zeros(0)
        if not np.iscomplexobj(c):
            factors = factors.real
        return (
            _trivial_assembly(c, 4, "exact", np.abs(c).astype(float), factors, None),
            bound,
        )
    scaled_x = (CUBIC_SCALE / norm) ** 2 * x
    if scaled_x > (CUBIC_GRID_FLOOR + 2) ** -3:
        zero = _trivial_assembly(
            c, 4, "zero", np.zeros(c.size), np.ones(c.size), None
        )
        return zero, bound
    m = 2 * (math.ceil(scaled_x ** (-1 / 3) / 2) - 1)
    asm = normalize_shift(c * (CUBIC_SCALE / norm), m)
    return _rescale(asm, norm / CUBIC_SCALE, c), bound


def nearest_normal_sigma(weights, sigma):
    """Sigma-aware variant: bound 4.8573 sqrt(|S|/sigma) |[S*,S]|^(1/2)."""
    c = np.asarray(weights)
    if sigma <= 0:
        raise PreconditionError("sigma must be positive", sigma=sigma)
    norm = shift_norm(c)
    if norm and float(np.abs(c).min()) < sigma:
        raise PreconditionError(
            "a weight modulus falls below sigma",
            sigma=sigma,
            found=float(np.abs(c).min()),
        )
    x = shift_commutator_norm(c)
    bound = SIGMA_CONSTANT * math.sqrt(norm / sigma) * math.sqrt(x) if norm else 0.0
    if norm == 0.0 or x == 0.0:
        factors = np.array([_unit(z) for z in c]) if c.size else np.zeros(0)
        if not np.iscomplexobj(c):
            factors = factors.real
        return (
            _trivial_assembly(c, 4, "exact", np.abs(c).astype(float), factors, sigma),
            bound,
        )
    scaled_sigma = SIGMA_SCALE * sigma / norm
    scaled_x = (SIGMA_SCALE / norm) ** 2 * x / (2 * scaled_sigma)
    if scaled_x > (SIGMA_GRID_FLOOR + 2) ** -2:
        zero = _trivial_assembly(
            c, 4, "zero", np.zeros(c.size), np.ones(c.size), sigma
        )
        return zero, bound
    m = 2 * (math.ceil(scaled_x ** (-1 / 2) / 2) - 1)
    asm = normalize_shift(c * (SIGMA_SCALE / norm), m, sigma=scaled_sigma)
    return _rescale(asm, norm / SIGMA_SCALE, c), bound
