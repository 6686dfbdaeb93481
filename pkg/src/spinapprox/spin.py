"""Exact data for su(2) irreducibles and their weight combinatorics.

Spins and weights travel as doubled integers (``two_lam`` means 2*lambda),
so half-integer arithmetic and parity checks stay exact.  Ladder weights
d(lam, m) = sqrt((lam - m) * (lam + m + 1)) are produced from an exact
integer square; everything else that can be an integer is one.

Generator conventions: s3 = diag(-1, 1)/2, s+ = [[0, 0], [1, 0]], and
s1 = (s+ + s-)/2, s2 = (s+ - s-)/(2i), so [s1, s2] = i*s3 cyclically and
every norm is lam for the spin-lam copy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import PreconditionError

__all__ = [
    "HalfInt",
    "as_two",
    "pauli",
    "pauli_coefficients",
    "pauli_norm",
    "d_weight",
    "d_weight_sq",
    "irrep_generators",
    "spin_z",
    "spin_plus",
    "spin_minus",
    "spin_pauli",
    "spin_matrix",
    "weight_space_dimension",
    "tensor_multiplicity",
    "multiplicity_table",
    "multiplicity_turning_point",
    "weight_estimates",
    "WeightEstimates",
]


@dataclass(frozen=True, order=True)
class HalfInt:
    """A half-integer stored as its doubled value."""

    two_x: int

    @classmethod
    def of(cls, value):
        return cls(as_two(value))

    @property
    def value(self) -> float:
        return self.two_x / 2.0

    @property
    def is_integer(self) -> bool:
        return self.two_x % 2 == 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.two_x, 2)

    def __str__(self):
        if self.two_x % 2 == 0:
            return str(self.two_x // 2)
        return f"{self.two_x}/2"

    def __repr__(self):
        return f"HalfInt({self})"


def as_two(value) -> int:
    """Coerce a number to its doubled-integer form, requiring a half-integer."""
    if isinstance(value, HalfInt):
        return value.two_x
    if isinstance(value, (int, np.integer)):
        return 2 * int(value)
    frac = Fraction(value).limit_denominator(2)
    if frac != Fraction(value) or frac.denominator > 2:
        raise PreconditionError("not a half-integer", value=repr(value))
    return int(frac * 2)


# ---------------------------------------------------------------------------
# 2x2 building blocks


def pauli(i: int) -> np.ndarray:
    """Return the normalized Pauli matrix s_i (i = 1, 2, 3) or the identity (i = 0)."""
    if i == 0:
        return np.eye(2, dtype=complex)
    if i == 1:
        return np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
    if i == 2:
        return np.array([[0.0, 0.5j], [-0.5j, 0.0]], dtype=complex)
    if i == 3:
        return np.array([[-0.5, 0.0], [0.0, 0.5]], dtype=complex)
    raise PreconditionError("pauli index must be 0..3", index=i)


def pauli_coefficients(a: np.ndarray):
    """Expand a 2x2 matrix in the basis (s1, s2, s3, I/2).

    The basis is trace-orthogonal with tr(s_i^2) = 1/2 and tr((I/2)^2) = 1/2,
    so every coefficient is a plain trace; in particular c4 = tr(a).
    Returns a tuple (c1, c2, c3, c4) of complex numbers.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape != (2, 2):
        raise PreconditionError("expected a 2x2 matrix", shape=list(a.shape))
    c = [complex(2.0 * np.trace(a @ pauli(i))) for i in (1, 2, 3)]
    c4 = complex(np.trace(a))
    return c[0], c[1], c[2], c4


def pauli_norm(c1, c2, c3, c4) -> float:
    """Operator norm of c1*s1 + c2*s2 + c3*s3 + (c4/2)*I.

    Exact for self-adjoint input (real coefficients); an upper bound in
    general.
    """
    return 0.5 * math.sqrt(abs(c1) ** 2 + abs(c2) ** 2 + abs(c3) ** 2) + 0.5 * abs(c4)


# ---------------------------------------------------------------------------
# ladder weights


def d_weight_sq(two_lam: int, two_m: int) -> int:
    """Exact integer (lam - m) * (lam + m + 1) = d(lam, m)^2.

    Both factors of (two_lam - two_m) * (two_lam + two_m + 2) are even, so
    the quarter is an exact integer.
    """
    _check_weight(two_lam, two_m)
    return (two_lam - two_m) * (two_lam + two_m + 2) // 4


def d_weight(two_lam: int, two_m: int) -> float:
    """Ladder weight d(lam, m) = sqrt((lam - m)(lam + m + 1)) for -lam <= m < lam."""
    return math.sqrt(d_weight_sq(two_lam, two_m))


def _check_weight(two_lam, two_m):
    if two_lam < 0:
        raise PreconditionError("spin must be nonnegative", two_lam=two_lam)
    if (two_lam - two_m) % 2 != 0:
        raise PreconditionError(
            "weight parity must match the spin", two_lam=two_lam, two_m=two_m
        )
    if not (-two_lam <= two_m < two_lam):
        raise PreconditionError(
            "weight must satisfy -lam <= m < lam", two_lam=two_lam, two_m=two_m
        )


# ---------------------------------------------------------------------------
# irreducible blocks


def irrep_generators(two_lam: int):
    """Diagonal of S(s3) and superdiagonal weights of S(s+) for spin lam.

    Returns (diag, weights): diag has the two_lam + 1 values -lam .. lam in
    steps of one, weights the two_lam ladder entries d(lam, -lam) .. The
    halves are dyadic, so the float diagonal is still exact.
    """
    if two_lam < 0:
        raise PreconditionError("spin must be nonnegative", two_lam=two_lam)
    diag = np.array([(-two_lam + 2 * k) / 2.0 for k in range(two_lam + 1)])
    weights = np.array(
        [d_weight(two_lam, -two_lam + 2 * k) for k in range(two_lam)]
    )
    return diag, weights


def spin_z(two_lam: int) -> np.ndarray:
    diag, _ = irrep_generators(two_lam)
    return np.diag(diag)


def spin_plus(two_lam: int) -> np.ndarray:
    """Real lower-triangular raising generator: S(s+) v_m = d(lam, m) v_{m+1}."""
    n = two_lam + 1
    _, weights = irrep_generators(two_lam)
    out = np.zeros((n, n))
    for k in range(n - 1):
        out[k + 1, k] = weights[k]
    return out


def spin_minus(two_lam: int) -> np.ndarray:
    return spin_plus(two_lam).T


def spin_pauli(two_lam: int, i: int) -> np.ndarray:
    """Image of s_i under the spin-lam irreducible (complex for i = 2)."""
    if i == 0:
        return np.eye(two_lam + 1, dtype=complex)
    sp = spin_plus(two_lam)
    if i == 1:
        return ((sp + sp.T) / 2.0).astype(complex)
    if i == 2:
        return (sp - sp.T) / 2.0j
    if i == 3:
        return spin_z(two_lam).astype(complex)
    raise PreconditionError("pauli index must be 0..3", index=i)


def spin_matrix(two_lam: int, a: np.ndarray) -> np.ndarray:
    """Image S(a) of an arbitrary 2x2 matrix, assembled by linearity."""
    c1, c2, c3, c4 = pauli_coefficients(a)
    out = sum(c * spin_pauli(two_lam, i) for i, c in ((1, c1), (2, c2), (3, c3)))
    out = out + 0.5 * c4 * np.eye(two_lam + 1)
    return out


# ---------------------------------------------------------------------------
# multiplicities in the N-fold tensor power


def weight_space_dimension(n_sites: int, two_m: int) -> int:
    """Dimension of the total weight-m subspace of (C^2)^{oplus n_sites}."""
    if (n_sites + two_m) % 2 != 0 or abs(two_m) > n_sites:
        return 0
    return math.comb(n_sites, (n_sites + two_m) // 2)


def tensor_multiplicity(n_sites: int, two_lam: int) -> int:
    """Number of spin-lam copies inside the n_sites-fold tensor power.

    Difference of adjacent weight-space dimensions; zero off the parity
    ladder or above n_sites/2.
    """
    if n_sites < 1:
        raise PreconditionError("need at least one site", n_sites=n_sites)
    if two_lam < 0 or (n_sites - two_lam) % 2 != 0 or two_lam > n_sites:
        return 0
    k = (n_sites + two_lam) // 2
    return math.comb(n_sites, k) - math.comb(n_sites, k + 1)


def multiplicity_table(n_sites: int):
    """All (two_lam, multiplicity) pairs with nonzero multiplicity, ascending."""
    start = n_sites % 2
    table = []
    for two_lam in range(start, n_sites + 1, 2):
        n = tensor_multiplicity(n_sites, two_lam)
        if n > 0:
            table.append((two_lam, n))
    return table


def multiplicity_turning_point(n_sites: int) -> float:
    """Threshold lam* = sqrt(n_sites + 2)/2 - 1.

    Multiplicities strictly decrease in lam above this value and strictly
    increase below -lam* - 1 shifted accordingly; at most one spin value
    sits in between.
    """
    return math.sqrt(n_sites + 2) / 2.0 - 1.0


# ---------------------------------------------------------------------------
# ladder-weight estimates used by the exchange constructions


class WeightEstimates(NamedTuple):
    monotone_upper: float
    near_edge: float | None
    gap_simple: float | None
    gap_pair: tuple[float, float] | None
    square_gap: float | None


def weight_estimates(two_lam, two_mu, two_i, L=None, M=None, l=None):
    """Bundle of upper bounds for d(lam, i), d(lam, i) - d(mu, i) and squares.

    Hypotheses checked: |i| <= mu <= lam with matching parities.  Fields:

    - monotone_upper: lam + 1/2, with d(mu, i) <= d(lam, i) <= lam + 1/2 always;
    - near_edge: sqrt(2 lam (M + 1)) valid when lam - |i| <= M (needs M);
    - gap_simple: sqrt(2 lam L) bound on d(lam, i) - d(mu, i) when lam - mu <= L;
    - gap_pair: (2 L sqrt(lam / l), sqrt(2 lam (l + 1))); at least one of
      "the gap is below the first" / "d(lam, i) is below the second" holds
      (needs L and l > 0);
    - square_gap: 2 lam L bound on d(lam, i)^2 - d(mu, i)^2.

    Entries whose parameters were not supplied come back as None.
    """
    for name, two_v in (("two_lam", two_lam), ("two_mu", two_mu)):
        if two_v < 0:
            raise PreconditionError("spin must be nonnegative", **{name: two_v})
    if not (abs(two_i) <= two_mu <= two_lam):
        raise PreconditionError(
            "need |i| <= mu <= lam", two_lam=two_lam, two_mu=two_mu, two_i=two_i
        )
    if (two_lam - two_i) % 2 != 0 or (two_mu - two_i) % 2 != 0:
        raise PreconditionError(
            "lam - i and mu - i must be integers",
            two_lam=two_lam,
            two_mu=two_mu,
            two_i=two_i,
        )
    lam = two_lam / 2.0
    near_edge = None
    if M is not None:
        if lam - abs(two_i) / 2.0 > M:
            raise PreconditionError(
                "near-edge estimate needs lam - |i| <= M", two_lam=two_lam,
                two_i=two_i, M=M,
            )
        near_edge = math.sqrt(2.0 * lam * (M + 1))
    gap_simple = None
    square_gap = None
    if L is not None:
        if lam - two_mu / 2.0 > L:
            raise PreconditionError(
                "gap estimates need lam - mu <= L", two_lam=two_lam,
                two_mu=two_mu, L=L,
            )
        gap_simple = math.sqrt(2.0 * lam * L)
        square_gap = 2.0 * lam * L
    gap_pair = None
    if l is not None and L is not None:
        if l <= 0:
            raise PreconditionError("window parameter l must be positive", l=l)
        gap_pair = (2.0 * L * math.sqrt(lam / l), math.sqrt(2.0 * lam * (l + 1)))
    return WeightEstimates(lam + 0.5, near_edge, gap_simple, gap_pair, square_gap)


def gap_or_small_bound(two_lam, L, l, C):
    """max of the two branch bounds from the paired gap estimate.

    For every admissible weight, d(lam, i) - d(mu, i) + C * max of the two
    values is bounded by max(2 L sqrt(lam / l) + C (lam + 1/2),
    sqrt(2 lam L) + C sqrt(2 lam (l + 1))).  This is the quantity the
    exchange schedule consumes.
    """
    if l <= 0:
        raise PreconditionError("window parameter l must be positive", l=l)
    lam = two_lam / 2.0
    branch_a = 2.0 * L * math.sqrt(lam / l) + C * (lam + 0.5)
    branch_b = math.sqrt(2.0 * lam * L) + C * math.sqrt(2.0 * lam * (l + 1))
    return max(branch_a, branch_b)


__all__.append("gap_or_small_bound")
