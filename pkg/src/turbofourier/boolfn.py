"""Pseudo-Boolean functions on the +/-1 hypercube and their Fourier expansions.

Every function f: {+1,-1}^w -> R is stored as a dense table of 2^w values.
Index convention (the single place it is defined -- everything else in the
package goes through the helpers below):

    bit i of the table index encodes variable x_{i+1};
    bit value 0 means x_{i+1} = +1, bit value 1 means x_{i+1} = -1.

Equivalently, an F2 assignment u maps to the sign vector (-1)^u, and the
table index is the little-endian packing of u.  A subset S of variables is a
bitmask with bit i set iff x_{i+1} is in S, so the parity character is

    chi_S(x) = prod_{i in S} x_i = (-1)^popcount(S & index).

The Fourier expansion f = sum_S fhat(S) chi_S is computed with the
Walsh-Hadamard butterfly in O(w 2^w).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# A subset of variables, encoded as a bitmask (bit i <=> x_{i+1} in S).
SubsetMask = int


def f2_to_sign(bits: np.ndarray) -> np.ndarray:
    """Map F2 values {0,1} to signs {+1,-1} (0 -> +1)."""
    return 1.0 - 2.0 * np.asarray(bits)


def signs_to_index(signs: np.ndarray) -> np.ndarray:
    """Pack sign vectors (..., w) into table indices, sign -1 setting the bit."""
    signs = np.asarray(signs)
    w = signs.shape[-1]
    weights = (1 << np.arange(w)).astype(np.int64)
    return ((signs < 0).astype(np.int64) @ weights)


def index_to_signs(index: np.ndarray, arity: int) -> np.ndarray:
    """Unpack table indices into sign vectors (..., arity)."""
    index = np.asarray(index)
    bits = (index[..., None] >> np.arange(arity)) & 1
    return f2_to_sign(bits)


def mask_vars(mask: SubsetMask) -> tuple[int, ...]:
    """1-based variable numbers in a subset mask, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _check_dense(arity: int, data: np.ndarray, what: str) -> np.ndarray:
    if arity < 1:
        raise ValueError(f"arity must be >= 1, got {arity}")
    data = np.asarray(data, dtype=np.float64)
    if data.shape != (1 << arity,):
        raise ValueError(f"{what} must have length 2**{arity}, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what} contains non-finite entries")
    return data


@dataclass(frozen=True)
class PseudoBooleanTable:
    """A function {+1,-1}^arity -> R as a dense table of 2^arity values."""

    arity: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _check_dense(self.arity, self.values, "values"))
        self.values.setflags(write=False)

    def __call__(self, signs: np.ndarray) -> np.ndarray:
        """Evaluate on sign vectors of shape (..., arity)."""
        return self.values[signs_to_index(signs)]

    def to_json_dict(self) -> dict:
        return {"arity": self.arity, "values": self.values.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "PseudoBooleanTable":
        return cls(int(d["arity"]), np.asarray(d["values"], dtype=np.float64))


@dataclass(frozen=True)
class FourierSpectrum:
    """Fourier coefficients fhat(S), indexed by subset bitmask S."""

    arity: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _check_dense(self.arity, self.coeffs, "coeffs"))
        self.coeffs.setflags(write=False)

    def total_energy(self) -> float:
        return float(np.dot(self.coeffs, self.coeffs))

    def to_json_dict(self) -> dict:
        return {"arity": self.arity, "values": self.coeffs.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FourierSpectrum":
        return cls(int(d["arity"]), np.asarray(d["values"], dtype=np.float64))


def _butterfly(vec: np.ndarray) -> np.ndarray:
    """In-place-style Walsh-Hadamard transform, H[S,x] = (-1)^popcount(S&x)."""
    out = vec.copy()
    h = 1
    n = out.size
    while h < n:
        out = out.reshape(-1, 2, h)
        top = out[:, 0, :] + out[:, 1, :]
        bot = out[:, 0, :] - out[:, 1, :]
        out = np.concatenate((top[:, None, :], bot[:, None, :]), axis=1)
        h *= 2
    return out.reshape(n)


def wht_forward(table: PseudoBooleanTable) -> FourierSpectrum:
    """Fourier coefficients fhat(S) = 2^-w sum_x f(x) chi_S(x)."""
    coeffs = _butterfly(table.values) / table.values.size
    return FourierSpectrum(table.arity, coeffs)


def wht_inverse(spec: FourierSpectrum) -> PseudoBooleanTable:
    """Table values f(x) = sum_S fhat(S) chi_S(x)."""
    return PseudoBooleanTable(spec.arity, _butterfly(spec.coeffs))


def energy_profile(
    spec: FourierSpectrum, threshold_fraction: float
) -> list[tuple[SubsetMask, float]]:
    """Smallest set of coefficients covering a fraction of the total energy.

    Coefficients are ranked by descending squared magnitude (ties broken by
    ascending subset mask) and the shortest prefix whose cumulative energy
    reaches ``threshold_fraction`` of the total is returned as
    (mask, squared coefficient) pairs.
    """
    if not 0.0 < threshold_fraction <= 1.0:
        raise ValueError("threshold_fraction must be in (0, 1]")
    sq = spec.coeffs * spec.coeffs
    total = sq.sum()
    if total <= 0.0:
        raise ValueError("degenerate spectrum: total energy is zero")
    order = np.lexsort((np.arange(sq.size), -sq))
    cum = np.cumsum(sq[order])
    cut = int(np.searchsorted(cum, threshold_fraction * total - 1e-15)) + 1
    return [(int(m), float(sq[m])) for m in order[:cut]]


def _table_from_f2(arity: int, expr) -> PseudoBooleanTable:
    """Build a +/-1 table from an F2 predicate on bit tuples (u1..u_arity)."""
    vals = np.empty(1 << arity)
    for idx in range(1 << arity):
        u = tuple((idx >> j) & 1 for j in range(arity))
        vals[idx] = 1.0 - 2.0 * (expr(u) & 1)
    return PseudoBooleanTable(arity, vals)


def bent_table(arity: int = 4) -> PseudoBooleanTable:
    """The +/-1 indicator of u1 u2 XOR u3 u4 (...), all |fhat| = 2^(-arity/2)."""
    if arity % 2:
        raise ValueError("bent construction needs even arity")

    def expr(u):
        return sum(u[2 * j] & u[2 * j + 1] for j in range(arity // 2))

    return _table_from_f2(arity, expr)


def majority3_table() -> PseudoBooleanTable:
    """Majority of three +/-1 inputs."""
    vals = np.empty(8)
    for idx in range(8):
        ones = bin(idx).count("1")
        vals[idx] = -1.0 if ones >= 2 else 1.0
    return PseudoBooleanTable(3, vals)


def fixture_tables() -> dict[str, PseudoBooleanTable]:
    """Named 5-input test encoders (exact block functions and their best
    affine approximations) plus the small bent/majority fixtures.

    The block functions are XORs over the literals u1..u5 with some AND
    terms; u with index 1 is table variable x1 (bit 0).  Complemented
    literals are written inline as (1 ^ u).
    """

    def block1(u):
        u1, u2, u3, u4, u5 = u
        nu2, nu4 = 1 ^ u2, 1 ^ u4
        return 1 ^ u1 ^ nu2 ^ u3 ^ nu4 ^ u5 ^ (nu2 & u3 & nu4) ^ (u1 & nu2 & u3 & nu4 & u5)

    def block2(u):
        u1, u2, u3, u4, u5 = u
        return u1 ^ u3 ^ u4 ^ u5

    def block3(u):
        u1, u2, u3, u4, u5 = u
        return u1 ^ u2 ^ u4 ^ ((1 ^ u3) & (1 ^ u5))

    def affine(const, *vars_):
        def expr(u):
            acc = const
            for v in vars_:
                acc ^= u[v - 1]
            return acc

        return expr

    fixtures = {
        "block1": _table_from_f2(5, block1),
        "block2": _table_from_f2(5, block2),
        "block3": _table_from_f2(5, block3),
        "block1_affine": _table_from_f2(5, affine(1, 1, 2, 3, 4, 5)),
        "block2_affine": _table_from_f2(5, affine(0, 1, 3, 4, 5)),
        "block3_affine1": _table_from_f2(5, affine(0, 1, 2, 4)),
        "block3_affine2": _table_from_f2(5, affine(1, 1, 2, 3, 4)),
        "block3_affine3": _table_from_f2(5, affine(1, 1, 2, 4, 5)),
        "block3_affine4": _table_from_f2(5, affine(1, 1, 2, 3, 4, 5)),
        "bent4": bent_table(4),
        "majority3": majority3_table(),
    }
    return fixtures


# Subset masks (over u1..u5) of the four equally good affine fits to block3.
BLOCK3_SOLUTION_MASKS: tuple[SubsetMask, ...] = (0b01011, 0b01111, 0b11011, 0b11111)
# Subset mask of the single parity equal to block2.
BLOCK2_MASK: SubsetMask = 0b11101
