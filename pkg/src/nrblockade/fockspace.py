"""Truncated multimode Fock bases and elementary bosonic operators.

Operators are ``scipy.sparse.csr_matrix`` instances with complex128 entries.
Basis states are ordered graded-lexicographically: ascending total photon
number, then descending occupation of mode 0, mode 1, ... within a grade, e.g.
``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`` for two modes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError

DROP_TOL = 1e-15


@dataclass(frozen=True)
class TruncationPolicy:
    """Per-mode photon caps plus an optional cap on the total photon number."""

    per_mode_caps: tuple[int, ...]
    total_cap: Optional[int] = None

    def __post_init__(self):
        caps = tuple(int(c) for c in self.per_mode_caps)
        object.__setattr__(self, "per_mode_caps", caps)
        problems = []
        if not caps:
            problems.append("truncation needs at least one per-mode cap")
        for k, c in enumerate(caps):
            if c < 1:
                problems.append(f"per-mode cap for mode {k} must be >= 1, got {c}")
        if self.total_cap is not None:
            object.__setattr__(self, "total_cap", int(self.total_cap))
            if self.total_cap < 1:
                problems.append(f"total_cap must be >= 1, got {self.total_cap}")
            elif caps and self.total_cap > sum(caps):
                problems.append(
                    f"total_cap {self.total_cap} exceeds the sum of per-mode caps {sum(caps)}"
                )
        if problems:
            raise ConfigurationError(problems)

    @classmethod
    def uniform(cls, mode_count: int, cap: int = 3, total_cap: Optional[int] = 3):
        return cls((cap,) * mode_count, total_cap)

    def admits(self, occupation: Sequence[int]) -> bool:
        if any(n > c for n, c in zip(occupation, self.per_mode_caps)):
            return False
        return self.total_cap is None or sum(occupation) <= self.total_cap


@dataclass(frozen=True)
class FockBasis:
    mode_count: int
    states: tuple[tuple[int, ...], ...]
    policy: TruncationPolicy
    index_of: dict = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def grade(self, k: int) -> int:
        """Total photon number of basis state ``k``."""
        return sum(self.states[k])

    def grade_indices(self, total: int) -> list[int]:
        return [k for k, s in enumerate(self.states) if sum(s) == total]

    @property
    def max_grade(self) -> int:
        return max(sum(s) for s in self.states)


def _order_key(state):
    return (sum(state), tuple(-n for n in state))


def build_basis(mode_count: int, policy: TruncationPolicy) -> FockBasis:
    if mode_count < 1:
        raise ConfigurationError(f"mode_count must be >= 1, got {mode_count}")
    if len(policy.per_mode_caps) != mode_count:
        raise ConfigurationError(
            f"truncation lists {len(policy.per_mode_caps)} per-mode caps for {mode_count} modes"
        )
    ranges = [range(c + 1) for c in policy.per_mode_caps]
    states = sorted(
        (s for s in itertools.product(*ranges) if policy.admits(s)), key=_order_key
    )
    states = tuple(states)
    return FockBasis(
        mode_count=mode_count,
        states=states,
        policy=policy,
        index_of={s: k for k, s in enumerate(states)},
    )


def _check_mode(basis: FockBasis, mode: int):
    if not 0 <= mode < basis.mode_count:
        raise ConfigurationError(
            f"mode index {mode} out of range for a {basis.mode_count}-mode basis"
        )


def clean(op) -> sp.csr_matrix:
    """Return ``op`` as complex CSR with tiny entries (< 1e-15) removed."""
    op = sp.csr_matrix(op, dtype=complex)
    op.sum_duplicates()
    op.data[np.abs(op.data) < DROP_TOL] = 0
    op.eliminate_zeros()
    return op


def annihilation(basis: FockBasis, mode: int) -> sp.csr_matrix:
    _check_mode(basis, mode)
    rows, cols, vals = [], [], []
    for col, state in enumerate(basis.states):
        n = state[mode]
        if n == 0:
            continue
        lowered = state[:mode] + (n - 1,) + state[mode + 1 :]
        row = basis.index_of.get(lowered)
        if row is not None:
            rows.append(row)
            cols.append(col)
            vals.append(np.sqrt(n))
    dim = basis.dimension
    return clean(sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)))


def creation(basis: FockBasis, mode: int) -> sp.csr_matrix:
    return dag(annihilation(basis, mode))


def _diagonal(basis: FockBasis, values) -> sp.csr_matrix:
    return clean(sp.diags(np.asarray(values, dtype=complex)))


def number(basis: FockBasis, mode: int) -> sp.csr_matrix:
    _check_mode(basis, mode)
    return _diagonal(basis, [s[mode] for s in basis.states])


def kerr_term(basis: FockBasis, mode: int) -> sp.csr_matrix:
    """Diagonal operator a†a†aa = n(n-1) for ``mode``."""
    _check_mode(basis, mode)
    return _diagonal(basis, [s[mode] * (s[mode] - 1) for s in basis.states])


def identity(basis: FockBasis) -> sp.csr_matrix:
    return clean(sp.identity(basis.dimension, dtype=complex))


def dag(op) -> sp.csr_matrix:
    """Hermitian adjoint."""
    return sp.csr_matrix(op).conj().T.tocsr()


def compose(terms: Iterable, dimension: Optional[int] = None) -> sp.csr_matrix:
    """Sum of scaled operator products.

    ``terms`` is an iterable of ``(coefficient, factors)`` where ``factors`` is
    a sequence of operators multiplied left to right. Wrap a factor with
    :func:`dag` for its adjoint. An empty ``factors`` sequence stands for the
    identity and then requires ``dimension``.

    >>> a = annihilation(build_basis(1, TruncationPolicy((3,))), 0)
    >>> n = compose([(1.0, [dag(a), a])])
    """
    total = None
    for coeff, factors in terms:
        factors = list(factors)
        if not factors:
            if dimension is None:
                raise ValueError("identity term needs an explicit dimension")
            prod = sp.identity(dimension, dtype=complex, format="csr")
        else:
            prod = sp.csr_matrix(factors[0], dtype=complex)
            for f in factors[1:]:
                if f.shape[0] != prod.shape[1]:
                    raise ValueError(
                        f"dimension mismatch in product: {prod.shape} x {f.shape}"
                    )
                prod = prod @ f
        if dimension is None:
            dimension = prod.shape[0]
        elif prod.shape != (dimension, dimension):
            raise ValueError(
                f"term of shape {prod.shape} does not match dimension {dimension}"
            )
        term = coeff * prod
        total = term if total is None else total + term
    if total is None:
        if dimension is None:
            raise ValueError("empty composition needs an explicit dimension")
        return sp.csr_matrix((dimension, dimension), dtype=complex)
    return clean(total)
