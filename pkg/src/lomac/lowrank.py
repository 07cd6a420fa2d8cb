"""Rank-r separable representation ``f = sum_l C_l U1_l (x) U2_l`` and its arithmetic.

Factors are stored column-wise: ``left`` is ``(m, r)``, ``right`` is ``(n, r)``.
Factors are not kept orthonormal between truncations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as la

DENSE_SIZE_LIMIT = 50_000_000


@dataclass(frozen=True)
class LowRankFunction:
    coef: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coef, dtype=float).reshape(-1)
        left = np.asarray(self.left, dtype=float)
        right = np.asarray(self.right, dtype=float)
        if left.ndim != 2 or right.ndim != 2:
            raise ValueError("factors must be 2-D column stacks")
        if not (coef.size == left.shape[1] == right.shape[1]):
            raise ValueError(
                f"rank mismatch: {coef.size} coefficients, {left.shape[1]} left and {right.shape[1]} right factors"
            )
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def rank(self) -> int:
        return self.coef.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.left.shape[0], self.right.shape[0]

    @classmethod
    def zeros(cls, m: int, n: int) -> "LowRankFunction":
        return cls(np.zeros(0), np.zeros((m, 0)), np.zeros((n, 0)))

    def scaled(self, alpha: float) -> "LowRankFunction":
        return LowRankFunction(alpha * self.coef, self.left, self.right)

    def __add__(self, other: "LowRankFunction") -> "LowRankFunction":
        return concat(self, other, 1.0, 1.0)

    def __sub__(self, other: "LowRankFunction") -> "LowRankFunction":
        return concat(self, other, 1.0, -1.0)


def from_separable(terms: Iterable[tuple[float, Sequence[float], Sequence[float]]]) -> LowRankFunction:
    """Build a low-rank function from ``(coefficient, left samples, right samples)`` triples."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one separable term")
    coef = np.array([float(c) for c, _, _ in terms])
    lefts = [np.asarray(a, dtype=float).ravel() for _, a, _ in terms]
    rights = [np.asarray(b, dtype=float).ravel() for _, _, b in terms]
    if len({a.size for a in lefts}) != 1 or len({b.size for b in rights}) != 1:
        raise ValueError("all separable terms must share the same grid lengths")
    return LowRankFunction(coef, np.column_stack(lefts), np.column_stack(rights))


def to_dense(f: LowRankFunction, limit: int = DENSE_SIZE_LIMIT) -> np.ndarray:
    m, n = f.shape
    if m * n > limit:
        raise MemoryError(f"refusing to densify a {m}x{n} low-rank function (limit {limit} entries)")
    return (f.left * f.coef[None, :]) @ f.right.T


def _check_same_grid(f: LowRankFunction, g: LowRankFunction) -> None:
    if f.shape != g.shape:
        raise ValueError(f"grid mismatch: {f.shape} vs {g.shape}")


def concat(f: LowRankFunction, g: LowRankFunction, alpha: float = 1.0, beta: float = 1.0) -> LowRankFunction:
    """``alpha f + beta g`` by stacking factors; the rank is ``rank(f) + rank(g)``."""
    _check_same_grid(f, g)
    return LowRankFunction(
        np.concatenate([alpha * f.coef, beta * g.coef]),
        np.hstack([f.left, g.left]),
        np.hstack([f.right, g.right]),
    )


def combine(terms: Sequence[tuple[float, LowRankFunction]]) -> LowRankFunction:
    """Linear combination ``sum_i a_i f_i`` by concatenation."""
    if not terms:
        raise ValueError("nothing to combine")
    shape = terms[0][1].shape
    for _, f in terms:
        if f.shape != shape:
            raise ValueError(f"grid mismatch: {f.shape} vs {shape}")
    return LowRankFunction(
        np.concatenate([a * f.coef for a, f in terms]),
        np.hstack([f.left for _, f in terms]),
        np.hstack([f.right for _, f in terms]),
    )


def _apply_map(op, factors: np.ndarray, side: str) -> np.ndarray:
    if op is None:
        return factors
    if callable(op) and not hasattr(op, "shape"):
        return np.asarray(op(factors))
    if hasattr(op, "matrix"):  # UpwindOperator
        op = op.matrix
    if getattr(op, "ndim", 2) == 1:
        op = np.asarray(op, dtype=float)
        if op.size != factors.shape[0]:
            raise ValueError(f"{side} elementwise map has length {op.size}, factors have {factors.shape[0]}")
        return op[:, None] * factors
    if op.shape[1] != factors.shape[0]:
        raise ValueError(f"{side} operator of shape {op.shape} cannot act on factors of length {factors.shape[0]}")
    return np.asarray(op @ factors)


def map_factors(f: LowRankFunction, left_op=None, right_op=None) -> LowRankFunction:
    """Apply a linear map to every left and every right factor.

    Each map may be ``None`` (identity), a 1-D array (elementwise product), a
    matrix / sparse matrix / ``UpwindOperator``, or a callable acting on the
    column stack.
    """
    return LowRankFunction(f.coef, _apply_map(left_op, f.left, "left"), _apply_map(right_op, f.right, "right"))


@dataclass(frozen=True)
class WeightPair:
    """Positive weights defining ``<f, g> = sum f g wl_p wr_q wM_q``."""

    left: np.ndarray
    right: np.ndarray
    right_mult: np.ndarray | None = None

    def __post_init__(self):
        for name in ("left", "right", "right_mult"):
            w = getattr(self, name)
            if w is None:
                continue
            w = np.asarray(w, dtype=float)
            if np.any(~np.isfinite(w)) or np.any(w <= 0):
                raise ValueError(f"{name} weights must be strictly positive")
            object.__setattr__(self, name, w)

    @property
    def right_total(self) -> np.ndarray:
        return self.right if self.right_mult is None else self.right * self.right_mult


def weighted_norm(f: LowRankFunction, w: WeightPair) -> float:
    """Weighted Frobenius norm computed from the factors, without densifying."""
    a = f.left * np.sqrt(w.left)[:, None]
    b = f.right * np.sqrt(w.right_total)[:, None]
    ga = a.T @ a
    gb = b.T @ b
    val = f.coef @ ((ga * gb) @ f.coef)
    return float(np.sqrt(max(val, 0.0)))


def _keep_count(s: np.ndarray, eps: float, criterion: str) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    if eps == 0.0:
        # numerical rank
        tol = s[0] * s.size * np.finfo(float).eps
        return max(1, int(np.count_nonzero(s > tol)))
    tail = np.sqrt(np.cumsum((s**2)[::-1])[::-1])  # tail[j] = ||s[j:]||
    tail = np.append(tail, 0.0)
    bound = eps * tail[0] if criterion == "relative" else eps
    keep = int(np.argmax(tail <= bound))
    return max(1, keep)


def truncate_weighted(
    f: LowRankFunction,
    eps: float,
    w: WeightPair,
    criterion: str = "relative",
    max_rank: int | None = None,
    floor: float = 0.0,
) -> LowRankFunction:
    """Weighted SVD truncation: scale by sqrt(weights), QR + small SVD, truncate, unscale.

    With ``criterion="relative"`` the discarded singular values satisfy
    ``||tail|| <= eps * ||all||``, i.e. the weighted error is at most
    ``eps`` times the weighted norm of ``f``. With ``"absolute"`` the bound
    is ``eps`` itself. ``eps = 0`` keeps the numerical rank. Singular
    values at or below ``floor`` are always dropped; a caller that knows the
    size of the quantity ``f`` was computed from can use it to discard
    pure rounding noise, which a relative criterion would otherwise keep.
    """
    if eps < 0:
        raise ValueError("truncation threshold must be nonnegative")
    if criterion not in ("relative", "absolute"):
        raise ValueError(f"unknown truncation criterion {criterion!r}")
    m, n = f.shape
    if len(w.left) != m or len(w.right) != n:
        raise ValueError("weight lengths do not match the grids")
    if f.rank == 0:
        return f
    sl = np.sqrt(w.left)
    sr = np.sqrt(w.right_total)
    a = f.left * sl[:, None]
    b = f.right * sr[:, None]
    qa, ra = la.qr(a, mode="economic", check_finite=False)
    qb, rb = la.qr(b, mode="economic", check_finite=False)
    core = (ra * f.coef[None, :]) @ rb.T
    uc, s, vct = la.svd(core, full_matrices=False, check_finite=False, lapack_driver="gesdd")
    r = _keep_count(s, eps, criterion)
    if floor > 0:
        r = min(r, int(np.count_nonzero(s > floor)))
    if max_rank is not None:
        r = min(r, max_rank)
    if r == 0:
        return LowRankFunction.zeros(m, n)
    left = (qa @ uc[:, :r]) / sl[:, None]
    # the right factors equal (qb @ vct[:r].T) / sr; forming them from the
    # original factors avoids dividing by tiny weights (e.g. a Maxwellian tail)
    right = (f.right * f.coef[None, :]) @ (ra.T @ uc[:, :r]) / s[None, :r]
    return LowRankFunction(s[:r].copy(), left, right)
