"""Finite linear combinations of block kernels, ``f = sum_s c_s A*_s``."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from hypcross.cross import CrossSpec
from hypcross.errors import ValidationError
from hypcross.kernels import as_multi_index, factor_profile
from hypcross.smoothness import SmoothnessProfile


@dataclass(frozen=True)
class BlockSum:
    """Immutable ``sum_s c_s A*_s`` with canonical (lexicographic) term order.

    Build with :meth:`from_terms`; zero coefficients are dropped and
    duplicate indices are rejected.
    """

    d: int
    terms: tuple = ()

    @classmethod
    def from_terms(cls, d: int, terms) -> "BlockSum":
        """``terms`` is a mapping ``s -> c`` or an iterable of ``(s, c)`` pairs."""
        if int(d) != d or d < 1:
            raise ValidationError(f"dimension d = {d!r} must be a positive integer")
        d = int(d)
        items = terms.items() if isinstance(terms, Mapping) else terms
        seen = {}
        for s, c in items:
            s = as_multi_index(s)
            if len(s) != d:
                raise ValidationError(f"index {s} has dimension {len(s)}, expected {d}")
            if s in seen:
                raise ValidationError(f"duplicate index {s}")
            c = float(c)
            if not math.isfinite(c):
                raise ValidationError(f"coefficient of {s} is not finite")
            seen[s] = c
        return cls(d, tuple((s, c) for s, c in sorted(seen.items()) if c != 0.0))

    @classmethod
    def single(cls, s: Sequence[int], c: float = 1.0) -> "BlockSum":
        s = as_multi_index(s)
        return cls.from_terms(len(s), [(s, c)])

    @classmethod
    def empty(cls, d: int) -> "BlockSum":
        return cls.from_terms(d, [])

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def indices(self) -> list:
        return [s for s, _ in self.terms]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    def max_scale(self) -> tuple:
        """Largest ``s_j`` per coordinate (0 for an empty sum)."""
        if not self.terms:
            return (0,) * self.d
        return tuple(int(v) for v in np.max(np.array(self.indices), axis=0))

    def scale(self, factor: float) -> "BlockSum":
        return BlockSum.from_terms(self.d, [(s, factor * c) for s, c in self.terms])

    def __add__(self, other: "BlockSum") -> "BlockSum":
        if not isinstance(other, BlockSum):
            return NotImplemented
        if other.d != self.d:
            raise ValidationError("cannot add block sums of different dimension")
        acc = dict(self.terms)
        for s, c in other.terms:
            acc[s] = acc.get(s, 0.0) + c
        return BlockSum.from_terms(self.d, acc)

    def __call__(self, x):
        return evaluate(self, x)

    # JSON ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"d": self.d, "terms": [{"c": c, "s": list(s)} for s, c in self.terms]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "BlockSum":
        try:
            return cls.from_terms(doc["d"], [(t["s"], t["c"]) for t in doc["terms"]])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed BlockSum document: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "BlockSum":
        return cls.from_dict(json.loads(text))


def evaluate(f: BlockSum, x) -> np.ndarray:
    """``sum_s c_s A*_s(x)`` at points of shape ``(..., d)``.

    Factor values are computed once per (coordinate, scale) pair and shared
    between terms; terms are accumulated in canonical order.
    """
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1)
    if pts.shape[-1] != f.d:
        raise ValidationError(f"expected points of dimension {f.d}, got {pts.shape[-1]}")
    out = np.zeros(pts.shape[:-1])
    cache = {}
    for s, c in f.terms:
        term = np.full(pts.shape[:-1], c)
        for j, sj in enumerate(s):
            key = (j, sj)
            if key not in cache:
                cache[key] = factor_profile(sj)(pts[..., j])
            term = term * cache[key]
        out = out + term
    return out if out.ndim else float(out)


def evaluate_tensor(f: BlockSum, axes) -> np.ndarray:
    """Values of ``f`` on the tensor grid ``axes[0] x ... x axes[d-1]``.

    Each term is an outer product of one-dimensional factors, so the cost is
    one pass over the grid per term.
    """
    if len(axes) != f.d:
        raise ValidationError(f"expected {f.d} axes, got {len(axes)}")
    axes = [np.asarray(a, dtype=float) for a in axes]
    out = np.zeros(tuple(len(a) for a in axes))
    cache = {}
    for s, c in f.terms:
        term = None
        for j, sj in enumerate(s):
            if (j, sj) not in cache:
                cache[(j, sj)] = factor_profile(sj)(axes[j])
            term = c * cache[(j, sj)] if term is None else np.multiply.outer(term, cache[(j, sj)])
        out += term
    return out


def project_cross(f: BlockSum, spec: CrossSpec) -> BlockSum:
    """Keep exactly the terms whose index lies in the cross ``(s, gamma) <= n``."""
    if spec.d != f.d:
        raise ValidationError(f"cross dimension {spec.d} does not match block sum dimension {f.d}")
    return BlockSum(f.d, tuple((s, c) for s, c in f.terms if spec.contains(s)))


def _dot(s, r) -> float:
    return math.fsum(si * ri for si, ri in zip(s, r))


def surrogate_besov_norm(f: BlockSum, profile: SmoothnessProfile, theta: float, p: float) -> float:
    """Decomposition norm with ``||A*_s(f)||_p`` replaced by ``|c_s| ||A*_s||_p``.

    ``(sum_s (2**(s, r) |c_s| ||A*_s||_p)**theta)**(1/theta)``, or the
    supremum over ``s`` when ``theta = inf``.
    """
    from hypcross.norms import block_norm

    theta = float(theta)
    p = float(p)
    if not theta >= 1:
        raise ValidationError(f"theta = {theta} must be in [1, inf]")
    if not p >= 1:
        raise ValidationError(f"p = {p} must be in [1, inf]")
    if profile.d != f.d:
        raise ValidationError(f"profile dimension {profile.d} does not match block sum dimension {f.d}")
    if not f.terms:
        return 0.0
    vals = np.array([2.0 ** _dot(s, profile.r) * abs(c) * block_norm(s, p) for s, c in f.terms])
    if math.isinf(theta):
        return float(vals.max())
    # scale out the largest entry before raising to theta
    top = vals.max()
    return float(top * math.fsum((vals / top) ** theta) ** (1.0 / theta))


def load_blocksum(path) -> BlockSum:
    with open(path, encoding="utf-8") as fh:
        return BlockSum.from_json(fh.read())


def dump_blocksum(f: BlockSum, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f.to_json())
        fh.write("\n")
