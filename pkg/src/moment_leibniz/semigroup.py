"""Generalized moment sequences on commutative monoids.

A rank-r moment sequence assigns to each multi-index alpha with
|alpha| <= N a function f_alpha on the carrier, subject to

    f_alpha(x + y) = sum_{beta <= alpha} C(alpha, beta) f_beta(x) f_{alpha-beta}(y),

whose alpha = 0 instance says f_0 is multiplicative over the monoid
operation.  On (R, +) the sequences

    f_alpha(x) = exp(rate * x) * prod_i (scales[i] * x)^{alpha_i}

satisfy the identity by the per-coordinate binomial theorem; the rank-1
case is the classical power-times-exponential recurrence.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .multiindex import (
    MultiIndex,
    binom,
    enumerate_below,
    enumerate_height_at_most,
)
from .funcmodel import CheckReport


@dataclass(frozen=True)
class Monoid:
    """A commutative monoid carrier with a seeded element sampler."""

    name: str
    op: Callable[[Any, Any], Any]
    neutral: Any
    sampler: Callable[[random.Random], Any]


def reals_additive() -> Monoid:
    """(R, +, 0) with elements sampled uniformly from [-2, 2]."""
    return Monoid(
        name="reals_add",
        op=lambda a, b: a + b,
        neutral=0.0,
        sampler=lambda rng: rng.uniform(-2.0, 2.0),
    )


def intvec_additive(dim: int) -> Monoid:
    """(Z^dim, +, 0) with small random integer vectors."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return Monoid(
        name=f"intvec_add_{dim}",
        op=lambda a, b: tuple(x + y for x, y in zip(a, b)),
        neutral=(0,) * dim,
        sampler=lambda rng: tuple(rng.randint(-3, 3) for _ in range(dim)),
    )


def _close(a, b, tol: float) -> bool:
    if isinstance(a, tuple):
        return all(_close(x, y, tol) for x, y in zip(a, b))
    return abs(a - b) <= tol


def check_monoid_axioms(
    monoid: Monoid, probes: Sequence[Tuple[Any, Any, Any]], tol: float = 1e-12
) -> bool:
    """Associativity, commutativity and the neutral element on probe triples."""
    for x, y, z in probes:
        if not _close(monoid.op(monoid.op(x, y), z), monoid.op(x, monoid.op(y, z)), tol):
            return False
        if not _close(monoid.op(x, y), monoid.op(y, x), tol):
            return False
        if not _close(monoid.op(x, monoid.neutral), x, tol):
            return False
    return True


@dataclass
class MomentSeq:
    """A candidate moment sequence: one carrier function per multi-index."""

    rank: int
    order: int
    monoid: Monoid
    functions: Dict[MultiIndex, Callable[[Any], float]]
    params: Optional[dict] = None

    def value(self, alpha: MultiIndex, x: Any) -> float:
        return self.functions[alpha](x)

    def to_json(self) -> dict:
        if self.params is None:
            raise ValueError("only parametrized sequences serialize")
        return {
            "carrier": self.monoid.name,
            "rank": self.rank,
            "order": self.order,
            **self.params,
        }


def make_exponential_moment_seq(
    rank: int,
    order: int,
    rate: float,
    scales: Sequence[float],
) -> MomentSeq:
    """The exponential sequences on (R, +).

    f_alpha(x) = exp(rate*x) * prod_i (scales[i]*x)^{alpha_i}; f_0 is the
    exponential itself (never identically zero), and the identity holds
    because each coordinate contributes one scalar binomial expansion of
    (scales[i]*(x+y))^{alpha_i}.
    """
    if len(scales) != rank:
        raise ValueError(f"need {rank} scales, got {len(scales)}")
    scales = tuple(float(s) for s in scales)
    functions: Dict[MultiIndex, Callable[[float], float]] = {}

    def make(alpha: MultiIndex) -> Callable[[float], float]:
        def f(x: float) -> float:
            out = math.exp(rate * x)
            for s, e in zip(scales, alpha.entries):
                out *= (s * x) ** e
            return out

        return f

    for alpha in enumerate_height_at_most(rank, order):
        functions[alpha] = make(alpha)
    return MomentSeq(
        rank,
        order,
        reals_additive(),
        functions,
        params={"rate": rate, "scales": list(scales)},
    )


def seq_from_json(data: dict) -> MomentSeq:
    if data.get("carrier") != "reals_add":
        raise ValueError(f"unknown carrier {data.get('carrier')!r}")
    return make_exponential_moment_seq(
        data["rank"], data["order"], data["rate"], data["scales"]
    )


def convolution_terms(alpha: MultiIndex) -> List[Tuple[int, MultiIndex, MultiIndex]]:
    """The exact weighted splittings (C(alpha,beta), beta, alpha-beta) of the identity."""
    return [(binom(alpha, beta), beta, alpha - beta) for beta in enumerate_below(alpha)]


def verify_moment_seq(
    seq: MomentSeq,
    probes: Sequence[Tuple[Any, Any]],
    tol: float = 1e-10,
    seed: Optional[int] = None,
) -> CheckReport:
    """Check the convolution identity on probe pairs from the carrier.

    Residuals are |lhs - rhs| / (1 + |lhs|); the alpha = 0 row is plain
    multiplicativity of f_0.
    """
    failures: List[dict] = []
    max_residual = 0.0
    alphas = enumerate_height_at_most(seq.rank, seq.order)
    terms = {alpha: convolution_terms(alpha) for alpha in alphas}
    for k, (x, y) in enumerate(probes):
        xy = seq.monoid.op(x, y)
        for alpha in alphas:
            lhs = seq.value(alpha, xy)
            rhs = math.fsum(
                w * seq.value(beta, x) * seq.value(gamma, y)
                for w, beta, gamma in terms[alpha]
            )
            residual = abs(lhs - rhs) / (1.0 + abs(lhs))
            max_residual = max(max_residual, residual)
            if residual > tol:
                failures.append(
                    {
                        "alpha": alpha.to_json(),
                        "probe": k,
                        "x": x,
                        "y": y,
                        "lhs": lhs,
                        "rhs": rhs,
                        "residual": residual,
                    }
                )
    return CheckReport(
        check="moment_sequence",
        passed=not failures,
        max_residual=max_residual,
        tolerance=tol,
        failures=failures,
        counts={"probes": len(probes), "alphas": len(alphas)},
        seed=seed,
    )


def check_exponential(
    f0: Callable[[Any], float],
    monoid: Monoid,
    probes: Sequence[Tuple[Any, Any]],
    tol: float = 1e-10,
) -> bool:
    """Multiplicative over the monoid and not identically zero on probes."""
    seen_nonzero = False
    for x, y in probes:
        lhs = f0(monoid.op(x, y))
        rhs = f0(x) * f0(y)
        if abs(lhs - rhs) > tol * (1.0 + abs(lhs)):
            return False
        if lhs != 0.0 or f0(x) != 0.0:
            seen_nonzero = True
    return seen_nonzero


def tampered(seq: MomentSeq, alpha: MultiIndex, scale: float) -> MomentSeq:
    """Copy of the sequence with f_alpha multiplied by ``scale``."""
    if alpha not in seq.functions:
        raise ValueError(f"sequence has no index {alpha.entries}")
    functions = dict(seq.functions)
    original = functions[alpha]
    functions[alpha] = lambda x: scale * original(x)
    return MomentSeq(seq.rank, seq.order, seq.monoid, functions, params=None)


def random_probe_pairs(
    monoid: Monoid, count: int, rng: random.Random
) -> List[Tuple[Any, Any]]:
    return [(monoid.sampler(rng), monoid.sampler(rng)) for _ in range(count)]
