"""Coefficient families c_alpha and the bilinear vanishing constraint.

A family of operators T_alpha(f) = c_alpha * f * ln|f| (with T_0 = id)
satisfies the binomial moment identity exactly when, for every alpha with
2 <= |alpha| <= N and every point x,

    sum_{0 < beta < alpha} C(alpha, beta) c_beta(x) c_{alpha-beta}(x) = 0,

the sum running over strictly interior beta.  Height-1 alphas impose
nothing: their interior range is empty.  This module checks the
constraint on sample points, derives which coefficients it forces to
vanish identically, enumerates support patterns that satisfy it for free
or via an explicit cancellation certificate, and draws random families
on valid supports.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .multiindex import (
    MultiIndex,
    as_multiindex,
    binom,
    enumerate_height_at_most,
    enumerate_strictly_between,
)
from .polycalc import Polynomial, RationalPoint, Scalar
from .funcmodel import CheckReport, FuncExpr, PolyLeaf, eval_expr
from . import polycalc


class ConstraintViolation(ValueError):
    """A coefficient family failed the bilinear vanishing constraint."""

    def __init__(self, report: CheckReport):
        self.report = report
        worst = report.failures[0] if report.failures else {}
        super().__init__(
            f"constraint violated at alpha={worst.get('alpha')} "
            f"x={worst.get('point')} sum={worst.get('value')}"
        )


class InvalidSupport(ValueError):
    """Support pattern admits decompositions and carries no certificate."""


class BudgetExceeded(RuntimeError):
    """The index set is larger than the enumeration budget."""


IndexLike = Union[MultiIndex, Tuple[int, ...]]


@dataclass
class CoeffFamily:
    """Coefficients c_alpha for 0 < |alpha| <= order; missing indices are zero."""

    rank: int
    order: int
    coefficients: Dict[MultiIndex, FuncExpr]

    def __post_init__(self) -> None:
        coeffs: Dict[MultiIndex, FuncExpr] = {}
        for idx, expr in self.coefficients.items():
            idx = as_multiindex(idx)
            if idx.rank != self.rank:
                raise ValueError(
                    f"coefficient index {idx.entries} has rank {idx.rank}, "
                    f"expected {self.rank}"
                )
            if not 1 <= idx.height <= self.order:
                raise ValueError(
                    f"coefficient index {idx.entries} outside 0 < |alpha| <= {self.order}"
                )
            if expr.dim != self.rank:
                raise ValueError(
                    f"coefficient at {idx.entries} has dim {expr.dim}, expected {self.rank}"
                )
            coeffs[idx] = expr
        self.coefficients = coeffs

    def coefficient(self, alpha: MultiIndex) -> Optional[FuncExpr]:
        return self.coefficients.get(alpha)

    def value(self, alpha: MultiIndex, x: RationalPoint) -> float:
        expr = self.coefficients.get(alpha)
        return 0.0 if expr is None else eval_expr(expr, x)

    def support(self) -> "SupportPattern":
        return SupportPattern(
            self.rank, self.order, frozenset(self.coefficients.keys())
        )

    @classmethod
    def from_constants(
        cls, rank: int, order: int, values: Mapping[IndexLike, Scalar]
    ) -> "CoeffFamily":
        return cls(
            rank,
            order,
            {
                as_multiindex(idx): PolyLeaf(Polynomial.constant(rank, v))
                for idx, v in values.items()
            },
        )

    @classmethod
    def from_polynomials(
        cls, rank: int, order: int, polys: Mapping[IndexLike, Polynomial]
    ) -> "CoeffFamily":
        return cls(
            rank, order, {as_multiindex(idx): PolyLeaf(p) for idx, p in polys.items()}
        )

    def to_json(self) -> dict:
        items = sorted(self.coefficients.items(), key=lambda kv: kv[0].entries)
        return {
            "rank": self.rank,
            "order": self.order,
            "coefficients": [
                {"index": idx.to_json(), "expr": expr.to_json()} for idx, expr in items
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CoeffFamily":
        from .funcmodel import expr_from_json

        return cls(
            data["rank"],
            data["order"],
            {
                MultiIndex.from_json(item["index"]): expr_from_json(item["expr"])
                for item in data["coefficients"]
            },
        )


def constraint_indices(rank: int, order: int) -> List[MultiIndex]:
    """The alphas actually constrained: 2 <= |alpha| <= order."""
    return [a for a in enumerate_height_at_most(rank, order) if a.height >= 2]


def check_constraint(
    cf: CoeffFamily,
    points: Sequence[RationalPoint],
    tol: float = 1e-9,
) -> CheckReport:
    """Evaluate every constrained bilinear sum at every point.

    Binomial weights are exact integers; only the coefficient values and
    final products are floating point.  |sum| <= tol is required.
    """
    failures: List[dict] = []
    max_abs = 0.0
    checked = 0
    for alpha in constraint_indices(cf.rank, cf.order):
        pairs = [
            (binom(alpha, beta), cf.coefficients[beta], cf.coefficients[alpha - beta])
            for beta in enumerate_strictly_between(alpha)
            if beta in cf.coefficients and (alpha - beta) in cf.coefficients
        ]
        for x in points:
            value = sum(w * eval_expr(cb, x) * eval_expr(cg, x) for w, cb, cg in pairs)
            checked += 1
            max_abs = max(max_abs, abs(value))
            if abs(value) > tol:
                failures.append(
                    {
                        "alpha": alpha.to_json(),
                        "point": x.to_json(),
                        "value": value,
                    }
                )
    return CheckReport(
        check="coefficient_constraint",
        passed=not failures,
        max_residual=max_abs,
        tolerance=tol,
        failures=failures,
        counts={"alphas": len(constraint_indices(cf.rank, cf.order)), "evaluations": checked},
    )


@dataclass(frozen=True)
class SupportPattern:
    """Which c_alpha are allowed to be nonzero, plus an optional certificate.

    A certificate assigns nonzero constants to the support making every
    constrained sum vanish; structure-valid patterns need none because
    all their sums are empty.
    """

    rank: int
    order: int
    support: FrozenSet[MultiIndex]
    certificate: Optional[Mapping[MultiIndex, Fraction]] = None

    def __post_init__(self) -> None:
        support = frozenset(as_multiindex(a) for a in self.support)
        object.__setattr__(self, "support", support)
        for a in support:
            if a.rank != self.rank or not 1 <= a.height <= self.order:
                raise ValueError(
                    f"support index {a.entries} outside 0 < |alpha| <= {self.order}"
                )
        if self.certificate is not None:
            cert = {as_multiindex(a): Fraction(v) for a, v in self.certificate.items()}
            if set(cert) != support:
                raise ValueError("certificate must assign exactly the support")
            if any(v == 0 for v in cert.values()):
                raise ValueError("certificate values must be nonzero")
            object.__setattr__(self, "certificate", cert)

    def sorted_support(self) -> List[MultiIndex]:
        return sorted(self.support, key=lambda a: (a.height, a.entries))

    def to_json(self) -> dict:
        cert = None
        if self.certificate is not None:
            cert = [
                {"index": a.to_json(), "value": str(self.certificate[a])}
                for a in self.sorted_support()
            ]
        return {
            "rank": self.rank,
            "order": self.order,
            "support": [a.to_json() for a in self.sorted_support()],
            "certificate": cert,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SupportPattern":
        cert = None
        if data.get("certificate") is not None:
            cert = {
                MultiIndex.from_json(item["index"]): Fraction(item["value"])
                for item in data["certificate"]
            }
        return cls(
            data["rank"],
            data["order"],
            frozenset(MultiIndex.from_json(a) for a in data["support"]),
            cert,
        )


def decomposition_pairs(
    alpha: MultiIndex, support: Iterable[MultiIndex]
) -> List[Tuple[MultiIndex, MultiIndex]]:
    """Ordered interior splittings alpha = beta + gamma with both parts in support."""
    sup = set(support)
    return [
        (beta, alpha - beta)
        for beta in enumerate_strictly_between(alpha)
        if beta in sup and (alpha - beta) in sup
    ]


def is_structure_valid(pattern: SupportPattern) -> bool:
    """No constrained alpha decomposes inside the support, so every sum is empty.

    Equivalent test: |beta + gamma| > order for all beta, gamma in the
    support, repetition allowed.
    """
    elems = list(pattern.support)
    for i, beta in enumerate(elems):
        for gamma in elems[i:]:
            if (beta + gamma).height <= pattern.order:
                return False
    return True


def forced_zero_analysis(pattern: SupportPattern) -> FrozenSet[MultiIndex]:
    """Support indices the constraint forces to vanish identically.

    If 2*gamma is reachable (|2*gamma| <= order) and gamma + gamma is its
    only decomposition inside the support, the alpha = 2*gamma sum
    reduces to C(2g, g) * c_gamma^2, so c_gamma must vanish.  Removing
    gamma can turn other squares into sole decompositions, hence the
    fixpoint iteration.
    """
    active = set(pattern.support)
    forced: set[MultiIndex] = set()
    while True:
        newly = []
        for gamma in sorted(active, key=lambda a: (a.height, a.entries)):
            double = gamma + gamma
            if double.height > pattern.order:
                continue
            decomp = {beta for beta, _ in decomposition_pairs(double, active)}
            if decomp == {gamma}:
                newly.append(gamma)
        if not newly:
            return frozenset(forced)
        forced.update(newly)
        active.difference_update(newly)


# Certificate search bound, not a theorem: constants are drawn from
# {-3..-1, 1..3} and at most _SEARCH_CAP assignments are tried per support.
_CERT_VALUES = tuple(Fraction(v) for v in (-3, -2, -1, 1, 2, 3))
_SEARCH_CAP = 50000


def find_constant_certificate(
    pattern: SupportPattern,
    values: Sequence[Fraction] = _CERT_VALUES,
    cap: int = _SEARCH_CAP,
) -> Optional[Dict[MultiIndex, Fraction]]:
    """Exhaustive exact search for nonzero constants cancelling every sum.

    Supports with a forced-zero index are skipped outright: their sole
    diagonal constraint C(2g,g) * c_g^2 = 0 has no nonzero solution.
    Returns None when no assignment within the bound works.
    """
    if forced_zero_analysis(pattern):
        return None
    elems = pattern.sorted_support()
    if len(values) ** len(elems) > cap:
        return None
    systems = []
    for alpha in constraint_indices(pattern.rank, pattern.order):
        pairs = decomposition_pairs(alpha, pattern.support)
        if pairs:
            systems.append([(binom(alpha, beta), beta, gamma) for beta, gamma in pairs])
    for assignment in itertools.product(values, repeat=len(elems)):
        cert = dict(zip(elems, assignment))
        if all(
            sum(w * cert[b] * cert[g] for w, b, g in system) == 0
            for system in systems
        ):
            return cert
    return None


def enumerate_valid_constant_supports(
    rank: int,
    order: int,
    max_support_size: Optional[int] = None,
    budget: int = 20,
) -> List[SupportPattern]:
    """Every support pattern usable with constant coefficients.

    Structure-valid patterns are returned as-is; patterns admitting
    decompositions are returned only with an explicit cancellation
    certificate.  Raises BudgetExceeded when the index set
    {alpha : 0 < |alpha| <= order} has more than budget elements.
    """
    index_set = [a for a in enumerate_height_at_most(rank, order) if a.height >= 1]
    if len(index_set) > budget:
        raise BudgetExceeded(
            f"index set has {len(index_set)} elements, budget is {budget}"
        )
    index_set.sort(key=lambda a: (a.height, a.entries))
    if max_support_size is None:
        max_support_size = len(index_set)
    out: List[SupportPattern] = []
    for size in range(0, min(max_support_size, len(index_set)) + 1):
        for combo in itertools.combinations(index_set, size):
            pattern = SupportPattern(rank, order, frozenset(combo))
            if is_structure_valid(pattern):
                out.append(pattern)
                continue
            cert = find_constant_certificate(pattern)
            if cert is not None:
                out.append(
                    SupportPattern(rank, order, frozenset(combo), cert)
                )
    return out


def random_valid_family(
    pattern: SupportPattern,
    seed: int,
    coeff_degree: int = 2,
) -> CoeffFamily:
    """Seeded random coefficient family guaranteed to satisfy the constraint.

    Structure-valid supports take independent random polynomials; a
    certificate support takes one shared random polynomial scaled by the
    certificate constants, so every bilinear sum inherits the exact
    cancellation.
    """
    rng = random.Random(f"coeff-family:{seed}")
    coeffs: Dict[MultiIndex, FuncExpr] = {}
    if pattern.certificate is not None:
        shared = polycalc.random_polynomial(
            rng, pattern.rank, max_degree=coeff_degree, terms=3, coeff_bound=4
        )
        for idx in pattern.sorted_support():
            coeffs[idx] = PolyLeaf(shared * pattern.certificate[idx])
    elif is_structure_valid(pattern):
        for idx in pattern.sorted_support():
            coeffs[idx] = PolyLeaf(
                polycalc.random_polynomial(
                    rng, pattern.rank, max_degree=coeff_degree, terms=3, coeff_bound=4
                )
            )
    else:
        raise InvalidSupport(
            f"support {[a.entries for a in pattern.sorted_support()]} admits "
            "decompositions and carries no certificate"
        )
    return CoeffFamily(pattern.rank, pattern.order, coeffs)
