"""Ground sets, submodular oracles, and base-polytope primitives.

Subsets are represented internally as bitmasks over the lexicographically
sorted ground set, so exhaustive checks stay cheap at desk scale.  All
float comparisons go through a single tolerance ``TOL``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .errors import GroundTooLarge, NotInPolytope

TOL = 1e-9

# Size guards for exhaustive subset enumeration.
AXIOM_CHECK_MAX = 16
ENUMERATION_MAX = 20


class GroundSet:
    """Ordered set of resource identifiers; iteration is lexicographic."""

    __slots__ = ("elements", "index")

    def __init__(self, elements: Iterable[str]):
        elems = list(elements)
        if not elems:
            raise ValueError("ground set must be nonempty")
        if len(set(elems)) != len(elems):
            raise ValueError("ground set identifiers must be unique")
        self.elements: tuple[str, ...] = tuple(sorted(elems))
        self.index: dict[str, int] = {e: i for i, e in enumerate(self.elements)}

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, element: str) -> bool:
        return element in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"GroundSet({list(self.elements)!r})"

    def mask_of(self, subset: Iterable[str]) -> int:
        mask = 0
        for e in subset:
            try:
                mask |= 1 << self.index[e]
            except KeyError:
                raise ValueError(f"unknown element {e!r}") from None
        return mask

    def subset_of(self, mask: int) -> tuple[str, ...]:
        return tuple(e for i, e in enumerate(self.elements) if mask >> i & 1)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.elements)) - 1


class SubmodularOracle:
    """Evaluation oracle for a normalized monotone submodular function.

    Evaluations are memoized by subset bitmask.  Under CPython the memo dict
    is safe to share across threads (worst case a value is computed twice).
    """

    __slots__ = ("ground", "_mask_fn", "_memo")

    def __init__(self, ground: GroundSet, fn: Callable[[frozenset], float] | None = None,
                 *, mask_fn: Callable[[int], float] | None = None):
        if (fn is None) == (mask_fn is None):
            raise ValueError("provide exactly one of fn / mask_fn")
        self.ground = ground
        if mask_fn is not None:
            self._mask_fn = mask_fn
        else:
            self._mask_fn = lambda mask: float(fn(frozenset(ground.subset_of(mask))))
        self._memo: dict[int, float] = {}

    def eval_mask(self, mask: int) -> float:
        memo = self._memo
        val = memo.get(mask)
        if val is None:
            val = float(self._mask_fn(mask))
            memo[mask] = val
        return val

    def eval(self, subset: Iterable[str]) -> float:
        return self.eval_mask(self.ground.mask_of(subset))

    @property
    def total(self) -> float:
        """Value on the full ground set."""
        return self.eval_mask(self.ground.full_mask)

    def table(self) -> list[float]:
        """All 2^m values, indexed by mask."""
        if self.ground.size > ENUMERATION_MAX:
            raise GroundTooLarge(f"full value table needs m <= {ENUMERATION_MAX}")
        return [self.eval_mask(mask) for mask in range(1 << self.ground.size)]


class LoadVector:
    """Nonnegative point x over a ground set, a candidate base-polytope member."""

    __slots__ = ("ground", "values", "_sums")

    def __init__(self, ground: GroundSet, values: Sequence[float]):
        if len(values) != ground.size:
            raise ValueError("values must align with the ground set")
        vals = []
        for v in values:
            v = float(v)
            if v < 0.0:
                if v < -1e-12:
                    raise ValueError(f"negative load {v}")
                v = 0.0
            vals.append(v)
        self.ground = ground
        self.values: tuple[float, ...] = tuple(vals)
        self._sums: list[float] | None = None

    @classmethod
    def from_dict(cls, ground: GroundSet, mapping: Mapping[str, float]) -> "LoadVector":
        unknown = set(mapping) - set(ground.elements)
        if unknown:
            raise ValueError(f"unknown elements {sorted(unknown)}")
        return cls(ground, [float(mapping.get(e, 0.0)) for e in ground.elements])

    @classmethod
    def zeros(cls, ground: GroundSet) -> "LoadVector":
        return cls(ground, [0.0] * ground.size)

    @classmethod
    def unit(cls, ground: GroundSet, element: str, amount: float = 1.0) -> "LoadVector":
        vals = [0.0] * ground.size
        vals[ground.index[element]] = amount
        return cls(ground, vals)

    def __getitem__(self, element: str) -> float:
        return self.values[self.ground.index[element]]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.ground.elements, self.values))

    def total(self) -> float:
        return sum(self.values)

    def sum_over(self, subset: Iterable[str]) -> float:
        return sum(self[e] for e in subset)

    def subset_sums(self) -> list[float]:
        """x(U) for every mask, via the standard lowest-bit recursion."""
        if self._sums is None:
            m = self.ground.size
            vals = self.values
            sums = [0.0] * (1 << m)
            for mask in range(1, 1 << m):
                low = mask & -mask
                sums[mask] = sums[mask ^ low] + vals[low.bit_length() - 1]
            self._sums = sums
        return self._sums

    def shifted(self, source: str, target: str, alpha: float) -> "LoadVector":
        """x + alpha * (chi_target - chi_source)."""
        vals = list(self.values)
        vals[self.ground.index[source]] -= alpha
        vals[self.ground.index[target]] += alpha
        return LoadVector(self.ground, vals)

    def __repr__(self) -> str:
        body = ", ".join(f"{e}={v:g}" for e, v in zip(self.ground.elements, self.values))
        return f"LoadVector({body})"


@dataclass(frozen=True)
class AxiomViolation:
    kind: str  # "normalized" | "monotone" | "submodular"
    first: tuple[str, ...]
    second: tuple[str, ...]


@dataclass(frozen=True)
class PolymatroidCertificate:
    ok: bool
    violation: AxiomViolation | None = None


def certify_polymatroid(oracle: SubmodularOracle) -> PolymatroidCertificate:
    """Exhaustively check normalization, monotonicity and submodularity.

    Uses the local characterizations (covers for monotonicity, the pair
    condition f(U+i) + f(U+j) >= f(U+i+j) + f(U) for submodularity), which
    are equivalent to the subset-pair definitions on a finite ground set;
    any reported violation is a genuine violating subset pair.
    """
    ground = oracle.ground
    m = ground.size
    if m > AXIOM_CHECK_MAX:
        raise GroundTooLarge(f"axiom certification needs m <= {AXIOM_CHECK_MAX}")
    if abs(oracle.eval_mask(0)) > TOL:
        return PolymatroidCertificate(False, AxiomViolation("normalized", (), ()))
    ev = oracle.eval_mask
    for mask in range(1 << m):
        base = ev(mask)
        out = [i for i in range(m) if not mask >> i & 1]
        for i in out:
            if ev(mask | 1 << i) < base - TOL:
                return PolymatroidCertificate(False, AxiomViolation(
                    "monotone", ground.subset_of(mask), ground.subset_of(mask | 1 << i)))
        for a in range(len(out)):
            i = out[a]
            with_i = ev(mask | 1 << i)
            for b in range(a + 1, len(out)):
                j = out[b]
                if with_i + ev(mask | 1 << j) < ev(mask | 1 << i | 1 << j) + base - TOL:
                    return PolymatroidCertificate(False, AxiomViolation(
                        "submodular", ground.subset_of(mask | 1 << i),
                        ground.subset_of(mask | 1 << j)))
    return PolymatroidCertificate(True)


def in_base_polytope(oracle: SubmodularOracle, x: LoadVector, tol: float = TOL) -> bool:
    """True iff x(U) <= rho(U) + tol for all U and |x(E) - rho(E)| <= tol."""
    if x.ground != oracle.ground:
        raise ValueError("load vector and oracle use different ground sets")
    m = oracle.ground.size
    if m > ENUMERATION_MAX:
        raise GroundTooLarge(f"membership enumeration needs m <= {ENUMERATION_MAX}")
    table = oracle.table()
    sums = x.subset_sums()
    full = oracle.ground.full_mask
    if abs(sums[full] - table[full]) > tol:
        return False
    return all(sums[mask] <= table[mask] + tol for mask in range(1, full))


def greedy_vertex(oracle: SubmodularOracle, order: Sequence[str]) -> LoadVector:
    """Vertex of the base polytope: marginal gains along the given order."""
    ground = oracle.ground
    if sorted(order) != list(ground.elements):
        raise ValueError("order must be a permutation of the ground set")
    vals = [0.0] * ground.size
    mask = 0
    prev = oracle.eval_mask(0)
    for e in order:
        mask |= 1 << ground.index[e]
        cur = oracle.eval_mask(mask)
        vals[ground.index[e]] = cur - prev
        prev = cur
    return LoadVector(ground, vals)


def minimize_linear(oracle: SubmodularOracle, weights: Mapping[str, float]) -> LoadVector:
    """Minimize <weights, x> over the base polytope.

    Greedy in ascending weight order, ties broken lexicographically, so
    outputs are deterministic.
    """
    order = sorted(oracle.ground.elements, key=lambda e: (float(weights.get(e, 0.0)), e))
    return greedy_vertex(oracle, order)


def exchange_capacity(oracle: SubmodularOracle, x: LoadVector, e: str, e_prime: str,
                      *, tol: float = TOL, validate: bool = True) -> float:
    """Largest alpha with x + alpha*(chi_e' - chi_e) still in the base polytope.

    Equals min(x_e, min{rho(U) - x(U) : e' in U, e not in U}).
    """
    ground = oracle.ground
    if e == e_prime:
        raise ValueError("exchange endpoints must differ")
    if e not in ground or e_prime not in ground:
        raise ValueError("exchange endpoints must be ground elements")
    if ground.size > ENUMERATION_MAX:
        raise GroundTooLarge(f"capacity enumeration needs m <= {ENUMERATION_MAX}")
    if validate and not in_base_polytope(oracle, x, tol):
        raise NotInPolytope("exchange capacities are defined on base-polytope points")
    table = oracle.table()
    sums = x.subset_sums()
    bit_e = 1 << ground.index[e]
    bit_p = 1 << ground.index[e_prime]
    cap = x[e]
    for mask in range(1 << ground.size):
        if mask & bit_p and not mask & bit_e:
            slack = table[mask] - sums[mask]
            if slack < cap:
                cap = slack
    return max(cap, 0.0)


def capacity_table(oracle: SubmodularOracle, x: LoadVector) -> list[list[float]]:
    """All pairwise exchange capacities at x, as a matrix indexed by element order.

    One pass over the subset lattice; entry [i][j] is the capacity for moving
    load from element i to element j (diagonal entries are 0).
    """
    ground = oracle.ground
    m = ground.size
    if m > ENUMERATION_MAX:
        raise GroundTooLarge(f"capacity enumeration needs m <= {ENUMERATION_MAX}")
    table = oracle.table()
    sums = x.subset_sums()
    inf = float("inf")
    best = [[inf] * m for _ in range(m)]
    members = [[j for j in range(m) if mask >> j & 1] for mask in range(1 << m)]
    for mask in range(1, 1 << m):
        slack = table[mask] - sums[mask]
        inside = members[mask]
        for i in range(m):
            if not mask >> i & 1:
                row = best[i]
                for j in inside:
                    if slack < row[j]:
                        row[j] = slack
    vals = x.values
    return [[0.0 if i == j else max(0.0, min(vals[i], best[i][j]))
             for j in range(m)] for i in range(m)]


def scale_oracle(oracle: SubmodularOracle, d: float) -> SubmodularOracle:
    """Oracle evaluating d * rho; preserves all three axioms for d >= 0."""
    if d < 0:
        raise ValueError("scale factor must be nonnegative")
    return SubmodularOracle(oracle.ground, mask_fn=lambda mask: d * oracle.eval_mask(mask))


def oracle_from_table(ground: GroundSet, values: Mapping[frozenset | tuple, float]) -> SubmodularOracle:
    """Oracle backed by an explicit subset-value table (must be complete)."""
    by_mask = {}
    for subset, val in values.items():
        by_mask[ground.mask_of(subset)] = float(val)
    by_mask.setdefault(0, 0.0)
    missing = (1 << ground.size) - len(by_mask)
    if missing:
        raise ValueError(f"value table incomplete: {missing} subsets missing")
    return SubmodularOracle(ground, mask_fn=by_mask.__getitem__)
