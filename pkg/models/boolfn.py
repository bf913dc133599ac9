"""
Exact analysis of functions on [k]^R.

Tables are stored densely in little-endian order (coordinate 0 is the least
significant base-k digit). Every quantity is an exact Fraction; numpy object
arrays reshaped in Fortran order give `array[x_0, ..., x_{R-1}]`, so
conditional expectations become axis averages.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import BudgetExceeded, IndexOutOfRange, NonBooleanFunction, ParamError

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]

# table entries above this are refused outright
MAX_TABLE_ENTRIES = 2**20
SAMPLE_CHUNKS = 8


@dataclass(frozen=True)
class TableFunction:
    """
    Dense table of f: [k]^R -> Q.

    :param k: Alphabet size, at least 2
    :param R: Number of coordinates, at least 1
    :param values: k**R exact rationals, little-endian point order
    """

    k: int
    R: int
    values: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if self.k < 2 or self.R < 1:
            raise ParamError(f"Need k >= 2 and R >= 1, got k={self.k}, R={self.R}")
        if self.k**self.R > MAX_TABLE_ENTRIES:
            raise BudgetExceeded(f"k^R = {self.k}^{self.R} exceeds {MAX_TABLE_ENTRIES} table entries")
        values = tuple(Fraction(v) for v in self.values)
        if len(values) != self.k**self.R:
            raise ParamError(f"Expected {self.k**self.R} values, got {len(values)}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, k: int, R: int, fn: Callable[[Point], object]) -> "TableFunction":
        return cls(k=k, R=R, values=tuple(Fraction(fn(x)) for x in points(k, R)))

    @property
    def size(self) -> int:
        return len(self.values)

    @cached_property
    def array(self) -> np.ndarray:
        """Object array indexed as array[x_0, ..., x_{R-1}]."""
        flat = np.empty(self.size, dtype=object)
        flat[:] = self.values
        return flat.reshape((self.k,) * self.R, order="F")

    def __call__(self, x: Sequence[int]) -> Fraction:
        return self.values[point_index(x, self.k)]

    @property
    def is_boolean(self) -> bool:
        return all(v in (0, 1) for v in self.values)

    def mean(self) -> Fraction:
        return Fraction(sum(self.values), self.size)

    def summary(self) -> str:
        return f"TableFunction(k={self.k}, R={self.R})"


def points(k: int, R: int) -> Iterator[Point]:
    """All points of [k]^R in table (little-endian) order."""
    for big_endian in itertools.product(range(k), repeat=R):
        yield big_endian[::-1]


def point_index(x: Sequence[int], k: int) -> int:
    return sum(d * k**j for j, d in enumerate(x))


def _check_coordinate(i: int, R: int) -> None:
    if not 0 <= i < R:
        raise IndexOutOfRange(f"Coordinate {i} outside [0, {R})")


def make_dictator(k: int, R: int, s: int) -> TableFunction:
    """f(x) = x_s, with values in [k]."""
    _check_coordinate(s, R)
    return TableFunction.from_callable(k, R, lambda x: x[s])


def make_majority(R: int) -> TableFunction:
    """Boolean majority on {0,1}^R; R must be odd."""
    if R % 2 == 0:
        raise ParamError(f"Majority needs an odd number of coordinates, got R={R}")
    return TableFunction.from_callable(2, R, lambda x: int(2 * sum(x) > R))


def make_parity(R: int) -> TableFunction:
    return TableFunction.from_callable(2, R, lambda x: sum(x) % 2)


def make_random_boolean(k: int, R: int, seed: int) -> TableFunction:
    rng = np.random.default_rng(seed)
    return TableFunction(k=k, R=R, values=tuple(int(v) for v in rng.integers(0, 2, size=k**R)))


def booleanize(f: TableFunction) -> TableFunction:
    """Indicator of f != 0."""
    return TableFunction(k=f.k, R=f.R, values=tuple(int(v != 0) for v in f.values))


def complement(f: TableFunction) -> TableFunction:
    """1 - f."""
    return TableFunction(k=f.k, R=f.R, values=tuple(1 - v for v in f.values))


def compose_permutation(f: TableFunction, perm: Sequence[int]) -> TableFunction:
    """(f o pi)(x) = f(x_{pi(0)}, ..., x_{pi(R-1)})."""
    perm = tuple(perm)
    if sorted(perm) != list(range(f.R)):
        raise ParamError(f"{perm} is not a permutation of [{f.R}]")
    return TableFunction.from_callable(f.k, f.R, lambda x: f(tuple(x[p] for p in perm)))


@dataclass(frozen=True)
class Subcube:
    """
    C_{x,S}: points agreeing with `base` outside the index sequence `seq`.

    With `shifted` the cube is translated by +1 (mod k) in every coordinate.
    """

    base: Point
    seq: Tuple[int, ...]
    k: int
    shifted: bool = False

    def __post_init__(self) -> None:
        if not self.seq:
            raise ParamError("A subcube needs a non-empty index sequence")
        for i in self.seq:
            _check_coordinate(i, len(self.base))

    @property
    def free(self) -> Tuple[int, ...]:
        return tuple(sorted(set(self.seq)))

    def __contains__(self, z: Sequence[int]) -> bool:
        if self.shifted:
            z = tuple((d - 1) % self.k for d in z)
        return all(z[j] == self.base[j] for j in range(len(self.base)) if j not in self.seq)


def subcube_points(c: Subcube) -> FrozenSet[Point]:
    """All points of the (possibly shifted) subcube, k^{#distinct(seq)} of them."""
    free = c.free
    result = set()
    for values in itertools.product(range(c.k), repeat=len(free)):
        z = list(c.base)
        for j, d in zip(free, values):
            z[j] = d
        if c.shifted:
            z = [(d + 1) % c.k for d in z]
        result.add(tuple(z))
    return frozenset(result)


def permuted_subcube_points(
    x: Sequence[int], seq: Sequence[int], perm: Sequence[int], k: int, shifted: bool = False
) -> FrozenSet[Point]:
    """
    C_{x,S,pi} = {z : z_j = x_{pi(j)} for every j with pi(j) not in S},
    the image of C_{x,S} under pi; shifted adds 1 (mod k) everywhere.
    """
    R = len(x)
    in_seq = set(seq)
    free = [j for j in range(R) if perm[j] in in_seq]
    result = set()
    for values in itertools.product(range(k), repeat=len(free)):
        z = [x[perm[j]] for j in range(R)]
        for j, d in zip(free, values):
            z[j] = d
        if shifted:
            z = [(d + 1) % k for d in z]
        result.add(tuple(z))
    return frozenset(result)


def influence(f: TableFunction, i: int) -> Fraction:
    """
    Infl_i(f) = E_x[Var(f | x_{-i})] under the uniform measure.
    """
    _check_coordinate(i, f.R)
    arr = f.array
    along = arr.sum(axis=i, keepdims=True) / f.k
    deviation = arr - along
    return Fraction((deviation * deviation).sum()) / f.size


@lru_cache(maxsize=256)
def _conditional_expectations(f: TableFunction) -> Dict[FrozenSet[int], np.ndarray]:
    """E[f | x_T] for every T subset of [R], as keepdims arrays."""
    arr = f.array
    result = {}
    for size in range(f.R + 1):
        for kept in itertools.combinations(range(f.R), size):
            averaged = tuple(j for j in range(f.R) if j not in kept)
            if averaged:
                cond = arr.sum(axis=averaged, keepdims=True) / (f.k ** len(averaged))
            else:
                cond = arr
            result[frozenset(kept)] = cond
    return result


@lru_cache(maxsize=256)
def efron_stein_weights(f: TableFunction) -> Dict[FrozenSet[int], Fraction]:
    """
    Squared norms of the orthogonal components f^{=S}.

    f^{=S} = sum over T subset of S of (-1)^{|S|-|T|} E[f | x_T]; the
    weights sum to E[f^2], with S = {} carrying E[f]^2.
    """
    cond = _conditional_expectations(f)
    weights = {}
    for S in cond:
        component = None
        for size in range(len(S) + 1):
            sign = -1 if (len(S) - size) % 2 else 1
            for T in itertools.combinations(sorted(S), size):
                term = cond[frozenset(T)] * sign
                component = term if component is None else component + term
        squared = component * component
        weights[S] = Fraction(squared.sum()) / squared.size
    return weights


def degree_influence(f: TableFunction, i: int, d: int) -> Fraction:
    """
    Infl_i^d(f): total weight of the components f^{=S} with i in S, |S| <= d.
    """
    _check_coordinate(i, f.R)
    if not 1 <= d <= f.R:
        raise IndexOutOfRange(f"Degree {d} outside [1, {f.R}]")
    return sum(
        (w for S, w in efron_stein_weights(f).items() if i in S and len(S) <= d),
        Fraction(0),
    )


def fourier_coefficients(f: TableFunction) -> Dict[FrozenSet[int], Fraction]:
    """
    Coefficients of f in the +-1 character basis of {0,1}^R.

    f^(S) = E_x[f(x) * prod_{j in S} (-1)^{x_j}].
    """
    if f.k != 2:
        raise ParamError(f"The +-1 character basis needs k = 2, got k={f.k}")
    coefficients = {}
    for size in range(f.R + 1):
        for S in itertools.combinations(range(f.R), size):
            total = Fraction(0)
            for x, value in zip(points(2, f.R), f.values):
                sign = -1 if sum(x[j] for j in S) % 2 else 1
                total += sign * value
            coefficients[frozenset(S)] = total / f.size
    return coefficients


def _sequence_multiplicities(R: int, s_len: int) -> Dict[FrozenSet[int], int]:
    """How many sequences in [R]^s_len use each set of distinct indices."""
    counts: Dict[FrozenSet[int], int] = {}
    for seq in itertools.product(range(R), repeat=s_len):
        key = frozenset(seq)
        counts[key] = counts.get(key, 0) + 1
    return counts


def _require_boolean(f: TableFunction) -> None:
    if not f.is_boolean:
        raise NonBooleanFunction("Subcube statistics need a 0/1-valued function")


def _constant_count(f: TableFunction, free: FrozenSet[int], target: int) -> int:
    """Number of x whose cube C_{x,free} is constant `target` under f."""
    hits = f.array == target
    if free:
        hits = np.logical_and.reduce(hits, axis=tuple(sorted(free)), keepdims=True)
    return int(np.count_nonzero(hits)) * f.k ** len(free)


def _explicit_constant(f: TableFunction, cube: Subcube, target: int) -> bool:
    return all(f(z) == target for z in subcube_points(cube))


def subcube_constancy_probability(
    f: TableFunction, s_len: int, target: int, shifted: bool = False
) -> Fraction:
    """
    Exact Pr_{x,S}[f is identically `target` on C_{x,S}] (or on C+ when shifted).

    x is uniform on [k]^R and S uniform on [R]^s_len. The unshifted case is
    vectorised per distinct index set; the shifted case walks every cube.
    """
    _require_boolean(f)
    if s_len < 1:
        raise ParamError(f"s_len must be at least 1, got {s_len}")
    multiplicities = _sequence_multiplicities(f.R, s_len)
    total = f.size * f.R**s_len
    hits = 0
    for free, count in multiplicities.items():
        if shifted:
            seq = tuple(sorted(free))
            constant = sum(
                _explicit_constant(f, Subcube(x, seq, f.k, shifted=True), target)
                for x in points(f.k, f.R)
            )
        else:
            constant = _constant_count(f, free, target)
        hits += count * constant
    return Fraction(hits, total)


def _sample_chunk(f: TableFunction, s_len: int, target: int, trials: int, seed_seq) -> int:
    rng = np.random.default_rng(seed_seq)
    xs = rng.integers(0, f.k, size=(trials, f.R))
    seqs = rng.integers(0, f.R, size=(trials, s_len))
    hits = 0
    for x, seq in zip(xs, seqs):
        cube = Subcube(tuple(int(d) for d in x), tuple(int(i) for i in seq), f.k)
        hits += _explicit_constant(f, cube, target)
    return hits


def subcube_zero_probability(
    f: TableFunction,
    s_len: int,
    target: int = 0,
    mode: str = "exact",
    seed: Optional[int] = None,
    trials: int = 0,
    workers: int = 1,
) -> Fraction:
    """
    Pr_{x,S}[f(C_{x,S}) identically `target`], exactly or by sampling.

    Sampled mode splits `trials` over a fixed number of chunks, each drawing
    from its own stream spawned off `seed`, so the estimate does not depend
    on `workers`.

    :raises NonBooleanFunction: If f takes a value outside {0, 1}
    """
    if mode == "exact":
        return subcube_constancy_probability(f, s_len, target)
    if mode != "sampled":
        raise ParamError(f"Unknown mode {mode!r}")
    _require_boolean(f)
    if seed is None or trials < 1:
        raise ParamError("Sampled mode needs a seed and a positive trial count")
    children = np.random.SeedSequence(seed).spawn(SAMPLE_CHUNKS)
    sizes = [trials // SAMPLE_CHUNKS + (1 if c < trials % SAMPLE_CHUNKS else 0) for c in range(SAMPLE_CHUNKS)]
    hits = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [
            executor.submit(_sample_chunk, f, s_len, target, size, child)
            for size, child in zip(sizes, children)
            if size
        ]
        for future in as_completed(futures):
            hits += future.result()
    return Fraction(hits, trials)


def joint_subcube_zero_probability(
    fs: Sequence[TableFunction],
    s_len: int,
    perms: Optional[Sequence[Sequence[int]]] = None,
) -> Fraction:
    """
    Exact Pr_{x,S}[every f_j o pi_j is identically 0 on C_{x,S}].

    All functions share k and R; perms defaults to identities.
    """
    if not fs:
        raise ParamError("Need at least one function")
    k, R = fs[0].k, fs[0].R
    for f in fs:
        _require_boolean(f)
        if (f.k, f.R) != (k, R):
            raise ParamError("All functions must share k and R")
    if perms is None:
        composed = list(fs)
    else:
        if len(perms) != len(fs):
            raise ParamError(f"{len(perms)} permutations for {len(fs)} functions")
        composed = [compose_permutation(f, p) for f, p in zip(fs, perms)]
    zero_sets = np.logical_and.reduce([f.array == 0 for f in composed])
    as_function = TableFunction(
        k=k, R=R, values=tuple(int(v) for v in np.ravel(np.logical_not(zero_sets), order="F"))
    )
    return subcube_constancy_probability(as_function, s_len, 0)


def dictator_zero_probability(k: int, R: int, s_len: int) -> Fraction:
    """Closed form ((R-1)/R)^s_len / k for the indicator of x_s != 0."""
    return Fraction(R - 1, R) ** s_len / k


def random_boolean_functions(k: int, R: int, count: int, seed: int) -> List[TableFunction]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [
        TableFunction(
            k=k, R=R, values=tuple(int(v) for v in np.random.default_rng(c).integers(0, 2, size=k**R))
        )
        for c in children
    ]


def influence_table(f: TableFunction, d: Optional[int] = None) -> Dict[int, Fraction]:
    d = f.R if d is None else d
    return {i: degree_influence(f, i, d) for i in range(f.R)}


def top_coordinate(table: Dict[int, Fraction]) -> Tuple[int, Fraction]:
    """Largest entry, smallest coordinate on ties."""
    best = max(table.values())
    i = min(i for i, value in table.items() if value == best)
    return i, best
