"""
Branching Brownian motion genealogies, sampled depth-first.

Particles diffuse with diffusivity sqrt(2) (generator = Laplacian), branch at
rate beta into k children with probability p_k, and the tree is folded from
the leaves up without ever being stored. Every node draws from its own random
stream keyed by (master seed, replicate, child-index path), so a replicate is
reproducible no matter which worker runs it.
"""

import functools
import hashlib
import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, List, Optional, Sequence, Tuple

import numpy as np

from bbm_voting import settings
from bbm_voting.errors import PopulationGuardError, ValidationError
from bbm_voting.models import OffspringDistribution

logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1
TREE_PHASE = 0
VOTE_PHASE = 1


@dataclass(frozen=True)
class GenealogyParams:
    """Branch rate, offspring law and dimension; the diffusivity is fixed."""

    rate: float
    offspring: OffspringDistribution
    dimension: int = 1
    population_cap: int = field(default_factory=settings.population_cap)

    DIFFUSIVITY: ClassVar[float] = math.sqrt(2.0)

    def __post_init__(self):
        if self.rate < 0 or not math.isfinite(self.rate):
            raise ValidationError(f"branch rate must be finite and >= 0, got {self.rate}")
        if self.dimension < 1:
            raise ValidationError(f"dimension must be >= 1, got {self.dimension}")
        if self.population_cap < 1:
            raise ValidationError(f"population cap must be >= 1, got {self.population_cap}")

    @classmethod
    def binary(cls, rate: float = 1.0, dimension: int = 1) -> "GenealogyParams":
        return cls(rate, OffspringDistribution.pure(2), dimension)


@functools.lru_cache(maxsize=1)
def _engine() -> Tuple[np.random.Philox, np.random.Generator]:
    """The process-wide Philox generator that fold_tree repositions node by node."""
    bit_generator = np.random.Philox(0)
    return bit_generator, np.random.Generator(bit_generator)


class NodeStream:
    """Philox counter block of one tree node.

    The 128-bit key belongs to the replicate; the counter holds a draw index,
    a phase word (tree draws or vote draws) and a 128-bit digest of the
    child-index path, so every (replicate, path, phase) owns its own stream.
    """

    __slots__ = ('key', 'words')

    def __init__(self, key: Tuple[int, int], path: Tuple[int, ...]):
        self.key = key
        digest = hashlib.blake2b(struct.pack(f'<{len(path)}I', *path), digest_size=16).digest()
        self.words = struct.unpack('<QQ', digest)

    def counter(self, phase: int) -> Tuple[int, int, int, int]:
        return (0, phase) + self.words

    def generator(self, phase: int = TREE_PHASE) -> np.random.Generator:
        """An independent generator over this node's stream."""
        bit_generator = np.random.Philox(counter=np.array(self.counter(phase), dtype=np.uint64),
                                         key=np.array(self.key, dtype=np.uint64))
        return np.random.Generator(bit_generator)

    def attach(self, phase: int = TREE_PHASE) -> np.random.Generator:
        """Point the shared engine at this node's stream and return it.

        Valid until the next attach; fold_tree never interleaves two nodes
        inside one leaf or combine call.
        """
        bit_generator, rng = _engine()
        bit_generator.state = {
            'bit_generator': 'Philox',
            'state': {'counter': self.counter(phase), 'key': self.key},
            'buffer': (0, 0, 0, 0),
            'buffer_pos': 4,
            'has_uint32': 0,
            'uinteger': 0,
        }
        return rng


@dataclass(frozen=True)
class SeedScheme:
    """Counter-based seeding: one independent stream per (replicate, path)."""

    master_seed: int

    def __post_init__(self):
        if not (0 <= int(self.master_seed) <= MAX_SEED):
            raise ValidationError(f"master seed must fit in 64 unsigned bits, got {self.master_seed}")

    def replicate_key(self, replicate: int) -> Tuple[int, int]:
        """Philox key of a replicate: a 128-bit digest of (master seed, replicate)."""
        packed = struct.pack('<QQ', int(self.master_seed), int(replicate))
        return struct.unpack('<QQ', hashlib.blake2b(packed, digest_size=16).digest())

    def node_stream(self, replicate: int, path: Tuple[int, ...]) -> NodeStream:
        return NodeStream(self.replicate_key(replicate), path)

    def node_rng(self, replicate: int, path: Tuple[int, ...], phase: int = TREE_PHASE) -> np.random.Generator:
        return self.node_stream(replicate, path).generator(phase)


@dataclass
class LeafRecord:
    """A particle alive at the evaluation time.

    ``rng`` is the node's vote stream; it is only valid inside the leaf call.
    """

    position: np.ndarray
    path: Tuple[int, ...]
    time: float
    stream: NodeStream = field(repr=False)
    _rng: Optional[np.random.Generator] = field(default=None, init=False, repr=False)

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = self.stream.attach(VOTE_PHASE)
        return self._rng


@dataclass
class BranchRecord:
    """A branching event: ``arity`` children born at ``time`` and ``position``."""

    arity: int
    position: np.ndarray
    path: Tuple[int, ...]
    time: float
    stream: NodeStream = field(repr=False)
    _rng: Optional[np.random.Generator] = field(default=None, init=False, repr=False)

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = self.stream.attach(VOTE_PHASE)
        return self._rng


LeafFn = Callable[[LeafRecord], Any]
CombineFn = Callable[[BranchRecord, List[Any]], Any]


def expected_population(params: GenealogyParams, t: float) -> float:
    """E N_t = exp(beta (m_1 - 1) t)."""
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    return math.exp(params.rate * (params.offspring.mean() - 1.0) * t)


def _draw_children(offspring: OffspringDistribution, rng: np.random.Generator) -> int:
    if offspring.is_pure():
        return offspring.max_children
    arities = offspring.arities
    u = rng.random()
    cumulative = 0.0
    for k in arities:
        cumulative += offspring.probs[k]
        if u < cumulative:
            return k
    return arities[-1]


def fold_tree(params: GenealogyParams, t: float, x0: Sequence[float], seed: SeedScheme,
              replicate: int, leaf_fn: LeafFn, combine_fn: CombineFn) -> Any:
    """Sample one genealogy up to time ``t`` and fold it bottom-up.

    At each node: draw tau ~ Exp(beta); if tau exceeds the remaining time the
    particle moves for the rest of it and becomes a leaf, otherwise it moves for
    tau, splits, and ``combine_fn`` folds the children's values.
    """
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    origin = np.asarray(x0, dtype=float).reshape(-1)
    if origin.size != params.dimension:
        raise ValidationError(f"start point has {origin.size} coordinates, dimension is {params.dimension}")
    leaves = [0]
    scale = 1.0 / params.rate if params.rate > 0 else math.inf
    key = seed.replicate_key(replicate)

    def visit(path: Tuple[int, ...], position: np.ndarray, elapsed: float) -> Any:
        stream = NodeStream(key, path)
        rng = stream.attach(TREE_PHASE)
        remaining = t - elapsed
        tau = rng.exponential(scale) if params.rate > 0 else math.inf
        if tau > remaining:
            end = position + rng.normal(0.0, math.sqrt(2.0 * remaining), params.dimension)
            leaves[0] += 1
            if leaves[0] > params.population_cap:
                raise PopulationGuardError(params.population_cap, expected_population(params, t))
            return leaf_fn(LeafRecord(end, path, t, stream))
        here = position + rng.normal(0.0, math.sqrt(2.0 * tau), params.dimension)
        arity = _draw_children(params.offspring, rng)
        born = elapsed + tau
        values = [visit(path + (i,), here, born) for i in range(arity)]
        return combine_fn(BranchRecord(arity, here, path, born, stream), values)

    return visit((), origin, 0.0)


def count_leaves(params: GenealogyParams, t: float, x0: Sequence[float], seed: SeedScheme,
                 replicate: int) -> int:
    return fold_tree(params, t, x0, seed, replicate, lambda leaf: 1, lambda branch, values: sum(values))


def dump_tree(params: GenealogyParams, t: float, x0: Sequence[float], seed: SeedScheme,
              replicate: int = 0) -> str:
    """Indented outline of one genealogy: branch time, position and arity per node."""

    def fmt(position: np.ndarray) -> str:
        return '(' + ', '.join(f"{c:.6g}" for c in position) + ')'

    def leaf(record: LeafRecord) -> List[str]:
        return ['  ' * len(record.path) + f"leaf t={record.time:.6g} x={fmt(record.position)}"]

    def combine(branch: BranchRecord, values: List[List[str]]) -> List[str]:
        lines = ['  ' * len(branch.path) + f"branch t={branch.time:.6g} x={fmt(branch.position)} arity={branch.arity}"]
        for child in values:
            lines.extend(child)
        return lines

    return '\n'.join(fold_tree(params, t, x0, seed, replicate, leaf, combine)) + '\n'


def start_point(x: Any, dimension: int = 1) -> np.ndarray:
    """A scalar x means (x, 0, ..., 0)."""
    point = np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
    if point.size == 1 and dimension > 1:
        point = np.concatenate([point, np.zeros(dimension - 1)])
    return point


def max_children_hint(params: GenealogyParams, t: float) -> Optional[str]:
    """Warn-level hint when the expected population approaches the cap."""
    expected = expected_population(params, t)
    if expected > 0.1 * params.population_cap:
        return (f"expected population {expected:.3g} is within 10x of the cap "
                f"{params.population_cap}; some replicates may be aborted")
    return None
