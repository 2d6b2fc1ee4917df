"""Channel trees, the codes they define and sampled root-to-leaf paths"""
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from src.core.field import FieldSpec
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import BudgetExceededError, ValidationError

LEAF = -1
POWER = -2

NODE_BUDGET = 1 << 22


class ChannelTree:
    """A finite channel tree stored as parallel per-node arrays.

    Nodes are numbered in breadth-first order and the children of a node are
    contiguous, starting at first_child[v]. transform[v] is LEAF, POWER (the
    T_C^k packaging step) or the index of the kernel applied at v. depth
    counts kernel steps only; generation counts all edges.
    """

    merged = False

    def __init__(
        self,
        root_channel: ErasureChannel,
        kernels: Sequence,
        fields: Sequence[FieldSpec],
        ln_z: np.ndarray,
        depth: np.ndarray,
        generation: np.ndarray,
        parent: np.ndarray,
        first_child: np.ndarray,
        n_children: np.ndarray,
        transform: np.ndarray,
        branch: np.ndarray,
        field_id: np.ndarray,
        denominators: np.ndarray,
        y_inc: np.ndarray,
        power_k: int = 1,
        roles: Optional[dict] = None
    ):
        """
        Args:
            root_channel: Channel at the root
            kernels: Kernels referenced by transform indices
            fields: Fields referenced by field_id
            ln_z: ln Z per node
            depth: Kernel depth per node
            generation: Edge depth per node
            parent: Parent id (-1 at the root)
            first_child: Id of the first child (-1 at leaves)
            n_children: Number of children
            transform: LEAF, POWER or kernel index
            branch: Child index within the parent's kernel (-1 at the root
                and below a POWER step)
            field_id: Index into fields
            denominators: 1/P(v) as Python ints (object array)
            y_inc: log of the partial distance of the branch taken into v
            power_k: Packaging degree k when POWER steps occur, else 1
            roles: Optional {"rate": kernel index, "error": kernel index}
        """
        self.root_channel = root_channel
        self.kernels = list(kernels)
        self.fields = list(fields)
        self.ln_z = ln_z
        self.depth = depth
        self.generation = generation
        self.parent = parent
        self.first_child = first_child
        self.n_children = n_children
        self.transform = transform
        self.branch = branch
        self.field_id = field_id
        self.denominators = denominators
        self.y_inc = y_inc
        self.power_k = int(power_k)
        self.roles = roles or {}
        self._leaves = np.flatnonzero(self.n_children == 0)

    @property
    def n_nodes(self) -> int:
        return int(self.ln_z.size)

    @property
    def root(self) -> int:
        return 0

    @property
    def leaves(self) -> np.ndarray:
        return self._leaves

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    @property
    def has_power(self) -> bool:
        return bool(np.any(self.transform == POWER))

    def check_node(self, v: int) -> int:
        v = int(v)
        if not (0 <= v < self.n_nodes):
            raise ValidationError(f"node id {v} is not in a tree of {self.n_nodes} nodes")
        return v

    def is_leaf(self, v: int) -> bool:
        return bool(self.n_children[self.check_node(v)] == 0)

    def children(self, v: int) -> np.ndarray:
        v = self.check_node(v)
        start = self.first_child[v]
        return np.arange(start, start + self.n_children[v]) if start >= 0 else np.empty(0, dtype=np.int64)

    def channel(self, v: int) -> ErasureChannel:
        v = self.check_node(v)
        return ErasureChannel(self.fields[self.field_id[v]], ln_epsilon=float(self.ln_z[v]))

    def capacity(self, v: int) -> float:
        return float(-np.expm1(self.ln_z[self.check_node(v)]))

    def path(self, v: int) -> List[int]:
        """Node ids from the root down to v."""
        v = self.check_node(v)
        out = [v]
        while self.parent[v] >= 0:
            v = int(self.parent[v])
            out.append(v)
        return out[::-1]

    def ancestor_at_depth(self, nodes: np.ndarray, d: int) -> np.ndarray:
        """Vectorized ancestor of each node at kernel depth d (the shallowest one)."""
        nodes = np.asarray(nodes, dtype=np.int64).copy()
        while True:
            p = self.parent[nodes]
            move = (p >= 0) & (self.depth[np.maximum(p, 0)] >= d)
            if not move.any():
                return nodes
            nodes[move] = p[move]

    def descendants(self, v: int, generations: Optional[int] = None) -> np.ndarray:
        """Descendant node ids of v (v excluded), optionally limited in edge count."""
        frontier = np.array([self.check_node(v)], dtype=np.int64)
        found = []
        step = 0
        while frontier.size and (generations is None or step < generations):
            frontier = self.children_of(frontier)
            found.append(frontier)
            step += 1
        return np.concatenate(found) if found else np.empty(0, dtype=np.int64)

    def descendants_of_all(self, nodes: np.ndarray) -> np.ndarray:
        """Proper descendants of any node in nodes."""
        frontier = self.children_of(nodes)
        found = [frontier]
        while frontier.size:
            frontier = self.children_of(frontier)
            found.append(frontier)
        return np.concatenate(found)

    def children_of(self, nodes: np.ndarray) -> np.ndarray:
        """All children of an array of nodes, in node order."""
        nodes = np.asarray(nodes, dtype=np.int64)
        nodes = nodes[self.n_children[nodes] > 0]
        if nodes.size == 0:
            return np.empty(0, dtype=np.int64)
        counts = self.n_children[nodes]
        starts = np.repeat(self.first_child[nodes], counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        return starts + offsets

    def at_depth(self, d: int) -> np.ndarray:
        """Nodes entered by a kernel step at depth d (the root for d = 0)."""
        parent_depth = self.depth[np.maximum(self.parent, 0)]
        first = (self.parent < 0) | (parent_depth < self.depth)
        return np.flatnonzero((self.depth == d) & first)

    def leaf_ln_z(self) -> np.ndarray:
        return self.ln_z[self._leaves]

    def ln_z_of(self, ids: np.ndarray) -> np.ndarray:
        return self.ln_z[np.asarray(ids, dtype=np.int64)]

    def denominators_of(self, ids: np.ndarray) -> List[int]:
        return [int(x) for x in self.denominators[np.asarray(ids, dtype=np.int64)]]

    def multiplicity_of(self, ids: np.ndarray) -> np.ndarray:
        return np.ones(np.asarray(ids).size, dtype=np.int64)

    def prob_of(self, ids: np.ndarray) -> np.ndarray:
        """P(v) as floats."""
        return np.array([1.0 / int(d) for d in self.denominators[np.asarray(ids, dtype=np.int64)]])

    def validate_leaf_set(self, ids) -> np.ndarray:
        """
        Raises:
            ValidationError: an id is not a leaf
        """
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        if ids.size and (ids.min() < 0 or ids.max() >= self.n_nodes):
            raise ValidationError("leaf set contains ids outside the tree")
        bad = ids[self.n_children[ids] > 0]
        if bad.size:
            raise ValidationError(f"non-leaf ids in leaf set: {bad[:5].tolist()}")
        return ids

    def __repr__(self) -> str:
        return (f"ChannelTree(nodes={self.n_nodes}, leaves={self._leaves.size}, "
                f"depth={self.max_depth}, k={self.power_k})")


class MergedTree:
    """Leaf level of a perfect or multi-kernel tree as counted classes.

    Every leaf has the same probability, so leaves with equal ln Z are
    merged into one class carrying its multiplicity.
    """

    merged = True

    def __init__(self, root_channel: ErasureChannel, kernels: Sequence, fields: Sequence[FieldSpec],
                 class_ln_z: np.ndarray, class_count: np.ndarray, denominator: int,
                 depth: int, power_k: int = 1):
        self.root_channel = root_channel
        self.kernels = list(kernels)
        self.fields = list(fields)
        self.class_ln_z = class_ln_z
        self.class_count = class_count
        self.denominator = int(denominator)
        self.power_k = int(power_k)
        self._depth = int(depth)
        self.roles: dict = {}

    @property
    def n_nodes(self) -> int:
        return int(self.class_count.sum())

    @property
    def leaves(self) -> np.ndarray:
        return np.arange(self.class_ln_z.size)

    @property
    def max_depth(self) -> int:
        return self._depth

    @property
    def has_power(self) -> bool:
        return self.power_k > 1

    def leaf_ln_z(self) -> np.ndarray:
        return self.class_ln_z

    def ln_z_of(self, ids: np.ndarray) -> np.ndarray:
        return self.class_ln_z[np.asarray(ids, dtype=np.int64)]

    def denominators_of(self, ids: np.ndarray) -> List[int]:
        return [self.denominator] * int(np.asarray(ids).size)

    def multiplicity_of(self, ids: np.ndarray) -> np.ndarray:
        return self.class_count[np.asarray(ids, dtype=np.int64)]

    def prob_of(self, ids: np.ndarray) -> np.ndarray:
        return np.full(np.asarray(ids).size, 1.0 / self.denominator)

    def validate_leaf_set(self, ids) -> np.ndarray:
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        if ids.size and (ids.min() < 0 or ids.max() >= self.class_ln_z.size):
            raise ValidationError("class set contains ids outside the merged tree")
        return ids

    def require_structure(self, operation: str):
        raise BudgetExceededError(
            f"{operation} needs an explicit tree; this one was merged above the node budget")

    def __repr__(self) -> str:
        return (f"MergedTree(classes={self.class_ln_z.size}, leaves={self.n_nodes}, "
                f"depth={self._depth})")


def require_explicit(tree, operation: str) -> ChannelTree:
    """
    Raises:
        BudgetExceededError: tree is merged
    """
    if tree.merged:
        tree.require_structure(operation)
    return tree


@dataclass
class CodeSpec:
    """The block code defined by a tree and a leaf set."""
    tree: object
    A: np.ndarray
    N: int
    R: float
    ln_P: float
    R_exact: Optional[Fraction] = None

    @property
    def P_bound(self) -> float:
        return math.exp(self.ln_P) if self.ln_P > -745 else 0.0

    def to_dict(self) -> dict:
        return {"N": self.N, "R": self.R, "ln_P": self.ln_P, "size_A": int(np.asarray(self.A).size)}


@dataclass
class PathRecord:
    """One sample of the channel process down to a leaf.

    y_emp[i] is log(log Z_i / log Z_{i-1}); None where Z_{i-1} is 0 or 1.
    """
    nodes: List[int]
    ln_z: List[float]
    branches: List[int]
    y_emp: List[Optional[float]] = field(default_factory=list)

    @property
    def tau(self) -> int:
        return len(self.nodes) - 1

    def to_dict(self) -> dict:
        return {"nodes": self.nodes, "ln_z": self.ln_z, "branches": self.branches,
                "y_emp": self.y_emp, "tau": self.tau}
