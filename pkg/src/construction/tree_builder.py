"""Level-by-level construction of channel trees"""
from typing import Callable, Iterator, List, Optional, Sequence, Union

import numpy as np

from src.core.channel import power_ln_epsilon_array
from src.core.field import extension_field
from src.kernels.erasure_table import child_ln_eps
from src.kernels.kernel import Kernel
from src.models.channel_tree import (LEAF, NODE_BUDGET, POWER, ChannelTree, MergedTree)
from src.models.erasure_channel import ErasureChannel
from src.utils.errors import BudgetExceededError, InvariantViolation, ValidationError
from src.utils.logger import default_logger as logger

MERGED_CLASS_LIMIT = 1 << 24

# decide(nodes, ln_z, depth, generation, field_id) -> transform per node
DecideFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]
ScheduleEntry = Union[Kernel, int]


class TreeBuilder:
    """Grows a tree one generation at a time so that nodes stay in BFS order."""

    def __init__(self, root: ErasureChannel, kernels: Sequence[Kernel], power_k: int = 1,
                 budget: int = NODE_BUDGET):
        """
        Args:
            root: Root channel
            kernels: Kernels addressed by index in the transform array
            power_k: Packaging degree used by POWER steps
            budget: Maximum number of nodes
        """
        self.root = root
        self.kernels = list(kernels)
        self.power_k = int(power_k)
        self.budget = int(budget)
        self.fields = [root.field]
        self.distances = [np.log(np.asarray(k.table.partial_distances, dtype=float))
                          for k in self.kernels]

        self._ln_z = [np.array([root.ln_epsilon])]
        self._depth = [np.zeros(1, dtype=np.int64)]
        self._generation = [np.zeros(1, dtype=np.int64)]
        self._parent = [np.full(1, -1, dtype=np.int64)]
        self._branch = [np.full(1, -1, dtype=np.int64)]
        self._field_id = [np.zeros(1, dtype=np.int64)]
        self._den = [np.array([1], dtype=object)]
        self._y_inc = [np.zeros(1)]
        self._transform: List[np.ndarray] = []
        self._n_children: List[np.ndarray] = []
        self.n_nodes = 1

    def _field_index(self, f) -> int:
        for i, known in enumerate(self.fields):
            if known == f:
                return i
        self.fields.append(f)
        return len(self.fields) - 1

    def grow(self, decide: DecideFn) -> None:
        """Expand generations until every node of the newest one is a leaf."""
        offset = 0
        while True:
            ln_z = self._ln_z[-1]
            nodes = np.arange(offset, offset + ln_z.size)
            transform = np.asarray(decide(nodes, ln_z, self._depth[-1], self._generation[-1],
                                          self._field_id[-1]), dtype=np.int64)
            counts = self._expand(nodes, transform)
            offset += ln_z.size
            if counts == 0:
                return

    def _expand(self, nodes: np.ndarray, transform: np.ndarray) -> int:
        ln_z = self._ln_z[-1]
        field_id = self._field_id[-1]
        arity = np.zeros(nodes.size, dtype=np.int64)
        arity[transform == POWER] = 1
        for j, kernel in enumerate(self.kernels):
            mask = transform == j
            if not mask.any():
                continue
            wrong = np.flatnonzero(mask & (field_id != self._field_index(kernel.field)))
            if wrong.size:
                raise ValidationError(
                    f"kernel {kernel.name} over {kernel.field!r} applied to a channel over "
                    f"{self.fields[field_id[wrong[0]]]!r}")
            arity[mask] = kernel.ell
        self._transform.append(transform)
        self._n_children.append(arity)

        total = int(arity.sum())
        if total == 0:
            return 0
        if self.n_nodes + total > self.budget:
            raise BudgetExceededError(
                f"tree needs more than {self.budget} nodes (node budget)")

        starts = np.cumsum(arity) - arity
        child_ln = np.empty(total)
        child_branch = np.full(total, -1, dtype=np.int64)
        child_y = np.zeros(total)
        child_field = np.repeat(field_id, arity)
        for j, kernel in enumerate(self.kernels):
            idx = np.flatnonzero(transform == j)
            if idx.size == 0:
                continue
            ell = kernel.ell
            pos = (starts[idx][:, None] + np.arange(ell)[None, :]).reshape(-1)
            child_ln[pos] = child_ln_eps(kernel.table, ln_z[idx]).reshape(-1)
            child_branch[pos] = np.tile(np.arange(ell), idx.size)
            child_y[pos] = np.tile(self.distances[j], idx.size)
        power_idx = np.flatnonzero(transform == POWER)
        if power_idx.size:
            pos = starts[power_idx]
            child_ln[pos] = power_ln_epsilon_array(ln_z[power_idx], self.power_k)
            for src_field in np.unique(field_id[power_idx]):
                ext = extension_field(self.fields[src_field], self.power_k)
                child_field[pos[field_id[power_idx] == src_field]] = self._field_index(ext)

        is_kernel = np.repeat(transform >= 0, arity)
        parent_ids = np.repeat(nodes, arity)
        den = np.repeat(self._den[-1], arity) * np.where(
            is_kernel, np.repeat(arity, arity), 1).astype(object)
        self._ln_z.append(child_ln)
        self._depth.append(np.repeat(self._depth[-1], arity) + is_kernel)
        self._generation.append(np.repeat(self._generation[-1], arity) + 1)
        self._parent.append(parent_ids)
        self._branch.append(child_branch)
        self._field_id.append(child_field)
        self._den.append(den)
        self._y_inc.append(child_y)
        self.n_nodes += total
        return total

    def finalize(self, roles: Optional[dict] = None) -> ChannelTree:
        n_children = np.concatenate(self._n_children)
        first_child = np.where(n_children > 0, 1 + np.cumsum(n_children) - n_children, -1)
        tree = ChannelTree(
            self.root, self.kernels, self.fields,
            ln_z=np.concatenate(self._ln_z),
            depth=np.concatenate(self._depth),
            generation=np.concatenate(self._generation),
            parent=np.concatenate(self._parent),
            first_child=first_child.astype(np.int64),
            n_children=n_children,
            transform=np.concatenate(self._transform),
            branch=np.concatenate(self._branch),
            field_id=np.concatenate(self._field_id),
            denominators=np.concatenate(self._den),
            y_inc=np.concatenate(self._y_inc),
            power_k=self.power_k,
            roles=roles,
        )
        logger.debug(f"Built {tree!r}")
        return tree


def _schedule_kernels(schedule: Sequence[ScheduleEntry]):
    kernels: List[Kernel] = []
    codes: List[int] = []
    power_k = 1
    for entry in schedule:
        if isinstance(entry, Kernel):
            if entry not in kernels:
                kernels.append(entry)
            codes.append(kernels.index(entry))
        else:
            k = int(entry)
            if k < 1 or k != entry:
                raise ValidationError(f"power step must be an integer >= 1, got {entry!r}")
            if power_k > 1:
                raise ValidationError("a schedule may hold at most one power step")
            power_k = k
            codes.append(POWER)
    return kernels, codes, power_k


def _node_count(schedule: Sequence[ScheduleEntry]) -> int:
    total, width = 1, 1
    for entry in schedule:
        width *= entry.ell if isinstance(entry, Kernel) else 1
        total += width
    return total


def multi_tree(W: ErasureChannel, schedule: Sequence[ScheduleEntry], budget: int = NODE_BUDGET,
               merge: bool = True):
    """
    Tree applying schedule[g] to every node of generation g.

    An integer entry k is a T_C^k packaging step; kernels after it must live
    over the degree-k extension field.

    Args:
        W: Root channel
        schedule: Kernels (or one packaging degree) per generation
        budget: Node budget for the explicit tree
        merge: Fall back to counted leaf classes above the budget

    Returns:
        ChannelTree, or MergedTree above the budget

    Raises:
        ValidationError: field mismatch
        BudgetExceededError: over budget with merge=False
    """
    kernels, codes, power_k = _schedule_kernels(schedule)
    if _node_count(schedule) > budget:
        if not merge:
            raise BudgetExceededError(
                f"tree of {_node_count(schedule)} nodes exceeds the node budget {budget}")
        return merged_tree(W, schedule)
    builder = TreeBuilder(W, kernels, power_k, budget)
    code_arr = np.asarray(codes + [LEAF], dtype=np.int64)

    def decide(nodes, ln_z, depth, generation, field_id):
        return code_arr[np.minimum(generation, len(codes))]

    builder.grow(decide)
    return builder.finalize()


def perfect_tree(W: ErasureChannel, T: Kernel, n: int, budget: int = NODE_BUDGET, merge: bool = True):
    """
    Complete l-ary tree of depth n with kernel T at every vertex.

    Raises:
        ValidationError: negative depth or field mismatch
        BudgetExceededError: over budget with merge=False
    """
    if n < 0:
        raise ValidationError(f"depth must be >= 0, got {n}")
    return multi_tree(W, [T] * int(n), budget, merge)


def packaged_tree(W: ErasureChannel, k: int, T: Kernel, n: int, budget: int = NODE_BUDGET,
                  merge: bool = True):
    """A T_C^k step at the root followed by a perfect tree of T over F_{q^k}."""
    return multi_tree(W, [int(k)] + [T] * int(n), budget, merge)


def merged_tree(W: ErasureChannel, schedule: Sequence[ScheduleEntry],
                class_limit: int = MERGED_CLASS_LIMIT) -> MergedTree:
    """
    Leaf classes of a schedule tree, merging equal channels level by level.

    Raises:
        BudgetExceededError: a level holds more than class_limit distinct channels
    """
    tree = None
    for tree in merged_levels(W, schedule, class_limit):
        pass
    if tree is None:
        tree = MergedTree(W, [], [W.field], np.array([W.ln_epsilon]), np.ones(1, dtype=np.int64), 1, 0)
    logger.info(f"Merged tree of depth {tree.max_depth}: {tree.class_ln_z.size} channel classes "
                f"for {tree.n_nodes} leaves")
    return tree


def merged_levels(W: ErasureChannel, schedule: Sequence[ScheduleEntry],
                  class_limit: int = MERGED_CLASS_LIMIT) -> Iterator[MergedTree]:
    """
    Yield the merged leaf level after each schedule entry.

    Raises:
        ValidationError: field mismatch
        BudgetExceededError: a level holds more than class_limit distinct channels
    """
    kernels, _, _ = _schedule_kernels(schedule)
    field = W.field
    ln_z = np.array([W.ln_epsilon])
    count = np.ones(1, dtype=np.int64)
    denominator = 1
    depth = 0
    k = 1
    for entry in schedule:
        if isinstance(entry, Kernel):
            if entry.field != field:
                raise ValidationError(
                    f"kernel {entry.name} over {entry.field!r} applied to a channel over {field!r}")
            children = child_ln_eps(entry.table, ln_z).reshape(-1)
            count = np.repeat(count, entry.ell)
            denominator *= entry.ell
            depth += 1
        else:
            k = int(entry)
            children = power_ln_epsilon_array(ln_z, k)
            field = extension_field(field, k)
        ln_z, inverse = np.unique(children, return_inverse=True)
        count = np.bincount(inverse.reshape(-1), weights=count, minlength=ln_z.size).astype(np.int64)
        if ln_z.size > class_limit:
            raise BudgetExceededError(
                f"{ln_z.size} distinct channels at depth {depth} exceed the merge limit")
        logger.debug(f"merged depth {depth}: {ln_z.size} classes")
        yield MergedTree(W, kernels, [W.field, field], ln_z, count, denominator, depth, k)


def check_conventions(tree: ChannelTree) -> bool:
    """
    Check that every root-to-leaf path passes exactly one T_C^k step, with
    only the rate kernel above it and only the error kernel below it.

    Trees without packaging steps pass trivially.

    Raises:
        InvariantViolation: some path breaks the convention
    """
    if tree.merged or not tree.has_power:
        return True
    powers_above = np.zeros(tree.n_nodes, dtype=np.int64)
    for g in range(1, int(tree.generation.max()) + 1):
        level = np.flatnonzero(tree.generation == g)
        parent = tree.parent[level]
        powers_above[level] = powers_above[parent] + (tree.transform[parent] == POWER)
    leaves = tree.leaves
    if np.any(powers_above[leaves] != 1):
        bad = leaves[powers_above[leaves] != 1][0]
        raise InvariantViolation(
            f"leaf {bad} passes {powers_above[bad]} packaging steps instead of one")
    rate = tree.roles.get("rate")
    error = tree.roles.get("error")
    kernel_nodes = np.flatnonzero(tree.transform >= 0)
    if rate is not None:
        above = kernel_nodes[powers_above[kernel_nodes] == 0]
        if np.any(tree.transform[above] != rate):
            raise InvariantViolation("a kernel other than the rate kernel sits above T_C^k")
    if error is not None:
        below = kernel_nodes[powers_above[kernel_nodes] == 1]
        if np.any(tree.transform[below] != error):
            raise InvariantViolation("a kernel other than the error kernel sits below T_C^k")
    return True


def leaf_frame_rows(tree) -> List[tuple]:
    """(leaf id, depth, ln Z, P) rows for tree.csv."""
    ids = tree.leaves
    ln_z = tree.leaf_ln_z()
    if tree.merged:
        return [(int(i), tree.max_depth, float(z), f"{int(c)}/{tree.denominator}")
                for i, z, c in zip(ids, ln_z, tree.class_count)]
    return [(int(v), int(tree.depth[v]), float(z), f"1/{int(tree.denominators[v])}")
            for v, z in zip(ids, ln_z)]
