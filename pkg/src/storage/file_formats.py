"""Readers and writers for kernel files, tree recipes and leaf-set CSVs"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from src.construction.grafting import GraftedTree, build_grafted_tree
from src.construction.tree_builder import ScheduleEntry, multi_tree
from src.core.field import default_field
from src.kernels.kernel import Kernel, kernel_load
from src.models.channel_tree import NODE_BUDGET
from src.models.erasure_channel import ErasureChannel
from src.storage.presets import KERNEL_PRESETS, get_kernel
from src.utils.errors import ValidationError
from src.utils.logger import default_logger as logger

SECTIONS = ("root", "schedule", "graft")


def _content_lines(text: str) -> List[Tuple[int, str]]:
    """(1-based line number, stripped text) of non-blank, non-comment lines."""
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if line:
            out.append((number, line))
    return out


def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as exc:
        raise ValidationError(f"not a text file: {exc}", source=str(path))


def parse_kernel_text(text: str, source: Optional[str] = None) -> Kernel:
    """
    Parse `q ell [name]` followed by ell rows of ell element codes.

    Raises:
        ValidationError: malformed content, with the offending line number
    """
    lines = _content_lines(text)
    if not lines:
        raise ValidationError("empty kernel file", line=1, source=source)
    number, head = lines[0]
    parts = head.split()
    if len(parts) < 2:
        raise ValidationError("header must be `q ell [name]`", line=number, source=source)
    try:
        q, ell = int(parts[0]), int(parts[1])
    except ValueError:
        raise ValidationError(f"non-integer q or ell in {head!r}", line=number, source=source)
    if ell < 2:
        raise ValidationError(f"ell must be at least 2, got {ell}", line=number, source=source)
    name = parts[2] if len(parts) > 2 else (Path(source).stem if source else "kernel")
    try:
        field_spec = default_field(q)
    except ValidationError as exc:
        raise ValidationError(str(exc), line=number, source=source)

    body = lines[1:]
    if len(body) != ell:
        where = body[ell][0] if len(body) > ell else (body[-1][0] + 1 if body else number + 1)
        raise ValidationError(f"expected {ell} matrix rows, found {len(body)}",
                              line=where, source=source)
    rows = []
    for number, line in body:
        try:
            row = [int(x) for x in line.split()]
        except ValueError:
            raise ValidationError(f"non-integer entry in {line!r}", line=number, source=source)
        if len(row) != ell:
            raise ValidationError(f"row has {len(row)} entries, expected {ell}",
                                  line=number, source=source)
        if any(x < 0 or x >= q for x in row):
            raise ValidationError(f"entry outside 0..{q - 1}", line=number, source=source)
        rows.append(row)
    try:
        return kernel_load(field_spec, rows, name)
    except ValidationError as exc:
        raise ValidationError(str(exc), line=body[0][0], source=source)


def load_kernel(path: Union[str, Path]) -> Kernel:
    """Kernel from a file."""
    path = Path(path)
    kernel = parse_kernel_text(_read_text(path), source=str(path))
    logger.debug(f"Loaded kernel {kernel.name} (l={kernel.ell}) from {path}")
    return kernel


def resolve_kernel(ref: str, base_dir: Optional[Path] = None) -> Kernel:
    """
    A kernel file path (relative to base_dir) or a preset name.

    Raises:
        ValidationError: neither a readable file nor a preset
    """
    candidate = Path(ref)
    if base_dir is not None and not candidate.is_absolute():
        candidate = Path(base_dir) / candidate
    if candidate.is_file():
        return load_kernel(candidate)
    if ref in KERNEL_PRESETS:
        return get_kernel(ref)
    raise ValidationError(f"kernel {ref!r} is neither a file nor a preset "
                          f"({', '.join(sorted(KERNEL_PRESETS))})")


def save_kernel(kernel: Kernel, path: Union[str, Path]) -> bool:
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(kernel.to_text(), encoding='utf-8')
        return True
    except Exception as e:
        logger.error(f"Error writing kernel {path}: {e}")
        return False


@dataclass
class GraftSpec:
    """The graft section of a recipe: k n mu_star_rat mu' error-kernel."""
    k: int
    n: int
    mu_star_rat: float
    mu_p: float
    error_kernel: Kernel


@dataclass
class Recipe:
    """Root channel, kernel schedule and optional graft of a tree."""
    root: ErasureChannel
    schedule: List[ScheduleEntry] = field(default_factory=list)
    graft: Optional[GraftSpec] = None

    @property
    def rate_kernel(self) -> Kernel:
        kernels = [e for e in self.schedule if isinstance(e, Kernel)]
        if not kernels:
            raise ValidationError("recipe has no kernel in its schedule")
        return kernels[0]

    def build(self, budget: int = NODE_BUDGET, merge: bool = True):
        """
        The recipe's tree: a GraftedTree when a graft section is present,
        otherwise a ChannelTree (or MergedTree above budget with merge=True).
        """
        if self.graft is not None:
            g = self.graft
            return build_grafted_tree(self.root, self.rate_kernel, g.error_kernel, g.k, g.n,
                                      g.mu_star_rat, g.mu_p, budget=budget)
        return multi_tree(self.root, self.schedule, budget=budget, merge=merge)


def _float(token: str, what: str, number: int, source: Optional[str]) -> float:
    try:
        return float(token)
    except ValueError:
        raise ValidationError(f"{what} must be a number, got {token!r}", line=number, source=source)


def _int(token: str, what: str, number: int, source: Optional[str]) -> int:
    try:
        return int(token)
    except ValueError:
        raise ValidationError(f"{what} must be an integer, got {token!r}", line=number, source=source)


def parse_recipe_text(text: str, source: Optional[str] = None,
                      base_dir: Optional[Path] = None) -> Recipe:
    """
    Parse a sectioned recipe.

        [root]
        q epsilon
        [schedule]
        depth kernel      (repeat `kernel` for depth levels)
        power k           (one T_C^k step)
        [graft]
        k n mu_star_rat mu_prime error-kernel

    Kernels are file paths relative to the recipe or preset names.

    Raises:
        ValidationError: malformed content, with the offending line number
    """
    section = None
    root = None
    schedule: List[ScheduleEntry] = []
    graft = None
    for number, line in _content_lines(text):
        if line.startswith('[') and line.endswith(']'):
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ValidationError(f"unknown section [{section}]", line=number, source=source)
            continue
        parts = line.split()
        if section is None:
            raise ValidationError("content before the first section", line=number, source=source)
        if section == "root":
            if root is not None or len(parts) != 2:
                raise ValidationError("[root] holds one line `q epsilon`", line=number, source=source)
            q = _int(parts[0], "q", number, source)
            eps = _float(parts[1], "epsilon", number, source)
            try:
                root = ErasureChannel(default_field(q), eps)
            except ValidationError as exc:
                raise ValidationError(str(exc), line=number, source=source)
        elif section == "schedule":
            if len(parts) != 2:
                raise ValidationError("schedule lines are `depth kernel` or `power k`",
                                      line=number, source=source)
            if parts[0] == "power":
                schedule.append(_int(parts[1], "k", number, source))
                continue
            depth = _int(parts[0], "depth", number, source)
            if depth < 0:
                raise ValidationError(f"depth must be >= 0, got {depth}", line=number, source=source)
            try:
                kernel = resolve_kernel(parts[1], base_dir)
            except ValidationError as exc:
                if exc.line is not None:
                    raise
                raise ValidationError(str(exc), line=number, source=source)
            schedule.extend([kernel] * depth)
        else:
            if graft is not None or len(parts) != 5:
                raise ValidationError("[graft] holds one line `k n mu_star_rat mu_prime kernel`",
                                      line=number, source=source)
            try:
                err = resolve_kernel(parts[4], base_dir)
            except ValidationError as exc:
                if exc.line is not None:
                    raise
                raise ValidationError(str(exc), line=number, source=source)
            graft = GraftSpec(_int(parts[0], "k", number, source), _int(parts[1], "n", number, source),
                              _float(parts[2], "mu_star_rat", number, source),
                              _float(parts[3], "mu_prime", number, source), err)
    if root is None:
        raise ValidationError("recipe needs a [root] section", line=1, source=source)
    if graft is not None and not any(isinstance(e, Kernel) for e in schedule):
        raise ValidationError("a graft needs the rate kernel in [schedule]", line=1, source=source)
    return Recipe(root, schedule, graft)


def load_recipe(path: Union[str, Path]) -> Recipe:
    path = Path(path)
    recipe = parse_recipe_text(_read_text(path), source=str(path), base_dir=path.parent)
    logger.debug(f"Loaded recipe {path}: {len(recipe.schedule)} schedule entries")
    return recipe


def load_leaf_set(path: Union[str, Path]) -> np.ndarray:
    """
    Leaf ids from the first column of an A.csv; '#' lines and a
    `leaf_id` header are skipped.

    Raises:
        ValidationError: non-integer id, with the line number
    """
    path = Path(path)
    ids = []
    with open(path, 'r', newline='', encoding='utf-8') as f:
        for number, row in enumerate(csv.reader(f), start=1):
            if not row or not row[0].strip() or row[0].lstrip().startswith('#'):
                continue
            token = row[0].strip()
            if token == "leaf_id":
                continue
            try:
                ids.append(int(token))
            except ValueError:
                raise ValidationError(f"leaf id must be an integer, got {token!r}",
                                      line=number, source=str(path))
    return np.asarray(sorted(set(ids)), dtype=np.int64)


def build_from_recipe(recipe: Recipe, budget: int = NODE_BUDGET, merge: bool = True):
    """Tree of a recipe plus its grafting bookkeeping (None without graft)."""
    built = recipe.build(budget, merge)
    if isinstance(built, GraftedTree):
        return built.tree, built
    return built, None
