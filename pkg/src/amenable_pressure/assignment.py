"""Grouping atoms into blocks that each fit inside one cover element.

Atoms are described by keys: one element bitmask per translate. A set of
atoms fits inside a single element of the joined cover iff the bitwise AND
of their keys is non-zero in every column. Two objectives are supported:

- ``minimize_max_weight``: the sum over blocks of the largest atom weight
  (weights given as logarithms), the finite problem behind pressure terms.
- ``minimize_entropy``: the Shannon entropy of the block masses, the
  finite problem behind cover entropy.

Both start from a greedy solution, try to certify it with a lower bound and
otherwise run a depth-first branch and bound with a node budget.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from amenable_pressure.exceptions import BudgetExceededError, InputError

logger = logging.getLogger(__name__)

Key = Tuple[int, ...]

RELATIVE_EPS = 1e-12


@dataclass(frozen=True)
class Assignment:
    """Blocks of atom indices with the objective value they achieve.

    Attributes:
        blocks: Atom indices per block, blocks in opening order
        value: Objective value (log of the weight sum, or nats)
        lower_bound: A proven lower bound on the optimum
        certified: True if ``value`` is proven optimal
        nodes: Branch-and-bound nodes visited
        packing_bound: Weight of pairwise incompatible atoms, as a log;
            kept even when the search certifies a larger optimum
    """

    blocks: Tuple[Tuple[int, ...], ...]
    value: float
    lower_bound: float
    certified: bool
    nodes: int = 0
    packing_bound: float = -math.inf

    @property
    def packing_tight(self) -> bool:
        """Whether the packing bound alone proves ``value`` optimal."""
        if self.value == -math.inf:
            return True
        return self.value - self.packing_bound <= 2 * RELATIVE_EPS

    def block_of(self) -> List[int]:
        """Block index of every atom."""
        size = sum(len(b) for b in self.blocks)
        owner = [0] * size
        for i, block in enumerate(self.blocks):
            for atom in block:
                owner[atom] = i
        return owner


def _as_keys(keys: np.ndarray | Sequence[Sequence[int]]) -> List[Key]:
    rows = np.asarray(keys, dtype=np.int64)
    if rows.ndim != 2:
        raise InputError("atom keys must be a two-dimensional array")
    return [tuple(int(v) for v in row) for row in rows]


def _fits(state: Key, key: Key) -> bool:
    return all(s & k for s, k in zip(state, key))


def _meet(state: Key, key: Key) -> Key:
    return tuple(s & k for s, k in zip(state, key))


def _plogp(mass: float) -> float:
    return -mass * math.log(mass) if mass > 0 else 0.0


def _unwind(chain: Optional[Tuple[int, object]], size: int) -> List[int]:
    owner = [0] * size
    position = size - 1
    while chain is not None:
        block, parent = chain
        owner[position] = block
        position -= 1
        chain = parent  # type: ignore[assignment]
    return owner


def _blocks_from(
    owner: Sequence[int], order: Sequence[int]
) -> Tuple[Tuple[int, ...], ...]:
    grouped: dict[int, List[int]] = {}
    for position, block in enumerate(owner):
        grouped.setdefault(block, []).append(order[position])
    return tuple(tuple(sorted(grouped[b])) for b in sorted(grouped))


def minimize_max_weight(
    keys: np.ndarray | Sequence[Sequence[int]],
    log_weights: np.ndarray | Sequence[float],
    exact: bool = True,
    atom_cap: int = 2**12,
    node_budget: int = 200_000,
) -> Assignment:
    """Minimize ``sum over blocks of max_{a in block} e^{w_a}``.

    Atoms are processed by decreasing weight, ties by atom index, so the
    first atom of a block is its heaviest. Greedy places every atom in the
    first open block it fits. The packing bound sums the weights of a set
    of atoms no two of which can share a block.

    Args:
        keys: Per-atom element bitmasks, one column per translate
        log_weights: Per-atom weights as logarithms; ``-inf`` allowed
        exact: Run branch and bound if greedy is not certified
        atom_cap: Largest atom count searched exactly
        node_budget: Branch-and-bound nodes before giving up

    Returns:
        Assignment: ``value`` is ``log`` of the weight sum
    """
    atom_keys = _as_keys(keys)
    weights = np.asarray(log_weights, dtype=float)
    if len(atom_keys) != len(weights) or not atom_keys:
        raise InputError("keys and weights must be non-empty and aligned")
    if np.any(np.isnan(weights)) or np.any(weights == np.inf):
        raise InputError("weights must be finite or -inf")

    order = sorted(range(len(weights)), key=lambda a: (-weights[a], a))
    top = float(weights[order[0]])
    if top == -math.inf:
        return Assignment(
            (tuple(range(len(weights))),),
            -math.inf,
            -math.inf,
            True,
            packing_bound=-math.inf,
        )
    scaled = [math.exp(weights[a] - top) for a in order]
    ordered_keys = [atom_keys[a] for a in order]

    states: List[Key] = []
    owner: List[int] = []
    greedy = 0.0
    for position, key in enumerate(ordered_keys):
        for b, state in enumerate(states):
            if _fits(state, key):
                states[b] = _meet(state, key)
                owner.append(b)
                break
        else:
            states.append(key)
            owner.append(len(states) - 1)
            greedy += scaled[position]

    packed: List[Key] = []
    packing = 0.0
    for position, key in enumerate(ordered_keys):
        if all(not _fits(other, key) for other in packed):
            packed.append(key)
            packing += scaled[position]

    best_value = greedy
    best_owner = owner
    certified = greedy <= packing * (1 + RELATIVE_EPS)
    nodes = 0
    if not certified and exact:
        if len(ordered_keys) > atom_cap:
            logger.warning(
                "%d atoms exceed the exact cap %d, keeping greedy",
                len(ordered_keys),
                atom_cap,
            )
        else:
            found, found_owner, nodes, complete = _branch_max_weight(
                ordered_keys, scaled, greedy, packing, node_budget
            )
            if found_owner is not None:
                best_value, best_owner = found, found_owner
            certified = complete
            if not complete:
                logger.warning(
                    "Node budget %d exhausted, result not certified",
                    node_budget,
                )

    lower = best_value if certified else packing
    return Assignment(
        blocks=_blocks_from(best_owner, order),
        value=top + math.log(best_value),
        lower_bound=top + math.log(lower),
        certified=certified,
        nodes=nodes,
        packing_bound=top + math.log(packing),
    )


def _branch_max_weight(
    keys: List[Key],
    scaled: List[float],
    incumbent: float,
    floor: float,
    node_budget: int,
) -> Tuple[float, Optional[List[int]], int, bool]:
    size = len(keys)
    best = incumbent
    best_owner: Optional[List[int]] = None
    nodes = 0
    # (position, block states, cost, assignment chain)
    stack: List[Tuple[int, Tuple[Key, ...], float, object]] = [
        (0, (), 0.0, None)
    ]
    while stack:
        position, states, cost, chain = stack.pop()
        nodes += 1
        if nodes > node_budget:
            return best, best_owner, nodes, False
        if position == size:
            if cost < best * (1 - RELATIVE_EPS):
                best = cost
                best_owner = _unwind(chain, size)  # type: ignore[arg-type]
                if best <= floor * (1 + RELATIVE_EPS):
                    return best, best_owner, nodes, True
            continue
        bound = cost
        for later in range(position, size):
            if all(not _fits(s, keys[later]) for s in states):
                bound += scaled[later]
                break
        if bound >= best * (1 - RELATIVE_EPS):
            continue
        key = keys[position]
        stack.append(
            (
                position + 1,
                states + (key,),
                cost + scaled[position],
                (len(states), chain),
            )
        )
        for b in reversed(range(len(states))):
            if _fits(states[b], key):
                joined = (
                    states[:b] + (_meet(states[b], key),) + states[b + 1 :]
                )
                stack.append((position + 1, joined, cost, (b, chain)))
    return best, best_owner, nodes, True


def minimize_entropy(
    keys: np.ndarray | Sequence[Sequence[int]],
    masses: np.ndarray | Sequence[float],
    exact: bool = True,
    atom_cap: int = 24,
    node_budget: int = 200_000,
) -> Assignment:
    """Minimize ``sum over blocks of -m log m`` with ``m`` the block mass.

    Greedy places every atom, heaviest first, in the fitting block of
    largest mass. The search bound uses concavity: the remaining mass is
    cheapest when it all lands in a single block.

    Raises:
        BudgetExceededError: If exact search is requested beyond the atom
            cap or the node budget; use greedy mode instead
    """
    atom_keys = _as_keys(keys)
    probs = np.asarray(masses, dtype=float)
    if len(atom_keys) != len(probs) or not atom_keys:
        raise InputError("keys and masses must be non-empty and aligned")
    if np.any(probs < 0) or not np.all(np.isfinite(probs)):
        raise InputError("masses must be finite and non-negative")

    order = sorted(range(len(probs)), key=lambda a: (-probs[a], a))
    ordered_keys = [atom_keys[a] for a in order]
    ordered = [float(probs[a]) for a in order]

    states: List[Key] = []
    totals: List[float] = []
    owner: List[int] = []
    for position, key in enumerate(ordered_keys):
        fitting = [b for b, s in enumerate(states) if _fits(s, key)]
        if fitting:
            b = max(fitting, key=lambda i: (totals[i], -i))
            states[b] = _meet(states[b], key)
            totals[b] += ordered[position]
            owner.append(b)
        else:
            states.append(key)
            totals.append(ordered[position])
            owner.append(len(states) - 1)
    greedy = math.fsum(_plogp(t) for t in totals)

    if not exact:
        return Assignment(_blocks_from(owner, order), greedy, 0.0, False)
    if len(ordered_keys) > atom_cap:
        raise BudgetExceededError(
            f"{len(ordered_keys)} atoms exceed the exact entropy cap "
            f"{atom_cap}; use greedy mode"
        )

    suffix = [0.0] * (len(ordered) + 1)
    for position in reversed(range(len(ordered))):
        suffix[position] = suffix[position + 1] + ordered[position]

    best = greedy
    best_owner = owner
    nodes = 0
    stack: List[Tuple[int, Tuple[Key, ...], Tuple[float, ...], object]] = [
        (0, (), (), None)
    ]
    while stack:
        position, block_states, block_totals, chain = stack.pop()
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceededError(
                f"entropy search exceeded {node_budget} nodes; use greedy "
                "mode"
            )
        cost = math.fsum(_plogp(t) for t in block_totals)
        if position == len(ordered):
            if cost < best - RELATIVE_EPS:
                best = cost
                best_owner = _unwind(chain, len(ordered))
            continue
        rest = suffix[position]
        extra = _plogp(rest)
        for t in block_totals:
            extra = min(extra, _plogp(t + rest) - _plogp(t))
        if cost + extra >= best - RELATIVE_EPS:
            continue
        key = ordered_keys[position]
        mass = ordered[position]
        stack.append(
            (
                position + 1,
                block_states + (key,),
                block_totals + (mass,),
                (len(block_states), chain),
            )
        )
        for b in reversed(range(len(block_states))):
            if _fits(block_states[b], key):
                stack.append(
                    (
                        position + 1,
                        block_states[:b]
                        + (_meet(block_states[b], key),)
                        + block_states[b + 1 :],
                        block_totals[:b]
                        + (block_totals[b] + mass,)
                        + block_totals[b + 1 :],
                        (b, chain),
                    )
                )
    logger.debug("Entropy search visited %d nodes", nodes)
    return Assignment(_blocks_from(best_owner, order), best, best, True, nodes)
