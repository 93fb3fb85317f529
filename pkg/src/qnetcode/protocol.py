"""Node-by-node quantum simulation of a classical linear coding scheme.

Each node runs the same routine on its incoming registers: adjoin fresh
output registers through the coding unitary, Fourier-transform every input
register, measure it, and announce the outcomes over the free classical
channel. Measurement leaves a basis-dependent phase behind; because every
register content is a linear combination of the pair inputs, the accumulated
phase splits into one additive correction per pair, which the targets cancel
at the end of the run.

Outcome announcements default to a broadcast to all k pair targets, which is
what the kM|V| cost bound counts. Two optional reductions are available:
`prune` sends a node's outcomes only to targets whose transfer coefficient
from some measured register is nonzero (a target never pays for messages to
itself), and `copy_skip` lets a fan-in-one node whose outputs are all plain
copies keep its input register alive instead of measuring, which removes its
measurements and messages entirely.

Measurement order is fixed: nodes in processing order, then input edges in
declared order. Forced branches are given as one outcome label per
measurement in that order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .network import (
    CapExceededError,
    CodingScheme,
    InstanceError,
    Network,
    TransferMap,
    _check_order,
    source_edge,
    target_edge,
    transfer_coefficients,
    verify_solution,
)
from .quantum import (
    MAX_STATE_ENTRIES,
    MeasurementOutcome,
    StateVector,
    ZeroProbabilityError,
    apply_coding_unitary,
    apply_fourier,
    apply_phase,
    fidelity,
    measure,
)
from .rings import RingSpec, basis_vectors, frac_mod1, mat_vec, vector_character

BRANCH_CAP_DEFAULT = 65536


class InvalidSchemeError(ValueError):
    """The classical scheme is not a solution, so the run cannot be perfect."""


@dataclass(frozen=True)
class LogEntry:
    node: str
    outcomes: tuple[MeasurementOutcome, ...]
    recipients: tuple[int, ...]  # 1-based pair indices


@dataclass
class MessageLog:
    """Every measurement of a run, with who was told, plus channel counters."""

    q: int
    ring_bits: int
    policy: str
    entries: list[LogEntry] = field(default_factory=list)
    quantum_registers_sent: int = 0

    @property
    def elements_sent(self) -> int:
        """Ring elements announced (a width-q outcome counts q elements)."""
        return sum(len(e.outcomes) * len(e.recipients) for e in self.entries) * self.q

    @property
    def bits_sent(self) -> int:
        return self.elements_sent * self.ring_bits

    def all_outcomes(self) -> tuple[MeasurementOutcome, ...]:
        return tuple(o for e in self.entries for o in e.outcomes)

    def branch_labels(self) -> tuple[int, ...]:
        return tuple(o.label for o in self.all_outcomes())


@dataclass(frozen=True)
class PhaseTable:
    """Per-pair additive phase corrections, tabulated over basis labels."""

    ring: RingSpec
    q: int
    tables: tuple[dict[int, Fraction], ...]

    @property
    def k(self) -> int:
        return len(self.tables)

    def value(self, pair_index: int, label: int) -> Fraction:
        """Correction for pair `pair_index` (1-based) at a basis label."""
        return self.tables[pair_index - 1][label]

    def phase_fn(self, pair_index: int):
        table = self.tables[pair_index - 1]
        return lambda vec: table[vec.to_index()]

    def is_homomorphism(self) -> bool:
        """Exhaustive additivity check of every table."""
        vectors = basis_vectors(self.ring, self.q)
        for table in self.tables:
            if table[0] != 0:
                return False
            for x in vectors:
                for y in vectors:
                    lhs = table[(x + y).to_index()]
                    rhs = frac_mod1(table[x.to_index()] + table[y.to_index()])
                    if lhs != rhs:
                        return False
        return True


@dataclass
class RunResult:
    state: StateVector  # corrected output on tgt:1..k, pair order
    pre_correction: StateVector
    log: MessageLog
    phase_table: PhaseTable
    node_order: tuple[str, ...]
    branch: tuple[int, ...]


@dataclass(frozen=True)
class BranchResult:
    branch: tuple[int, ...]
    result: RunResult | None  # None when the branch has probability zero
    fidelity: float | None


@dataclass(frozen=True)
class _NodePlan:
    node: str
    in_edges: tuple[str, ...]
    out_edges: tuple[str, ...]
    coeffs: tuple
    copy_only: bool
    real_out_count: int


def _build_plans(net: Network, scheme: CodingScheme) -> dict[str, _NodePlan]:
    plans = {}
    for v in net.nodes:
        ins = net.node_inputs[v]
        outs = net.node_outputs[v]
        coeffs = scheme.coeffs[v]
        copy_only = (
            len(ins) == 1
            and len(outs) >= 1
            and all(row[0].is_identity() for row in coeffs)
        )
        real_out = sum(1 for e in outs if not e.startswith("tgt:"))
        plans[v] = _NodePlan(v, ins, outs, coeffs, copy_only, real_out)
    return plans


def encode_node(
    state: StateVector,
    node: str,
    net: Network,
    scheme: CodingScheme,
    rng: np.random.Generator | None = None,
    forced=None,
    max_entries: int = MAX_STATE_ENTRIES,
) -> tuple[StateVector, tuple[MeasurementOutcome, ...]]:
    """Run the per-node routine: code into fresh registers, transform and
    measure every input register, and return the outcomes in input order.

    `forced` gives one outcome label per input edge; otherwise outcomes are
    sampled from `rng`.
    """
    in_edges = net.node_inputs[node]
    out_edges = net.node_outputs[node]
    if forced is not None:
        forced = tuple(forced)
        if len(forced) != len(in_edges):
            raise InstanceError(
                f"node {node!r} measures {len(in_edges)} registers, "
                f"got {len(forced)} forced outcomes"
            )
    state = apply_coding_unitary(
        state, in_edges, out_edges, scheme.coeffs[node], max_entries=max_entries
    )
    outcomes = []
    for j, reg in enumerate(in_edges):
        state = apply_fourier(state, reg)
        outcome, state = measure(
            state,
            reg,
            rng=rng if forced is None else None,
            forced=None if forced is None else forced[j],
            node=node,
        )
        outcomes.append(outcome)
    return state, tuple(outcomes)


def _copy_skip_node(state: StateVector, plan: _NodePlan, max_entries: int) -> StateVector:
    # the input register survives as the first output; the rest are copies
    keep = plan.out_edges[0]
    state = state.renamed({plan.in_edges[0]: keep})
    rest = plan.out_edges[1:]
    if rest:
        rows = tuple((plan.coeffs[i][0],) for i in range(1, len(plan.out_edges)))
        state = apply_coding_unitary(state, (keep,), rest, rows, max_entries=max_entries)
    return state


def _prune_recipients(net: Network, tmap: TransferMap, node: str, in_edges) -> tuple[int, ...]:
    recipients = []
    for j in range(net.k):
        if net.pairs[j][1] == node:
            continue  # a target already holds its own outcomes
        if any(not tmap.gammas[e][j].is_zero() for e in in_edges):
            recipients.append(j + 1)
    return tuple(recipients)


def run_protocol(
    net: Network,
    scheme: CodingScheme,
    input_state: StateVector,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    branch=None,
    prune: bool = False,
    copy_skip: bool = False,
    check_classical: bool = True,
    order=None,
    tmap: TransferMap | None = None,
    max_entries: int = MAX_STATE_ENTRIES,
    _plans: dict[str, _NodePlan] | None = None,
) -> RunResult:
    """Simulate the scheme node by node and correct the target phases.

    Outcomes are either sampled (`seed`/`rng`) or forced (`branch`, one label
    per measurement in node-then-input order). On a verified scheme the
    returned state equals the input state on the target registers.
    """
    ring, q, k = scheme.ring, scheme.q, net.k
    if input_state.ring != ring or input_state.q != q:
        raise InstanceError("input state ring or width does not match the scheme")
    expected_regs = tuple(source_edge(i + 1) for i in range(k))
    if input_state.reg_ids != expected_regs:
        raise InstanceError(f"input state must live on registers {expected_regs}")

    if check_classical and not verify_solution(net, scheme):
        raise InvalidSchemeError(
            "the classical scheme does not solve the instance; "
            "fix it or skip the check to inspect the imperfect run"
        )

    node_order = _check_order(net, order)
    plans = _plans if _plans is not None else _build_plans(net, scheme)
    if tmap is None:
        tmap = transfer_coefficients(net, scheme)

    measured_nodes = [
        v for v in node_order if not (copy_skip and plans[v].copy_only)
    ]
    total_measurements = sum(len(plans[v].in_edges) for v in measured_nodes)
    if branch is not None:
        branch = tuple(int(b) for b in branch)
        if len(branch) != total_measurements:
            raise InstanceError(
                f"branch must list {total_measurements} outcome labels, got {len(branch)}"
            )
        if any(not 0 <= b < scheme.register_dim for b in branch):
            raise InstanceError("branch labels out of range")
        if rng is not None or seed is not None:
            raise InstanceError("give either a branch or a seed, not both")
    else:
        if rng is None:
            if seed is None:
                raise InstanceError("sampled mode needs a seed or rng")
            rng = np.random.default_rng(seed)

    log = MessageLog(
        q=q,
        ring_bits=max(1, math.ceil(math.log2(ring.cardinality))),
        policy="prune" if prune else "broadcast",
    )
    state = input_state
    cursor = 0
    for v in node_order:
        plan = plans[v]
        if copy_skip and plan.copy_only:
            state = _copy_skip_node(state, plan, max_entries)
            log.quantum_registers_sent += plan.real_out_count
            continue
        forced = None
        if branch is not None:
            forced = branch[cursor : cursor + len(plan.in_edges)]
            cursor += len(plan.in_edges)
        state, outcomes = encode_node(
            state, v, net, scheme, rng=rng, forced=forced, max_entries=max_entries
        )
        recipients = (
            _prune_recipients(net, tmap, v, plan.in_edges)
            if prune
            else tuple(range(1, k + 1))
        )
        log.entries.append(LogEntry(v, outcomes, recipients))
        log.quantum_registers_sent += plan.real_out_count

    targets = tuple(target_edge(i + 1) for i in range(k))
    if sorted(state.reg_ids) != sorted(targets):
        raise InstanceError(
            f"run left registers {state.reg_ids}, expected exactly {targets}"
        )
    state = state.reordered(targets)
    pre_correction = state

    phase_table = compute_corrections(log, tmap, scheme)
    for i in range(1, k + 1):
        state = apply_phase(state, target_edge(i), phase_table.phase_fn(i), sign=-1)

    return RunResult(
        state=state,
        pre_correction=pre_correction,
        log=log,
        phase_table=phase_table,
        node_order=node_order,
        branch=log.branch_labels(),
    )


@lru_cache(maxsize=None)
def _gamma_char_table(gamma) -> tuple[tuple[Fraction, ...], ...]:
    """Pairing of outcome a with gamma @ x for all basis labels: table[a][x]."""
    vectors = basis_vectors(gamma.spec, gamma.q)
    return tuple(
        tuple(vector_character(a, mat_vec(gamma, x)) for x in vectors) for a in vectors
    )


def compute_corrections(
    log: MessageLog, tmap: TransferMap, scheme: CodingScheme
) -> PhaseTable:
    """Tabulate the per-pair phase corrections from the logged outcomes.

    Measuring outcome a on a register whose content is sum_j gamma_j x_j
    contributes the pairing of a with gamma_j x_j to pair j's phase; the
    table for pair j is the exact mod-1 sum of those contributions over
    every measurement, evaluated at each basis label.
    """
    ring, q = scheme.ring, scheme.q
    k = len(tmap.gammas[target_edge(1)]) if tmap.gammas else 0
    for outcome in log.all_outcomes():
        if outcome.register not in tmap.gammas:
            raise InstanceError(
                f"measured register {outcome.register!r} has no transfer coefficients"
            )
    dim = ring.cardinality**q
    tables = []
    for j in range(k):
        rows = [
            _gamma_char_table(tmap.gammas[o.register][j])[o.label]
            for o in log.all_outcomes()
            if not tmap.gammas[o.register][j].is_zero()
        ]
        table = {
            x: frac_mod1(sum((row[x] for row in rows), Fraction(0)))
            for x in range(dim)
        }
        tables.append(table)
    return PhaseTable(ring=ring, q=q, tables=tuple(tables))


@dataclass(frozen=True)
class CostReport:
    k: int
    max_fan_in: int
    node_count: int
    edge_count: int
    q: int
    bound_elements: int
    bound_bits: int
    elements_sent: int
    bits_sent: int
    quantum_registers_sent: int
    policy: str
    per_node: tuple[tuple[str, int, int, int], ...]  # node, measured, recipients, elements


def classical_cost(log: MessageLog, net: Network, scheme: CodingScheme) -> CostReport:
    """Compare the classical traffic of a completed run against k * M * |V|."""
    k, M, V = net.k, net.max_fan_in, len(net.nodes)
    bound_elements = k * M * V * scheme.q
    bound_bits = bound_elements * log.ring_bits
    per_node = tuple(
        (
            e.node,
            len(e.outcomes),
            len(e.recipients),
            len(e.outcomes) * len(e.recipients) * scheme.q,
        )
        for e in log.entries
    )
    report = CostReport(
        k=k,
        max_fan_in=M,
        node_count=V,
        edge_count=len(net.edges),
        q=scheme.q,
        bound_elements=bound_elements,
        bound_bits=bound_bits,
        elements_sent=log.elements_sent,
        bits_sent=log.bits_sent,
        quantum_registers_sent=log.quantum_registers_sent,
        policy=log.policy,
        per_node=per_node,
    )
    if log.policy == "broadcast" and report.elements_sent > bound_elements:
        raise RuntimeError(
            f"broadcast run sent {report.elements_sent} elements, above the "
            f"bound {bound_elements}; the simulation is inconsistent"
        )
    return report


def _measurement_count(plans: dict[str, _NodePlan], copy_skip: bool) -> int:
    return sum(
        len(p.in_edges) for p in plans.values() if not (copy_skip and p.copy_only)
    )


def count_branches(net: Network, scheme: CodingScheme, copy_skip: bool = False) -> int:
    plans = _build_plans(net, scheme)
    return scheme.register_dim ** _measurement_count(plans, copy_skip)


def enumerate_branches(
    net: Network,
    scheme: CodingScheme,
    input_state: StateVector,
    max_branches: int = BRANCH_CAP_DEFAULT,
    prune: bool = False,
    copy_skip: bool = False,
    max_entries: int = MAX_STATE_ENTRIES,
):
    """Yield a BranchResult for every outcome assignment, forced in turn.

    Branches whose forced outcome is impossible in the current state (this
    can only happen for schemes that are not solutions) are yielded with a
    None result. The classical solution check is not run here; combine with
    `verify_solution` when a verdict is needed.
    """
    plans = _build_plans(net, scheme)
    tmap = transfer_coefficients(net, scheme)
    d = scheme.register_dim
    n_meas = _measurement_count(plans, copy_skip)
    total = d**n_meas
    if total > max_branches:
        raise CapExceededError(
            f"{total} branches exceed the cap of {max_branches}; "
            f"raise max_branches to force full enumeration"
        )
    for labels in itertools.product(range(d), repeat=n_meas):
        try:
            result = run_protocol(
                net,
                scheme,
                input_state,
                branch=labels,
                prune=prune,
                copy_skip=copy_skip,
                check_classical=False,
                tmap=tmap,
                max_entries=max_entries,
                _plans=plans,
            )
        except ZeroProbabilityError:
            yield BranchResult(branch=labels, result=None, fidelity=None)
            continue
        yield BranchResult(
            branch=labels,
            result=result,
            fidelity=fidelity(input_state, result.state),
        )
