#!/usr/bin/env python3
"""Step through the butterfly run node by node for a chosen branch.

Prints the live registers and nonzero amplitudes after every node, then the
correction tables and the final comparison with the input. Useful for seeing
where each measurement phase enters and how the targets cancel it.

    python3 scripts/butterfly_walkthrough.py --branch 101100110
"""

import argparse
from pathlib import Path

import numpy as np

from qnetcode.network import parse_network, transfer_coefficients
from qnetcode.protocol import compute_corrections, encode_node, LogEntry, MessageLog
from qnetcode.quantum import apply_phase, fidelity, init_state

INSTANCE = Path(__file__).resolve().parent.parent / "instances" / "butterfly_f2.json"


def show_state(state, note):
    print(f"  {note}")
    print(f"    registers: {' '.join(state.reg_ids)}")
    for idx in np.ndindex(*state.amps.shape):
        amp = state.amps[idx]
        if abs(amp) > 1e-12:
            ket = "".join(str(v) for v in idx)
            print(f"    |{ket}>  {amp.real:+.4f}{amp.imag:+.4f}i")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--branch", default="000000000", help="nine outcome labels")
    parser.add_argument(
        "--amps",
        default="0.5,0.5,0.5,0.5",
        help="four comma-separated real amplitudes for |00>,|01>,|10>,|11>",
    )
    args = parser.parse_args()
    branch = [int(ch) for ch in args.branch]
    amps = [float(tok) for tok in args.amps.split(",")]

    net, scheme = parse_network(INSTANCE)
    state = init_state(scheme.ring, scheme.q, net.k, amps)
    print(f"instance: {INSTANCE.name}, branch {args.branch}")
    show_state(state, "input on the source registers")

    log = MessageLog(q=scheme.q, ring_bits=1, policy="broadcast")
    cursor = 0
    for node in net.topo_order:
        width = len(net.node_inputs[node])
        forced = branch[cursor : cursor + width]
        cursor += width
        state, outcomes = encode_node(state, node, net, scheme, forced=forced)
        log.entries.append(LogEntry(node, outcomes, tuple(range(1, net.k + 1))))
        got = " ".join(f"{o.register}={o.label}" for o in outcomes)
        show_state(state, f"after {node} (outcomes {got})")

    tmap = transfer_coefficients(net, scheme)
    table = compute_corrections(log, tmap, scheme)
    state = state.reordered(("tgt:1", "tgt:2"))
    for i in (1, 2):
        values = [str(table.tables[i - 1][x]) for x in range(scheme.register_dim)]
        print(f"  correction h_{i}: {values}")
        state = apply_phase(state, f"tgt:{i}", table.phase_fn(i), sign=-1)
    show_state(state, "after corrections")

    reference = init_state(scheme.ring, scheme.q, net.k, amps)
    print(f"fidelity with the input: {fidelity(reference, state):.12f}")


if __name__ == "__main__":
    main()
