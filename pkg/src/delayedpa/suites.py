"""Verification suites behind ``delayedpa verify``.

Each suite returns ``(payload, passed)``: a JSON-ready payload of the
measured deviations plus the overall pass flag at the suite's pinned
tolerances.
"""

from __future__ import annotations

import random

import numpy as np
from scipy import stats

from delayedpa.gf2 import BinaryMatrix, BitVector, matvec, row_reduce, sample_preimage
from delayedpa.protocols import decode_key_bit
from delayedpa.quantum import basis_ket, pauli, random_pure_state, build_2d_state, verify_2c_2d
from delayedpa.security import (
    MAX_QUANTUM_N,
    delayed_pa_epsilons_quantum,
    load_eve_bank,
    random_eve_states,
    sweep_delayed_pa,
)

__all__ = [
    "suite_table1",
    "suite_preimage_uniformity",
    "suite_protocol_2c2d",
    "suite_delayed_pa",
]

CLASSICAL_GAP_TOL = 1e-12
QUANTUM_GAP_TOL = 1e-9
EQUIV_TOL = 1e-10
SWAP_TOL = 1e-12


def suite_table1() -> tuple[dict, bool]:
    """Exhaustive one-signal round trips against the encoding table.

    Independent route: numpy Pauli matrices and basis kets rather than the
    simulator's fast path.
    """
    cases = []
    for basis in ("x", "z"):
        for op in ("I", "X", "Y", "Z"):
            expected = decode_key_bit(basis, op)
            ok = True
            for bob_bit in (0, 1):
                state = pauli(op) @ basis_ket(bob_bit, basis)
                probs = [abs(np.vdot(basis_ket(o, basis), state)) ** 2 for o in (0, 1)]
                deterministic = max(probs) > 1.0 - 1e-12
                outcome = 0 if probs[0] > probs[1] else 1
                ok = ok and deterministic and (outcome ^ bob_bit) == expected
            cases.append({"basis": basis, "op": op, "expected_bit": expected, "pass": ok})
    passed = all(c["pass"] for c in cases)
    return {"cases": cases, "passed_cases": sum(c["pass"] for c in cases), "total_cases": 8}, passed


def suite_preimage_uniformity(
    n: int = 8, n_pa: int = 3, draws: int = 32000, alpha: float = 0.001, seed: int = 0
) -> tuple[dict, bool]:
    """Chi-square goodness of fit of the preimage sampler against uniform."""
    if n > 12:
        raise ValueError("limits exceeded: uniformity suite enumerates up to n = 12")
    if not 1 <= n_pa < n:
        raise ValueError("need 1 <= n_pa < n")
    rng = random.Random(seed)
    while True:
        matrix = BinaryMatrix.random(n_pa, n, rng)
        if row_reduce(matrix).rank == n_pa:
            break
    y = BitVector.random(n_pa, rng)
    preimage = sorted(
        v for v in range(1 << n) if matvec(matrix, BitVector(n, v)) == y
    )
    reduction = row_reduce(matrix)
    counts = dict.fromkeys(preimage, 0)
    stray = 0
    for _ in range(draws):
        x = sample_preimage(matrix, y, rng, reduction=reduction).bits
        if x in counts:
            counts[x] += 1
        else:
            stray += 1
    result = stats.chisquare([counts[v] for v in preimage])
    passed = bool(stray == 0 and result.pvalue >= alpha)
    payload = {
        "n": n,
        "n_pa": n_pa,
        "draws": draws,
        "cells": len(preimage),
        "chi2": float(result.statistic),
        "p_value": float(result.pvalue),
        "alpha": alpha,
        "samples_outside_preimage": stray,
    }
    return payload, passed


def suite_protocol_2c2d(trials: int = 100, abar_dim: int = 8, seed: int = 0) -> tuple[dict, bool]:
    """Random-state certificates for the 2c/2d marginal equality.

    Also checks the operator-order-swap identity for the no-measurement
    construction.
    """
    rng = np.random.default_rng(seed)
    max_dz = max_dx = max_swap = 0.0
    for _ in range(trials):
        dim = int(rng.integers(1, abar_dim + 1))
        psi = random_pure_state((2, dim), ("A", "Abar"), rng)
        dz, dx = verify_2c_2d(psi)
        swap = float(
            np.abs(build_2d_state(psi, "xz").mat - build_2d_state(psi, "zx").mat).max()
        )
        max_dz, max_dx, max_swap = max(max_dz, dz), max(max_dx, dx), max(max_swap, swap)
    passed = max(max_dz, max_dx) <= EQUIV_TOL and max_swap <= SWAP_TOL
    payload = {
        "trials": trials,
        "abar_dim": abar_dim,
        "max_delta_z": max_dz,
        "max_delta_x": max_dx,
        "max_order_swap": max_swap,
        "tolerance": EQUIV_TOL,
        "swap_tolerance": SWAP_TOL,
    }
    return payload, passed


def suite_delayed_pa(
    n: int = 4,
    n_pa: int = 2,
    eve_bank_path=None,
    quantum_trials: int = 50,
    quantum_n: int = 3,
    quantum_dim: int = 4,
    seed: int = 0,
) -> tuple[dict, bool]:
    """Security-equivalence sweep: exhaustive classical plus random quantum.

    Classical: every independent-row matrix up to (n, n_pa) against every
    bank model, gap tolerance 1e-12.  Quantum: random adversary state tables,
    gap tolerance 1e-9.
    """
    bank = load_eve_bank(eve_bank_path)
    classical = sweep_delayed_pa(n, n_pa, bank)

    if quantum_n > MAX_QUANTUM_N:
        raise ValueError("limits exceeded: quantum sweep supports n <= 4")
    rng = np.random.default_rng(seed)
    pyrng = random.Random(seed)
    q_max = 0.0
    for _ in range(quantum_trials):
        rows = pyrng.randint(1, min(2, quantum_n - 1))
        while True:
            matrix = BinaryMatrix.random(rows, quantum_n, pyrng)
            if row_reduce(matrix).rank == rows:
                break
        states = random_eve_states(quantum_n, quantum_dim, rng)
        eps_key, eps_msg = delayed_pa_epsilons_quantum(matrix, states)
        q_max = max(q_max, abs(eps_key - eps_msg))

    passed = classical["max_gap"] <= CLASSICAL_GAP_TOL and q_max <= QUANTUM_GAP_TOL
    payload = {
        "classical": {
            "max_n": n,
            "max_n_pa": n_pa,
            "cases": classical["cases"],
            "models": [entry["name"] for entry in bank],
            "max_gap": classical["max_gap"],
            "worst": classical["worst"],
            "tolerance": CLASSICAL_GAP_TOL,
        },
        "quantum": {
            "trials": quantum_trials,
            "n": quantum_n,
            "eve_dim": quantum_dim,
            "max_gap": q_max,
            "tolerance": QUANTUM_GAP_TOL,
        },
    }
    return payload, passed
