"""Command-line front end: key-rate accounting, protocol runs, verification.

Exit codes: 0 success, 2 protocol abort, 3 config error, 4 verification
failure.  Every report carries the seed actually used, so any run can be
replayed byte-identically (timing aside) by passing ``--seed`` back in.
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from delayedpa import reports
from delayedpa.protocols import (
    Bb84Config,
    DqkdConfig,
    IntegratedConfig,
    RelayConfig,
    key_length,
    run_bb84,
    run_dqkd,
    run_integrated,
    run_relay,
    two_way_rate_single_line,
)
from delayedpa.suites import (
    suite_delayed_pa,
    suite_preimage_uniformity,
    suite_protocol_2c2d,
    suite_table1,
)

EXIT_OK = 0
EXIT_ABORT = 2
EXIT_CONFIG = 3
EXIT_VERIFY_FAILED = 4

SUITES = ("table1", "preimage-uniformity", "protocol-2c2d", "delayed-pa")


class _Parser(argparse.ArgumentParser):
    # distinguish usage/config problems (3) from protocol aborts (2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fresh_seed() -> int:
    return random.SystemRandom().randrange(2**32)


def _emit(report: dict, out_path: str | None) -> None:
    text = reports.dumps(report)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> _Parser:
    parser = _Parser(prog="delayedpa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    kr = sub.add_parser("keyrate", help="two-way key-length ledger from error rates")
    kr.add_argument("--n", type=int, required=True)
    kr.add_argument("--eb-roundtrip", type=float, required=True, dest="eb_roundtrip")
    kr.add_argument("--ep", type=float, required=True)
    kr.add_argument("--eb-single", type=float, dest="eb_single",
                    help="also evaluate the correlated-lines rate 1 - h(2e_b) - h(e_p)")
    kr.add_argument("--out")

    sim = sub.add_parser("simulate", help="run a seeded protocol simulation")
    sim.add_argument("protocol", choices=reports.PROTOCOLS)
    sim.add_argument("--config", help="JSON config document; flags override its fields")
    sim.add_argument("--n", type=int)
    sim.add_argument("--n-test", type=int, dest="n_test")
    sim.add_argument("--noise-fwd", dest="noise_fwd", help="forward channel, e.g. bsc:0.02")
    sim.add_argument("--noise-bwd", dest="noise_bwd", help="backward channel")
    sim.add_argument("--eve", help="none or intercept-resend[:forward,backward]")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--pa-seed", dest="pa_seed", help="fixed hash seed as BITS:HEX")
    sim.add_argument("--check-fraction", type=float, dest="check_fraction")
    sim.add_argument("--pool", type=int, help="relay: pre-shared pool size")
    sim.add_argument("--normal-scheme", action="store_true", dest="normal_scheme",
                     help="relay: pad with the hashed key instead of delaying")
    sim.add_argument("--no-quantum-memory", action="store_true", dest="no_quantum_memory")
    sim.add_argument("--out")

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("--suite", choices=SUITES, required=True)
    ver.add_argument("--n", type=int, help="delayed-pa: max input width (default 4); preimage-uniformity: input width (default 8)")
    ver.add_argument("--npa", type=int, help="delayed-pa: max output width (default 2); preimage-uniformity: output width (default 3)")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--abar-dim", type=int, default=8, dest="abar_dim")
    ver.add_argument("--draws", type=int, default=32000)
    ver.add_argument("--alpha", type=float, default=0.001)
    ver.add_argument("--quantum-trials", type=int, default=50, dest="quantum_trials")
    ver.add_argument("--quantum-n", type=int, default=3, dest="quantum_n")
    ver.add_argument("--quantum-dim", type=int, default=4, dest="quantum_dim")
    ver.add_argument("--eve-bank", dest="eve_bank")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--out")
    return parser


def _cmd_keyrate(args) -> int:
    start = time.perf_counter()
    try:
        ledger = key_length(args.n, args.eb_roundtrip, args.ep)
        single = None
        if args.eb_single is not None:
            single = two_way_rate_single_line(args.eb_single, args.ep)
    except ValueError as exc:
        print(f"delayedpa keyrate: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = reports.keyrate_report(
        args.n, args.eb_roundtrip, args.ep, ledger, single, time.perf_counter() - start
    )
    _emit(report, args.out)
    return EXIT_ABORT if ledger.abort else EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        doc = reports.config_doc_from_args(args.protocol, args)
        if "seed" not in doc:
            doc["seed"] = _fresh_seed()
        cfg = reports.build_config(doc)
    except (ValueError, OSError, KeyError) as exc:
        print(f"delayedpa simulate: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    start = time.perf_counter()
    try:
        if isinstance(cfg, Bb84Config):
            result = run_bb84(cfg)
        elif isinstance(cfg, DqkdConfig):
            result = run_dqkd(cfg)
        elif isinstance(cfg, IntegratedConfig):
            result = run_integrated(cfg)
        else:
            result = run_relay(cfg)
    except ValueError as exc:
        print(f"delayedpa simulate: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seconds = time.perf_counter() - start
    if isinstance(cfg, RelayConfig):
        report = reports.relay_report(result, doc, seconds)
    else:
        report = reports.transcript_report(result, doc, seconds)
    _emit(report, args.out)
    return EXIT_ABORT if report["abort"] else EXIT_OK


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _fresh_seed()
    start = time.perf_counter()
    try:
        if args.suite == "table1":
            payload, passed = suite_table1()
        elif args.suite == "preimage-uniformity":
            payload, passed = suite_preimage_uniformity(
                n=args.n if args.n is not None else 8,
                n_pa=args.npa if args.npa is not None else 3,
                draws=args.draws, alpha=args.alpha, seed=seed,
            )
        elif args.suite == "protocol-2c2d":
            payload, passed = suite_protocol_2c2d(
                trials=args.trials, abar_dim=args.abar_dim, seed=seed
            )
        else:
            payload, passed = suite_delayed_pa(
                n=args.n if args.n is not None else 4,
                n_pa=args.npa if args.npa is not None else 2,
                eve_bank_path=args.eve_bank,
                quantum_trials=args.quantum_trials, quantum_n=args.quantum_n,
                quantum_dim=args.quantum_dim, seed=seed,
            )
    except (ValueError, OSError) as exc:
        print(f"delayedpa verify: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = reports.verify_report(args.suite, seed, passed, payload, time.perf_counter() - start)
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "keyrate":
        return _cmd_keyrate(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
