"""Report documents, config documents, digests, and sweep CSV rows.

Reports are plain dicts serialized with sorted keys so that replaying a run
with its printed seed reproduces the bytes exactly (the ``timing`` field is
the one documented exception).
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict

from delayedpa.gf2 import BitVector
from delayedpa.protocols import (
    Bb84Config,
    ChannelModel,
    DqkdConfig,
    ErrorEstimate,
    EveModel,
    IntegratedConfig,
    KeyLedger,
    ProtocolTranscript,
    RelayConfig,
    RelayTranscript,
)

__all__ = [
    "key_digest",
    "estimate_doc",
    "ledger_doc",
    "transcript_report",
    "relay_report",
    "keyrate_report",
    "verify_report",
    "dumps",
    "parse_pa_seed",
    "config_doc_from_args",
    "build_config",
    "ledger_csv_header",
    "ledger_csv_row",
    "write_sweep_csv",
]

PROTOCOLS = ("bb84", "dqkd", "integrated-2", "integrated-2b", "integrated-2c", "integrated-2d", "relay")


def key_digest(v: BitVector | None) -> str | None:
    """Hex SHA-256 of the key bits (length-prefixed, little-endian packing)."""
    if v is None:
        return None
    h = hashlib.sha256()
    h.update(v.length.to_bytes(8, "little"))
    h.update(v.to_bytes())
    return h.hexdigest()


def estimate_doc(est: ErrorEstimate | None) -> dict | None:
    return None if est is None else asdict(est)


def ledger_doc(ledger: KeyLedger | None) -> dict | None:
    return None if ledger is None else asdict(ledger)


def transcript_report(t: ProtocolTranscript, config_doc: dict, seconds: float) -> dict:
    return {
        "report_type": "simulate",
        "protocol": t.protocol,
        "seed": t.seed,
        "config": config_doc,
        "error_estimate": estimate_doc(t.estimate),
        "key_ledger": ledger_doc(t.ledger),
        "abort": t.abort,
        "abort_reason": t.abort_reason,
        "key_digest": key_digest(t.alice_key),
        "sift": {"sent": t.sift_sent, "retained": t.sift_retained},
        "pa_seed": None if t.pa_seed is None else {"bits": t.pa_seed.length, "hex": t.pa_seed.to_hex()},
        "timing": {"seconds": seconds},
    }


def relay_report(rt: RelayTranscript, config_doc: dict, seconds: float) -> dict:
    report = transcript_report(rt.qkd, config_doc, seconds)
    report.update(
        {
            "protocol": "relay",
            "scheme": rt.scheme,
            "abort": rt.abort or rt.qkd.abort,
            "abort_reason": rt.abort_reason or rt.qkd.abort_reason,
            "key_digest": key_digest(rt.bob_key),
            "bob_key_digest": key_digest(rt.bob_key),
            "charlie_key_digest": key_digest(rt.charlie_key),
            "pool_size": rt.pool_size,
            "pool_consumed": rt.pool_consumed,
        }
    )
    return report


def keyrate_report(n: int, e_roundtrip: float, e_p: float, ledger: KeyLedger,
                   single_line_rate: float | None, seconds: float) -> dict:
    return {
        "report_type": "keyrate",
        "n": n,
        "e_roundtrip": e_roundtrip,
        "e_p": e_p,
        "key_ledger": ledger_doc(ledger),
        "abort": ledger.abort,
        "single_line_rate": single_line_rate,
        "timing": {"seconds": seconds},
    }


def verify_report(suite: str, seed: int, passed: bool, payload: dict, seconds: float) -> dict:
    return {
        "report_type": "verify",
        "suite": suite,
        "seed": seed,
        "passed": passed,
        "payload": payload,
        "timing": {"seconds": seconds},
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------ configs

def parse_pa_seed(text: str) -> BitVector:
    """Parse a fixed ``BITS:HEX`` hash seed."""
    bits, sep, digits = text.partition(":")
    if not sep:
        raise ValueError("pa seed must look like BITS:HEX")
    return BitVector.from_hex(int(bits), digits)


def _channel_doc(ch: ChannelModel) -> dict:
    return {"kind": ch.kind, "param": ch.param}


def _channel_from_doc(doc) -> ChannelModel:
    if doc is None:
        return ChannelModel.noiseless()
    return ChannelModel(doc.get("kind", "noiseless"), float(doc.get("param", 0.0)))


def config_doc_from_args(protocol: str, args) -> dict:
    """Merge an optional config file with command-line overrides."""
    doc = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
    doc["protocol"] = protocol
    if getattr(args, "n", None) is not None:
        doc["n"] = args.n
    if getattr(args, "n_test", None) is not None:
        doc["n_test"] = args.n_test
    channels = doc.setdefault("channels", {})
    if getattr(args, "noise_fwd", None) is not None:
        channels["forward"] = _channel_doc(ChannelModel.parse(args.noise_fwd))
    if getattr(args, "noise_bwd", None) is not None:
        channels["backward"] = _channel_doc(ChannelModel.parse(args.noise_bwd))
    if getattr(args, "eve", None) is not None:
        model = EveModel.parse(args.eve)
        doc["eve"] = {"kind": model.kind, "lines": list(model.lines)}
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    if getattr(args, "pa_seed", None) is not None:
        seed = parse_pa_seed(args.pa_seed)
        doc["pa"] = {"seed": {"bits": seed.length, "hex": seed.to_hex()}}
    doc.setdefault("pa", {"seed": "auto"})
    if getattr(args, "check_fraction", None) is not None:
        doc["check_fraction"] = args.check_fraction
    if getattr(args, "pool", None) is not None:
        doc["pool"] = args.pool
    if getattr(args, "normal_scheme", False):
        doc["delayed"] = False
    if getattr(args, "no_quantum_memory", False):
        doc["quantum_memory"] = False
    return doc


def build_config(doc: dict):
    """Resolved run config dataclass for a config document."""
    protocol = doc.get("protocol")
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if "n" not in doc:
        raise ValueError("config needs n")
    n = int(doc["n"])
    n_test = int(doc.get("n_test", 256))
    seed = int(doc["seed"])
    channels = doc.get("channels", {})
    forward = _channel_from_doc(channels.get("forward"))
    backward = _channel_from_doc(channels.get("backward"))
    eve_doc = doc.get("eve", {"kind": "none", "lines": []})
    eve = EveModel(eve_doc.get("kind", "none"), tuple(eve_doc.get("lines", ())))
    pa_doc = doc.get("pa", {"seed": "auto"})
    pa_seed = None
    if isinstance(pa_doc.get("seed"), dict):
        pa_seed = BitVector.from_hex(int(pa_doc["seed"]["bits"]), pa_doc["seed"]["hex"])

    if protocol == "bb84":
        return Bb84Config(
            n=n, n_test=n_test, channel=forward, eve=eve, seed=seed,
            pa_seed=pa_seed, quantum_memory=bool(doc.get("quantum_memory", True)),
        )
    if protocol == "dqkd":
        return DqkdConfig(
            n=n, n_test=n_test,
            check_fraction=float(doc.get("check_fraction", 0.5)),
            forward=forward, backward=backward, eve=eve, seed=seed, pa_seed=pa_seed,
        )
    if protocol.startswith("integrated-"):
        return IntegratedConfig(
            variant=protocol.split("-", 1)[1], n=n, n_test=n_test,
            forward=forward, backward=backward, eve=eve, seed=seed, pa_seed=pa_seed,
        )
    return RelayConfig(
        n=n, pool_size=int(doc.get("pool", 4 * n)), n_test=n_test,
        channel=forward, seed=seed,
        delayed=bool(doc.get("delayed", True)), pa_seed=pa_seed,
    )


# ------------------------------------------------------------------ sweeps

_LEDGER_FIELDS = (
    "n", "n_test", "n_pa", "n_ec", "n_key",
    "preshared_consumed", "pool_consumed",
    "h_roundtrip", "h_ep", "h_eb", "abort",
)


def ledger_csv_header() -> list[str]:
    return ["protocol", "seed", *_LEDGER_FIELDS]


def ledger_csv_row(t: ProtocolTranscript) -> list:
    doc = ledger_doc(t.ledger) or {}
    return [t.protocol, t.seed, *[doc.get(f) for f in _LEDGER_FIELDS]]


def write_sweep_csv(transcripts, path) -> None:
    """One row per run with all ledger fields."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ledger_csv_header())
        for t in transcripts:
            writer.writerow(ledger_csv_row(t))
