"""Run artifacts: metrics CSV, manifest, checkpoint and diagram files.

Checkpoint layout (all integers little-endian)::

    offset 0   4 bytes  magic b"HCVQ"
    offset 4   uint32   format version (1)
    offset 8   uint64   byte offset of the shape table
    offset 16           float32 data of every parameter, concatenated in
                        shape-table order, C-contiguous
    table      uint32   number of entries, then per entry:
                        uint16 name length, UTF-8 name, uint8 ndim,
                        ndim x uint32 dimensions
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import TrainConfig, flatten
from .data import Dataset, load_idx, synth_images
from .errors import ConfigError
from .persistence import BACKEND, PersistenceDiagram
from .trainer import PARAM_NAMES, TrainResult, records_to_csv, train

MAGIC = b"HCVQ"
VERSION = 1
HEADER = struct.Struct("<4sIQ")


def save_checkpoint(path: str | Path, params: dict) -> None:
    table = bytearray(struct.pack("<I", len(PARAM_NAMES)))
    body = bytearray()
    for name in PARAM_NAMES:
        arr = np.ascontiguousarray(params[name], dtype="<f4")
        body += arr.tobytes()
        raw = name.encode()
        table += struct.pack("<H", len(raw)) + raw + struct.pack("<B", arr.ndim)
        table += struct.pack(f"<{arr.ndim}I", *arr.shape)
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, VERSION, HEADER.size + len(body)))
        fh.write(body)
        fh.write(table)


def load_checkpoint(path: str | Path) -> dict:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size:
        raise ValueError(f"{path}: file too short for a checkpoint header")
    magic, version, table_at = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad checkpoint magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    (count,) = struct.unpack_from("<I", raw, table_at)
    pos, data_at, params = table_at + 4, HEADER.size, {}
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", raw, pos)
        name = raw[pos + 2:pos + 2 + nlen].decode()
        pos += 2 + nlen
        (ndim,) = struct.unpack_from("<B", raw, pos)
        shape = struct.unpack_from(f"<{ndim}I", raw, pos + 1)
        pos += 1 + 4 * ndim
        size = int(np.prod(shape, dtype=np.int64))
        params[name] = np.frombuffer(raw, dtype="<f4", count=size, offset=data_at).reshape(shape).astype(np.float32)
        data_at += 4 * size
    return params


def load_dataset(config: TrainConfig) -> Dataset:
    dc = config.data
    if dc.source == "idx":
        if not dc.images:
            raise ConfigError("data.images must be set when data.source = idx")
        if not Path(dc.images).is_file():
            raise FileNotFoundError(f"dataset file not found: {dc.images}")
        if dc.labels and not Path(dc.labels).is_file():
            raise FileNotFoundError(f"label file not found: {dc.labels}")
        ds = load_idx(dc.images, dc.labels or None)
    else:
        ds = synth_images(dc.synthetic_n, config.seed)
    return ds.subset(dc.limit)


def manifest(config: TrainConfig, dataset: Dataset, **extra) -> dict:
    out = {
        "config": flatten(config),
        "seed": config.seed,
        "dataset": {"name": dataset.name, "checksum": dataset.checksum, "n_items": len(dataset),
                    "input_dim": dataset.input_dim},
        "batch_order_prng": "splitmix64",
        "ph_backend": BACKEND,
    }
    out.update(extra)
    return out


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_diagram(path: Path, diagram: PersistenceDiagram) -> None:
    write_text(path, diagram.to_jsonl())


def write_run(out_dir: str | Path, config: TrainConfig, dataset: Dataset, result: TrainResult) -> Path:
    """Write ``metrics.csv``, ``manifest.json``, ``model.ckpt``, ``diagram.jsonl``
    plus ``reg_weights.csv`` and ``usage_histograms.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "metrics.csv", records_to_csv(result.records))
    write_text(out / "manifest.json", _dump_json(manifest(config, dataset)))
    save_checkpoint(out / "model.ckpt", result.params)
    write_diagram(out / "diagram.jsonl", result.topology.diagram)
    write_text(out / "reg_weights.csv", "step,weight\n" + "".join(f"{s},{w!r}\n" for s, w in result.reg_weights))
    hist = "window_end_step," + ",".join(f"code_{k}" for k in range(config.n_codes)) + "\n"
    hist += "".join(f"{s}," + ",".join(str(int(c)) for c in counts) + "\n" for s, counts in result.usage_histograms)
    write_text(out / "usage_histograms.csv", hist)
    return out


@dataclass
class ArmSummary:
    e_z_final_mean: float
    persistent_entropy_final: float
    mu0_final: float
    beta1_soft_final: float
    recon_loss_final_mean: float
    codes_used_final_mean: float
    mu0_by_window: list = field(default_factory=list)
    positive_h1_pairs: int = 0

    @classmethod
    def from_result(cls, result: TrainResult, window: int) -> "ArmSummary":
        recs = result.records
        tail = recs[-window:]
        sig = result.topology.signature
        d = result.topology.diagram
        mu_windows = [float(np.mean([r.mu0 for r in recs[i:i + window]])) for i in range(0, len(recs), window)]
        return cls(
            e_z_final_mean=float(np.mean([r.e_z for r in tail])),
            persistent_entropy_final=sig.persistent_entropy,
            mu0_final=sig.mu0,
            beta1_soft_final=sig.beta1_soft,
            recon_loss_final_mean=float(np.mean([r.recon_loss for r in tail])),
            codes_used_final_mean=float(np.mean([r.codes_used for r in tail])),
            mu0_by_window=mu_windows,
            positive_h1_pairs=int(np.sum(d.mask(1) & (d.persistence > 0))),
        )


DIFF_FIELDS = (
    "e_z_final_mean",
    "persistent_entropy_final",
    "mu0_final",
    "beta1_soft_final",
    "recon_loss_final_mean",
    "codes_used_final_mean",
)


@dataclass
class ComparisonReport:
    seed: int
    reg_lambda: float
    dry: ArmSummary
    hcvq: ArmSummary
    dry_result: TrainResult | None = None
    hcvq_result: TrainResult | None = None

    @property
    def difference(self) -> dict:
        """HC-VQ arm minus dry arm."""
        return {f: getattr(self.hcvq, f) - getattr(self.dry, f) for f in DIFF_FIELDS}

    @property
    def directional_pass(self) -> bool:
        return (
            self.hcvq.e_z_final_mean > self.dry.e_z_final_mean
            and self.hcvq.persistent_entropy_final >= self.dry.persistent_entropy_final
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "reg_lambda": self.reg_lambda,
            "arms": {"dry": vars(self.dry), "hcvq": vars(self.hcvq)},
            "difference": self.difference,
            "directional_pass": self.directional_pass,
            "final_diagrams": {"dry": "dry/diagram.jsonl", "hcvq": "hcvq/diagram.jsonl"},
        }


def arm_configs(config: TrainConfig) -> tuple[TrainConfig, TrainConfig]:
    import copy

    dry, active = copy.deepcopy(config), copy.deepcopy(config)
    dry.hcvq_enabled = False
    active.hcvq_enabled = True
    return dry, active


def compare_runs(config: TrainConfig, dataset: Dataset, callback=None) -> ComparisonReport:
    """Train the dry arm and the HC-VQ arm from the same seed and summarize both."""
    dry_cfg, hc_cfg = arm_configs(config)
    window = min(config.reg.window_k, config.steps)
    dry = train(dry_cfg, dataset, callback)
    active = train(hc_cfg, dataset, callback)
    return ComparisonReport(
        seed=config.seed,
        reg_lambda=config.reg.lam,
        dry=ArmSummary.from_result(dry, window),
        hcvq=ArmSummary.from_result(active, window),
        dry_result=dry,
        hcvq_result=active,
    )


def write_comparison(out_dir: str | Path, config: TrainConfig, dataset: Dataset, report: ComparisonReport) -> Path:
    out = Path(out_dir)
    dry_cfg, hc_cfg = arm_configs(config)
    write_run(out / "dry", dry_cfg, dataset, report.dry_result)
    write_run(out / "hcvq", hc_cfg, dataset, report.hcvq_result)
    write_text(out / "comparison.json", _dump_json(report.to_dict()))
    return out / "comparison.json"
