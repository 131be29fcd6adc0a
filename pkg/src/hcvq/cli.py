"""Command-line entry point: ``hcvq {train,compare,ph,gradcheck,export-diagram}``.

Exit codes: 0 success, 1 config or I/O error, 2 diverged training,
3 gradient check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import DivergedTraining, HCVQError
from .geometry import PointCloud, pairwise_distances
from .gradcheck import run_gradcheck
from .metrics import DEFAULT_WIDTH, diagram_signature
from .persistence import vr_persistence
from .runio import compare_runs, load_checkpoint, load_dataset, write_comparison, write_diagram, write_run
from .trainer import train

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_GRADCHECK = 0, 1, 2, 3

log = logging.getLogger("hcvq")


def _common(p: argparse.ArgumentParser, out_default: str | None = "runs/latest") -> None:
    p.add_argument("--config", metavar="PATH", help="flat key = value config file")
    p.add_argument("--set", dest="overrides", metavar="KEY=VALUE", action="append", default=[],
                   help="override one config key (repeatable)")
    p.add_argument("--out", metavar="DIR", default=out_default, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcvq", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("train", help="train one VQ autoencoder"))
    _common(sub.add_parser("compare", help="train dry and HC-VQ arms from the same seed"))
    _common(sub.add_parser("gradcheck", help="finite-difference checks of all gradients"), out_default=None)

    ph = sub.add_parser("ph", help="persistence diagram and signature of a CSV point cloud")
    ph.add_argument("cloud_csv")
    ph.add_argument("--width", type=float, default=DEFAULT_WIDTH, help="soft Betti gaussian width")
    ph.add_argument("--out", metavar="DIR", default=None, help="also write diagram.jsonl here")

    ex = sub.add_parser("export-diagram", help="write a diagram as JSON lines")
    src = ex.add_mutually_exclusive_group(required=True)
    src.add_argument("--checkpoint", metavar="PATH", help="use the codebook of a checkpoint")
    src.add_argument("--cloud", metavar="CSV", help="use a CSV point cloud")
    ex.add_argument("--out", metavar="DIR", default=None, help="write DIR/diagram.jsonl instead of stdout")
    return parser


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.overrides)
    dataset = load_dataset(cfg)
    result = train(cfg, dataset)
    out = write_run(args.out, cfg, dataset, result)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config, args.overrides)
    dataset = load_dataset(cfg)
    report = compare_runs(cfg, dataset)
    path = write_comparison(args.out, cfg, dataset, report)
    print(json.dumps(report.difference, indent=2, sort_keys=True))
    print(f"wrote {path}")
    return EXIT_OK


def cmd_ph(args) -> int:
    cloud = PointCloud.from_csv(args.cloud_csv)
    diagram = vr_persistence(pairwise_distances(cloud), max_dim=1)
    sig, _ = diagram_signature(cloud, diagram, args.width)
    payload = {"pairs": [p.to_json() for p in diagram.pairs], **sig.to_dict()}
    print(json.dumps(payload))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_diagram(out / "diagram.jsonl", diagram)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    cfg = load_config(args.config, args.overrides)
    report = run_gradcheck(cfg)
    print(report.table())
    for r in report.failures():
        print(f"gradcheck failed: {r.suite}/{r.metric} max relative error {r.max_rel_error:.3e} "
              f"> {r.tol:.0e} (case {r.worst_case}, point index {r.worst_index})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_GRADCHECK


def cmd_export_diagram(args) -> int:
    if args.checkpoint:
        cloud = PointCloud(load_checkpoint(args.checkpoint)["codebook"])
    else:
        cloud = PointCloud.from_csv(args.cloud)
    diagram = vr_persistence(pairwise_distances(cloud), max_dim=1)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_diagram(out / "diagram.jsonl", diagram)
    else:
        sys.stdout.write(diagram.to_jsonl())
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "compare": cmd_compare,
    "ph": cmd_ph,
    "gradcheck": cmd_gradcheck,
    "export-diagram": cmd_export_diagram,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except DivergedTraining as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (HCVQError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
