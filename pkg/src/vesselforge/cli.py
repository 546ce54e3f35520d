"""Command-line front end: ``enhance``, ``eval``, ``phantom`` and ``sweep``.

Exit status is 0 on success, 1 for input or configuration errors and 2 for
numerical failures inside the pipeline. Log verbosity comes from the
``VESSELFORGE_LOG`` environment variable (``DEBUG``, ``INFO``, ``WARNING``...).

Manifest files hold one case per line: ``image_path,mask_path,case_id``.
Relative paths are resolved against the manifest's directory; blank lines
and lines starting with ``#`` are skipped.

Sweep CSV columns: ``value,mean_auc,mean_auc_baseline,mean_auc_delta``.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .evaluation import EvalReport, compare
from .imaging import ImageError, load_image, load_mask, rescale_to_range, save_image, save_raw
from .phantom import PhantomSpec, benchmark_suite, write_phantom
from .pipeline import ConfigError, PipelineConfig, StageError, enhance_full

log = logging.getLogger("vesselforge")


class InputError(Exception):
    """Bad path, manifest line or argument; reported with exit status 1."""


@dataclass(frozen=True)
class Case:
    image: Path
    mask: Path
    case_id: str


def read_manifest(path) -> List[Case]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"manifest not found: {path}")
    cases = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
                continue
            if len(row) != 3:
                raise InputError(f"{path}:{lineno}: expected image,mask,case_id")
            image, mask, case_id = (c.strip() for c in row)
            image_p, mask_p = path.parent / image, path.parent / mask
            for p in (image_p, mask_p):
                if not p.is_file():
                    raise InputError(f"{path}:{lineno}: file not found: {p}")
            cases.append(Case(image_p, mask_p, case_id))
    if not cases:
        raise InputError(f"manifest {path} lists no cases")
    ids = [c.case_id for c in cases]
    if len(set(ids)) != len(ids):
        raise InputError(f"manifest {path} has duplicate case ids")
    return cases


def write_manifest(cases: Sequence[Case], path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for c in cases:
            w.writerow([os.path.relpath(c.image, path.parent),
                        os.path.relpath(c.mask, path.parent), c.case_id])


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_overrides(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "--set expects key=value")
        out[key.strip()] = _parse_value(value.strip())
    return out


def build_config(args) -> PipelineConfig:
    config = PipelineConfig()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"config not found: {path}")
        config = PipelineConfig.from_json(path)
        log.info("loaded config %s", path)
    return config.with_overrides(parse_overrides(args.set))


def _eval_case(args):
    case, config = args
    try:
        image = load_image(case.image)
        mask = load_mask(case.mask)
    except ImageError as exc:
        raise InputError(f"{case.case_id}: {exc}") from exc
    if image.shape != mask.shape:
        raise InputError(f"{case.case_id}: image {case.image} and mask {case.mask} differ in size")
    return compare(image, mask, config, image_id=case.case_id, return_curves=True)


def _map(fn, items, jobs: int):
    # results always come back in input order
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _safe_name(case_id: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in case_id)


def cmd_enhance(args) -> int:
    config = build_config(args)
    src = Path(args.input)
    if not src.is_file():
        raise InputError(f"input not found: {src}")
    try:
        image = load_image(src)
    except ImageError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dump = Path(args.dump_subbands) if args.dump_subbands else None
    enhanced, vessels = enhance_full(image, config, dump_dir=dump)
    save_image(enhanced, out / "enhanced.pgm")
    save_image(rescale_to_range(vessels.values, 0.0, 255.0) if np.ptp(vessels.values) > 0
               else np.zeros_like(vessels.values), out / "vesselness.pgm")
    save_raw(vessels.values, out / "vesselness.raw")
    save_raw(vessels.argmax_sigma, out / "argmax_sigma.raw")
    log.info("wrote %s", out)
    return 0


def run_cases(cases, config, jobs):
    return _map(_eval_case, [(c, config) for c in cases], jobs)


def cmd_eval(args) -> int:
    config = build_config(args)
    cases = read_manifest(args.manifest)
    results = run_cases(cases, config, args.jobs)
    report_path = Path(args.out)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    roc_dir = report_path.parent / (report_path.stem + "_roc")
    roc_dir.mkdir(exist_ok=True)
    for record, roc_pipe, roc_base in results:
        name = _safe_name(record.image_id)
        roc_pipe.to_csv(roc_dir / f"{name}_pipeline.csv")
        roc_base.to_csv(roc_dir / f"{name}_baseline.csv")
    report = EvalReport([r[0] for r in results])
    report.to_json(report_path)
    agg = report.aggregate
    print(f"{agg['win_count']}/{agg['n_images']} wins, mean AUC delta {agg['mean_auc_delta']:+.4f}")
    return 0


def cmd_phantom(args) -> int:
    out = Path(args.out)
    if args.suite:
        cases = []
        for i, spec in enumerate(benchmark_suite(seed=args.seed if args.seed is not None else 2024)):
            image_p, mask_p = write_phantom(spec, out / f"case_{i:02d}")
            cases.append(Case(image_p, mask_p, f"case_{i:02d}"))
            (out / f"case_{i:02d}" / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2))
        write_manifest(cases, out / "manifest.csv")
        return 0
    if not args.spec:
        raise InputError("phantom needs a spec JSON file or --suite")
    path = Path(args.spec)
    if not path.is_file():
        raise InputError(f"phantom spec not found: {path}")
    try:
        spec = PhantomSpec.from_json(path)
        if args.seed is not None:
            spec = PhantomSpec.from_dict({**spec.to_dict(), "seed": args.seed})
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid phantom spec {path}: {exc}") from exc
    write_phantom(spec, out)
    return 0


def cmd_sweep(args) -> int:
    base = build_config(args)
    cases = read_manifest(args.manifest)
    values = [_parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise InputError("--values is empty")
    rows = []
    for value in values:
        config = base.with_overrides({args.param: value})
        records = [r[0] for r in run_cases(cases, config, args.jobs)]
        agg = EvalReport(records).aggregate
        rows.append((value, agg["mean_auc_pipeline"], agg["mean_auc_baseline"],
                     agg["mean_auc_delta"]))
        log.info("%s=%r mean AUC %.4f", args.param, value, agg["mean_auc_pipeline"])
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "mean_auc", "mean_auc_baseline", "mean_auc_delta"])
        for value, a_pipe, a_base, delta in rows:
            w.writerow([value, repr(a_pipe), repr(a_base), repr(delta)])
    return 0


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config field, e.g. frangi.beta=20 (repeatable)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="worker processes for eval/sweep")

    parser = argparse.ArgumentParser(prog="vesselforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", parents=[common], help="enhance one image")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dump-subbands", metavar="DIR", help="write NSCT planes as PGM")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("eval", parents=[common], help="pipeline vs Frangi-only AUC")
    p.add_argument("manifest")
    p.add_argument("--out", required=True, help="report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phantom", help="generate synthetic phantoms")
    p.add_argument("spec", nargs="?", help="PhantomSpec JSON")
    p.add_argument("--suite", action="store_true", help="write the 10-case benchmark suite")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the noise (or suite) seed")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("sweep", parents=[common], help="mean AUC over one parameter's values")
    p.add_argument("manifest")
    p.add_argument("--param", required=True, help="dotted config key, e.g. homomorphic.sigma_lpf")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def _setup_logging():
    level = os.environ.get("VESSELFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    _setup_logging()
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigError, ImageError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (StageError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
