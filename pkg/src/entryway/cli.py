"""Command-line interface: dataset synthesis, training, evaluation, distance
sweep, scenario replay, and the HTTP service.

Exit codes: 0 success, 2 validation/usage failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evalkit, lbph, registry, synth
from .controller import Config, load_config
from .devices import DoorRig, PipelineRecognizer, load_scenario
from .errors import EntrywayError
from .lbph import Mode
from .occlusion import annotation_detector, extract_roi, union_eyes_nose
from .pgm import load_pgm
from .registry import MODEL_FILENAMES

DESK_USERS = {"alice": 11, "bob": 12, "cara": 13, "dian": 14}
DESK_IMPOSTORS = {"visitor1": 101, "visitor2": 102}


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


# -- synth ----------------------------------------------------------------------


def cmd_synth(args) -> int:
    root = Path(args.root)
    users = dict(list(DESK_USERS.items())[: args.users])
    synth.generate_dataset(root, users, frames_per_user=args.frames)
    probe_dir = root / "probes"
    impostors = dict(list(DESK_IMPOSTORS.items())[: args.impostors])
    synth.generate_probe_set(probe_dir, impostors, args.probe_count, noise_sigma=3.0)
    synth.generate_probe_set(probe_dir, users, args.probe_count, masked=True, noise_sigma=3.0)
    lines = ["\t".join(evalkit.MANIFEST_HEADER)]
    for user_id in sorted(users):
        manifest = (root / user_id / "manifest.tsv").read_text().splitlines()
        for row in manifest:
            stem, expression, split = row.split("\t")
            if split == "holdout":
                lines.append(f"{user_id}/{stem}.pgm\t{user_id}\t{expression}\t0\t1")
    for user_id in sorted(impostors):
        for k in range(args.probe_count):
            expression = synth.EXPRESSIONS[k % len(synth.EXPRESSIONS)]
            lines.append(f"probes/{user_id}_p{k:03d}.pgm\t{user_id}\t{expression}\t0\t0")
    for user_id in sorted(users):
        for k in range(args.probe_count):
            expression = synth.EXPRESSIONS[k % len(synth.EXPRESSIONS)]
            lines.append(f"probes/{user_id}_m{k:03d}.pgm\t{user_id}\t{expression}\t1\t1")
    (root / "eval_manifest.tsv").write_text("\n".join(lines) + "\n")
    print(f"dataset at {root}: {len(users)} users x {args.frames} frames, "
          f"{len(impostors)} impostors, manifest eval_manifest.tsv")
    return 0


# -- train ------------------------------------------------------------------------


def _dataset_samples(root: Path, exclude_holdout: bool):
    detector = annotation_detector(root)
    full, occ = [], []
    users = sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith("_")
                   and p.name != "probes")
    if not users:
        raise EntrywayError(f"no user directories under {root}")
    for user_dir in users:
        holdout: set[str] = set()
        manifest = user_dir / "manifest.tsv"
        if exclude_holdout and manifest.exists():
            for row in manifest.read_text().splitlines():
                fields = row.split("\t")
                if len(fields) >= 3 and fields[2] == "holdout":
                    holdout.add(fields[0])
        for image_path in sorted(user_dir.glob("*.pgm")):
            if image_path.stem in holdout:
                continue
            img = load_pgm(image_path)
            lm = detector.detect(img)
            if lm.face is not None:
                full.append((user_dir.name, extract_roi(img, lm.face, lbph.FULL_FACE_SIZE)))
            lm = lm.ordered_eyes()
            if lm.eye1 is not None and lm.eye2 is not None:
                box = union_eyes_nose(lm.eye1, lm.eye2, lm.nose)
                occ.append((user_dir.name, extract_roi(img, box, lbph.OCCLUDED_SIZE)))
                if lm.nose is not None:
                    # also enroll the eyes-only crop for the nose-hidden fallback
                    eyes = union_eyes_nose(lm.eye1, lm.eye2, None)
                    occ.append((user_dir.name, extract_roi(img, eyes, lbph.OCCLUDED_SIZE)))
    return full, occ


def cmd_train(args) -> int:
    root = Path(args.dataset)
    if not root.is_dir():
        return _fail(f"dataset root {root} is not a directory")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    full, occ = _dataset_samples(root, args.exclude_holdout)
    mf = lbph.train(full, mode=Mode.FULL_FACE)
    mo = lbph.train(occ, mode=Mode.OCCLUDED)
    lbph.save_model_file(out / MODEL_FILENAMES[Mode.FULL_FACE], mf)
    lbph.save_model_file(out / MODEL_FILENAMES[Mode.OCCLUDED], mo)
    print(f"trained full_face ({len(mf)} entries) and occluded ({len(mo)} entries) -> {out}")
    return 0


def _load_models(models_dir: Path, which: str) -> dict[Mode, lbph.RecognizerModel]:
    modes = {"full": [Mode.FULL_FACE], "occluded": [Mode.OCCLUDED],
             "both": [Mode.FULL_FACE, Mode.OCCLUDED]}[which]
    models = {}
    for mode in modes:
        path = models_dir / MODEL_FILENAMES[mode]
        if not path.exists():
            raise EntrywayError(f"missing model file {path}")
        models[mode] = lbph.load_model_file(path)
    return models


# -- eval ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        return _fail(f"manifest {manifest_path} not found")
    rows = evalkit.load_manifest(manifest_path)
    models = _load_models(Path(args.models), args.mode)
    image_root = Path(args.image_root) if args.image_root else manifest_path.parent
    detector = annotation_detector(image_root)
    config = load_config(args.config) if args.config else Config()
    report = evalkit.run_suite(rows, models, detector, config, image_root=image_root)
    print(evalkit.render_text(report, config), end="")
    if args.report:
        Path(args.report).write_text(evalkit.render_csv(report))
        print(f"trial CSV written to {args.report}")
    return 0


def cmd_sweep(args) -> int:
    image_path = Path(args.image)
    if not image_path.exists():
        return _fail(f"image {image_path} not found")
    mode = Mode.FULL_FACE if args.mode == "full" else Mode.OCCLUDED
    models = _load_models(Path(args.models), "full" if mode is Mode.FULL_FACE else "occluded")
    detector = annotation_detector(image_path.parent)
    config = load_config(args.config) if args.config else Config()
    scales = [float(s) for s in args.scales]
    points = evalkit.distance_sweep(load_pgm(image_path), models[mode], detector, scales, config)
    print(evalkit.render_sweep(points), end="")
    return 0


# -- scenario runner ----------------------------------------------------------------


def cmd_run(args) -> int:
    scenario_path = Path(args.scenario)
    if not scenario_path.exists():
        return _fail(f"scenario {scenario_path} not found")
    pins = {}
    for spec in args.pin:
        user, sep, pin = spec.partition("=")
        if not sep:
            return _fail(f"--pin expects user=digits, got {spec!r}")
        pins[user] = pin
    config = load_config(args.config) if args.config else Config()
    recognize = None
    if args.models:
        models = _load_models(Path(args.models), "both")
        detector = annotation_detector(Path(args.images) if args.images else scenario_path.parent)
        recognize = PipelineRecognizer(models, detector)
    rig = DoorRig(
        config,
        pins,
        recognize=recognize,
        image_root=args.images or scenario_path.parent,
        photo_dir=args.photos,
    )
    trace = rig.run_scenario(load_scenario(scenario_path.read_text()))
    print(trace, end="")
    return 0


# -- service ----------------------------------------------------------------------------


def cmd_serve(args) -> int:
    from .registry import UserStore
    from .service import ServiceState, run_server

    store_path = Path(args.store)
    if store_path.exists():
        store = UserStore.load(store_path)
    else:
        store = UserStore(store_path, dataset_root=args.datasets)
        store.save()
    recognize = None
    if args.models:
        models = _load_models(Path(args.models), "both")
        detector = annotation_detector(Path(args.images) if args.images else store.dataset_root)
        recognize = PipelineRecognizer(models, detector)
    config = load_config(args.config) if args.config else Config()
    rig = DoorRig(config, store.pins(), recognize=recognize,
                  image_root=args.images, photo_dir=args.photos)
    state = ServiceState(rig, store, admin_token=args.token, static_dir=args.static)
    run_server(state, args.host, args.port)
    return 0


# -- parser -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entryway", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the deterministic desk dataset")
    p.add_argument("root")
    p.add_argument("--users", type=int, default=4, choices=range(1, 5))
    p.add_argument("--frames", type=int, default=150)
    p.add_argument("--impostors", type=int, default=2, choices=range(0, 3))
    p.add_argument("--probe-count", type=int, default=30)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train both mode models from a dataset tree")
    p.add_argument("dataset")
    p.add_argument("out")
    p.add_argument("--exclude-holdout", action="store_true",
                   help="skip frames tagged holdout in per-user manifests")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the evaluation suite over a manifest")
    p.add_argument("manifest")
    p.add_argument("models")
    p.add_argument("--mode", choices=["full", "occluded", "both"], default="both")
    p.add_argument("--report", help="write per-trial CSV here")
    p.add_argument("--image-root")
    p.add_argument("--config")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="resolution-loss distance sweep on one image")
    p.add_argument("image")
    p.add_argument("models")
    p.add_argument("--scales", nargs="+", required=True)
    p.add_argument("--mode", choices=["full", "occluded"], default="full")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("run", help="replay a scenario file and print the trace")
    p.add_argument("scenario")
    p.add_argument("--pin", action="append", default=[], metavar="USER=DIGITS")
    p.add_argument("--config")
    p.add_argument("--models")
    p.add_argument("--images")
    p.add_argument("--photos")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--store", default="store.json")
    p.add_argument("--datasets")
    p.add_argument("--models")
    p.add_argument("--images")
    p.add_argument("--photos")
    p.add_argument("--config")
    p.add_argument("--static", help="serve console files from this directory")
    p.add_argument("--token", help="admin token (default: ENTRYWAY_ADMIN_TOKEN or random)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EntrywayError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
