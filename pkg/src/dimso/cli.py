"""Command-line entry point: ``dimso generate | sample | evaluate | bench | rerun``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import generator as dimso
from . import pca as pca_mod
from .data import Dataset, Standardizer, file_digest, load_csv, make_toy, write_csv
from .errors import DataError, PreconditionError
from .evaluation import run_protocol
from .smote import SmoteConfig

MANIFEST_SCHEMA_VERSION = 1
BUNDLE_FORMAT_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("dimso")


# --- argument parsing ------------------------------------------------------------

def _threshold(value: str):
    if value.lower() == "off":
        return None
    v = float(value)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must be 'off' or a value in (0, 1]")
    return v


def _add_dimso_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features-factor", type=float, default=3.5, help="noise dimensionality multiplier f")
    p.add_argument("--epochs", type=int, default=2000, help="training epochs")
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    p.add_argument("--samples-per-class", type=int, default=300, help="synthetic rows per class")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="dimso", description=__doc__, formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="fit the generator on a CSV and write synthetic data", formatter_class=fmt)
    g.add_argument("--input", required=True, help="input CSV with a header row")
    g.add_argument("--label-col", default="-1", help="label column name or index")
    g.add_argument("--loss", choices=["rae", "w", "wc"], default="rae", help="training loss")
    _add_dimso_args(g)
    g.add_argument("--pca-threshold", type=_threshold, default="off",
                   help="'off' or explained-variance fraction for generating in PCA space")
    g.add_argument("--seed", type=int, default=0, help="random seed")
    g.add_argument("--out", required=True, help="output CSV path")
    g.add_argument("--model-out", default=None, help="optional path for the fitted model bundle (.npz)")

    s = sub.add_parser("sample", help="regenerate synthetic data from a saved model bundle", formatter_class=fmt)
    s.add_argument("--model", required=True, help="model bundle written by 'generate --model-out'")
    s.add_argument("--out", required=True, help="output CSV path")

    e = sub.add_parser("evaluate", help="cross-validated similarity and classification comparison", formatter_class=fmt)
    e.add_argument("--input", required=True, help="input CSV with a header row")
    e.add_argument("--label-col", default="-1", help="label column name or index")
    e.add_argument("--generator", choices=["dimso-rae", "dimso-w", "dimso-wc", "smote", "identity"],
                   default="dimso-rae", help="synthetic data generator")
    e.add_argument("--classifier", choices=["gnb", "mlp"], default="gnb", help="classifier")
    e.add_argument("--pipeline", choices=["raw", "pca"], default="raw", help="feature space for generation")
    e.add_argument("--pca-threshold", type=float, default=0.70, help="explained variance for the pca pipeline")
    e.add_argument("--folds", type=int, default=5, help="number of stratified folds")
    _add_dimso_args(e)
    e.add_argument("--k-neighbors", type=int, default=5, help="SMOTE neighbors")
    e.add_argument("--seed", type=int, default=0, help="random seed")
    e.add_argument("--out-dir", required=True, help="directory for report files")

    b = sub.add_parser("bench", help="epochs and time needed to reach a target MMD", formatter_class=fmt)
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="input CSV (labels are ignored)")
    src.add_argument("--toy", choices=["clustered_cube"], help="use a generated toy dataset per repeat")
    b.add_argument("--label-col", default="-1", help="label column of --input, dropped before fitting")
    b.add_argument("--clusters", type=int, default=4, help="toy clusters")
    b.add_argument("--features", type=int, default=20, help="toy feature count")
    b.add_argument("--n", type=int, default=100, help="toy sample count")
    b.add_argument("--target-mmd", type=float, required=True, help="stop once MMD falls to this value")
    b.add_argument("--loss", choices=["rae", "w", "wc"], default="rae", help="training loss")
    b.add_argument("--features-factor", type=float, default=3.5, help="noise dimensionality multiplier f")
    b.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    b.add_argument("--samples", type=int, default=None, help="synthetic rows (default: as many as the data)")
    b.add_argument("--check-every", type=int, default=10, help="epochs between MMD checks")
    b.add_argument("--max-epochs", type=int, default=1000, help="epoch budget")
    b.add_argument("--repeats", type=int, default=10, help="independent repetitions")
    b.add_argument("--seed", type=int, default=0, help="seed of the first repetition")
    b.add_argument("--out-dir", default=None, help="directory for bench.json, bench.csv and mmd_trace.csv")

    r = sub.add_parser("rerun", help="repeat a generate/evaluate run from its manifest", formatter_class=fmt)
    r.add_argument("manifest", help="manifest JSON written by a previous run")
    r.add_argument("--out", default=None, help="new output CSV (generate runs)")
    r.add_argument("--out-dir", default=None, help="new output directory (evaluate runs)")
    r.add_argument("--model-out", default=None, help="new model bundle path (generate runs)")
    return parser


# --- manifests ---------------------------------------------------------------------

_PATH_KEYS = {"out", "out_dir", "model_out", "verbose", "command"}


def write_manifest(path, command: str, args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _PATH_KEYS}
    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "toolkit_version": __version__,
        "command": command,
        "seed": args.seed,
        "config": config,
        "input_sha256": file_digest(args.input) if getattr(args, "input", None) else None,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def _load_dataset(args) -> Dataset:
    return load_csv(args.input, label_column=args.label_col, header=True)


# --- commands ------------------------------------------------------------------------

def _dimso_config(args, loss: str = "rae") -> dimso.DimsoConfig:
    return dimso.DimsoConfig(
        features_factor=args.features_factor,
        epochs=args.epochs,
        learning_rate=args.lr,
        samples_per_class=args.samples_per_class,
        loss=loss,
        seed=args.seed,
    )


def save_bundle(path, model: dimso.DimsoModel, scaler: Standardizer, pca_model, dataset: Dataset) -> None:
    arrays, meta = dimso.model_arrays(model, prefix="dimso_")
    arrays["std_mean"] = scaler.mean
    arrays["std_scale"] = scaler.scale
    if pca_model is not None:
        arrays.update(pca_mod.model_arrays(pca_model))
    meta.update(
        format="dimso-bundle",
        version=BUNDLE_FORMAT_VERSION,
        has_pca=pca_model is not None,
        feature_names=dataset.feature_names,
        label_names=dataset.label_names,
        label_column=dataset.label_column,
    )
    with open(path, "wb") as fh:
        np.savez(fh, __meta__=np.array(json.dumps(meta)), **arrays)


def load_bundle(path):
    with np.load(Path(path), allow_pickle=False) as data:
        meta = json.loads(str(data["__meta__"]))
        if meta.get("format") != "dimso-bundle" or meta.get("version") != BUNDLE_FORMAT_VERSION:
            raise DataError(f"{path} is not a version {BUNDLE_FORMAT_VERSION} model bundle")
        model = dimso.model_from_arrays(data, meta, prefix="dimso_")
        scaler = Standardizer(np.asarray(data["std_mean"]), np.asarray(data["std_scale"]))
        pca_model = pca_mod.model_from_arrays(data) if meta["has_pca"] else None
    return model, scaler, pca_model, meta


def _synthesize(model, scaler, pca_model) -> tuple[np.ndarray, np.ndarray]:
    X_syn, y_syn = dimso.generate(model)
    if pca_model is not None:
        X_syn = pca_mod.pca_inverse(pca_model, X_syn)
    return scaler.inverse_transform(X_syn), y_syn


def cmd_generate(args) -> int:
    dataset = _load_dataset(args)
    scaler = Standardizer.fit(dataset.X)
    X = scaler.transform(dataset.X)
    pca_model = None
    if args.pca_threshold is not None:
        pca_model = pca_mod.pca_fit(X, args.pca_threshold)
        X = pca_mod.pca_transform(pca_model, X)
        log.info("PCA keeps %d of %d components", pca_model.n_components, dataset.n_features)
    model = dimso.fit(X, dataset.y, _dimso_config(args, args.loss))
    X_syn, y_syn = _synthesize(model, scaler, pca_model)
    write_csv(args.out, X_syn, dataset.decode_labels(y_syn), dataset.feature_names, dataset.label_column)
    write_manifest(str(args.out) + ".manifest.json", "generate", args)
    if args.model_out:
        save_bundle(args.model_out, model, scaler, pca_model, dataset)
    log.info("wrote %d rows to %s", len(X_syn), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    model, scaler, pca_model, meta = load_bundle(args.model)
    X_syn, y_syn = _synthesize(model, scaler, pca_model)
    names = meta["label_names"]
    labels = [names[int(c)] for c in y_syn] if names else y_syn.tolist()
    write_csv(args.out, X_syn, labels, meta["feature_names"], meta["label_column"])
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _load_dataset(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = run_protocol(
        dataset,
        generator_spec=args.generator,
        classifier_spec=args.classifier,
        k=args.folds,
        pipeline=args.pipeline,
        pca_threshold=args.pca_threshold,
        seed=args.seed,
        dimso_config=_dimso_config(args),
        smote_config=SmoteConfig(k_neighbors=args.k_neighbors, samples_per_class=args.samples_per_class),
    )
    report.write_json(out_dir / "report.json")
    report.write_fold_csv(out_dir / "folds.csv")
    report.write_loss_log(out_dir / "loss_log.csv")
    write_manifest(out_dir / "manifest.json", "evaluate", args)
    agg = report.aggregates()["delta_q"]
    log.info("delta_q mean %.4f (std %.4f)", agg["mean"], agg["std"])
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise PreconditionError("--repeats must be at least 1")
    rows, traces = [], []
    fixed = _load_dataset(args) if args.input else None
    for rep in range(args.repeats):
        seed = args.seed + rep
        dataset = fixed or make_toy("clustered_cube", args.n, seed=seed, clusters=args.clusters, n_features=args.features)
        X = Standardizer.fit(dataset.X).transform(dataset.X)
        y = np.zeros(len(X), dtype=np.int64)  # unlabeled: one class
        cfg = dimso.DimsoConfig(
            features_factor=args.features_factor,
            epochs=args.max_epochs,
            learning_rate=args.lr,
            samples_per_class=args.samples or len(X),
            loss=args.loss,
            seed=seed,
        )
        trace: list = []
        _, epochs_used, elapsed = dimso.fit_until_similarity(
            X, y, cfg, args.target_mmd, check_every=args.check_every, max_epochs=args.max_epochs, trace=trace
        )
        final_mmd = trace[-1][1]
        rows.append({"repeat": rep, "seed": seed, "epochs_used": epochs_used, "elapsed_seconds": elapsed,
                     "final_mmd": final_mmd, "reached": final_mmd <= args.target_mmd})
        traces.extend((rep, e, v) for e, v in trace)
        log.info("repeat %d: %d epochs, %.3f s, mmd %.4f", rep, epochs_used, elapsed, final_mmd)

    def stat(key):
        v = np.array([r[key] for r in rows], dtype=np.float64)
        return {"mean": float(v.mean()), "std": float(v.std())}

    result = {
        "target_mmd": args.target_mmd,
        "loss": args.loss,
        "check_every": args.check_every,
        "max_epochs": args.max_epochs,
        "repeats": rows,
        "aggregates": {k: stat(k) for k in ("epochs_used", "elapsed_seconds", "final_mmd")},
    }
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.json").write_text(json.dumps(result, indent=2) + "\n")
        with (out / "bench.csv").open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        with (out / "mmd_trace.csv").open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["repeat", "epoch", "mmd"])
            w.writerows(traces)
    json.dump(result, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    if manifest.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise DataError(f"unsupported manifest schema {manifest.get('schema_version')}")
    command = manifest["command"]
    ns = argparse.Namespace(**manifest["config"], verbose=args.verbose, command=command)
    if manifest.get("input_sha256") and file_digest(ns.input) != manifest["input_sha256"]:
        raise DataError(f"{ns.input} changed since the manifest was written")
    if command == "generate":
        if not args.out:
            raise PreconditionError("rerun of a generate manifest needs --out")
        ns.out, ns.model_out = args.out, args.model_out
        return cmd_generate(ns)
    if command == "evaluate":
        if not args.out_dir:
            raise PreconditionError("rerun of an evaluate manifest needs --out-dir")
        ns.out_dir = args.out_dir
        return cmd_evaluate(ns)
    raise DataError(f"cannot rerun command {command!r}")


COMMANDS = {
    "generate": cmd_generate,
    "sample": cmd_sample,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
    "rerun": cmd_rerun,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (DataError, PreconditionError, ValueError, FileNotFoundError) as exc:
        print(f"dimso: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"dimso: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
