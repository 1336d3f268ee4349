"""Command-line surface.

Commands: synth, features, train, eval, search, connectivity, crossval,
sweep, baseline.  Every command validates its configuration up front,
echoes the resolved config into each output file together with a content
checksum, and writes a run manifest listing output files and their hashes.
Re-running a command on unchanged inputs with the same seed reproduces
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import baseline, connectivity, qpca, search
from .classifier import LinearSvmModel, cross_validate
from .dataset import SynthSpec, load_recording, session_split, save_recording, synthesize_dataset
from .errors import ConfigError, QeegError
from .pipeline import (FeatureCache, PipelineParams, evaluate_model,
                       train_pipeline)
from .qpca import ChannelQuadruple, QpcaModel
from .spectral import BAND_NAMES

__all__ = ["main"]


def _sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _pct(value) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _write_json(path: Path, config: dict, data) -> Path:
    payload = json.dumps(data, sort_keys=True)
    doc = {"config": config, "checksum": _sha256_text(payload), "data": data}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return path


def _write_csv(path: Path, config: dict, payload: str) -> Path:
    head = (f"# config: {json.dumps(config, sort_keys=True)}\n"
            f"# checksum: {_sha256_text(payload)}\n")
    path.write_text(head + payload)
    return path


def _write_run_manifest(out_dir: Path, command: str, config: dict, outputs,
                        args=None) -> Path:
    invocation = {}
    if args is not None:
        invocation = {k: (list(v) if isinstance(v, tuple) else v)
                      for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": command,
        "config": config,
        "invocation": invocation,
        "outputs": {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                    for p in outputs},
    }
    path = out_dir / f"{command}_manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


def _load_recordings(data_dir: str) -> list:
    root = Path(data_dir)
    if not root.is_dir():
        raise ConfigError(f"--data directory not found: {root}")
    paths = sorted(p for p in root.glob("*.json")
                   if not p.name.endswith("_manifest.json"))
    if not paths:
        raise ConfigError(f"no recording manifests in {root}")
    return [load_recording(p) for p in paths]


def _load_cache(args, recordings=None) -> FeatureCache:
    if getattr(args, "cache", None):
        path = Path(args.cache)
        if not path.is_file():
            raise ConfigError(f"--cache file not found: {path}")
        text = path.read_text()
        if text.startswith("# config: "):
            cached_config = json.loads(text.split("\n", 1)[0][len("# config: "):])
            cached_ts = cached_config.get("segment_seconds")
            if cached_ts is not None and cached_ts != args.segment_seconds:
                raise ConfigError(
                    f"cache was built with --segment-seconds {cached_ts}, "
                    f"requested {args.segment_seconds}")
        return FeatureCache.from_csv_text(text, args.segment_seconds)
    if recordings is None:
        recordings = _load_recordings(args.data)
    return FeatureCache.from_recordings(recordings, args.segment_seconds)


def _split_keys(recordings):
    split = session_split(recordings)
    return ([r.key() for r in split.training], [r.key() for r in split.testing])


def _params_from_args(args, default_sweep: int | None) -> PipelineParams:
    given = [name for name, val in (("--pcs", args.pcs),
                                    ("--pc-threshold", args.pc_threshold),
                                    ("--p-sweep-limit", args.p_sweep_limit))
             if val is not None]
    if len(given) > 1:
        raise ConfigError(f"flags {given} are mutually exclusive")
    p = args.pcs
    threshold = args.pc_threshold if args.pc_threshold is not None else 0.90
    if args.pcs is not None or args.pc_threshold is not None:
        sweep = None
    elif args.p_sweep_limit is not None:
        sweep = args.p_sweep_limit
    else:
        sweep = default_sweep
    return PipelineParams(segment_seconds=args.segment_seconds,
                          projection=args.projection, p=p,
                          p_sweep_limit=sweep, p_threshold=threshold,
                          svm_c=args.svm_c)


def _channels_arg(value: str) -> tuple:
    channels = tuple(c.strip() for c in value.split(",") if c.strip())
    return channels


def _require_quadruple(args) -> tuple:
    if not getattr(args, "channels", None):
        raise ConfigError("--channels A,B,C,D is required for this command")
    return tuple(ChannelQuadruple(args.channels))


def _config_echo(command: str, args, params: PipelineParams | None = None,
                 **extra) -> dict:
    """Computation-relevant configuration embedded in every output file.

    Execution details that cannot change results (--out, --parallelism) stay
    out of the echo so reruns produce byte-identical files; the run manifest
    records the full invocation."""
    config = {"command": command}
    for name in ("data", "cache", "band", "segment_seconds", "projection",
                 "svm_c", "seed", "k", "repeats", "mode", "axis"):
        if hasattr(args, name):
            config[name] = getattr(args, name)
    if hasattr(args, "channels") and args.channels:
        config["channels"] = list(args.channels)
    if params is not None:
        config["params"] = params.to_json()
    config.update(extra)
    return config


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands -----------------------------------------------------------


def cmd_synth(args) -> int:
    out = _out_dir(args)
    if args.spec:
        spec_path = Path(args.spec)
        if not spec_path.is_file():
            raise ConfigError(f"--spec file not found: {spec_path}")
        spec = SynthSpec.from_json(json.loads(spec_path.read_text()))
    else:
        spec = SynthSpec.default()
    recordings = synthesize_dataset(spec, seed=args.seed)
    outputs = []
    for rec in recordings:
        manifest_path = save_recording(rec, out)
        outputs.append(manifest_path)
        outputs.append(manifest_path.with_suffix(".csv"))
    config = _config_echo("synth", args, spec=spec.to_json())
    _write_run_manifest(out, "synth", config, outputs, args)
    print(f"synth: wrote {len(recordings)} recordings to {out}")
    return 0


def cmd_features(args) -> int:
    out = _out_dir(args)
    recordings = _load_recordings(args.data)
    cache = FeatureCache.from_recordings(recordings, args.segment_seconds)
    config = _config_echo("features", args)
    path = _write_csv(out / "features.csv", config, cache.to_csv_text())
    _write_run_manifest(out, "features", config, [path], args)
    print(f"features: {len(cache.keys)} recordings x {len(cache.channels)} channels "
          f"x {len(cache.bands)} bands x {cache.n_segments} segments -> {path}")
    return 0


def cmd_train(args) -> int:
    out = _out_dir(args)
    quadruple = _require_quadruple(args)
    params = _params_from_args(args, default_sweep=None)
    recordings = _load_recordings(args.data)
    cache = _load_cache(args, recordings)
    train_keys, _ = _split_keys(recordings)
    model, svm = train_pipeline(cache, train_keys, quadruple, args.band, params)
    train_metrics = evaluate_model(model, svm, cache, train_keys)
    config = _config_echo("train", args, params)
    data = {
        "qpca": model.to_json(),
        "svm": {"weights": svm.weights.tolist(), "bias": svm.bias,
                "regularization_c": svm.regularization_c,
                "alphas": svm.alphas.tolist(), "duality_gap": svm.duality_gap,
                "iterations": svm.iterations},
        "train_metrics": train_metrics.to_json(),
    }
    path = _write_json(out / "model.json", config, data)
    _write_run_manifest(out, "train", config, [path], args)
    print(f"train: band={args.band} channels={','.join(quadruple)} p={model.p} "
          f"train_acc={train_metrics.acc:.2f} -> {path}")
    return 0


def _load_model(path: Path):
    if not path.is_file():
        raise ConfigError(f"--model file not found: {path}")
    doc = json.loads(path.read_text())
    data = doc["data"]
    model = QpcaModel.from_json(data["qpca"])
    svm_obj = data["svm"]
    svm = LinearSvmModel(weights=np.asarray(svm_obj["weights"]),
                         bias=float(svm_obj["bias"]),
                         regularization_c=float(svm_obj["regularization_c"]),
                         alphas=np.asarray(svm_obj["alphas"]),
                         duality_gap=float(svm_obj["duality_gap"]),
                         iterations=int(svm_obj["iterations"]))
    return model, svm


def cmd_eval(args) -> int:
    out = _out_dir(args)
    model, svm = _load_model(Path(args.model))
    if args.band and args.band != model.band:
        raise ConfigError(f"--band {args.band} does not match model band {model.band}")
    if args.channels and tuple(args.channels) != tuple(model.quadruple):
        raise ConfigError(f"--channels {args.channels} do not match model quadruple "
                          f"{tuple(model.quadruple)}")
    recordings = _load_recordings(args.data)
    cache = FeatureCache.from_recordings(recordings, model.segment_seconds)
    train_keys, test_keys = _split_keys(recordings)
    keys = {"testing": test_keys, "training": train_keys,
            "all": train_keys + test_keys}[args.split]
    result = evaluate_model(model, svm, cache, keys)
    config = _config_echo("eval", args, model=str(args.model), split=args.split)
    path = _write_json(out / "metrics.json", config, result.to_json())
    _write_run_manifest(out, "eval", config, [path], args)
    print(f"eval[{args.split}]: acc={_pct(result.acc)} sen={_pct(result.sen)} "
          f"spe={_pct(result.spe)} -> {path}")
    return 0


def _search_results_csv(results) -> str:
    lines = ["trial_index,ch1,ch2,ch3,ch4,band,p_used,acc,sen,spe,valid,error"]
    for r in results:
        ch = list(r.permutation)
        lines.append(",".join([
            str(r.trial_index), ch[0], ch[1], ch[2], ch[3], r.band,
            _fmt(r.p_used), _fmt(r.acc), _fmt(r.sen), _fmt(r.spe),
            str(int(r.valid)), (r.error or "").replace(",", ";")]))
    return "\n".join(lines) + "\n"


def _search_summary_csv(summaries) -> str:
    lines = ["combination,band,mean_acc,mean_sen,mean_spe,"
             "best_permutation,best_acc,n_trials,n_invalid"]
    for s in summaries:
        lines.append(",".join([
            "|".join(s.combination), s.band, _fmt(s.mean_acc), _fmt(s.mean_sen),
            _fmt(s.mean_spe),
            "|".join(s.best_permutation) if s.best_permutation else "",
            _fmt(s.best_acc), str(s.n_trials), str(s.n_invalid)]))
    return "\n".join(lines) + "\n"


def cmd_search(args) -> int:
    out = _out_dir(args)
    params = _params_from_args(args, default_sweep=20)
    recordings = _load_recordings(args.data)
    cache = _load_cache(args, recordings)
    train_keys, test_keys = _split_keys(recordings)
    results, summaries = search.run_search(cache, train_keys, test_keys,
                                           args.band, params,
                                           parallelism=args.parallelism)
    config = _config_echo("search", args, params)
    paths = [
        _write_csv(out / "search_results.csv", config, _search_results_csv(results)),
        _write_csv(out / "search_summary.csv", config, _search_summary_csv(summaries)),
        _write_json(out / "search_ranked.json", config, search.rank(summaries)),
    ]
    _write_run_manifest(out, "search", config, paths, args)
    n_invalid = sum(not r.valid for r in results)
    print(f"search: {len(results)} trials ({n_invalid} invalid), "
          f"{len(summaries)} combinations -> {out}")
    return 0


def cmd_connectivity(args) -> int:
    out = _out_dir(args)
    recordings = _load_recordings(args.data)
    cache = _load_cache(args, recordings)
    train_keys, test_keys = _split_keys(recordings)
    keys = train_keys + test_keys if args.include_testing else train_keys
    bands = [args.band] if args.band else list(BAND_NAMES)
    config = _config_echo("connectivity", args, bands=bands,
                          include_testing=args.include_testing)
    paths = []
    for band in bands:
        tensors, skipped = connectivity.build_tensors(cache, keys, args.mode, band)
        for label, tensor in sorted(tensors.items()):
            doc = tensor.to_json()
            doc["skipped_tuples"] = skipped
            paths.append(_write_json(out / f"tensor_{band}_{label}.json", config, doc))
    report = connectivity.distance_report(cache, keys, args.mode, bands)
    paths.append(_write_json(out / "distance_report.json", config, report.to_json()))
    _write_run_manifest(out, "connectivity", config, paths, args)
    dists = ", ".join(f"{b}={report.mean_dist(b):.4f}" for b in bands)
    print(f"connectivity[{args.mode}]: mean Dist {dists} -> {out}")
    return 0


def cmd_crossval(args) -> int:
    out = _out_dir(args)
    quadruple = _require_quadruple(args)
    params = _params_from_args(args, default_sweep=None)
    recordings = _load_recordings(args.data)
    cache = _load_cache(args, recordings)
    keys = list(cache.keys)
    vectors = cache.vectors(keys, quadruple, args.band)
    fit_p = params.p
    if fit_p is None and params.p_sweep_limit is not None:
        fit_p = min(params.p_sweep_limit, vectors.rows, vectors.cols)
    model = qpca.fit(vectors, p=fit_p, energy_threshold=params.p_threshold,
                     band=args.band)
    feats = qpca.project(qpca.transform(model, vectors), params.projection)
    result = cross_validate(feats, cache.labels_pm1(keys), k=args.k,
                            repeats=args.repeats, seed=args.seed,
                            regularization_c=params.svm_c,
                            stratified=not args.unstratified)
    config = _config_echo("crossval", args, params, p_used=model.p,
                          stratified=not args.unstratified)
    path = _write_json(out / "crossval.json", config, result.to_json())
    _write_run_manifest(out, "crossval", config, [path], args)
    print(f"crossval: k={args.k} repeats={args.repeats} "
          f"mean_score={result.mean_score:.4f} (acc ~ {100 * (1 - result.mean_score):.2f}%) "
          f"-> {path}")
    return 0


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    quadruple = _require_quadruple(args)
    params = _params_from_args(args, default_sweep=20)
    recordings = _load_recordings(args.data)
    split = session_split(recordings)
    axis = {"segment": "segment_seconds", "projection": "projection",
            "pcs": "p"}[args.axis]
    if axis == "projection":
        values = [str(v) for v in args.values.split(",")]
    elif axis == "p":
        values = [int(v) for v in args.values.split(",")]
    else:
        values = [float(v) for v in args.values.split(",")]
    rows = qpca.sweep_parameters(recordings, split, quadruple, args.band,
                                 axis, values, base=params)
    lines = ["axis,value,acc,sen,spe,p_used,error"]
    for r in rows:
        lines.append(",".join([r["axis"], _fmt(r["value"]), _fmt(r["acc"]),
                               _fmt(r["sen"]), _fmt(r["spe"]), _fmt(r["p_used"]),
                               (r["error"] or "").replace(",", ";")]))
    config = _config_echo("sweep", args, params, values=[_fmt(v) for v in values])
    path = _write_csv(out / "sweep.csv", config, "\n".join(lines) + "\n")
    _write_run_manifest(out, "sweep", config, [path], args)
    print(f"sweep[{args.axis}]: {len(rows)} grid points -> {path}")
    return 0


def cmd_baseline(args) -> int:
    out = _out_dir(args)
    quadruple = _require_quadruple(args)
    params = _params_from_args(args, default_sweep=20)
    recordings = _load_recordings(args.data)
    cache = _load_cache(args, recordings)
    train_keys, test_keys = _split_keys(recordings)
    result = baseline.compare(cache, train_keys, test_keys, quadruple,
                              args.band, params)
    config = _config_echo("baseline", args, params)
    path = _write_json(out / "comparison.json", config, result)
    _write_run_manifest(out, "baseline", config, [path], args)
    print(f"baseline: qpca acc={_pct(result['qpca']['acc'])} vs "
          f"real-pca acc={_pct(result['real_pca']['acc'])} -> {path}")
    return 0


# -- argument parsing ----------------------------------------------------


def _add_shared(parser, with_band=True, with_channels=True):
    if with_band:
        parser.add_argument("--band", choices=BAND_NAMES, default=None)
    if with_channels:
        parser.add_argument("--channels", type=_channels_arg, default=None,
                            help="ordered quadruple A,B,C,D (order-sensitive)")
    parser.add_argument("--segment-seconds", type=float, default=1.0)
    parser.add_argument("--projection", choices=qpca.PROJECTION_METHODS,
                        default="mean")
    parser.add_argument("--pcs", type=int, default=None,
                        help="fixed number of principal components")
    parser.add_argument("--pc-threshold", type=float, default=None,
                        help="eigenvalue-energy threshold for selecting p")
    parser.add_argument("--p-sweep-limit", type=int, default=None,
                        help="report the best accuracy over p = 1..L")
    parser.add_argument("--svm-c", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--cache", default=None,
                        help="feature cache CSV to reuse instead of featurizing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qeeg",
        description="Quaternion-PCA EEG pipeline: features, classification, "
                    "connectivity, channel search.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--spec", default=None, help="SynthSpec JSON (default spec if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="featurize recordings into a cache CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--segment-seconds", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit QPCA + SVM on the training split")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=("testing", "training", "all"),
                   default="testing")
    p.add_argument("--band", choices=BAND_NAMES, default=None)
    p.add_argument("--channels", type=_channels_arg, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("search", help="exhaustive ordered 4-channel search")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_shared(p, with_channels=False)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("connectivity", help="connectivity tensors and distances")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("triple", "quadruple"), required=True)
    p.add_argument("--band", choices=BAND_NAMES, default=None,
                   help="single band (default: all four)")
    p.add_argument("--segment-seconds", type=float, default=1.0)
    p.add_argument("--cache", default=None)
    p.add_argument("--include-testing", action="store_true",
                   help="measure on all sessions, not only the training split")
    p.set_defaults(func=cmd_connectivity)

    p = sub.add_parser("crossval", help="repeated k-fold cross-validation")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1000)
    p.add_argument("--unstratified", action="store_true",
                   help="plain shuffled folds instead of stratified ones")
    _add_shared(p)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("sweep", help="parameter sweep along one axis")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--axis", choices=("segment", "projection", "pcs"), required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated grid values for the chosen axis")
    _add_shared(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="quaternion vs real PCA comparison")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    _add_shared(p)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("train", "search", "crossval", "sweep", "baseline") \
            and not args.band:
        parser.error(f"{args.command} requires --band")
    try:
        return args.func(args)
    except QeegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
