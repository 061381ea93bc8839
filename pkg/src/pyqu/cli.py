"""``pyqu`` command line entry point."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from pyqu import __version__
from pyqu.classifiers import (
    Dataset,
    Model,
    ModelFormatError,
    SingleClassError,
    accuracy,
    classify_commit,
    confusion,
    f1_score,
    load_model,
    precision,
    predict_proba,
    recall,
    roc_auc,
    save_model,
    train_qa,
)
from pyqu.config import ConfigError, ToolkitConfig, derive_seed, load_config, with_overrides
from pyqu.dataset import (
    ValidationError,
    cochran_sample_size,
    cohens_kappa,
    load_dataset,
    load_taxonomy,
    srs_sample,
)
from pyqu.delta import QAS, CommitMetricDelta, UnknownQAError, assemble_features, compute_deltas, read_delta_csv, write_delta_csv
from pyqu.metrics import compute_metric_vector, read_source
from pyqu.mining import GitRepo, MiningError, mine, repo_reproducibility, repo_tree

log = logging.getLogger("pyqu")

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2
DOMAIN_ERRORS = (ValueError, KeyError, MiningError)


class UsageError(ValueError):
    pass


@dataclass
class RunReport:
    """Stage counts and warnings of one command run.

    Filter counts are cumulative: each stage counts commits passing it and
    every stage before it, so the sequence never increases.
    """

    command: str
    input_digest: str = ""
    walked: int = 0
    keyword: int = 0
    ml_import: int = 0
    file_count: int = 0
    classified: int = 0
    enhanced: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.input_digest,
            "counts": {
                "walked": self.walked,
                "keyword": self.keyword,
                "ml_import": self.ml_import,
                "file_count": self.file_count,
                "classified": self.classified,
                "enhanced": self.enhanced,
            },
            "warnings": self.warnings,
            "error": self.error,
        }

    def stage_counts(self) -> list[int]:
        return [self.walked, self.keyword, self.ml_import, self.file_count, self.classified]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False, separators=(",", ":"))


def _parse_qas(text: str | None) -> list[str]:
    if not text:
        return list(QAS)
    qas = [q.strip().upper() for q in text.split(",") if q.strip()]
    for q in qas:
        if q not in QAS:
            raise UnknownQAError(f"unknown quality attribute {q!r}; expected one of {', '.join(QAS)}")
    return qas


def _output(args, name: str):
    """Open ``--out/name`` for writing, or stdout when no ``--out`` is set."""
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return open(out / name, "w", encoding="utf-8", newline="\n")
    return _StdoutProxy()


class _StdoutProxy:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def _config(args) -> ToolkitConfig:
    cfg = load_config(args.config)
    return with_overrides(
        cfg,
        seed=args.seed,
        jobs=args.jobs,
        threshold=getattr(args, "threshold", None),
        max_py_files=getattr(args, "max_py_files", None),
    )


def load_models(directory: str | Path, qas: Sequence[str]) -> dict[str, Model]:
    directory = Path(directory)
    models = {}
    for qa in qas:
        path = directory / f"{qa}.json"
        if not path.is_file():
            raise FileNotFoundError(f"no model for {qa}: {path} does not exist")
        models[qa] = load_model(path)
    return models


def _qa_dataset(records, deltas: dict[str, CommitMetricDelta], qa: str, un_model: Model | None = None) -> Dataset:
    rows, labels, shas = [], [], []
    for r in records:
        label = r.label(qa)
        if label is None or r.sha not in deltas:
            continue
        d = deltas[r.sha]
        un_score = None
        if un_model is not None:
            un_score = predict_proba(un_model, assemble_features(d, "UN").values)
        rows.append(assemble_features(d, qa, un_score=un_score).values)
        labels.append(int(label))
        shas.append(r.sha)
    if not rows:
        raise ValidationError(f"no labelled commits with deltas for {qa}")
    return Dataset(np.array(rows, dtype=np.float64), labels, shas)


def _read_deltas(path: str) -> dict[str, CommitMetricDelta]:
    with open(path, encoding="utf-8", newline="") as fh:
        return {d.sha: d for d in read_delta_csv(fh)}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_metrics(args) -> int:
    cfg = _config(args)
    del cfg  # only validated; metric computation takes no tunables yet
    status = EXIT_OK
    with _output(args, "metrics.jsonl") as out:
        for path in args.paths:
            try:
                unit = read_source(path)
            except OSError as exc:
                out.write(_dump({"path": path, "error": str(exc)}) + "\n")
                status = EXIT_IO
                continue
            out.write(_dump({"path": path, "parse_ok": unit.parse_ok, "metrics": compute_metric_vector(unit).to_dict()}) + "\n")
    return status


def _mined(repo: GitRepo, cfg: ToolkitConfig, rev_range: str | None, report: RunReport):
    for record, snaps, verdicts in mine(repo, cfg.filter, rev_range):
        report.walked += 1
        if verdicts.keyword:
            report.keyword += 1
            if verdicts.ml_import:
                report.ml_import += 1
                if verdicts.file_count:
                    report.file_count += 1
        yield record, snaps, verdicts


def cmd_mine(args) -> int:
    cfg = _config(args)
    repo = _open_repo(args.repo)
    report = RunReport("mine")
    with _output(args, "candidates.jsonl") as out:
        for record, _, verdicts in _mined(repo, cfg, args.range, report):
            if args.only_passing and not verdicts.passed:
                continue
            out.write(_dump({**record.to_dict(), "verdicts": verdicts.to_dict()}) + "\n")
    log.info("mine: %s", report.to_dict()["counts"])
    return EXIT_OK


class _TreeCache:
    """Reproducibility score per commit, reusing the previous lookup."""

    def __init__(self, repo: GitRepo):
        self.repo = repo
        self._cache: dict[str | None, Any] = {}

    def rep(self, sha: str | None):
        if sha not in self._cache:
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[sha] = repo_reproducibility(repo_tree(self.repo, sha))
        return self._cache[sha]


def _open_repo(path: str) -> GitRepo:
    if not Path(path).exists():
        raise FileNotFoundError(f"repository path does not exist: {path}")
    return GitRepo(path)


def _delta_item(item):
    pair, rep_pre, rep_post = item
    return compute_deltas(pair, repo_trees=(rep_pre, rep_post))


def cmd_deltas(args) -> int:
    cfg = _config(args)
    repo = _open_repo(args.repo)
    report = RunReport("deltas")
    trees = _TreeCache(repo)
    items = []
    for record, snaps, verdicts in _mined(repo, cfg, args.range, report):
        if args.only_passing and not verdicts.passed:
            continue
        items.append((snaps, trees.rep(record.parent_sha), trees.rep(record.sha)))
    deltas = _ordered_map(_delta_item, items, cfg.effective_jobs)
    with _output(args, "deltas.csv") as out:
        write_delta_csv(deltas, out)
    return EXIT_OK


def _ordered_map(fn, items: list, jobs: int) -> list:
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_train(args) -> int:
    cfg = _config(args)
    qas = _parse_qas(args.qa)
    catalog = load_taxonomy(cfg.taxonomy_path)
    records = load_dataset(args.dataset, catalog)
    deltas = _read_deltas(args.deltas)
    seed = derive_seed(cfg.seed, "train")
    results = {}
    if cfg.us_uses_un_score and "US" in qas and "UN" not in qas:
        qas = ["UN"] + qas
    for qa in sorted(qas, key=lambda q: q != "UN"):
        un_model = results["UN"].model if qa == "US" and cfg.us_uses_un_score else None
        data = _qa_dataset(records, deltas, qa, un_model)
        results[qa] = train_qa(
            data,
            qa,
            seed=seed,
            grids=cfg.grids,
            train_frac=cfg.train_frac,
            smote_k=cfg.smote_k,
            jobs=cfg.effective_jobs,
            gate=cfg.delta_gate,
        )
    out = Path(args.out or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary = []
    for qa in QAS:
        if qa in results:
            results[qa].model.threshold = cfg.threshold
            save_model(results[qa].model, out / f"{qa}.json")
            summary.append(results[qa].summary())
    (out / "training_report.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _config(args)
    qas = _parse_qas(args.qa)
    models = load_models(args.models, qas)
    catalog = load_taxonomy(cfg.taxonomy_path)
    records = load_dataset(args.dataset, catalog)
    deltas = _read_deltas(args.deltas)
    rows = []
    for qa in qas:
        un_model = models.get("UN") if qa == "US" and models[qa].dim == 3 else None
        if qa == "US" and models[qa].dim == 3 and un_model is None:
            un_model = load_models(args.models, ["UN"])["UN"]
        data = _qa_dataset(records, deltas, qa, un_model)
        threshold = cfg.threshold
        p = predict_proba(models[qa], data.X)
        c = confusion(data.y, p >= threshold)
        try:
            auc = roc_auc(p, data.y)
        except SingleClassError:
            auc = None
        rows.append(
            {
                "qa": qa,
                "n": len(data),
                "accuracy": accuracy(c),
                "precision": precision(c),
                "recall": recall(c),
                "f1": f1_score(c),
                "roc_auc": auc,
            }
        )
    with _output(args, "evaluation.json") as out:
        out.write(json.dumps(rows, indent=2) + "\n")
    return EXIT_OK


def _verdict_row(models, delta, qas, threshold):
    result = classify_commit(models, delta, qas, threshold)
    return {qa: {"probability": v["probability"], "enhanced": bool(v["enhanced"])} for qa, v in result.items()}


def cmd_classify(args) -> int:
    cfg = _config(args)
    qas = _parse_qas(args.qa)
    models = load_models(args.models, qas)
    if "US" in qas and models["US"].dim == 3 and "UN" not in models:
        models.update(load_models(args.models, ["UN"]))
    with open(args.deltas, encoding="utf-8", newline="") as fh:
        deltas = read_delta_csv(fh)
    threshold = cfg.threshold
    with _output(args, "classified.jsonl") as out:
        for d in deltas:
            out.write(_dump({"sha": d.sha, "qa": _verdict_row(models, d, qas, threshold)}) + "\n")
    return EXIT_OK


def _pipeline_item(item):
    record, snaps, rep_pre, rep_post, models, qas, threshold = item
    delta = compute_deltas(snaps, repo_trees=(rep_pre, rep_post))
    return {
        "sha": record.sha,
        "parent_sha": record.parent_sha,
        "changed_py_files": [p for p, _ in record.changed_py_files],
        "degraded": delta.degraded,
        "qa": _verdict_row(models, delta, qas, threshold),
    }


def _input_digest(repo: GitRepo, cfg: ToolkitConfig, qas, models_dir: str) -> str:
    h = hashlib.sha256()
    h.update((repo.head() or "").encode())
    h.update(json.dumps(cfg.to_dict()["filter"], sort_keys=True).encode())
    h.update(",".join(qas).encode())
    for qa in qas:
        h.update((Path(models_dir) / f"{qa}.json").read_bytes())
    return h.hexdigest()


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    qas = _parse_qas(args.qa)
    models = load_models(args.models, qas)
    if "US" in qas and models["US"].dim == 3 and "UN" not in models:
        models.update(load_models(args.models, ["UN"]))
    repo = _open_repo(args.repo)
    out_dir = Path(args.out or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = RunReport("pipeline", _input_digest(repo, cfg, qas, args.models))
    report.enhanced = {qa: 0 for qa in qas}
    threshold = cfg.threshold
    status = EXIT_OK
    started = time.perf_counter()
    with open(out_dir / "verdicts.jsonl", "w", encoding="utf-8", newline="\n") as out:
        try:
            trees = _TreeCache(repo)
            items = []
            for record, snaps, verdicts in _mined(repo, cfg, args.range, report):
                if verdicts.passed:
                    items.append((record, snaps, trees.rep(record.parent_sha), trees.rep(record.sha), models, qas, threshold))
            for row in _ordered_map(_pipeline_item, items, cfg.effective_jobs):
                out.write(_dump(row) + "\n")
                out.flush()
                report.classified += 1
                if row["degraded"]:
                    report.warnings.append(f"{row['sha']}: unparseable file in snapshot")
                for qa, v in row["qa"].items():
                    report.enhanced[qa] += int(v["enhanced"])
        except DOMAIN_ERRORS as exc:
            report.error = str(exc)
            status = EXIT_DOMAIN
        finally:
            (out_dir / "run_report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    log.info("pipeline finished in %.2fs: %s", time.perf_counter() - started, report.to_dict()["counts"])
    if report.error:
        print(f"pyqu: error: {report.error}", file=sys.stderr)
    return status


def cmd_sample(args) -> int:
    cfg = _config(args)
    population = None if args.population in (None, "inf") else int(args.population)
    if args.items:
        items = [line.rstrip("\n") for line in open(args.items, encoding="utf-8") if line.strip()]
        if population is None:
            population = len(items)
    size = args.size if args.size is not None else cochran_sample_size(population, args.confidence, args.margin)
    if not args.items:
        print(size)
        return EXIT_OK
    sample = srs_sample(items, size, seed=derive_seed(cfg.seed, "sample"))
    with _output(args, "sample.txt") as out:
        for item in sample:
            out.write(item + "\n")
    return EXIT_OK


def cmd_kappa(args) -> int:
    text = args.matrix
    if Path(text).is_file():
        text = Path(text).read_text(encoding="utf-8")
    try:
        matrix = json.loads(text)
    except ValueError as exc:
        raise UsageError(f"matrix must be JSON, e.g. [[20,5],[10,65]]: {exc}") from exc
    print(repr(cohens_kappa(matrix)))
    return EXIT_OK


def cmd_taxonomy(args) -> int:
    cfg = _config(args)
    catalog = load_taxonomy(args.path or cfg.taxonomy_path)
    if args.check:
        ok, message = catalog.frequency_check()
        info = {
            "entries": len(catalog),
            "categories": len(catalog.categories),
            "frequency_sum_matches": ok,
            "message": message,
            "discrepancies": list(catalog.discrepancies),
        }
        print(json.dumps(info, indent=2))
        return EXIT_OK
    entries = catalog.improving(args.improves) if args.improves else list(catalog.entries)
    for e in entries:
        print(_dump(e.to_dict()))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON config file")
    common.add_argument("--seed", type=int, help="run seed (default from config, 0)")
    common.add_argument("--jobs", type=int, help="worker processes (default: CPU count)")
    common.add_argument("--out", help="output directory (default: stdout where applicable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pyqu", description="Quality-attribute analysis of Python commits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", parents=[common], help="metric vector per source file")
    p.add_argument("paths", nargs="+")
    p.set_defaults(func=cmd_metrics)

    for name, func, help_text in (
        ("mine", cmd_mine, "walk history and emit candidate commits"),
        ("deltas", cmd_deltas, "metric deltas for mined commits"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("repo")
        p.add_argument("--range", help="git revision range (default: HEAD)")
        p.add_argument("--only-passing", action="store_true", help="keep only commits passing every filter")
        p.add_argument("--max-py-files", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("train", parents=[common], help="train one model per quality attribute")
    p.add_argument("--dataset", required=True, help="labelled commits CSV")
    p.add_argument("--deltas", required=True, help="deltas CSV")
    p.add_argument("--qa")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score trained models on labelled commits")
    p.add_argument("--models", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--deltas", required=True)
    p.add_argument("--qa")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", parents=[common], help="label commits from their deltas")
    p.add_argument("--models", required=True)
    p.add_argument("--deltas", required=True)
    p.add_argument("--qa")
    p.add_argument("--threshold", type=float)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("pipeline", parents=[common], help="mine, measure and classify a repository")
    p.add_argument("repo")
    p.add_argument("--models", required=True)
    p.add_argument("--range")
    p.add_argument("--qa")
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-py-files", type=int)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("sample", parents=[common], help="Cochran sample size and simple random sample")
    p.add_argument("--population", help="population size or 'inf'")
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--margin", type=float, default=0.05)
    p.add_argument("--size", type=int, help="explicit sample size")
    p.add_argument("--items", help="file with one item per line to sample from")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("kappa", help="Cohen's kappa of an agreement matrix")
    p.add_argument("matrix", help="JSON matrix or a file holding one")
    p.set_defaults(func=cmd_kappa, out=None)

    p = sub.add_parser("taxonomy", parents=[common], help="inspect the change-type catalog")
    p.add_argument("--path", help="catalog file (default: bundled)")
    p.add_argument("--improves", choices=QAS)
    p.add_argument("--check", action="store_true", help="print integrity summary")
    p.set_defaults(func=cmd_taxonomy)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (OSError, FileNotFoundError) as exc:
        print(f"pyqu: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValidationError, ModelFormatError, UsageError) as exc:
        print(f"pyqu: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DOMAIN_ERRORS as exc:
        print(f"pyqu: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
