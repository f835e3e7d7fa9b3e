"""End-to-end experiment pipeline and report emission.

Three experiments, mirroring a fixed evaluation protocol:

1. Fertility of a document-trained baseline on documents versus chat text
   (whole conversations, user turns only, assistant turns only).
2. Retrain the baseline's configuration on the train split of the chat
   corpus (per role filter) and measure token reduction on the held-out
   split, plus a per-language breakdown.
3. Run the retrained tokenizers back on the document corpus to measure the
   cost outside the chat domain (reductions may be negative).

Reports are deterministic: the same spec and corpora produce byte-identical
report files, and every number is recomputable from the inputs.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__ as _tool_version
from .corpus import (
    ConversationSet,
    DocumentSet,
    RoleFilter,
    SplitSpec,
    extract_text,
    load_conversations,
    load_documents,
    split,
    train_id_set,
)
from .errors import ConvtokError
from .metrics import fertility, language_groups, reduction
from .tokenizer import (
    PretokenScheme,
    TokenizerMode,
    TokenizerModel,
    load_model,
    model_to_bytes,
    save_model,
)
from .trainer import TrainConfig, retrain_like, train_bpe

logger = logging.getLogger(__name__)

ALL_FILTERS = (RoleFilter.USER_ONLY, RoleFilter.ASSISTANT_ONLY, RoleFilter.BOTH)
DEFAULT_DOC_SAMPLE_BYTES = 8 << 20
DEFAULT_VOCAB_SIZE = 8192

_CSV_COLUMNS = ["scope", "tokens_base", "tokens_opt", "reduction_pct",
                "n_words", "fertility_base", "fertility_opt"]


@dataclass(frozen=True)
class ExperimentSpec:
    conversations_path: Path
    documents_path: Path
    output_dir: Path
    split: SplitSpec = SplitSpec()
    base_model_path: Path | None = None
    role_filters: tuple[RoleFilter, ...] = ALL_FILTERS
    vocab_size: int = DEFAULT_VOCAB_SIZE
    mode: TokenizerMode = TokenizerMode.BYTE_LEVEL
    scheme: PretokenScheme = PretokenScheme.CATEGORY_SPLIT
    min_pair_frequency: int = 2
    language_threshold: int = 1000
    doc_sample_bytes: int = DEFAULT_DOC_SAMPLE_BYTES
    lmsys_format: bool = False

    def __post_init__(self):
        if not self.role_filters:
            raise ValueError("at least one role filter is required")


@dataclass(frozen=True)
class ScopeRow:
    """One line of a metrics table. ``filter`` names the optimized model's
    role filter; base-only rows (experiment 1) leave the opt fields unset."""

    scope: str
    filter: str | None
    tokens_base: int
    n_words: int
    fertility_base: float
    tokens_opt: int | None = None
    reduction_pct: float | None = None
    fertility_opt: float | None = None
    conversation_count: int | None = None


@dataclass(frozen=True)
class Provenance:
    tool_version: str
    config_hash: str
    conversations_sha256: str
    documents_sha256: str


@dataclass(frozen=True)
class ExperimentReport:
    experiment: str
    rows: tuple[ScopeRow, ...]
    provenance: Provenance

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "rows": [
                {
                    "scope": r.scope,
                    "filter": r.filter,
                    "tokens_base": r.tokens_base,
                    "tokens_opt": r.tokens_opt,
                    "reduction_pct": r.reduction_pct,
                    "n_words": r.n_words,
                    "fertility_base": r.fertility_base,
                    "fertility_opt": r.fertility_opt,
                    "conversation_count": r.conversation_count,
                }
                for r in self.rows
            ],
            "provenance": {
                "tool_version": self.provenance.tool_version,
                "config_hash": self.provenance.config_hash,
                "conversations_sha256": self.provenance.conversations_sha256,
                "documents_sha256": self.provenance.documents_sha256,
            },
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":")).encode("utf-8")

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentReport":
        rows = tuple(
            ScopeRow(
                scope=r["scope"],
                filter=r.get("filter"),
                tokens_base=r["tokens_base"],
                n_words=r["n_words"],
                fertility_base=r["fertility_base"],
                tokens_opt=r.get("tokens_opt"),
                reduction_pct=r.get("reduction_pct"),
                fertility_opt=r.get("fertility_opt"),
                conversation_count=r.get("conversation_count"),
            )
            for r in obj["rows"]
        )
        p = obj["provenance"]
        return ExperimentReport(
            experiment=obj["experiment"],
            rows=rows,
            provenance=Provenance(
                tool_version=p["tool_version"],
                config_hash=p["config_hash"],
                conversations_sha256=p["conversations_sha256"],
                documents_sha256=p["documents_sha256"],
            ),
        )


def load_report(path: str | Path) -> ExperimentReport:
    return ExperimentReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _round_fert(value: float) -> float:
    return round(value, 6)


def _round_pct(value: float) -> float:
    # percentages are reported to one decimal place
    return round(value, 1)


def _sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------------------
# Workspace: corpora, splits, and cached models for one spec
# ---------------------------------------------------------------------------

def sample_documents(documents: list[str], max_bytes: int) -> list[str]:
    """Leading documents up to a byte budget (at least one if any exist)."""
    out: list[str] = []
    total = 0
    for doc in documents:
        if out and total >= max_bytes:
            break
        out.append(doc)
        total += len(doc.encode("utf-8"))
    return out


class Workspace:
    """Loads corpora, derives splits, and trains or loads the models a spec
    needs. Models are cached under ``<output_dir>/models`` keyed by a config
    hash, so consecutive experiments on one spec reuse them."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.conversations = load_conversations(spec.conversations_path, lmsys=spec.lmsys_format)
        self.documents = load_documents(spec.documents_path)
        self.conv_train, self.conv_test = split(self.conversations, spec.split)
        doc_ids = [str(i) for i in range(len(self.documents.documents))]
        train_ids = train_id_set(doc_ids, spec.split)
        self.docs_train = [d for i, d in enumerate(self.documents.documents) if str(i) in train_ids]
        self.docs_test = [d for i, d in enumerate(self.documents.documents) if str(i) not in train_ids]
        self._models: dict[str, TokenizerModel] = {}
        self.provenance = Provenance(
            tool_version=_tool_version,
            config_hash=self._config_hash(),
            conversations_sha256=_sha256_file(spec.conversations_path),
            documents_sha256=_sha256_file(spec.documents_path),
        )

    def _config_hash(self) -> str:
        spec = self.spec
        payload = {
            "conversations_sha256": _sha256_file(spec.conversations_path),
            "documents_sha256": _sha256_file(spec.documents_path),
            "base_model_sha256": (
                _sha256_file(spec.base_model_path) if spec.base_model_path else None
            ),
            "train_fraction": repr(spec.split.train_fraction),
            "seed": spec.split.seed,
            "role_filters": [f.value for f in spec.role_filters],
            "vocab_size": spec.vocab_size,
            "mode": spec.mode.value,
            "scheme": spec.scheme.value,
            "min_pair_frequency": spec.min_pair_frequency,
            "language_threshold": spec.language_threshold,
            "doc_sample_bytes": spec.doc_sample_bytes,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()

    @property
    def models_dir(self) -> Path:
        return Path(self.spec.output_dir) / "models"

    def _model_path(self, name: str) -> Path:
        return self.models_dir / f"{name}.json"

    def _cache_valid(self) -> bool:
        manifest = self.models_dir / "manifest.json"
        if not manifest.exists():
            return False
        try:
            recorded = json.loads(manifest.read_text(encoding="utf-8"))
        except json.JSONDecodeError:
            return False
        return recorded.get("config_hash") == self.provenance.config_hash

    def _store(self, name: str, model: TokenizerModel) -> None:
        self.models_dir.mkdir(parents=True, exist_ok=True)
        if not self._cache_valid():
            # models from a different configuration must not survive the
            # manifest update, or later lookups would load them as current
            for stale in self.models_dir.glob("*.json"):
                stale.unlink()
        save_model(model, self._model_path(name))
        manifest = self.models_dir / "manifest.json"
        manifest.write_text(
            json.dumps({"config_hash": self.provenance.config_hash}, separators=(",", ":")),
            encoding="utf-8",
        )

    def _get(self, name: str, build) -> TokenizerModel:
        model = self._models.get(name)
        if model is None:
            path = self._model_path(name)
            if self._cache_valid() and path.exists():
                model = load_model(path)
                logger.info("loaded cached model %s", path)
            else:
                model = build()
                self._store(name, model)
                logger.info("trained model %s (vocab %d)", name, len(model.vocab))
            self._models[name] = model
        return model

    def base_model(self) -> TokenizerModel:
        spec = self.spec

        def build() -> TokenizerModel:
            if spec.base_model_path is not None:
                return load_model(spec.base_model_path)
            corpus = sample_documents(self.docs_train, spec.doc_sample_bytes)
            config = TrainConfig(
                vocab_size=spec.vocab_size,
                mode=spec.mode,
                scheme=spec.scheme,
                min_pair_frequency=spec.min_pair_frequency,
            )
            return train_bpe(corpus, config)

        return self._get("base", build)

    def retrained(self, role_filter: RoleFilter) -> TokenizerModel:
        base = self.base_model()

        def build() -> TokenizerModel:
            corpus = extract_text(self.conv_train, role_filter)
            return retrain_like(base, corpus, min_pair_frequency=self.spec.min_pair_frequency)

        return self._get(f"retrained_{role_filter.value}", build)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def _fertility_row(model: TokenizerModel, scope: str, texts: list[str]) -> ScopeRow:
    result = fertility(model, texts)
    return ScopeRow(
        scope=scope,
        filter=None,
        tokens_base=result.n_tokens,
        n_words=result.n_words,
        fertility_base=_round_fert(result.fertility),
    )


def _comparison_row(
    base: TokenizerModel,
    opt: TokenizerModel,
    scope: str,
    filter_name: str,
    texts: list[str],
    conversation_count: int | None = None,
) -> ScopeRow:
    red = reduction(base, opt, texts)
    fert_base = fertility(base, texts)
    fert_opt = fertility(opt, texts)
    return ScopeRow(
        scope=scope,
        filter=filter_name,
        tokens_base=red.tokens_base,
        tokens_opt=red.tokens_opt,
        reduction_pct=_round_pct(red.reduction_pct),
        n_words=fert_base.n_words,
        fertility_base=_round_fert(fert_base.fertility),
        fertility_opt=_round_fert(fert_opt.fertility),
        conversation_count=conversation_count,
    )


def run_experiment1(spec: ExperimentSpec, workspace: Workspace | None = None) -> ExperimentReport:
    """Baseline fertility on documents versus conversation scopes."""
    ws = workspace or Workspace(spec)
    base = ws.base_model()
    rows = (
        _fertility_row(base, "documents", ws.docs_test),
        _fertility_row(base, "all", extract_text(ws.conv_test, RoleFilter.BOTH)),
        _fertility_row(base, "user", extract_text(ws.conv_test, RoleFilter.USER_ONLY)),
        _fertility_row(base, "assistant", extract_text(ws.conv_test, RoleFilter.ASSISTANT_ONLY)),
    )
    return ExperimentReport(experiment="exp1", rows=rows, provenance=ws.provenance)


def run_experiment2(spec: ExperimentSpec, workspace: Workspace | None = None) -> ExperimentReport:
    """Retrain per role filter; reduction on the held-out conversation split."""
    ws = workspace or Workspace(spec)
    train_ids = {r.id for r in ws.conv_train.records}
    test_ids = {r.id for r in ws.conv_test.records}
    if train_ids & test_ids:
        raise ConvtokError("train/test split integrity violated")

    base = ws.base_model()
    test_texts = extract_text(ws.conv_test, RoleFilter.BOTH)
    groups = language_groups(ws.conv_test, spec.language_threshold)
    rows: list[ScopeRow] = []
    for role_filter in spec.role_filters:
        opt = ws.retrained(role_filter)
        rows.append(_comparison_row(base, opt, "all", role_filter.value, test_texts))
        for language, subset in groups:
            rows.append(
                _comparison_row(
                    base,
                    opt,
                    f"language:{language}",
                    role_filter.value,
                    extract_text(subset, RoleFilter.BOTH),
                    conversation_count=len(subset),
                )
            )
    return ExperimentReport(experiment="exp2", rows=tuple(rows), provenance=ws.provenance)


def run_experiment3(spec: ExperimentSpec, workspace: Workspace | None = None) -> ExperimentReport:
    """Retrained tokenizers evaluated back on the document corpus."""
    ws = workspace or Workspace(spec)
    base = ws.base_model()
    rows = tuple(
        _comparison_row(base, ws.retrained(f), "documents", f.value, ws.docs_test)
        for f in spec.role_filters
    )
    return ExperimentReport(experiment="exp3", rows=rows, provenance=ws.provenance)


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def _metrics_cells(row: ScopeRow) -> list:
    return [
        row.scope,
        row.tokens_base,
        "" if row.tokens_opt is None else row.tokens_opt,
        "" if row.reduction_pct is None else f"{row.reduction_pct:.1f}",
        row.n_words,
        f"{row.fertility_base:.6f}",
        "" if row.fertility_opt is None else f"{row.fertility_opt:.6f}",
    ]


def write_report(report: ExperimentReport, output_dir: str | Path) -> list[Path]:
    """Write report.json plus one metrics CSV per base/optimized comparison."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    json_path = out / "report.json"
    json_path.write_bytes(report.to_json_bytes())
    written.append(json_path)

    filters = [f for f in dict.fromkeys(r.filter for r in report.rows) if f is not None]
    if not filters:
        path = out / "report.csv"
        path.write_bytes(_csv_bytes(_CSV_COLUMNS, [_metrics_cells(r) for r in report.rows]))
        written.append(path)
    else:
        for name in filters:
            path = out / f"report_{name}.csv"
            rows = [_metrics_cells(r) for r in report.rows if r.filter == name]
            path.write_bytes(_csv_bytes(_CSV_COLUMNS, rows))
            written.append(path)
    return written


def emit_plot_data(report: ExperimentReport, output_dir: str | Path) -> list[Path]:
    """Plot-ready tables: fertility bars, reduction bars per role filter,
    per-language bars, and document-change bars. One CSV per chart."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if report.experiment == "exp1":
        path = out / "plot_fertility.csv"
        rows = [[r.scope, f"{r.fertility_base:.6f}"] for r in report.rows]
        path.write_bytes(_csv_bytes(["scope", "fertility"], rows))
        written.append(path)
    elif report.experiment == "exp2":
        path = out / "plot_reduction.csv"
        rows = [
            [r.filter, f"{r.reduction_pct:.1f}"]
            for r in report.rows
            if r.scope == "all"
        ]
        path.write_bytes(_csv_bytes(["filter", "reduction_pct"], rows))
        written.append(path)

        filters = [f for f in dict.fromkeys(r.filter for r in report.rows) if f is not None]
        lang_filter = RoleFilter.BOTH.value if RoleFilter.BOTH.value in filters else filters[0]
        lang_rows = [
            [r.scope.removeprefix("language:"), r.conversation_count, f"{r.reduction_pct:.1f}"]
            for r in report.rows
            if r.filter == lang_filter and r.scope.startswith("language:")
        ]
        path = out / "plot_languages.csv"
        path.write_bytes(_csv_bytes(["language", "conversations", "reduction_pct"], lang_rows))
        written.append(path)
    elif report.experiment == "exp3":
        path = out / "plot_documents_change.csv"
        rows = [[r.filter, f"{r.reduction_pct:.1f}"] for r in report.rows]
        path.write_bytes(_csv_bytes(["filter", "reduction_pct"], rows))
        written.append(path)
    else:
        raise ValueError(f"unknown experiment id: {report.experiment!r}")
    return written
