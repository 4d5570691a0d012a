"""End-to-end orchestration over a file-based corpus.

A corpus directory stands in for a search engine: queries.jsonl lists
each query with its ranked result documents, docs/ holds the HTML, and
labels.jsonl (optional, needed for training and evaluation) marks which
(query, table) pairs are good answers.

The commands mirror the life of a query: extract candidate tables,
assemble features, train the models, evaluate precision/recall curves,
answer with a snippet, or inspect what the corpus contains.  Every output
is deterministic for a fixed corpus, config and seeds: keys are sorted,
newlines fixed, and nothing timestamps itself.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import classifier as classifier_mod
from .bm25 import CorpusStats
from .cdssm import CdssmParams, cdssm_train
from .docmap import build_documents, tokenize
from .evaluation import classifier_pr, selector_pr, write_pr_csv, write_pr_json
from .extraction import extract_candidate_tables
from .features import FeatureConfig, SimilarityModels, assemble, build_corpus_stats
from .selector import select
from .snippet import generate, load_synonyms
from .translation import tm_train, TranslationTable

SCHEMA_VERSION = 1

# queries whose top-3 documents carry no sufficiently dominant table are
# dropped when building datasets; the threshold applies to frac_cleaned
DOMINANCE_FILTER_THRESHOLD = 0.40
DOMINANCE_FILTER_TOP_DOCS = 3

DEFAULT_CONFIG = {
    "features": {
        "strategy": "mdoc_cdoc_sdoc",
        "similarities": ["bm25", "tm", "cdssm"],
        "groups": ["fraction", "position", "quality"],
    },
    "classifier": {
        "n_trees": 200, "max_depth": 4, "learning_rate": 0.1,
        "min_leaf": 5, "seed": 0,
    },
    "cdssm": {
        "d_l": 5000, "window": 3, "d_conv": 64, "d_sem": 32,
        "negatives": 4, "gamma": 10.0, "learning_rate": 0.05,
        "epochs": 5, "seed": 0,
    },
    "tm": {"iterations": 10, "beta": 0.8},
    "theta": 0.5,
    "m": 4,
    "n": 4,
    "synonyms": None,
}


class PipelineError(Exception):
    """Validation or processing failure with machine-readable context."""

    def __init__(self, message, kind="validation", file=None, line=None):
        super().__init__(message)
        self.kind = kind
        self.file = file
        self.line = line

    def to_record(self):
        record = {"error": {"type": self.kind, "message": str(self)}}
        if self.file is not None:
            record["error"]["file"] = str(self.file)
        if self.line is not None:
            record["error"]["line"] = self.line
        return record


@dataclass
class DocRef:
    rank: int
    path: str
    url: str


@dataclass
class Query:
    id: str
    text: str
    docs: list

    @property
    def tokens(self):
        return tokenize(self.text)


@dataclass
class Corpus:
    root: Path
    queries: list
    labels: dict = None  # (query_id, doc_rank, table_index) -> 0/1, or None
    k: int = 0

    def query_by_id(self, query_id):
        for q in self.queries:
            if q.id == query_id:
                return q
        raise PipelineError(f"unknown query id {query_id!r}", kind="lookup")


def _merge_config(base, override):
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path=None) -> dict:
    """Run configuration with defaults filled in; unknown keys rejected."""
    if path is None:
        return json.loads(json.dumps(DEFAULT_CONFIG))
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PipelineError(f"config file not found: {path}", file=path) from None
    except json.JSONDecodeError as e:
        raise PipelineError(f"config is not valid JSON: {e}", file=path) from None
    if not isinstance(raw, dict):
        raise PipelineError("config must be a JSON object", file=path)
    raw.pop("schema_version", None)
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise PipelineError(f"unknown config keys: {sorted(unknown)}", file=path)
    config = _merge_config(DEFAULT_CONFIG, raw)
    if config["synonyms"]:
        syn_path = Path(config["synonyms"])
        if not syn_path.is_absolute():
            syn_path = path.parent / syn_path
        config["synonyms"] = str(syn_path)
    return config


def _read_jsonl(path):
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise PipelineError(f"required file missing: {path}", file=path) from None
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append((lineno, json.loads(line)))
        except json.JSONDecodeError as e:
            raise PipelineError(f"invalid JSON: {e}", file=path, line=lineno) from None
    return records


def _parse_doc_list(docs, path, lineno):
    refs = []
    for position, entry in enumerate(docs, start=1):
        if isinstance(entry, str):
            refs.append(DocRef(rank=position, path=entry, url=entry))
        elif isinstance(entry, dict):
            if "path" not in entry:
                raise PipelineError("doc entry object requires a 'path' field",
                                    file=path, line=lineno)
            rank = entry.get("rank", position)
            if not isinstance(rank, int):
                raise PipelineError(f"doc rank must be an integer, got {rank!r}",
                                    file=path, line=lineno)
            refs.append(DocRef(rank=rank, path=entry["path"],
                               url=entry.get("url", entry["path"])))
        else:
            raise PipelineError(f"doc entry must be a path or object, got {entry!r}",
                                file=path, line=lineno)
    refs.sort(key=lambda r: r.rank)
    ranks = [r.rank for r in refs]
    if ranks != list(range(1, len(refs) + 1)):
        raise PipelineError(f"document ranks must be contiguous from 1, got {ranks}",
                            file=path, line=lineno)
    return refs


def ingest_corpus(root) -> Corpus:
    """Load and validate a corpus directory."""
    root = Path(root)
    queries_path = root / "queries.jsonl"
    records = _read_jsonl(queries_path)
    if not records:
        raise PipelineError("queries.jsonl contains no queries", file=queries_path)

    queries = []
    seen = set()
    for lineno, rec in records:
        for required in ("id", "text", "docs"):
            if required not in rec:
                raise PipelineError(f"query record missing {required!r}",
                                    file=queries_path, line=lineno)
        qid = str(rec["id"])
        if qid in seen:
            raise PipelineError(f"duplicate query id {qid!r}",
                                file=queries_path, line=lineno)
        seen.add(qid)
        docs = _parse_doc_list(rec["docs"], queries_path, lineno)
        for ref in docs:
            if not (root / ref.path).is_file():
                raise PipelineError(
                    f"document file missing for query {qid!r}: {ref.path}",
                    file=queries_path, line=lineno)
        queries.append(Query(id=qid, text=str(rec["text"]), docs=docs))

    labels = None
    labels_path = root / "labels.jsonl"
    if labels_path.is_file():
        labels = {}
        query_ids = {q.id for q in queries}
        ranks = {q.id: len(q.docs) for q in queries}
        for lineno, rec in _read_jsonl(labels_path):
            for required in ("query_id", "doc_rank", "table_index", "label"):
                if required not in rec:
                    raise PipelineError(f"label record missing {required!r}",
                                        file=labels_path, line=lineno)
            qid = str(rec["query_id"])
            if qid not in query_ids:
                raise PipelineError(f"label references unknown query {qid!r}",
                                    file=labels_path, line=lineno)
            if rec["label"] not in (0, 1):
                raise PipelineError(f"label must be 0 or 1, got {rec['label']!r}",
                                    file=labels_path, line=lineno)
            rank = rec["doc_rank"]
            if not isinstance(rank, int) or not 1 <= rank <= ranks[qid]:
                raise PipelineError(
                    f"label doc_rank {rank!r} outside 1..{ranks[qid]} for query {qid!r}",
                    file=labels_path, line=lineno)
            key = (qid, rank, int(rec["table_index"]))
            if key in labels:
                raise PipelineError(f"duplicate label for {key}",
                                    file=labels_path, line=lineno)
            labels[key] = int(rec["label"])

    k = max((len(q.docs) for q in queries), default=0)
    return Corpus(root=root, queries=queries, labels=labels, k=k)


def extract_corpus_tables(corpus: Corpus) -> dict:
    """query id -> list of ExtractedTable across all its documents."""
    tables = {}
    for query in corpus.queries:
        found = []
        for ref in query.docs:
            html = (corpus.root / ref.path).read_text(encoding="utf-8")
            found.extend(extract_candidate_tables(html, url=ref.url, doc_rank=ref.rank))
        tables[query.id] = found
    return tables


def validate_label_references(corpus: Corpus, tables_by_query: dict):
    """Every label must point at an extracted table."""
    if corpus.labels is None:
        return
    existing = {
        (qid, t.doc_rank, t.table_index)
        for qid, tables in tables_by_query.items()
        for t in tables
    }
    for key in corpus.labels:
        if key not in existing:
            raise PipelineError(
                f"label references nonexistent table (query {key[0]!r}, "
                f"doc_rank {key[1]}, table_index {key[2]})",
                file=corpus.root / "labels.jsonl")


def passes_dominance_filter(tables) -> bool:
    """A query enters the dataset only if some table in its top-ranked
    documents dominates enough of its page."""
    return any(
        t.doc_rank <= DOMINANCE_FILTER_TOP_DOCS
        and t.dominance.frac_cleaned > DOMINANCE_FILTER_THRESHOLD
        for t in tables
    )


def dataset_queries(corpus: Corpus, tables_by_query: dict):
    """Queries surviving the dominance filter, in corpus order."""
    return [q for q in corpus.queries if passes_dominance_filter(tables_by_query[q.id])]


def label_of(corpus: Corpus, query_id, table) -> int:
    """Label lookup; unlabeled pairs count as negatives."""
    if corpus.labels is None:
        raise PipelineError("corpus has no labels.jsonl; labels are required here")
    return corpus.labels.get((query_id, table.doc_rank, table.table_index), 0)


def build_click_pairs(corpus: Corpus, tables_by_query: dict, queries, strategy):
    """(query tokens, doc tokens) pairs from positive tables.

    Every document of a positive table's DocumentSet yields one pair, so
    the similarity models see metadata, cells and subject text alike.
    """
    pairs = []
    for query in queries:
        q_tokens = query.tokens
        for table in tables_by_query[query.id]:
            if label_of(corpus, query.id, table) == 1:
                for _, doc in build_documents(table, strategy):
                    pairs.append((q_tokens, doc))
    return pairs


@dataclass
class ModelBundle:
    """Everything `answer`/`evaluate` need, as one serializable unit."""

    feature_config: FeatureConfig
    stats: dict  # doc kind -> CorpusStats
    models: SimilarityModels
    boosted: classifier_mod.BoostedModel
    config: dict = field(default_factory=dict)  # training-time run config

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "feature_config": self.feature_config.to_dict(),
            "bm25_stats": {kind: s.to_dict() for kind, s in self.stats.items()},
            "tm": self.models.tm.to_dict() if self.models.tm else None,
            "cdssm": self.models.cdssm.to_dict() if self.models.cdssm else None,
            "classifier": classifier_mod.model_to_dict(self.boosted),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("schema_version") != SCHEMA_VERSION:
            raise PipelineError(
                f"unsupported model bundle schema_version: {data.get('schema_version')!r}",
                kind="format")
        return cls(
            feature_config=FeatureConfig.from_dict(data["feature_config"]),
            stats={kind: CorpusStats.from_dict(s)
                   for kind, s in data["bm25_stats"].items()},
            models=SimilarityModels(
                tm=TranslationTable.from_dict(data["tm"]) if data.get("tm") else None,
                cdssm=CdssmParams.from_dict(data["cdssm"]) if data.get("cdssm") else None,
            ),
            boosted=classifier_mod.model_from_dict(data["classifier"]),
            config=data.get("config", {}),
        )


def save_bundle(bundle: ModelBundle, path):
    Path(path).write_text(
        json.dumps(bundle.to_dict(), sort_keys=True, indent=2) + "\n",
        encoding="utf-8")


def load_bundle(path) -> ModelBundle:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise PipelineError(f"model file not found: {path}", file=path) from None
    except json.JSONDecodeError as e:
        raise PipelineError(f"model file is not valid JSON: {e}",
                            kind="format", file=path) from None
    try:
        return ModelBundle.from_dict(data)
    except (KeyError, ValueError) as e:
        raise PipelineError(f"malformed model bundle: {e}", kind="format", file=path) from None


def assemble_query_features(query: Query, tables, bundle: ModelBundle):
    """[(table, FeatureVector)] for one query's candidates."""
    return [
        (t, assemble(query.tokens, t, bundle.models, bundle.stats,
                     bundle.feature_config, query_id=query.id))
        for t in tables
    ]


def train_bundle(corpus: Corpus, config: dict) -> ModelBundle:
    """The full training flow over a labeled corpus."""
    if corpus.labels is None:
        raise PipelineError("training requires labels.jsonl in the corpus")
    cfg = FeatureConfig.from_dict(config["features"])
    tables_by_query = extract_corpus_tables(corpus)
    validate_label_references(corpus, tables_by_query)
    queries = dataset_queries(corpus, tables_by_query)
    if not queries:
        raise PipelineError("no queries survive the dominance filter; nothing to train on")

    all_tables = [t for q in corpus.queries for t in tables_by_query[q.id]]
    stats = build_corpus_stats(all_tables, cfg.strategy)

    models = SimilarityModels()
    if "tm" in cfg.similarities or "cdssm" in cfg.similarities:
        pairs = build_click_pairs(corpus, tables_by_query, queries, cfg.strategy)
        if not pairs:
            raise PipelineError("no positive pairs available to train similarity models")
        if "tm" in cfg.similarities:
            models.tm = tm_train(pairs, iterations=config["tm"]["iterations"],
                                 beta=config["tm"]["beta"])
        if "cdssm" in cfg.similarities:
            c = config["cdssm"]
            if c["negatives"] >= len(pairs):
                raise PipelineError(
                    f"cdssm needs more than {c['negatives']} click pairs, got {len(pairs)}")
            models.cdssm = cdssm_train(
                pairs, d_l=c["d_l"], window=c["window"], d_conv=c["d_conv"],
                d_sem=c["d_sem"], negatives=c["negatives"], gamma=c["gamma"],
                learning_rate=c["learning_rate"], epochs=c["epochs"], seed=c["seed"])

    labeled = []
    for query in queries:
        for table in tables_by_query[query.id]:
            fv = assemble(query.tokens, table, models, stats, cfg, query_id=query.id)
            labeled.append(classifier_mod.LabeledPair(
                query_id=query.id, features=fv,
                label=label_of(corpus, query.id, table)))
    if not labeled:
        raise PipelineError("no candidate tables in the filtered dataset")

    h = config["classifier"]
    try:
        boosted = classifier_mod.train(
            labeled, n_trees=h["n_trees"], max_depth=h["max_depth"],
            learning_rate=h["learning_rate"], min_leaf=h["min_leaf"],
            seed=h["seed"], config=cfg)
    except ValueError as e:
        raise PipelineError(f"classifier training failed: {e}") from None
    return ModelBundle(feature_config=cfg, stats=stats, models=models,
                       boosted=boosted, config=config)


def _write_json(path, payload):
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_jsonl(path, records):
    lines = [json.dumps(r, sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def cmd_extract(corpus_dir, out_dir) -> dict:
    """Extract candidate tables; writes tables.jsonl."""
    corpus = ingest_corpus(corpus_dir)
    tables_by_query = extract_corpus_tables(corpus)
    validate_label_references(corpus, tables_by_query)
    records = []
    for query in corpus.queries:
        for t in tables_by_query[query.id]:
            meta = t.metadata
            records.append({
                "schema_version": SCHEMA_VERSION,
                "query_id": query.id,
                "doc_rank": t.doc_rank,
                "table_index": t.table_index,
                "n_rows": t.n_rows,
                "n_cols": t.n_cols,
                "subject_col": t.subject_col,
                "grid": t.grid,
                "dominance": {
                    "frac_raw": t.dominance.frac_raw,
                    "frac_cleaned": t.dominance.frac_cleaned,
                    "frac_main": t.dominance.frac_main,
                    "pos_raw": t.dominance.pos_raw,
                    "pos_cleaned": t.dominance.pos_cleaned,
                    "pos_main": t.dominance.pos_main,
                },
                "metadata": {
                    "url": meta.url,
                    "page_title": meta.page_title,
                    "h1_heading": meta.h1_heading,
                    "section_headings": meta.section_headings,
                    "preceding_text": meta.preceding_text,
                    "caption": meta.caption,
                    "column_names": meta.column_names,
                    "header_row": meta.header_row,
                    "footer_row": meta.footer_row,
                },
            })
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out / "tables.jsonl", records)
    return {"queries": len(corpus.queries), "tables": len(records)}


def cmd_train(corpus_dir, out_dir, config=None, model_path=None) -> dict:
    """Train all models; writes model.json."""
    config = config if config is not None else load_config(None)
    corpus = ingest_corpus(corpus_dir)
    bundle = train_bundle(corpus, config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = Path(model_path) if model_path else out / "model.json"
    save_bundle(bundle, target)
    return {
        "model": str(target),
        "features": list(bundle.boosted.feature_names),
        "trees": len(bundle.boosted.trees),
    }


def cmd_features(corpus_dir, out_dir, model_path) -> dict:
    """Assemble features under a trained bundle; writes features.jsonl."""
    corpus = ingest_corpus(corpus_dir)
    bundle = load_bundle(model_path)
    tables_by_query = extract_corpus_tables(corpus)
    validate_label_references(corpus, tables_by_query)
    queries = dataset_queries(corpus, tables_by_query)
    records = []
    for query in queries:
        for table, fv in assemble_query_features(query, tables_by_query[query.id], bundle):
            record = {
                "schema_version": SCHEMA_VERSION,
                "query_id": query.id,
                "doc_rank": table.doc_rank,
                "table_index": table.table_index,
                "features": fv.as_dict(),
            }
            if corpus.labels is not None:
                record["label"] = label_of(corpus, query.id, table)
            records.append(record)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out / "features.jsonl", records)
    return {"queries": len(queries), "rows": len(records)}


def cmd_evaluate(corpus_dir, out_dir, model_path) -> dict:
    """Classifier and selector PR curves; writes CSV and JSON twins."""
    corpus = ingest_corpus(corpus_dir)
    if corpus.labels is None:
        raise PipelineError("evaluation requires labels.jsonl in the corpus")
    bundle = load_bundle(model_path)
    tables_by_query = extract_corpus_tables(corpus)
    validate_label_references(corpus, tables_by_query)
    queries = dataset_queries(corpus, tables_by_query)

    scored_pairs = []
    per_query = []
    for query in queries:
        candidates = []
        for table, fv in assemble_query_features(query, tables_by_query[query.id], bundle):
            score = classifier_mod.predict(bundle.boosted, fv)
            label = label_of(corpus, query.id, table)
            scored_pairs.append((score, label))
            candidates.append((score, label, table.doc_rank, table.table_index))
        per_query.append(candidates)

    cls_points = classifier_pr(scored_pairs)
    sel_points = selector_pr(per_query)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_pr_csv(cls_points, out / "classifier_pr.csv")
    write_pr_json(cls_points, out / "classifier_pr.json")
    write_pr_csv(sel_points, out / "selector_pr.csv")
    write_pr_json(sel_points, out / "selector_pr.json")
    return {
        "queries": len(queries),
        "pairs": len(scored_pairs),
        "files": ["classifier_pr.csv", "classifier_pr.json",
                  "selector_pr.csv", "selector_pr.json"],
    }


def answer_query(query: Query, tables, bundle: ModelBundle, config: dict) -> dict:
    """Score, select and snippet one query.  Labels are never read here."""
    synonyms = load_synonyms(config["synonyms"]) if config.get("synonyms") else {}
    record = {"schema_version": SCHEMA_VERSION, "query_id": query.id,
              "query": query.text}
    if not tables:
        record.update({"answered": False, "reason": "no_candidate_tables"})
        return record
    candidates = assemble_query_features(query, tables, bundle)
    result = select(query.tokens, candidates, bundle.boosted, config["theta"])
    if result.empty:
        record.update({"answered": False, "reason": "below_threshold"})
        return record
    snip = generate(result.table, query.tokens, m=config["m"], n=config["n"],
                    synonyms=synonyms)
    record.update({
        "answered": True,
        "doc_rank": result.key[0],
        "table_index": result.key[1],
        "score": result.score,
        "margin": result.margin,
        "snippet": snip.to_json_dict(),
    })
    return record


def cmd_answer(corpus_dir, out_dir, model_path, config=None, query_id=None) -> dict:
    """Answer queries end to end; writes answers.jsonl."""
    config = config if config is not None else load_config(None)
    corpus = ingest_corpus(corpus_dir)
    bundle = load_bundle(model_path)
    queries = [corpus.query_by_id(query_id)] if query_id else corpus.queries
    records = []
    for query in queries:
        tables = []
        for ref in query.docs:
            html = (corpus.root / ref.path).read_text(encoding="utf-8")
            tables.extend(extract_candidate_tables(html, url=ref.url, doc_rank=ref.rank))
        records.append(answer_query(query, tables, bundle, config))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out / "answers.jsonl", records)
    answered = sum(1 for r in records if r.get("answered"))
    return {"queries": len(records), "answered": answered}


def cmd_inspect(corpus_dir, out_dir=None, model_path=None) -> dict:
    """Corpus (and optionally bundle) summary; writes inspect.json when
    an output directory is given."""
    corpus = ingest_corpus(corpus_dir)
    tables_by_query = extract_corpus_tables(corpus)
    summary = {
        "schema_version": SCHEMA_VERSION,
        "root": str(corpus.root),
        "k": corpus.k,
        "queries": [],
        "labeled": corpus.labels is not None,
        "label_count": len(corpus.labels) if corpus.labels else 0,
    }
    for query in corpus.queries:
        tables = tables_by_query[query.id]
        summary["queries"].append({
            "id": query.id,
            "text": query.text,
            "docs": len(query.docs),
            "tables": len(tables),
            "passes_dominance_filter": passes_dominance_filter(tables),
            "table_keys": [[t.doc_rank, t.table_index] for t in tables],
        })
    if model_path:
        bundle = load_bundle(model_path)
        summary["model"] = {
            "feature_names": list(bundle.boosted.feature_names),
            "trees": len(bundle.boosted.trees),
            "fingerprint": bundle.boosted.fingerprint,
            "similarities": list(bundle.feature_config.similarities),
            "strategy": bundle.feature_config.strategy.value,
        }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "inspect.json", summary)
    return summary
