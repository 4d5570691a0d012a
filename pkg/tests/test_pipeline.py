"""Corpus ingestion, training flow, command outputs and the CLI."""

import json
from pathlib import Path

import pytest

from tableanswer import cli, pipeline
from tableanswer.classifier import predict
from tableanswer.evaluation import classifier_pr, pr_points_to_rows, selector_pr
from tableanswer.pipeline import (
    PipelineError, dataset_queries, extract_corpus_tables, ingest_corpus,
    label_of, load_bundle, load_config, passes_dominance_filter, train_bundle,
)

CITY_ROWS = [("springfield", "illinois", "100"), ("madison", "wisconsin", "200"),
             ("salem", "oregon", "300")]
ROCK_ROWS = [("quartz", "white", "7"), ("talc", "green", "1"),
             ("topaz", "amber", "8")]


def render_table(header, rows):
    body = "".join(
        "<tr>" + "".join(f"<td>{c}</td>" for c in row) + "</tr>" for row in rows)
    head = "<tr>" + "".join(f"<th>{h}</th>" for h in header) + "</tr>"
    return f"<table>{head}{body}</table>"


def city_page(i):
    rows = [(f"{name}{i}", state, pop) for name, state, pop in CITY_ROWS]
    table = render_table(["city", "state", "pop"], rows)
    return (f"<html><head><title>best cities {i} list</title></head>"
            f"<body><h1>cities {i}</h1>{table}</body></html>")


def rock_page(i, wordy=False):
    rows = [(f"{name}{i}", color, hard) for name, color, hard in ROCK_ROWS]
    table = render_table(["mineral", "color", "hardness"], rows)
    filler = "<p>" + "unrelated prose about rocks and minerals. " * 40 + "</p>"
    body = (filler * 3 if wordy else "") + table
    return (f"<html><head><title>mineral guide {i}</title></head>"
            f"<body><h1>minerals</h1>{body}</body></html>")


def write_corpus(root, n_queries=3, labels=True, wordy_ids=()):
    """Per query: rank 1 on-topic dominant page, rank 2 off-topic page."""
    root = Path(root)
    (root / "docs").mkdir(parents=True, exist_ok=True)
    queries = []
    label_rows = []
    for i in range(1, n_queries + 1):
        qid = f"q{i}"
        wordy = qid in wordy_ids
        good, bad = f"docs/{qid}a.html", f"docs/{qid}b.html"
        if wordy:
            filler = "<p>" + "long digression with no tables worth reading. " * 60 + "</p>"
            page = (f"<html><head><title>essay {i}</title></head><body>"
                    f"{filler}{render_table(['a', 'b'], [[f'x{i}', 'p'], [f'y{i}', 'q']])}"
                    f"{filler}</body></html>")
            (root / good).write_text(page, encoding="utf-8")
        else:
            (root / good).write_text(city_page(i), encoding="utf-8")
        (root / bad).write_text(rock_page(i, wordy=wordy), encoding="utf-8")
        queries.append({"id": qid, "text": f"best cities {i}", "docs": [good, bad]})
        label_rows.append({"query_id": qid, "doc_rank": 1, "table_index": 1, "label": 1})
        label_rows.append({"query_id": qid, "doc_rank": 2, "table_index": 1, "label": 0})
    write_queries(root, queries)
    if labels:
        write_labels(root, label_rows)
    return root


def write_queries(root, records):
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    (Path(root) / "queries.jsonl").write_text(text, encoding="utf-8")


def write_labels(root, records):
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    (Path(root) / "labels.jsonl").write_text(text, encoding="utf-8")


def fast_config(**overrides):
    cfg = load_config(None)
    cfg["features"]["similarities"] = ["bm25"]
    cfg["classifier"].update(
        {"n_trees": 20, "max_depth": 3, "learning_rate": 0.3, "min_leaf": 1})
    cfg.update(overrides)
    return cfg


def test_ingest_minimal_corpus(tmp_path):
    root = write_corpus(tmp_path / "c")
    corpus = ingest_corpus(root)
    assert [q.id for q in corpus.queries] == ["q1", "q2", "q3"]
    assert corpus.k == 2
    assert len(corpus.labels) == 6
    assert corpus.labels[("q1", 1, 1)] == 1
    assert corpus.query_by_id("q2").tokens == ["best", "cities", "2"]
    with pytest.raises(PipelineError):
        corpus.query_by_id("missing")


def test_missing_queries_file(tmp_path):
    with pytest.raises(PipelineError, match="required file missing"):
        ingest_corpus(tmp_path)


def test_empty_queries_rejected(tmp_path):
    (tmp_path / "queries.jsonl").write_text("\n  \n", encoding="utf-8")
    with pytest.raises(PipelineError, match="no queries"):
        ingest_corpus(tmp_path)


def test_duplicate_query_ids_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1)
    write_queries(root, [
        {"id": "q1", "text": "a", "docs": ["docs/q1a.html"]},
        {"id": "q1", "text": "b", "docs": ["docs/q1b.html"]},
    ])
    with pytest.raises(PipelineError, match="duplicate query id"):
        ingest_corpus(root)


def test_non_contiguous_ranks_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1, labels=False)
    write_queries(root, [{
        "id": "q1", "text": "a",
        "docs": [{"path": "docs/q1a.html", "rank": 1},
                 {"path": "docs/q1b.html", "rank": 3}],
    }])
    with pytest.raises(PipelineError, match="contiguous"):
        ingest_corpus(root)


def test_missing_document_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1, labels=False)
    write_queries(root, [{"id": "q1", "text": "a", "docs": ["docs/nope.html"]}])
    with pytest.raises(PipelineError, match="document file missing"):
        ingest_corpus(root)


def test_malformed_labels_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1)
    bad_label_sets = [
        [{"query_id": "zz", "doc_rank": 1, "table_index": 1, "label": 1}],
        [{"query_id": "q1", "doc_rank": 1, "table_index": 1, "label": 2}],
        [{"query_id": "q1", "doc_rank": 9, "table_index": 1, "label": 1}],
        [{"query_id": "q1", "doc_rank": 1, "table_index": 1}],
        [{"query_id": "q1", "doc_rank": 1, "table_index": 1, "label": 1},
         {"query_id": "q1", "doc_rank": 1, "table_index": 1, "label": 0}],
    ]
    for rows in bad_label_sets:
        write_labels(root, rows)
        with pytest.raises(PipelineError):
            ingest_corpus(root)


def test_label_to_nonexistent_table_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1)
    write_labels(root, [
        {"query_id": "q1", "doc_rank": 1, "table_index": 9, "label": 1}])
    with pytest.raises(PipelineError, match="nonexistent table"):
        pipeline.cmd_extract(root, tmp_path / "out")


def test_extract_tables_by_query(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=2)
    corpus = ingest_corpus(root)
    tables = extract_corpus_tables(corpus)
    assert set(tables) == {"q1", "q2"}
    keys = [(t.doc_rank, t.table_index) for t in tables["q1"]]
    assert keys == [(1, 1), (2, 1)]
    assert label_of(corpus, "q1", tables["q1"][0]) == 1
    assert label_of(corpus, "q1", tables["q1"][1]) == 0


def test_dominance_filter_drops_wordy_query(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=3, wordy_ids={"q2"})
    corpus = ingest_corpus(root)
    tables = extract_corpus_tables(corpus)
    assert passes_dominance_filter(tables["q1"])
    assert not passes_dominance_filter(tables["q2"])
    assert [q.id for q in dataset_queries(corpus, tables)] == ["q1", "q3"]


def test_train_bundle_roundtrip(tmp_path):
    root = write_corpus(tmp_path / "c")
    corpus = ingest_corpus(root)
    bundle = train_bundle(corpus, fast_config())
    assert bundle.models.tm is None and bundle.models.cdssm is None
    assert set(bundle.stats) == {"mdoc", "cdoc", "sdoc"}
    assert len(bundle.boosted.trees) == 20

    path = tmp_path / "model.json"
    pipeline.save_bundle(bundle, path)
    loaded = load_bundle(path)
    tables = extract_corpus_tables(corpus)
    query = corpus.queries[0]
    for table, fv in pipeline.assemble_query_features(query, tables["q1"], bundle):
        assert predict(loaded.boosted, fv) == predict(bundle.boosted, fv)
    assert loaded.config == bundle.config


def test_train_without_labels_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", labels=False)
    with pytest.raises(PipelineError, match="requires labels"):
        train_bundle(ingest_corpus(root), fast_config())


def test_all_queries_filtered_rejected(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=1, wordy_ids={"q1"})
    with pytest.raises(PipelineError, match="dominance filter"):
        train_bundle(ingest_corpus(root), fast_config())


def test_cmd_extract_writes_table_records(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=2)
    out = tmp_path / "out"
    summary = pipeline.cmd_extract(root, out)
    assert summary == {"queries": 2, "tables": 4}
    lines = (out / "tables.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4
    first = json.loads(lines[0])
    assert first["schema_version"] == 1
    assert first["query_id"] == "q1" and first["doc_rank"] == 1
    assert first["subject_col"] == 0
    assert first["grid"][0][0] == "springfield1"
    assert 0.0 <= first["dominance"]["frac_cleaned"] <= 1.0
    assert first["metadata"]["page_title"] == "best cities 1 list"


def test_full_flow_train_features_evaluate_answer(tmp_path):
    root = write_corpus(tmp_path / "c")
    out = tmp_path / "out"
    config = fast_config()

    summary = pipeline.cmd_train(root, out, config=config)
    model_path = out / "model.json"
    assert summary["trees"] == 20 and model_path.is_file()

    f_summary = pipeline.cmd_features(root, out, model_path)
    assert f_summary == {"queries": 3, "rows": 6}
    rows = [json.loads(line) for line in
            (out / "features.jsonl").read_text(encoding="utf-8").splitlines()]
    cfg_names = load_bundle(model_path).feature_config.feature_names()
    # records are written with sorted keys, so compare as sets
    assert all(set(r["features"]) == set(cfg_names) for r in rows)
    assert {r["label"] for r in rows} == {0, 1}

    e_summary = pipeline.cmd_evaluate(root, out, model_path)
    assert e_summary["queries"] == 3 and e_summary["pairs"] == 6
    for name in e_summary["files"]:
        assert (out / name).is_file()

    a_summary = pipeline.cmd_answer(root, out, model_path, config=config)
    assert a_summary == {"queries": 3, "answered": 3}
    answers = [json.loads(line) for line in
               (out / "answers.jsonl").read_text(encoding="utf-8").splitlines()]
    for record in answers:
        assert record["answered"] is True
        assert (record["doc_rank"], record["table_index"]) == (1, 1)
        assert record["score"] > config["theta"]
        assert record["margin"] is not None
        snip = record["snippet"]
        assert snip["column_names"][0] == "city"
        assert snip["rows"][0][0].startswith("springfield")


def test_evaluate_matches_recomputed_curves(tmp_path):
    root = write_corpus(tmp_path / "c")
    out = tmp_path / "out"
    config = fast_config()
    pipeline.cmd_train(root, out, config=config)
    model_path = out / "model.json"
    pipeline.cmd_evaluate(root, out, model_path)

    corpus = ingest_corpus(root)
    bundle = load_bundle(model_path)
    tables = extract_corpus_tables(corpus)
    scored, per_query = [], []
    for query in dataset_queries(corpus, tables):
        cands = []
        for table, fv in pipeline.assemble_query_features(
                query, tables[query.id], bundle):
            score = predict(bundle.boosted, fv)
            label = label_of(corpus, query.id, table)
            scored.append((score, label))
            cands.append((score, label, table.doc_rank, table.table_index))
        per_query.append(cands)

    expected_cls = "\n".join(
        ",".join(row) for row in pr_points_to_rows(classifier_pr(scored))) + "\n"
    expected_sel = "\n".join(
        ",".join(row) for row in pr_points_to_rows(selector_pr(per_query))) + "\n"
    assert (out / "classifier_pr.csv").read_text(encoding="utf-8") == expected_cls
    assert (out / "selector_pr.csv").read_text(encoding="utf-8") == expected_sel


def test_answer_single_query_and_threshold(tmp_path):
    root = write_corpus(tmp_path / "c")
    out = tmp_path / "out"
    config = fast_config()
    pipeline.cmd_train(root, out, config=config)
    model_path = out / "model.json"

    only = pipeline.cmd_answer(root, out, model_path, config=config, query_id="q2")
    assert only == {"queries": 1, "answered": 1}
    record = json.loads((out / "answers.jsonl").read_text(encoding="utf-8"))
    assert record["query_id"] == "q2"

    strict = fast_config(theta=1.0)
    pipeline.cmd_answer(root, out, model_path, config=strict)
    records = [json.loads(line) for line in
               (out / "answers.jsonl").read_text(encoding="utf-8").splitlines()]
    assert all(r["answered"] is False for r in records)
    assert all(r["reason"] == "below_threshold" for r in records)


def test_answer_does_not_need_labels(tmp_path):
    labeled = write_corpus(tmp_path / "labeled")
    unlabeled = write_corpus(tmp_path / "unlabeled", labels=False)
    out = tmp_path / "out"
    config = fast_config()
    pipeline.cmd_train(labeled, out, config=config)
    model_path = out / "model.json"

    pipeline.cmd_answer(labeled, tmp_path / "a1", model_path, config=config)
    pipeline.cmd_answer(unlabeled, tmp_path / "a2", model_path, config=config)
    a1 = (tmp_path / "a1" / "answers.jsonl").read_bytes()
    a2 = (tmp_path / "a2" / "answers.jsonl").read_bytes()
    assert a1 == a2


def test_inspect_summary(tmp_path):
    root = write_corpus(tmp_path / "c", n_queries=2, wordy_ids={"q2"})
    out = tmp_path / "out"
    config = fast_config()
    pipeline.cmd_train(root, out, config=config)

    summary = pipeline.cmd_inspect(root, out_dir=out, model_path=out / "model.json")
    assert summary["k"] == 2 and summary["labeled"] is True
    assert summary["label_count"] == 4
    by_id = {q["id"]: q for q in summary["queries"]}
    assert by_id["q1"]["passes_dominance_filter"] is True
    assert by_id["q2"]["passes_dominance_filter"] is False
    assert by_id["q1"]["table_keys"] == [[1, 1], [2, 1]]
    assert summary["model"]["similarities"] == ["bm25"]
    assert (out / "inspect.json").is_file()


def test_load_config_defaults_are_copies():
    one = load_config(None)
    one["classifier"]["n_trees"] = 1
    two = load_config(None)
    assert two["classifier"]["n_trees"] == pipeline.DEFAULT_CONFIG["classifier"]["n_trees"]
    assert two["classifier"]["n_trees"] != 1


def test_load_config_merge_and_validation(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"classifier": {"n_trees": 7}, "theta": 0.25}),
                    encoding="utf-8")
    cfg = load_config(path)
    assert cfg["classifier"]["n_trees"] == 7
    assert cfg["classifier"]["max_depth"] == pipeline.DEFAULT_CONFIG["classifier"]["max_depth"]
    assert cfg["theta"] == 0.25

    path.write_text(json.dumps({"mystery": 1}), encoding="utf-8")
    with pytest.raises(PipelineError, match="unknown config keys"):
        load_config(path)

    path.write_text("not json", encoding="utf-8")
    with pytest.raises(PipelineError, match="not valid JSON"):
        load_config(path)

    path.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(PipelineError, match="JSON object"):
        load_config(path)

    with pytest.raises(PipelineError, match="not found"):
        load_config(tmp_path / "absent.json")


def test_load_config_resolves_synonym_path(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"synonyms": "syn.txt"}), encoding="utf-8")
    cfg = load_config(path)
    assert cfg["synonyms"] == str(tmp_path / "syn.txt")


def test_cli_success_and_error_paths(tmp_path, capsys):
    root = write_corpus(tmp_path / "c", n_queries=1)
    code = cli.main(["inspect", "--corpus", str(root)])
    captured = capsys.readouterr()
    assert code == 0
    summary = json.loads(captured.out)
    assert summary["k"] == 2 and summary["queries"][0]["id"] == "q1"

    code = cli.main(["extract", "--corpus", str(root)])
    captured = capsys.readouterr()
    assert code == 2
    error = json.loads(captured.err)
    assert error["error"]["type"] == "usage"
    assert "--out" in error["error"]["message"]

    code = cli.main(["inspect", "--corpus", str(tmp_path / "nowhere")])
    captured = capsys.readouterr()
    assert code == 2
    assert json.loads(captured.err)["error"]["type"] == "validation"


def test_cli_end_to_end(tmp_path, capsys):
    root = write_corpus(tmp_path / "c")
    out = tmp_path / "out"
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "features": {"similarities": ["bm25"]},
        "classifier": {"n_trees": 20, "max_depth": 3,
                       "learning_rate": 0.3, "min_leaf": 1},
    }), encoding="utf-8")

    assert cli.main(["train", "--corpus", str(root), "--out", str(out),
                     "--config", str(cfg_path)]) == 0
    train_summary = json.loads(capsys.readouterr().out)
    assert train_summary["trees"] == 20

    assert cli.main(["answer", "--corpus", str(root), "--out", str(out),
                     "--model", str(out / "model.json"),
                     "--config", str(cfg_path), "--query", "q1"]) == 0
    answer_summary = json.loads(capsys.readouterr().out)
    assert answer_summary == {"queries": 1, "answered": 1}
    assert (out / "answers.jsonl").is_file()
