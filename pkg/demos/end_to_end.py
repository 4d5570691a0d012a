"""Generate a synthetic corpus, train, evaluate and answer end to end.

Builds the adversarial two-family corpus that ships with the package:
half its queries pair a relevant table with a word-identical distractor
buried in boilerplate, the other half pair it with an equally dominant
off-topic table.  A classifier over word-match similarity plus the
table-layout features handles both halves; the run prints the held-out
evaluation sweep and a few answer records to show it.

The learned similarity models are left out here on purpose: the corpus
generator invents nonce words, so its training and held-out vocabularies
are disjoint and a model that memorizes words has nothing to transfer.
See similarity_walkthrough.py for those models in action.

Everything is written under a temporary directory and cleaned up.

Run:  python3 demos/end_to_end.py
"""

import json
import tempfile
from pathlib import Path

from tableanswer.pipeline import (
    cmd_answer, cmd_evaluate, cmd_train, load_config,
)
from tableanswer.synth import generate_ab_eval_corpus, generate_ab_training_corpus


def small_config():
    config = load_config(None)
    config["features"]["similarities"] = ["bm25"]
    config["classifier"]["n_trees"] = 60
    return config


def best_operating_point(points_path):
    payload = json.loads(Path(points_path).read_text(encoding="utf-8"))
    usable = [p for p in payload["points"]
              if p["precision"] >= 0.8 and not p["precision_undefined"]]
    return max(usable, key=lambda p: p["recall"]) if usable else None


def main():
    with tempfile.TemporaryDirectory(prefix="tableanswer_demo_") as tmp:
        tmp = Path(tmp)
        train_dir, eval_dir, out = tmp / "train", tmp / "eval", tmp / "out"
        generate_ab_training_corpus(train_dir, n_queries=30, seed=0)
        generate_ab_eval_corpus(eval_dir, n_family_a=10, n_family_b=10, seed=1)

        config = small_config()
        summary = cmd_train(train_dir, out, config=config)
        print(f"trained {summary['trees']} trees over "
              f"{len(summary['features'])} features")

        model = out / "model.json"
        cmd_evaluate(eval_dir, out, model)
        point = best_operating_point(out / "selector_pr.json")
        if point:
            print("held-out selector sweep, best recall at >=0.8 precision:")
            print(f"  theta={point['threshold']:.2f}  "
                  f"precision={point['precision']:.3f}  "
                  f"recall={point['recall']:.3f}  "
                  f"(tp={point['tp']} fp={point['fp']} fn={point['fn']})")

        cmd_answer(eval_dir, out, model, config=config)
        records = [json.loads(line) for line in
                   (out / "answers.jsonl").read_text(encoding="utf-8").splitlines()]
        answered = [r for r in records if r["answered"]]
        print(f"answered {len(answered)} of {len(records)} held-out queries")

        for record in answered[:2]:
            snip = record["snippet"]
            print()
            print(f"query {record['query_id']}: {record['query']!r}")
            print(f"  chose doc_rank={record['doc_rank']} "
                  f"table_index={record['table_index']} "
                  f"score={record['score']:.3f}")
            print(f"  page: {snip['title']!r}")
            print(f"  columns: {snip['column_names']}")
            for row in snip["rows"]:
                print("    " + " | ".join(row))


if __name__ == "__main__":
    main()
