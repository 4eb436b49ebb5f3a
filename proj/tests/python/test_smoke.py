import json

import pytest

import registerdex


@pytest.fixture(scope="module")
def deployment(tmp_path_factory):
    root = tmp_path_factory.mktemp("planted")
    registerdex.generate_planted(root, papers=20, seed=3, queries_per_tag=5)
    config = {
        "corpus": str(root / "corpus.jsonl"),
        "transcripts": str(root / "transcripts.jsonl"),
        "register_store": str(root / "registers.jsonl"),
        "index_dir": str(root / "index"),
    }
    built = registerdex.build_registers(**config)
    assert built["papers"] == 20
    indexed = registerdex.build_index(**config)
    assert indexed["registers"] == 20
    return root, config


def test_reward_values():
    op = "Abstract/Method/Implementation/Operation"
    assert registerdex.hierarchical_reward(op, op) == 2.0
    assert registerdex.hierarchical_reward(op, "Abstract/Method/Implementation/Module") == pytest.approx(1.5)
    assert registerdex.hierarchical_reward(op, "Abstract/Experiment/Dataset") == pytest.approx(7 / 12)


def test_tokenize_and_recall():
    assert registerdex.tokenize("The Graph, the tree", remove_stopwords=True) == ["graph", "tree"]
    assert registerdex.recall_at_k(["a", "b", "c"], {"c", "z"}, 3) == 0.5


def test_search_returns_planted_paper(deployment):
    root, config = deployment
    engine = registerdex.Engine(**config)
    with open(root / "eval.jsonl") as f:
        query = json.loads(f.readline())
    result = engine.search(query["query"], m=5)
    assert len(result["results"]) == 5
    ids = [r["paper_id"] for r in result["results"]]
    assert query["relevant_ids"][0] in ids
    manual = engine.search(query["query"], views=[query["golden_view"]])
    assert manual["manual"] is True
    assert manual["results"][0]["paper_id"] == query["relevant_ids"][0]


def test_identify_is_bounded(deployment):
    _, config = deployment
    views = registerdex.Engine(**config).identify("dataset statistics", k=3)
    assert len(views) == 3
    assert all(v.startswith("Abstract") for v in views)


def test_evaluate(deployment, tmp_path):
    root, config = deployment
    report = registerdex.evaluate(root / "eval.jsonl", ["register:oracle", "abstract"], tmp_path, **config)
    systems = {s["name"]: s for s in report["systems"]}
    assert systems["register:oracle"]["by_tag"]["all"]["recall@5"] == 1.0
    assert (tmp_path / "report.json").exists()


def test_errors_map_to_python_exceptions(deployment):
    _, config = deployment
    with pytest.raises(registerdex.ConfigError):
        registerdex.Engine(**config, k=0)
    with pytest.raises(ValueError):
        registerdex.Engine(**config, colour="blue")
    assert registerdex.network_call_count() == 0
