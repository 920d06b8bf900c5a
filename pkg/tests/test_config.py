import pytest

from narrative_arcs.config import RunConfig, load_config, validate_config
from narrative_arcs.errors import BadFraction, BadThreshold, ConfigError, UnknownScorer


@pytest.fixture
def story(tmp_path):
    p = tmp_path / "story.txt"
    p.write_text("It was good. It was bad.\n")
    return p


def write(tmp_path, body):
    p = tmp_path / "run.yaml"
    p.write_text(body)
    return p


def test_minimal_config_defaults(tmp_path, story):
    cfg = validate_config(write(tmp_path, "scorers: [afinn, bing]\ncorpora: [story.txt]\n"))
    assert cfg.smoothing == 0.10
    assert cfg.lttb == 25
    assert cfg.linkage == "single"
    assert [s.model_id for s in cfg.scorers] == ["afinn", "bing"]
    assert cfg.corpora[0].corpus_id == "story"
    assert cfg.resolve(cfg.corpora[0].path) == story


@pytest.mark.parametrize(
    "body,err",
    [
        ("smoothing: 0\n", BadFraction),
        ("smoothing: 1.5\n", BadFraction),
        ("lttb: 2\n", BadThreshold),
        ("lttb: 2.5\n", BadThreshold),
        ("linkage: ward\n", ConfigError),
        ("threads: 0\n", ConfigError),
        ("colour: red\n", ConfigError),
    ],
)
def test_bad_parameters(tmp_path, story, body, err):
    with pytest.raises(err):
        validate_config(write(tmp_path, "scorers: [vader, narrative]\ncorpora: [story.txt]\n" + body))


def test_unknown_scorer(tmp_path, story):
    with pytest.raises(UnknownScorer):
        validate_config(write(tmp_path, "scorers: [vader, no_such_model]\ncorpora: [story.txt]\n"))


def test_single_model_rejected(tmp_path, story):
    with pytest.raises(ConfigError, match="at least 2"):
        validate_config(write(tmp_path, "scorers: [vader]\ncorpora: [story.txt]\n"))


def test_external_models_count(tmp_path, story):
    (tmp_path / "ext.csv").write_text("model_id,family,segment_index,score\nbert,transformer,0,1\nbert,transformer,1,0\n")
    cfg = validate_config(
        write(tmp_path, "scorers: [vader]\ncorpora: [{path: story.txt, external: [ext.csv]}]\n")
    )
    assert cfg.corpora[0].external == ("ext.csv",)


def test_missing_files(tmp_path, story):
    with pytest.raises(ConfigError, match="corpus file"):
        validate_config(write(tmp_path, "scorers: [vader, narrative]\ncorpora: [nope.txt]\n"))
    with pytest.raises(ConfigError, match="lexicon file"):
        validate_config(
            write(tmp_path, "scorers: [vader, {id: x, lexicon: missing.tsv}]\ncorpora: [story.txt]\n")
        )
    with pytest.raises(ConfigError):
        validate_config(tmp_path / "absent.yaml")


def test_custom_scorer_and_digest(tmp_path, story):
    (tmp_path / "mine.tsv").write_text("good\t1\n")
    body = "scorers: [vader, {id: mine, kind: heuristic, lexicon: mine.tsv}]\ncorpora: [story.txt]\n"
    cfg = validate_config(write(tmp_path, body))
    assert cfg.scorers[1].kind == "heuristic"
    assert cfg.runtime_scorer(cfg.scorers[1]).lexicon == str(tmp_path / "mine.tsv")
    # where results go does not change what is computed
    assert cfg.digest() == cfg.with_overrides(output_dir="elsewhere").digest()
    assert cfg.digest() != cfg.with_overrides(linkage="average").digest()


def test_overrides_are_validated(tmp_path, story):
    cfg = validate_config(write(tmp_path, "scorers: [vader, narrative]\ncorpora: [story.txt]\n"))
    with pytest.raises(BadFraction):
        cfg.with_overrides(smoothing=0.0)
    assert cfg.with_overrides(lttb=None).lttb == 25


def test_duplicate_corpus_ids(tmp_path, story):
    with pytest.raises(ConfigError, match="unique"):
        load_config(
            {"scorers": ["vader", "narrative"], "corpora": ["story.txt", {"path": "story.txt", "id": "story"}]},
            tmp_path,
        )


def test_run_config_is_a_dataclass():
    cfg = RunConfig((), ())
    assert cfg.smoothing == 0.10 and cfg.lttb == 25
