import pytest
from hypothesis import given, strategies as st

from needlens.sentiment import ValenceLexicon, ValenceScorer, classify


@pytest.fixture(scope="module")
def scorer():
    return ValenceScorer()


class TestValenceScorer:
    def test_empty_doc_neutral(self, scorer):
        point = scorer.score_tokens("d1", [])
        assert point.valence == 0.0 and point.label == "neutral"

    def test_happy_grateful_mean(self, scorer):
        point = scorer.score_tokens("d1", ["happy", "grateful"])
        assert point.valence == pytest.approx(0.75)
        assert point.label == "positive"

    def test_negation_flips_sign(self, scorer):
        point = scorer.score_tokens("d1", ["not", "happy"])
        assert point.valence == pytest.approx(-0.8)
        assert point.label == "negative"

    def test_negation_window_is_two_tokens(self, scorer):
        # negator two positions back still flips
        assert scorer.score_tokens("d", ["not", "so", "happy"]).valence == pytest.approx(-0.8)
        # three positions back does not
        assert scorer.score_tokens("d", ["not", "so", "very", "happy"]).valence == pytest.approx(0.8)

    def test_no_hits_neutral(self, scorer):
        point = scorer.score_tokens("d1", ["table", "chair"])
        assert point.valence == 0.0 and point.label == "neutral"

    @given(st.lists(st.sampled_from(
        ["happy", "sad", "not", "terrible", "great", "chair", "never", "grateful"]
    ), max_size=20))
    def test_valence_in_range(self, tokens):
        point = ValenceScorer().score_tokens("d", tokens)
        assert -1.0 <= point.valence <= 1.0


class TestClassify:
    @pytest.mark.parametrize(
        "v,label",
        [(-0.051, "negative"), (-0.05, "neutral"), (0.0, "neutral"), (0.05, "neutral"), (0.051, "positive")],
    )
    def test_thresholds(self, v, label):
        assert classify(v) == label


class TestLexiconValidation:
    def test_out_of_range_valence_rejected(self):
        with pytest.raises(ValueError):
            ValenceLexicon({"boom": 1.5}, set())

    def test_shipped_lexicon_loads(self):
        lex = ValenceLexicon.load()
        assert lex.entries["happy"] == 0.8
        assert lex.entries["grateful"] == 0.7
        assert "not" in lex.negators
        assert len(lex.entries) >= 150
