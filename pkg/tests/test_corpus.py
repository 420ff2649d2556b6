import io

import pytest
from hypothesis import given, strategies as st

from morphoprobe.corpus import (
    ARABIC_LETTERS,
    DIACRITICS,
    CorpusStats,
    FlaggedWord,
    GoldWord,
    clean_words,
    corpus_stats,
    parse_gold,
    strip_diacritics,
    write_gold,
)
from morphoprobe.errors import DataError, GoldParseError

ARABIC = sorted(ARABIC_LETTERS)
MIXED = ARABIC + sorted(DIACRITICS) + list("abc123 .!")


def _parse(text):
    return parse_gold(io.StringIO(text))


class TestStripDiacritics:
    def test_removes_harakat(self):
        assert strip_diacritics("كَتَبَ") == "كتب"

    def test_identity_on_plain_text(self):
        assert strip_diacritics("كتب") == "كتب"

    def test_pattern_citation_form(self):
        assert strip_diacritics("فَعول") == "فعول"

    def test_tatweel_removed(self):
        assert strip_diacritics("كـتاب") == "كتاب"

    def test_shadda_tanwin_superscript_alef(self):
        assert strip_diacritics("شدّةٌٰ") == "شدة"

    def test_non_arabic_preserved(self):
        assert strip_diacritics("abc 123!") == "abc 123!"

    @given(st.text(alphabet=MIXED, max_size=30))
    def test_idempotent(self, text):
        once = strip_diacritics(text)
        assert strip_diacritics(once) == once


class TestCleanWords:
    def test_filters_non_arabic(self):
        assert clean_words(["الكتاب", "123", "!", "hello"]) == ["الكتاب"]

    def test_empty_input(self):
        assert clean_words([]) == []

    def test_mixed_tokens_dropped_not_trimmed(self):
        assert clean_words(["كتاب123", "abcكتاب", "كتاب."]) == []

    def test_diacritics_stripped_before_filtering(self):
        assert clean_words(["كَتَبَ"]) == ["كتب"]

    @given(st.lists(st.text(alphabet=ARABIC + list("x1."), max_size=8), max_size=20))
    def test_output_is_subsequence_of_input(self, words):
        cleaned = clean_words(words)
        iterator = iter(words)
        assert all(any(w == kept for w in iterator) for kept in cleaned)


class TestParseGold:
    def test_two_morpheme_word(self):
        corpus = _parse("الكتاب\tال+كتاب\n")
        (word,) = list(corpus.words())
        assert isinstance(word, GoldWord)
        assert word.morphemes == ("ال", "كتاب")
        assert word.spans == ((0, 2), (2, 6))
        assert word.boundaries == frozenset({2})

    def test_single_morpheme_word_has_no_boundary(self):
        corpus = _parse("كتاب\tكتاب\n")
        (word,) = list(corpus.words())
        assert word.boundaries == frozenset()
        assert word.spans == ((0, 4),)

    def test_missing_separator_is_a_parse_error(self):
        with pytest.raises(GoldParseError, match="line 1"):
            _parse("الكتاب\n")

    def test_error_reports_the_right_line(self):
        with pytest.raises(GoldParseError, match="line 3"):
            _parse("كتاب\tكتاب\n\nbad line\n")

    def test_irreconcilable_word_is_flagged_not_fatal(self):
        corpus = _parse("الكتاب\tال+قلم\nكتاب\tكتاب\n")
        words = list(corpus.words())
        assert isinstance(words[0], FlaggedWord)
        assert "character mismatch" in words[0].reason
        assert words[0].line_no == 1
        assert isinstance(words[1], GoldWord)
        assert len(corpus.flagged) == 1

    def test_comments_and_blank_lines(self):
        text = "# comment\nكتاب\tكتاب\n\nقلم\tقلم\nباب\tباب\n"
        corpus = _parse(text)
        assert [len(s) for s in corpus.sentences] == [1, 2]

    def test_rebuilding_surface_from_spans(self):
        corpus = _parse("الكتاب\tال+كتاب\n")
        (word,) = list(corpus.words())
        rebuilt = "".join(word.surface[s:e] for s, e in word.spans)
        assert rebuilt == word.surface

    def test_roundtrip_fixture(self):
        text = "الكتاب\tال+كتاب\nكتاب\tكتاب\n\nقلم\tقلم\n"
        assert write_gold(_parse(text)) == text

    @given(
        st.lists(
            st.lists(
                st.lists(st.text(alphabet=ARABIC, min_size=1, max_size=4),
                         min_size=1, max_size=4),
                min_size=1,
                max_size=5,
            ),
            min_size=1,
            max_size=4,
        )
    )
    def test_roundtrip_generated(self, sentences):
        text = "\n\n".join(
            "\n".join("".join(morphs) + "\t" + "+".join(morphs) for morphs in sentence)
            for sentence in sentences
        ) + "\n"
        assert write_gold(_parse(text)) == text


class TestCorpusStats:
    def test_direct_counting(self):
        stats = corpus_stats([["ا", "ب", "ج"]], [[1, 2, 2]])
        assert stats == CorpusStats(1, 3, 5, 5.0)

    def test_empty_corpus(self):
        assert corpus_stats([], []) == CorpusStats(0, 0, 0, 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            corpus_stats([["ا"]], [[1, 1]])

    def test_large_corpus_average(self):
        # 12,587 sentences and 526,745 tokens average to 41.85
        sentences = [["w"]] * 12587
        counts = [[41]] * 12586 + [[526745 - 41 * 12586]]
        stats = corpus_stats(sentences, counts)
        assert stats.token_count == 526745
        assert f"{stats.avg_tokens_per_sentence:.2f}" == "41.85"

    def test_retention_ratio_formatting(self):
        # cleaning 337,312 words down to 292,552 retains 0.8673
        assert f"{292552 / 337312:.4f}" == "0.8673"
