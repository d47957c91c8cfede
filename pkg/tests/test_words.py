import itertools

import pytest
from hypothesis import given, strategies as st

from sgpressure import Word, enumerate_level, is_suffix, reverse
from sgpressure.errors import BudgetExceededError
from sgpressure.words import WordLevel, suffixes, word_from_index


def w(text, k=2):
    return Word.from_string(text, k)


def test_reverse_examples():
    assert str(reverse(w("011"))) == "110"
    assert str(reverse(w(""))) == ""
    assert str(reverse(w("0"))) == "0"


def test_is_suffix_examples():
    assert is_suffix(w("01"), w("1101"))
    assert not is_suffix(w("10"), w("1101"))
    assert is_suffix(w(""), w("1101"))


def test_is_suffix_rejects_mixed_alphabets():
    with pytest.raises(ValueError):
        is_suffix(w("0", 2), w("0", 3))


def test_enumerate_level_examples():
    assert [str(x) for x in enumerate_level(2, 2)] == ["00", "01", "10", "11"]
    assert [str(x) for x in enumerate_level(3, 0)] == [""]
    words = [str(x) for x in enumerate_level(2, 8)]
    assert len(words) == 256 and len(set(words)) == 256


def test_enumerate_level_matches_product_order():
    got = [x.symbols for x in enumerate_level(3, 4)]
    assert got == list(itertools.product(range(3), repeat=4))


def test_budget_overflow():
    with pytest.raises(BudgetExceededError):
        list(enumerate_level(2, 25))
    with pytest.raises(BudgetExceededError):
        WordLevel(3, 5, budget=100)


def test_symbols_are_checked():
    with pytest.raises(ValueError):
        Word((0, 2), 2)


@given(st.integers(1, 4), st.integers(0, 5))
def test_level_size_and_distinct(k, n):
    words = list(enumerate_level(k, n))
    assert len(words) == k**n == len(WordLevel(k, n))
    assert len(set(words)) == k**n


@given(st.lists(st.integers(0, 2), max_size=12))
def test_suffix_count(symbols):
    word = Word(tuple(symbols), 3)
    sufs = [s for s in suffixes(word) if is_suffix(s, word)]
    assert len(sufs) == len(word) + 1
    assert all(len(s) <= len(word) for s in sufs)


@given(st.lists(st.integers(0, 2), max_size=10), st.lists(st.integers(0, 2), max_size=10))
def test_concatenation_suffix(a, b):
    wa, wb = Word(tuple(a), 3), Word(tuple(b), 3)
    assert is_suffix(wb, wa + wb)
    assert reverse(wa + wb) == reverse(wb) + reverse(wa)


@given(st.integers(1, 4), st.integers(0, 6), st.data())
def test_index_roundtrip(k, n, data):
    idx = data.draw(st.integers(0, k**n - 1))
    assert word_from_index(idx, k, n).index() == idx


def test_split_covers_level():
    level = WordLevel(2, 6)
    parts = level.split(5)
    got = [x for a, b in parts for x in level.range(a, b)]
    assert got == list(level)
