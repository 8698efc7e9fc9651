# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Base content functions: lengths, word sets and dictionary classification of post contents."""

import logging
import string
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from constants import MISSING, WORDLIST_PATH

logger = logging.getLogger(__name__)

ContentValue = Union[None, str, Tuple[str, ...]]

_KEPT_PREFIXES = "#@"


class WordListError(Exception):
    """Exception raised when a word list cannot be loaded."""


class ContentField(Enum):
    """The seven text sources of a post and its article, in canonical order."""

    POST_TITLE = ("post_title", False, "post title")
    POST_IMAGE_TEXT = ("image_text", False, "post image text")
    ARTICLE_TITLE = ("article_title", False, "article title")
    ARTICLE_DESCRIPTION = ("article_description", False, "article description")
    ARTICLE_KEYWORDS = ("article_keywords", True, "article keywords")
    ARTICLE_CAPTIONS = ("article_captions", True, "article captions")
    ARTICLE_PARAGRAPHS = ("article_paragraphs", True, "article paragraphs")

    def __init__(self, attribute: str, plural: bool, display_name: str):
        self.attribute = attribute
        self.plural = plural
        self.display_name = display_name


def content_of(instance, content_field: ContentField) -> ContentValue:
    """Returns the value of a content field of a PostInstance."""
    return getattr(instance, content_field.attribute)


def is_missing(content: ContentValue) -> bool:
    """Absent content and empty lists count as missing; an empty string does not."""
    if content is None:
        return True
    return not isinstance(content, str) and len(content) == 0


def _items(content: ContentValue) -> List[str]:
    if content is None:
        return []
    if isinstance(content, str):
        return [content]
    return list(content)


def _mean_or_missing(content: ContentValue, measure) -> float:
    if is_missing(content):
        return MISSING
    if isinstance(content, str):
        return float(measure(content))
    values = [measure(item) for item in content]
    return sum(values) / len(values)


def len_characters(content: ContentValue) -> float:
    """Number of codepoints; the mean per item for list contents; -1 when missing."""
    return _mean_or_missing(content, len)


def len_words(content: ContentValue) -> float:
    """Number of tokens; the mean per item for list contents; -1 when missing."""
    return _mean_or_missing(content, lambda text: len(tokenize(text)))


def _is_punctuation(char: str) -> bool:
    return char in string.punctuation or unicodedata.category(char).startswith("P")


def tokenize(text: str) -> List[str]:
    """Splits text on whitespace into lowercase tokens without surrounding punctuation.

    A leading "#" or "@" is kept, so hashtags and mentions stay recognizable:

        >>> tokenize("#wow @you RT, 15 surprising facts!")
        ['#wow', '@you', 'rt', '15', 'surprising', 'facts']
    """
    tokens = []
    for raw in text.split():
        end = len(raw)
        while end > 0 and _is_punctuation(raw[end - 1]):
            end -= 1
        start = 0
        while start < end and _is_punctuation(raw[start]) and raw[start] not in _KEPT_PREFIXES:
            start += 1
        token = raw[start:end].lower()
        if token:
            tokens.append(token)
    return tokens


def words(content: ContentValue) -> Set[str]:
    """Distinct tokens across every item of a content; empty for missing content."""
    result = set()
    for item in _items(content):
        result.update(tokenize(item))
    return result


@dataclass(frozen=True)
class WordList:
    """Reference dictionary of formal English words."""

    entries: FrozenSet[str]
    source_name: str = ""

    def __post_init__(self):
        if not self.entries:
            raise WordListError(f"word list {self.source_name or '<unnamed>'} is empty")
        for entry in self.entries:
            if entry != entry.lower() or any(char.isspace() for char in entry) or not entry:
                raise WordListError(f"invalid word list entry {entry!r} in {self.source_name}")

    def __contains__(self, word: str) -> bool:
        """Whether a bare word is a dictionary entry."""
        return word in self.entries

    def __len__(self) -> int:
        """Number of entries."""
        return len(self.entries)

    @classmethod
    def from_words(cls, entries: Iterable[str], source_name: str = "") -> "WordList":
        """Builds a word list from already-normalized entries."""
        return cls(entries=frozenset(entries), source_name=source_name)


def load_wordlist(path: Optional[Union[str, Path]] = None) -> WordList:
    """Loads a word list file: UTF-8, one word per line, "#" starts a comment line.

    Entries are lowercased and trimmed. Without a path the bundled list is loaded.

    Raises:
        WordListError: when the file cannot be read or holds no entries.
    """
    path = Path(path) if path is not None else WORDLIST_PATH
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = file.readlines()
    except (OSError, UnicodeDecodeError) as err:
        raise WordListError(f"unable to read word list {path}: {err}")

    entries = set()
    for line_number, line in enumerate(lines, start=1):
        word = line.strip().lower()
        if not word or word.startswith("#"):
            continue
        if any(char.isspace() for char in word):
            raise WordListError(f"{path}:{line_number}: entry {word!r} contains whitespace")
        entries.add(word)

    wordlist = WordList.from_words(entries, source_name=path.name)
    logger.info(f"loaded {len(wordlist)} words from {path}")
    return wordlist


def _bare(token: str) -> str:
    return token[1:] if token[:1] in _KEPT_PREFIXES else token


def formal_words(tokens: Iterable[str], wordlist: WordList) -> Set[str]:
    """Tokens found in the word list, ignoring a leading "#" or "@"."""
    return {token for token in tokens if _bare(token) in wordlist}


def informal_words(tokens: Iterable[str], wordlist: WordList) -> Set[str]:
    """Tokens that are not formal words."""
    tokens = set(tokens)
    return tokens - formal_words(tokens, wordlist)
