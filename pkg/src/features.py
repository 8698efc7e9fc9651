# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Hand-crafted feature catalog of a post and the article it links to.

Every feature value is a real number. Features whose defining contents are missing carry the -1
sentinel. The catalog is fixed: 188 features in 11 families, always in the same order.
"""

import logging
from dataclasses import dataclass
from datetime import datetime
from itertools import combinations
from typing import Callable, Dict, List, Optional, Tuple

from joblib import Parallel, delayed

from constants import MISSING
from corpus import Dataset, PostInstance, reference_time
from matrix import FeatureError, FeatureMatrix, FeatureVector
from textstats import (
    ContentField,
    WordList,
    content_of,
    formal_words,
    informal_words,
    is_missing,
    len_characters,
    len_words,
    tokenize,
    words,
)

logger = logging.getLogger(__name__)

CHARACTERS = "characters"
WORDS = "words"

FIELDS = tuple(ContentField)
PAIRS = tuple(combinations(FIELDS, 2))
OVERLAP_FIELDS = tuple(field for field in FIELDS if field is not ContentField.ARTICLE_KEYWORDS)

# Counter display name and counting function over one text item.
BEHAVIOR_COUNTERS: Tuple[Tuple[str, Callable[[str], int]], ...] = (
    ("@ signs", lambda text: text.count("@")),
    ("hashtags", lambda text: text.count("#")),
    ("retweets", lambda text: sum(1 for token in tokenize(text) if token == "rt")),
    ("question marks", lambda text: text.count("?")),
    ("commas", lambda text: text.count(",")),
    ("colons", lambda text: text.count(":")),
    ("ellipses", lambda text: text.count("...") + text.count("…")),
)

ARTICLE_PROPERTIES = (
    ("num of article keywords", "article_keywords"),
    ("num of article paragraphs", "article_paragraphs"),
    ("num of article captions", "article_captions"),
)


@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered feature names, each belonging to one family."""

    names: Tuple[str, ...]
    family: Dict[str, str]

    def __len__(self) -> int:
        """Number of features."""
        return len(self.names)

    def __iter__(self):
        """Iterates over names in catalog order."""
        return iter(self.names)

    def family_of(self, name: str) -> str:
        """Family of a feature.

        Raises:
            FeatureError: for names outside the catalog.
        """
        try:
            return self.family[name]
        except KeyError:
            raise FeatureError(f"unknown feature {name!r}")

    def families(self) -> Dict[str, List[str]]:
        """Feature names grouped by family, both in catalog order."""
        grouped: Dict[str, List[str]] = {}
        for name in self.names:
            grouped.setdefault(self.family[name], []).append(name)
        return grouped


def _catalog_entries() -> List[Tuple[str, str]]:
    entries = [("image presence", "image"), ("text in image", "image")]
    for unit, prefix in ((CHARACTERS, "char"), (WORDS, "word")):
        entries += [(f"num of {unit} in {f.display_name}", f"{prefix}_count") for f in FIELDS]
        entries += [
            (f"diff num of {unit} {x.display_name} & {y.display_name}", f"{prefix}_diff")
            for x, y in PAIRS
        ]
        entries += [
            (f"num of {unit} ratio {x.display_name} & {y.display_name}", f"{prefix}_ratio")
            for x, y in PAIRS
        ]
    entries += [
        (f"num of common words article keywords & {f.display_name}", "keyword_overlap")
        for f in OVERLAP_FIELDS
    ]
    for f in FIELDS:
        entries += [
            (f"num of formal words in {f.display_name}", "formal_informal"),
            (f"num of informal words in {f.display_name}", "formal_informal"),
            (f"percent of formal words in {f.display_name}", "formal_informal"),
            (f"percent of informal words in {f.display_name}", "formal_informal"),
        ]
    for counter, _ in BEHAVIOR_COUNTERS:
        entries += [(f"num of {counter} in {f.display_name}", "behavior") for f in FIELDS]
    entries += [("post creation hour", "behavior"), ("post longevity", "behavior")]
    entries += [(name, "article_property") for name, _ in ARTICLE_PROPERTIES]
    return entries


_CATALOG = FeatureCatalog(
    names=tuple(name for name, _ in _catalog_entries()),
    family=dict(_catalog_entries()),
)


def feature_catalog() -> FeatureCatalog:
    """The fixed feature catalog."""
    return _CATALOG


def image_presence(instance: PostInstance) -> float:
    """1 when the post carries an image."""
    return 1.0 if instance.image_ref else 0.0


def text_in_image(instance: PostInstance) -> float:
    """1 when the post carries an image with non-blank extracted text."""
    if instance.image_ref and instance.image_text and instance.image_text.strip():
        return 1.0
    return 0.0


def _counts(instance: PostInstance, mode: str) -> List[float]:
    if mode == CHARACTERS:
        measure = len_characters
    elif mode == WORDS:
        measure = len_words
    else:
        raise FeatureError(f"unknown counting mode {mode!r}")
    return [measure(content_of(instance, f)) for f in FIELDS]


def char_count_features(instance: PostInstance) -> List[float]:
    """Character counts of the seven contents."""
    return _counts(instance, CHARACTERS)


def word_count_features(instance: PostInstance) -> List[float]:
    """Word counts of the seven contents."""
    return _counts(instance, WORDS)


def _pairwise(counts: List[float], combine: Callable[[float, float], float]) -> List[float]:
    index = {f: i for i, f in enumerate(FIELDS)}
    return [combine(counts[index[x]], counts[index[y]]) for x, y in PAIRS]


def _diff(x: float, y: float) -> float:
    if x == MISSING or y == MISSING:
        return MISSING
    return abs(x - y)


def _ratio(x: float, y: float) -> float:
    if x == MISSING or y == MISSING or y == 0:
        return MISSING
    return x / y


def pairwise_diff_features(instance: PostInstance, mode: str) -> List[float]:
    """Absolute count differences over the 21 content pairs."""
    return _pairwise(_counts(instance, mode), _diff)


def pairwise_ratio_features(instance: PostInstance, mode: str) -> List[float]:
    """Count ratios over the 21 content pairs, the earlier content being the numerator."""
    return _pairwise(_counts(instance, mode), _ratio)


def keyword_overlap_features(instance: PostInstance) -> List[float]:
    """Number of keyword tokens shared with each non-keyword content."""
    keywords = instance.article_keywords
    if is_missing(keywords):
        return [MISSING] * len(OVERLAP_FIELDS)
    keyword_tokens = words(keywords)

    values = []
    for f in OVERLAP_FIELDS:
        content = content_of(instance, f)
        if is_missing(content):
            values.append(MISSING)
        else:
            values.append(float(len(keyword_tokens & words(content))))
    return values


def formal_informal_features(instance: PostInstance, wordlist: WordList) -> List[float]:
    """Formal and informal word counts and shares for each content."""
    values = []
    for f in FIELDS:
        content = content_of(instance, f)
        tokens = words(content)
        if is_missing(content) or not tokens:
            values += [MISSING] * 4
            continue
        formal = len(formal_words(tokens, wordlist))
        informal = len(informal_words(tokens, wordlist))
        values += [float(formal), float(informal), formal / len(tokens), informal / len(tokens)]
    return values


def behavior_features(instance: PostInstance, reference: Optional[datetime]) -> List[float]:
    """Mention, hashtag, retweet and punctuation counts per content, then posting time features.

    List contents sum the counts of their items.

    Raises:
        FeatureError: when the reference time precedes the post timestamp.
    """
    values = []
    for _, count in BEHAVIOR_COUNTERS:
        for f in FIELDS:
            content = content_of(instance, f)
            if is_missing(content):
                values.append(MISSING)
            elif isinstance(content, str):
                values.append(float(count(content)))
            else:
                values.append(float(sum(count(item) for item in content)))

    timestamp = instance.post_timestamp
    if timestamp is None:
        return values + [MISSING, MISSING]
    reference = timestamp if reference is None else reference
    if reference < timestamp:
        raise FeatureError(
            f"reference time {reference.isoformat()} precedes post {instance.id} "
            f"at {timestamp.isoformat()}"
        )
    return values + [float(timestamp.hour), (reference - timestamp).total_seconds()]


def article_property_features(instance: PostInstance) -> List[float]:
    """Number of keywords, paragraphs and captions of the article."""
    values = []
    for _, attribute in ARTICLE_PROPERTIES:
        content = getattr(instance, attribute)
        values.append(MISSING if content is None else float(len(content)))
    return values


def extract_all(
    instance: PostInstance, wordlist: WordList, reference: Optional[datetime] = None
) -> FeatureVector:
    """Computes the whole catalog for one instance.

    Without a reference time, post longevity is measured against the post itself.
    """
    values = [image_presence(instance), text_in_image(instance)]
    values += char_count_features(instance)
    values += pairwise_diff_features(instance, CHARACTERS)
    values += pairwise_ratio_features(instance, CHARACTERS)
    values += word_count_features(instance)
    values += pairwise_diff_features(instance, WORDS)
    values += pairwise_ratio_features(instance, WORDS)
    values += keyword_overlap_features(instance)
    values += formal_informal_features(instance, wordlist)
    values += behavior_features(instance, reference)
    values += article_property_features(instance)
    return FeatureVector(instance_id=instance.id, values=dict(zip(_CATALOG.names, values)))


def extract_dataset(
    dataset: Dataset,
    wordlist: WordList,
    reference: Optional[datetime] = None,
    threads: int = 1,
) -> FeatureMatrix:
    """Extracts the catalog for every instance, keeping dataset order.

    Args:
        dataset: instances, labeled or not; labels are carried into the matrix.
        wordlist: dictionary of formal words.
        reference: anchor of post longevity; the latest post timestamp of the dataset when
            omitted.
        threads: number of worker threads.
    """
    if reference is None:
        reference = reference_time(dataset)
    if not len(dataset):
        logger.warning(f"dataset {dataset.name or '<unnamed>'} holds no instances")

    if threads > 1:
        vectors = Parallel(n_jobs=threads, backend="threading")(
            delayed(extract_all)(instance, wordlist, reference) for instance in dataset
        )
    else:
        vectors = [extract_all(instance, wordlist, reference) for instance in dataset]

    matrix = FeatureMatrix.from_vectors(
        vectors,
        _CATALOG.names,
        labels=dataset.label_values if dataset.labeled else None,
    )
    logger.info(f"extracted {len(_CATALOG)} features for {len(matrix)} instances")
    return matrix
