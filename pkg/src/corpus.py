# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Corpus ingestion: instance and truth files, joined into labeled datasets.

Both files are line-delimited JSON, one record per post. An instance record in the Clickbait
Challenge 2017 layout looks like this (all values are examples):

{"id": "608310377143799810", "postTimestamp": "Tue Jun 09 16:31:10 +0000 2015",
 "postText": ["Apple's iOS 9 'App thinning' feature will give your phone's storage a boost"],
 "postMedia": ["media/608310377143799810.png"],
 "targetTitle": "Apple gives back gigabytes: iOS 9 'app thinning' feature will finally save...",
 "targetDescription": "'App thinning' will be supported on Apple's iOS 9 and later models...",
 "targetKeywords": "Apple,gives,gigabytes,iOS,9,app,thinning,feature,finally",
 "targetParagraphs": ["Paying for a 64GB phone only to discover that this is...", "..."],
 "targetCaptions": ["'App thinning' will be supported on Apple's iOS 9..."]}

and the matching truth record:

{"id": "608310377143799810", "truthClass": "no-clickbait", ...}

Which record key feeds which PostInstance field is decided by a SchemaConfig. Text extracted from
the post image is not part of the record; an ImageTextSource supplies it.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

from jsonschema import exceptions, validate

from constants import CHALLENGE_TIMESTAMP_FORMAT, CLICKBAIT, IMAGE_TEXT_SUFFIX, LEGITIMATE
from schema import SchemaConfig

logger = logging.getLogger(__name__)

_TEXT_OR_TEXTS = {
    "oneOf": [
        {"type": "string"},
        {"type": "array", "items": {"type": "string"}},
        {"type": "null"},
    ]
}


class CorpusError(Exception):
    """Base exception for corpus ingestion failures."""


class CorpusReadError(CorpusError):
    """Exception raised when a corpus file cannot be read."""

    def __init__(self, path: Union[str, Path], reason: str):
        super().__init__(f"unable to read {path}: {reason}")
        self.path = str(path)


class CorpusParsingError(CorpusError):
    """Exception raised when a record cannot be parsed."""

    def __init__(self, path: Union[str, Path], line_number: int, reason: str):
        super().__init__(f"{path}:{line_number}: {reason}")
        self.path = str(path)
        self.line_number = line_number


class CorpusValidationError(CorpusError):
    """Exception raised when parsed records violate dataset invariants."""


class CorpusJoinError(CorpusError):
    """Exception raised when instances and truth labels do not match one to one."""

    def __init__(self, missing: List[str], orphans: List[str]):
        parts = []
        if missing:
            parts.append(f"unlabeled instance ids: {', '.join(missing)}")
        if orphans:
            parts.append(f"orphan label ids: {', '.join(orphans)}")
        super().__init__("; ".join(parts))
        self.missing = missing
        self.orphans = orphans


@dataclass(frozen=True)
class PostInstance:
    """One social-media post plus the text fields of the article it links to."""

    id: str
    post_title: Optional[str] = None
    post_timestamp: Optional[datetime] = None
    image_ref: Optional[str] = None
    image_text: Optional[str] = None
    article_title: Optional[str] = None
    article_description: Optional[str] = None
    article_keywords: Optional[Tuple[str, ...]] = None
    article_paragraphs: Optional[Tuple[str, ...]] = None
    article_captions: Optional[Tuple[str, ...]] = None


@dataclass(frozen=True)
class TruthLabel:
    """Binary class of one post: clickbait = 1, legitimate = 0."""

    id: str
    label: int


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of posts, optionally with aligned labels."""

    instances: Tuple[PostInstance, ...]
    labels: Optional[Tuple[TruthLabel, ...]] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.labels is None:
            return
        if len(self.labels) != len(self.instances):
            raise CorpusValidationError(
                f"{len(self.labels)} labels for {len(self.instances)} instances"
            )
        for instance, label in zip(self.instances, self.labels):
            if instance.id != label.id:
                raise CorpusValidationError(
                    f"label {label.id} is not aligned with instance {instance.id}"
                )

    def __len__(self) -> int:
        """Number of instances."""
        return len(self.instances)

    def __iter__(self) -> Iterator[PostInstance]:
        """Iterates over instances in file order."""
        return iter(self.instances)

    @property
    def labeled(self) -> bool:
        """Whether labels are attached."""
        return self.labels is not None

    @property
    def label_values(self) -> List[int]:
        """Labels as plain integers, aligned with instances."""
        if self.labels is None:
            raise CorpusValidationError(f"dataset {self.name or '<unnamed>'} is not labeled")
        return [label.label for label in self.labels]

    def class_counts(self) -> Tuple[int, int]:
        """Returns (clickbait count, legitimate count)."""
        values = self.label_values
        positives = sum(1 for value in values if value == CLICKBAIT)
        return positives, len(values) - positives


class ImageTextSource:
    """Supplies text extracted from a post image.

    Recognizing the text is out of scope here; implementations look up text that was extracted
    ahead of time.
    """

    def read(self, image_ref: str) -> Optional[str]:
        """Returns the text found in the image, or None when there is none."""
        raise NotImplementedError


class NoImageTextSource(ImageTextSource):
    """Image text source for corpora without extracted image text."""

    def read(self, image_ref: str) -> Optional[str]:
        """Always None."""
        return None


class SidecarImageTextSource(ImageTextSource):
    """Reads `<image_ref>.txt` files, resolved against a base directory."""

    def __init__(self, base_dir: Union[str, Path]):
        self.base_dir = Path(base_dir)

    def read(self, image_ref: str) -> Optional[str]:
        """Returns the sidecar contents, or None when the sidecar is missing or unreadable."""
        sidecar = self.base_dir / f"{image_ref}{IMAGE_TEXT_SUFFIX}"
        if not sidecar.is_file():
            return None
        try:
            return sidecar.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as err:
            logger.warning(f"ignoring unreadable image text sidecar {sidecar}: {err}")
            return None


def parse_timestamp(value: Optional[str]) -> Optional[datetime]:
    """Parses a challenge-style or ISO-8601 timestamp into an aware UTC datetime.

    Unparseable values yield None.
    """
    if not value or not isinstance(value, str):
        return None
    value = value.strip()
    try:
        parsed = datetime.strptime(value, CHALLENGE_TIMESTAMP_FORMAT)
    except ValueError:
        try:
            if value.endswith("Z"):
                value = value[:-1] + "+00:00"
            parsed = datetime.fromisoformat(value)
        except ValueError:
            logger.debug(f"unparseable timestamp {value!r}")
            return None
    if parsed.tzinfo is None:
        parsed = parsed.replace(tzinfo=timezone.utc)
    return parsed.astimezone(timezone.utc)


def format_timestamp(value: datetime) -> str:
    """Renders a timestamp in the challenge form, e.g. "Tue Jun 09 16:31:10 +0000 2015".

    The challenge form has whole seconds, so a timestamp with a fraction of a second is
    rendered in ISO 8601 instead.
    """
    value = value.astimezone(timezone.utc)
    if value.microsecond:
        return value.isoformat()
    return value.strftime(CHALLENGE_TIMESTAMP_FORMAT)


def split_keywords(value: Union[None, str, List[str]]) -> Optional[Tuple[str, ...]]:
    """Splits a comma-separated keyword string into trimmed, non-empty keywords."""
    if value is None:
        return None
    if isinstance(value, str):
        value = value.split(",")
    return tuple(keyword.strip() for keyword in value if keyword.strip())


def _scalar_text(value: Union[None, str, List[str]]) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, list):
        return " ".join(value)
    return value


def _text_list(value: Union[None, str, List[str]]) -> Optional[Tuple[str, ...]]:
    if value is None:
        return None
    if isinstance(value, str):
        return (value,)
    return tuple(value)


def _instance_record_schema(schema: SchemaConfig) -> Dict:
    """JSON schema of one instance record under the given key mapping."""
    properties = {}
    for name in SchemaConfig.instance_fields:
        key = schema.record_key(name)
        if key is None:
            continue
        if name == "id":
            properties[key] = {"type": ["string", "integer"]}
        elif name == "post_timestamp":
            properties[key] = {"type": ["string", "null"]}
        else:
            properties[key] = _TEXT_OR_TEXTS
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "type": "object",
        "properties": properties,
        "required": [schema.record_key("id")],
        "additionalProperties": True,
    }


def _truth_record_schema(schema: SchemaConfig) -> Dict:
    """JSON schema of one truth record under the given key mapping."""
    truth = schema.truth
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "type": "object",
        "properties": {
            truth["id"]: {"type": ["string", "integer"]},
            truth["label"]: {"type": "string"},
        },
        "required": [truth["id"], truth["label"]],
        "additionalProperties": True,
    }


def _read_records(path: Union[str, Path], record_schema: Dict) -> Iterator[Tuple[int, Dict]]:
    """Yields (line number, record) for every non-blank line of a line-delimited file."""
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = file.readlines()
    except (OSError, UnicodeDecodeError) as err:
        raise CorpusReadError(path, str(err))

    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise CorpusParsingError(path, line_number, f"malformed record: {err.msg}")
        try:
            validate(instance=record, schema=record_schema)
        except exceptions.ValidationError as err:
            raise CorpusParsingError(path, line_number, err.message)
        yield line_number, record


def _instance_from_record(
    record: Dict, schema: SchemaConfig, image_text_source: ImageTextSource
) -> PostInstance:
    def value(name):
        key = schema.record_key(name)
        return None if key is None else record.get(key)

    media = _text_list(value("image_ref"))
    image_ref = media[0] if media else None
    image_text = image_text_source.read(image_ref) if image_ref else None

    return PostInstance(
        id=str(value("id")),
        post_title=_scalar_text(value("post_title")),
        post_timestamp=parse_timestamp(value("post_timestamp")),
        image_ref=image_ref,
        image_text=image_text,
        article_title=_scalar_text(value("article_title")),
        article_description=_scalar_text(value("article_description")),
        article_keywords=split_keywords(value("article_keywords")),
        article_paragraphs=_text_list(value("article_paragraphs")),
        article_captions=_text_list(value("article_captions")),
    )


def load_instances(
    path: Union[str, Path],
    schema: Optional[SchemaConfig] = None,
    image_text_source: Optional[ImageTextSource] = None,
) -> Dataset:
    """Loads an instance file into an unlabeled Dataset, preserving file order.

    Args:
        path: line-delimited instance file.
        schema: record key mapping; the Clickbait Challenge 2017 layout when omitted.
        image_text_source: supplier of post image text; by default sidecar files next to the
            instance file.

    Raises:
        CorpusReadError: when the file cannot be read.
        CorpusParsingError: when a line is not a valid record.
        CorpusValidationError: when two records share an id.
    """
    schema = schema or SchemaConfig()
    if image_text_source is None:
        image_text_source = SidecarImageTextSource(Path(path).parent)

    instances = []
    seen = {}
    for line_number, record in _read_records(path, _instance_record_schema(schema)):
        instance = _instance_from_record(record, schema, image_text_source)
        if not instance.id:
            raise CorpusParsingError(path, line_number, "empty instance id")
        if instance.id in seen:
            raise CorpusValidationError(
                f"duplicate instance id {instance.id} on lines {seen[instance.id]} and "
                f"{line_number} of {path}"
            )
        seen[instance.id] = line_number
        instances.append(instance)

    logger.info(f"loaded {len(instances)} instances from {path}")
    return Dataset(instances=tuple(instances), name=Path(path).stem)


def load_truth(path: Union[str, Path], schema: Optional[SchemaConfig] = None) -> List[TruthLabel]:
    """Loads a truth file, mapping class designations to 1 (clickbait) and 0 (legitimate).

    Raises:
        CorpusReadError: when the file cannot be read.
        CorpusParsingError: when a line misses its id or carries an unknown class string.
    """
    schema = schema or SchemaConfig()
    truth = schema.truth
    designations = {truth["positive"]: CLICKBAIT, truth["negative"]: LEGITIMATE}

    labels = []
    for line_number, record in _read_records(path, _truth_record_schema(schema)):
        label_id = str(record[truth["id"]])
        if not label_id:
            raise CorpusParsingError(path, line_number, "empty label id")
        designation = record[truth["label"]]
        if designation not in designations:
            raise CorpusParsingError(path, line_number, f"unknown class {designation!r}")
        labels.append(TruthLabel(id=label_id, label=designations[designation]))

    logger.info(f"loaded {len(labels)} truth labels from {path}")
    return labels


def join(dataset: Dataset, labels: List[TruthLabel]) -> Dataset:
    """Attaches labels to a dataset; instance order is kept, label order is irrelevant.

    Raises:
        CorpusJoinError: when an instance has no label or a label has no instance.
        CorpusValidationError: when a label id appears more than once.
    """
    counts = Counter(label.id for label in labels)
    duplicates = sorted(label_id for label_id, count in counts.items() if count > 1)
    if duplicates:
        raise CorpusValidationError(f"duplicate label ids: {', '.join(duplicates)}")

    by_id = {label.id: label for label in labels}
    instance_ids = {instance.id for instance in dataset}
    missing = [instance.id for instance in dataset if instance.id not in by_id]
    orphans = [label.id for label in labels if label.id not in instance_ids]
    if missing or orphans:
        raise CorpusJoinError(missing, orphans)

    joined = replace(dataset, labels=tuple(by_id[instance.id] for instance in dataset))
    positives, negatives = joined.class_counts()
    logger.info(f"joined {len(joined)} labels: {positives} clickbait, {negatives} legitimate")
    return joined


def load_dataset(
    instances_path: Union[str, Path],
    truth_path: Optional[Union[str, Path]] = None,
    schema: Optional[SchemaConfig] = None,
    image_text_source: Optional[ImageTextSource] = None,
) -> Dataset:
    """Loads instances and, when a truth file is given, joins its labels."""
    dataset = load_instances(instances_path, schema, image_text_source)
    if truth_path is None:
        return dataset
    return join(dataset, load_truth(truth_path, schema))


def reference_time(dataset: Dataset) -> Optional[datetime]:
    """Latest post timestamp in the dataset, or None when no post carries one."""
    timestamps = [instance.post_timestamp for instance in dataset if instance.post_timestamp]
    return max(timestamps) if timestamps else None


def dump_instances(
    dataset: Dataset, path: Union[str, Path], schema: Optional[SchemaConfig] = None
) -> None:
    """Writes the canonical line-delimited form of a dataset.

    Loading the written file with the same schema yields an equal dataset, except for image text,
    which stays in its sidecar files.
    """
    schema = schema or SchemaConfig()
    with open(path, "w", encoding="utf-8") as file:
        for instance in dataset:
            file.write(json.dumps(_record_from_instance(instance, schema), sort_keys=True))
            file.write("\n")
    logger.info(f"wrote {len(dataset)} instances to {path}")


def _record_from_instance(instance: PostInstance, schema: SchemaConfig) -> Dict:
    values = {
        "id": instance.id,
        "post_title": None if instance.post_title is None else [instance.post_title],
        "post_timestamp": (
            None if instance.post_timestamp is None else format_timestamp(instance.post_timestamp)
        ),
        "image_ref": None if instance.image_ref is None else [instance.image_ref],
        "article_title": instance.article_title,
        "article_description": instance.article_description,
        "article_keywords": _keywords_value(instance.article_keywords),
        "article_paragraphs": _list_or_none(instance.article_paragraphs),
        "article_captions": _list_or_none(instance.article_captions),
    }
    record = {}
    for name, value in values.items():
        key = schema.record_key(name)
        if key is not None and value is not None:
            record[key] = value
    return record


def _list_or_none(value: Optional[Tuple[str, ...]]) -> Optional[List[str]]:
    return None if value is None else list(value)


def _keywords_value(keywords: Optional[Tuple[str, ...]]) -> Union[None, str, List[str]]:
    # A keyword holding a comma would be split apart on reload.
    if keywords is None:
        return None
    if any("," in keyword for keyword in keywords):
        return list(keywords)
    return ", ".join(keywords)
