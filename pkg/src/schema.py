# Copyright 2023 Canonical Ltd.
# See LICENSE file for licensing details.

"""Corpus schema mapping.

The SchemaConfig object maps every PostInstance field onto the record key that carries it in the
line-delimited instance file, and describes how the truth file designates classes. It is read
from, validated against, and rendered to a small INI file. The defaults follow the Clickbait
Challenge 2017 layout:

[instances]
id = id
post_title = postText
post_timestamp = postTimestamp
image_ref = postMedia
article_title = targetTitle
article_description = targetDescription
article_keywords = targetKeywords
article_paragraphs = targetParagraphs
article_captions = targetCaptions

[truth]
id = id
label = truthClass
positive = clickbait
negative = no-clickbait

Fields left out of [instances] are never read, so the corresponding PostInstance field is always
absent.
"""

import io
import logging
import re
from collections.abc import MutableMapping
from configparser import ConfigParser, ParsingError
from copy import deepcopy
from pathlib import Path
from typing import Dict, Union

from constants import DEFAULT_INSTANCE_KEYS, DEFAULT_TRUTH_KEYS

logger = logging.getLogger(__name__)

DEFAULT_SCHEMA = {
    "instances": dict(DEFAULT_INSTANCE_KEYS),
    "truth": dict(DEFAULT_TRUTH_KEYS),
}

_RECORD_KEY = re.compile(r"^[A-Za-z0-9_.-]+$")


class SchemaConfig(MutableMapping):
    """A mapping that represents the corpus schema file.

    Config can be passed to the constructor as an INI string, a dict (such as DEFAULT_SCHEMA), or
    another SchemaConfig object. Every read validates the result.
    """

    instances_section = "instances"
    truth_section = "truth"
    instance_fields = tuple(DEFAULT_INSTANCE_KEYS)
    truth_fields = tuple(DEFAULT_TRUTH_KEYS)

    def __init__(self, config: Union[str, dict, "SchemaConfig"] = None):
        if config is None:
            config = DEFAULT_SCHEMA

        if isinstance(config, str):
            self.read_string(config)
        elif isinstance(config, dict):
            self.read_dict(config)
        elif isinstance(config, SchemaConfig):
            self.read_dict(dict(config))

    def __delitem__(self, key: str):
        """Deletes item from internal mapping."""
        del self.__dict__[key]

    def __getitem__(self, key: str):
        """Gets item from internal mapping."""
        return self.__dict__[key]

    def __setitem__(self, key: str, value):
        """Set an item in internal mapping."""
        self.__dict__[key] = value

    def __iter__(self):
        """Returns an iterable of internal mapping."""
        return iter(self.__dict__)

    def __len__(self):
        """Gets number of sections in internal mapping."""
        return len(self.__dict__)

    def __str__(self):
        """String representation of SchemaConfig object."""
        return str(self.__dict__)

    def __eq__(self, other_config):
        """Checks if self and other_config are equal."""
        return self.__dict__ == other_config.__dict__

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SchemaConfig":
        """Reads a schema file from disk.

        Raises:
            SchemaConfig.ConfigParsingError: when the file cannot be read or fails validation.
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as err:
            raise SchemaConfig.ConfigParsingError(source=f"{path}: {err}")
        logger.info(f"loaded corpus schema from {path}")
        return cls(text)

    def read_dict(self, input: Dict) -> None:
        """Populates this object from a dictionary of sections.

        Sections that are missing from the input keep their defaults, so a dict holding only an
        "instances" section is a complete schema.
        """
        merged = deepcopy(DEFAULT_SCHEMA)
        for section, values in deepcopy(input).items():
            if section in merged and section == self.instances_section:
                merged[section] = dict(values)
            else:
                merged.setdefault(section, {}).update(values)
        self.update(merged)
        self.validate()

    def read_string(self, input: str) -> None:
        """Populates this object from the INI representation of a schema."""
        # Since the parser persists data across reads, we have to create a new one for every read.
        parser = ConfigParser()
        parser.optionxform = str
        parser.read_string(input)

        sections = {section: dict(parser[section]) for section in parser.sections()}
        if self.instances_section not in sections:
            raise SchemaConfig.ConfigParsingError(
                f"necessary section not found in schema: {self.instances_section}"
            )
        self.read_dict(sections)

    def render(self) -> str:
        """Returns the INI representation of this schema."""
        self.validate()

        parser = ConfigParser()
        parser.optionxform = str
        parser.read_dict(deepcopy(dict(self)))

        # ConfigParser can only write to a file, so write to a StringIO object and then read back
        # from it.
        with io.StringIO() as string_io:
            parser.write(string_io)
            string_io.seek(0)
            output = string_io.read()
        return output

    def validate(self):
        """Validates that this object describes a usable corpus schema.

        Raises:
            SchemaConfig.ConfigParsingError:
                - when a section is missing or unknown.
                - when [instances] names a field PostInstance does not have, or omits "id".
                - when [truth] misses a key or uses the same designation for both classes.
                - when a record key contains characters other than letters, digits, "_-.".
        """
        sections = {self.instances_section, self.truth_section}
        if set(self.keys()) != sections:
            raise SchemaConfig.ConfigParsingError(
                f"schema sections must be exactly {sorted(sections)}, got {sorted(self.keys())}"
            )

        instances = self[self.instances_section]
        unknown = set(instances) - set(self.instance_fields)
        if unknown:
            raise SchemaConfig.ConfigParsingError(
                f"unknown instance fields in schema: {', '.join(sorted(unknown))}"
            )
        if "id" not in instances:
            raise SchemaConfig.ConfigParsingError("instance schema must map the id field")

        truth = self[self.truth_section]
        missing = set(self.truth_fields) - set(truth)
        if missing:
            raise SchemaConfig.ConfigParsingError(
                f"necessary truth keys not found in schema: {', '.join(sorted(missing))}"
            )
        if truth["positive"] == truth["negative"]:
            raise SchemaConfig.ConfigParsingError(
                f"positive and negative designations are both {truth['positive']!r}"
            )

        keys = list(instances.items()) + [("id", truth["id"]), ("label", truth["label"])]
        for field, key in keys:
            self._validate_record_key(field, key)

    @staticmethod
    def _validate_record_key(field: str, key: str):
        """Checks that key can name a field of a line-delimited record."""
        if not isinstance(key, str) or not _RECORD_KEY.match(key):
            raise SchemaConfig.ConfigParsingError(source=f"{field} = {key!r}")

    def record_key(self, field: str) -> str:
        """Returns the record key carrying a PostInstance field, or None when unmapped."""
        return self[self.instances_section].get(field)

    @property
    def truth(self) -> Dict[str, str]:
        """Truth file keys and class designations."""
        return self[self.truth_section]

    class ConfigParsingError(ParsingError):
        """Error raised when parsing or validating a schema fails."""

        pass
