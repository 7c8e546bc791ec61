"""INI-style configuration files with typed, line-aware validation.

Format: ``[section]`` headers, ``key = value`` entries, ``#`` comments,
comma-separated lists.  Parsing keeps the line number of every entry so
schema violations (unknown keys, bad types) point at the offending line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigInvalid, ConfigSyntaxError, TypeMismatch, UnknownKey


@dataclass
class RawValue:
    text: str
    line_no: int


@dataclass
class ConfigDocument:
    sections: dict = field(default_factory=dict)  # name -> {key: RawValue}
    source: str = "<string>"

    def section(self, name):
        return self.sections.get(name, {})

    def has(self, section, key):
        return key in self.section(section)

    # typed getters --------------------------------------------------------

    def _raw(self, section, key, default):
        sec = self.section(section)
        if key not in sec:
            if default is _REQUIRED:
                raise ConfigInvalid(
                    f"missing required key '{key}' in section [{section}]"
                )
            return None
        return sec[key]

    def get_str(self, section, key, default=None):
        raw = self._raw(section, key, default)
        return default if raw is None else raw.text

    def get_int(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return int(raw.text)
        except ValueError:
            raise TypeMismatch(key, "integer", raw.text) from None

    def get_float(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return float(raw.text)
        except ValueError:
            raise TypeMismatch(key, "real", raw.text) from None

    def get_bool(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        low = raw.text.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise TypeMismatch(key, "boolean", raw.text)

    def get_float_list(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [float(tok.strip()) for tok in raw.text.split(",") if tok.strip()]
        except ValueError:
            raise TypeMismatch(key, "real list", raw.text) from None

    def get_int_list(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [int(tok.strip()) for tok in raw.text.split(",") if tok.strip()]
        except ValueError:
            raise TypeMismatch(key, "integer list", raw.text) from None


_REQUIRED = object()
REQUIRED = _REQUIRED


def parse_config(text, source="<string>"):
    """Parse config text into a ConfigDocument; raises ConfigSyntaxError
    with the 1-based line number on malformed input."""
    doc = ConfigDocument(source=source)
    current = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigSyntaxError(line_no, f"malformed section header {line!r}")
            current = line[1:-1].strip()
            doc.sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ConfigSyntaxError(line_no, f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigSyntaxError(line_no, "empty key")
        if current is None:
            raise ConfigSyntaxError(line_no, "entry before any [section] header")
        doc.sections[current][key] = RawValue(text=value, line_no=line_no)
    return doc


def validate_schema(doc, schema):
    """Reject unknown sections/keys.  ``schema`` maps section name to the
    set of allowed keys; raises UnknownKey with the offending line."""
    for name, entries in doc.sections.items():
        if name not in schema:
            first = min((rv.line_no for rv in entries.values()), default=0)
            raise UnknownKey(f"[{name}]", first)
        allowed = schema[name]
        for key, rv in entries.items():
            if key not in allowed:
                raise UnknownKey(key, rv.line_no)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), source=str(path))
