"""Lexical URL features computed offline, without fetching anything."""

from __future__ import annotations

import ipaddress
import re
from dataclasses import asdict, dataclass, fields
from urllib.parse import urlsplit

from .errors import EmptyHost, IllegalCharacter, MissingScheme, SchemaMismatch

_SCHEME = re.compile(r"^([A-Za-z][A-Za-z0-9+.\-]*)://")
# RFC 3986 excludes these outright; whitespace and controls are caught separately
_ILLEGAL = set('<>"{}|\\^` ')


@dataclass(frozen=True)
class UrlParts:
    scheme: str
    host: str
    host_labels: tuple[str, ...]
    is_ip_host: bool
    path: str
    query: str
    fragment: str
    port: int | None = None


def _is_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
    except ValueError:
        return False
    return True


def parse_url(s: str) -> UrlParts:
    for i, ch in enumerate(s):
        if ch in _ILLEGAL or ord(ch) < 0x20 or ord(ch) == 0x7F or ch.isspace():
            raise IllegalCharacter(i, ch)
    m = _SCHEME.match(s)
    if not m:
        raise MissingScheme(f"no scheme in {s!r}")
    parts = urlsplit(s)
    host = parts.hostname or ""
    if not host:
        raise EmptyHost(f"no host in {s!r}")
    try:
        port = parts.port
    except ValueError:
        netloc = parts.netloc
        raise IllegalCharacter(len(m.group(0)) + netloc.rfind(":"), ":") from None
    return UrlParts(
        scheme=m.group(1).lower(),
        host=host,
        host_labels=tuple(host.split(".")),
        is_ip_host=_is_ip(host),
        path=parts.path,
        query=parts.query,
        fragment=parts.fragment,
        port=port,
    )


@dataclass(frozen=True)
class LexicalVector:
    url_length: float
    hostname_length: float
    path_length: float
    query_length: float
    num_dots: float
    num_dash: float
    num_dash_hostname: float
    num_underscore: float
    num_percent: float
    num_query_components: float
    num_ampersand: float
    num_hash: float
    num_numeric_chars: float
    at_symbol: float
    tilde_symbol: float
    ip_address: float
    no_https: float
    double_slash_in_path: float
    subdomain_level: float
    path_level: float

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def query_components(query: str) -> int:
    """Non-empty parameters; a stray '?' inside the query also separates them."""
    return sum(1 for part in re.split(r"[&?]", query) if part)


def extract_lexical(u: UrlParts, raw: str) -> LexicalVector:
    labels = len(u.host_labels)
    return LexicalVector(
        url_length=float(len(raw)),
        hostname_length=float(len(u.host)),
        path_length=float(len(u.path)),
        query_length=float(len(u.query)),
        num_dots=float(raw.count(".")),
        num_dash=float(raw.count("-")),
        num_dash_hostname=float(u.host.count("-")),
        num_underscore=float(raw.count("_")),
        num_percent=float(raw.count("%")),
        num_query_components=float(query_components(u.query)),
        num_ampersand=float(raw.count("&")),
        num_hash=float(raw.count("#")),
        num_numeric_chars=float(sum(ch.isdigit() for ch in raw)),
        at_symbol=float("@" in raw),
        tilde_symbol=float("~" in raw),
        ip_address=float(u.is_ip_host),
        no_https=float(u.scheme != "https"),
        double_slash_in_path=float("//" in u.path),
        subdomain_level=0.0 if u.is_ip_host else float(max(0, labels - 2)),
        path_level=float(sum(1 for seg in u.path.split("/") if seg)),
    )


def lexical(raw: str) -> LexicalVector:
    return extract_lexical(parse_url(raw), raw)


# corpus spellings that do not reduce to the field name by dropping '_' and case
ALIASES = {"numdashinhostname": "num_dash_hostname"}


def _key(name: str) -> str:
    return name.replace("_", "").replace("-", "").lower()


def match_corpus_features(corpus_names) -> dict[str, str]:
    """Map corpus column names to LexicalVector fields (case-insensitive)."""
    by_key = {_key(n): n for n in LexicalVector.names()}
    out = {}
    for name in corpus_names:
        k = _key(name)
        field_name = by_key.get(k) or ALIASES.get(k)
        if field_name:
            out[name] = field_name
    return out


def lexical_features_for(feature_names) -> list[str]:
    """The model features that can be computed from a live URL; any other
    feature makes the model unusable for URLs."""
    mapping = match_corpus_features(feature_names)
    missing = [f for f in feature_names if f not in mapping]
    if missing:
        raise SchemaMismatch(
            "model uses features that cannot be computed from a URL: " + ", ".join(missing)
        )
    return [mapping[f] for f in feature_names]


def url_matrix_row(raw: str, feature_names) -> list[float]:
    fields_ = lexical_features_for(feature_names)
    vec = lexical(raw).as_dict()
    return [vec[f] for f in fields_]
