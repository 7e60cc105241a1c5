"""Turning a free-text request plus metadata into a structured query.

The pipeline is deterministic and stateless: tokenize and drop stop words,
look place names up in the gazetteer, classify the application by keyword
containment, and fall back to the requester's own position when the text
names no known place.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .config import KeywordConfig, PipelineConfig
from .errors import EmptyTextError, UnknownApplicationError
from .model import RequestMetadata, TrustLevel

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")


@dataclass(frozen=True)
class ParsedRequest:
    """What discovery needs from a request: the application, where to look,
    and how much trust the requester demands."""

    application: str
    score: float
    target_position: tuple[float, float]
    trust_level: TrustLevel
    raw_tokens: tuple[str, ...]


def _raw_tokens(text: str) -> list[str]:
    if not text or not text.strip():
        raise EmptyTextError("request text is empty")
    return [t.strip("'") for t in _TOKEN_RE.findall(text) if t.strip("'")]


def tokenize_and_filter(text: str, stopwords: frozenset[str] | set[str]) -> list[str]:
    """Lower-cased, punctuation-stripped tokens with stop words removed."""
    tokens, _ = tokenize_with_case(text, stopwords)
    return tokens


def tokenize_with_case(
    text: str, stopwords: frozenset[str] | set[str]
) -> tuple[list[str], list[str]]:
    """Filtered tokens plus the original-cased forms, aligned index for
    index (the cased forms feed proper-noun spotting downstream)."""
    filtered: list[str] = []
    original: list[str] = []
    for token in _raw_tokens(text):
        lower = token.lower()
        if lower in stopwords:
            continue
        filtered.append(lower)
        original.append(token)
    return filtered, original


def extract_locations(
    text: str, gazetteer: dict[str, tuple[float, float]]
) -> list[tuple[str, tuple[float, float]]]:
    """Gazetteer hits in order of appearance.

    Tokens and two-token phrases are matched case-insensitively, so both
    capitalized place names and plain mentions resolve; longer phrases win
    over their component words.
    """
    tokens = _raw_tokens(text)
    lowered = [t.lower() for t in tokens]
    hits: list[tuple[str, tuple[float, float]]] = []
    i = 0
    while i < len(lowered):
        bigram = " ".join(lowered[i:i + 2]) if i + 1 < len(lowered) else None
        if bigram and bigram in gazetteer:
            hits.append((bigram, gazetteer[bigram]))
            i += 2
            continue
        if lowered[i] in gazetteer:
            hits.append((lowered[i], gazetteer[lowered[i]]))
        i += 1
    return hits


def expand_tokens(tokens: list[str], config: KeywordConfig, application: str) -> frozenset[str]:
    """Set of tokens with each one mapped through the application's synonym
    table (set semantics: duplicates collapse)."""
    table = config.synonyms.get(application, {})
    return frozenset(table.get(t, t) for t in tokens)


def application_scores(tokens: list[str], config: KeywordConfig) -> dict[str, float]:
    """Containment score per application: matched share of the expanded
    token set."""
    scores: dict[str, float] = {}
    for app in config.applications:
        expanded = expand_tokens(tokens, config, app)
        if not expanded:
            scores[app] = 0.0
            continue
        scores[app] = len(expanded & config.keywords[app]) / len(expanded)
    return scores


def classify_application(tokens: list[str], config: KeywordConfig) -> tuple[str, float]:
    """Best-scoring application; ties go to the configured application
    order. Rejects (with the scores attached) when the best score is below
    ``config.min_score``."""
    scores = application_scores(tokens, config)
    if not tokens:
        raise UnknownApplicationError(scores)
    best = max(config.applications, key=lambda app: scores[app])
    if scores[best] < config.min_score:
        raise UnknownApplicationError(scores)
    return best, scores[best]


def parse_request(
    text: str, metadata: RequestMetadata, config: PipelineConfig
) -> ParsedRequest:
    """Full pipeline: tokenize, locate, classify.

    The target position is the first gazetteer hit, falling back to the
    requester's own position; the trust level is copied from the metadata.
    """
    kw = config.keywords
    tokens = tokenize_and_filter(text, kw.stopwords)
    locations = extract_locations(text, kw.gazetteer)
    application, score = classify_application(tokens, kw)
    target = locations[0][1] if locations else metadata.requester_position
    return ParsedRequest(
        application=application,
        score=score,
        target_position=target,
        trust_level=metadata.trust_level,
        raw_tokens=tuple(tokens),
    )
