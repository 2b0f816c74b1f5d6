"""Utterance parsing: clause splitting and keyword matching into core commands.

There is no statistical machinery here. Clauses split on sentence punctuation
and on a leading subordinate clause opened by an event keyword; verbs and
nouns match against the bundled lexicon with light suffix stripping. Text
inside quotes is never split, never matched, and binds speech parameters
byte-for-byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import UnparseableClauseError
from .knowledge import (
    ACTION,
    EVENT,
    REQ_PLACE,
    REQ_TEXT,
    Command,
    CommandSchema,
    Domain,
    EntityArg,
    Hole,
    RegionArg,
    TextArg,
    World,
    is_a,
)

_ARTICLES = {"the", "a", "an"}
_PRONOUNS = {"them", "it", "they"}
_OPENERS = {'"': '"', "“": "”", "'": "'", "‘": "’"}
_SENTENCE_END = re.compile(r"[.!?]+")
_TOKEN = re.compile(r"[^\s,]+")


@dataclass(frozen=True)
class Utterance:
    text: str
    quoted_spans: tuple[tuple[int, int], ...] = ()  # content spans, quote marks excluded

    @staticmethod
    def from_text(text: str) -> "Utterance":
        return Utterance(text, _find_quoted_spans(text))


@dataclass(frozen=True)
class Clause:
    text: str
    kind: str  # ACTION or EVENT
    order: int
    quoted_spans: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class CoreCommand:
    command: Command
    clause_order: int
    gate: bool  # true iff an event that gates the actions after it


@dataclass
class _ParseContext:
    """Carries the most recent grounded noun for pronoun resolution."""

    referent: Optional[tuple[str, str]] = None  # ("entity", id) or ("type", name)
    diagnostics: list[str] = field(default_factory=list)


def _find_quoted_spans(text: str) -> tuple[tuple[int, int], ...]:
    spans: list[tuple[int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _OPENERS and _opens_quote(text, i):
            closer = _OPENERS[ch]
            j = i + 1
            while j < n:
                if text[j] == closer and _closes_quote(text, j):
                    spans.append((i + 1, j))
                    i = j
                    break
                j += 1
        i += 1
    return tuple(spans)


def _opens_quote(text: str, i: int) -> bool:
    if text[i] in ("“", "‘"):
        return True
    if i == 0:
        return True
    return not text[i - 1].isalnum()


def _closes_quote(text: str, i: int) -> bool:
    if text[i] in ("”", "’"):
        return True
    if i + 1 >= len(text):
        return True
    return not text[i + 1].isalnum()


def _in_spans(pos: int, spans: tuple[tuple[int, int], ...]) -> bool:
    return any(a <= pos < b for a, b in spans)


def _tokens_outside(text: str, spans, offset: int = 0, end: Optional[int] = None):
    """Tokens (with absolute positions) that do not overlap any quoted span,
    quote marks included."""
    end = len(text) if end is None else end
    out = []
    for m in _TOKEN.finditer(text, offset, end):
        tok_start, tok_end = m.start(), m.end()
        if any(a - 1 <= tok_start < b + 1 or tok_start < a <= tok_end
               for a, b in spans):
            continue
        out.append((m.group(0), tok_start))
    return out


def lemma_candidates(token: str) -> list[str]:
    t = token.lower().strip(".,!?;:'\"")
    out = [t]
    if t.endswith("ies") and len(t) > 4:
        out.append(t[:-3] + "y")
    if t.endswith("es") and len(t) > 3:
        out.append(t[:-2])
    if t.endswith("s") and len(t) > 2:
        out.append(t[:-1])
    if t.endswith("ed") and len(t) > 3:
        out.append(t[:-2])
        out.append(t[:-1])
    if t.endswith("ing") and len(t) > 4:
        stem = t[:-3]
        out.append(stem)
        out.append(stem + "e")
        if len(stem) > 2 and stem[-1] == stem[-2]:
            out.append(stem[:-1])
    return out


def match_lemma(token: str, keys) -> Optional[str]:
    for cand in lemma_candidates(token):
        if cand in keys:
            return cand
    return None


# ---------------------------------------------------------------------------
# Clause splitting
# ---------------------------------------------------------------------------


def split_clauses(utterance: Utterance, domain: Optional[Domain] = None) -> list[Clause]:
    """Split on sentence boundaries, then carve off a leading event clause."""
    text = utterance.text
    spans = utterance.quoted_spans
    sentences = _split_sentences(text, spans)
    clauses: list[Clause] = []
    for start, end in sentences:
        for cstart, cend in _split_leading_event(text, spans, start, end, domain):
            piece = text[cstart:cend].strip(" ,")
            if not piece:
                continue
            # recompute offsets after the strip
            lead = text.index(piece, cstart, cend) if piece else cstart
            local_spans = tuple(
                (a - lead, b - lead) for a, b in spans if a >= lead and b <= lead + len(piece)
            )
            kind = EVENT if _starts_with_keyword(piece, domain) else ACTION
            clauses.append(Clause(piece, kind, len(clauses), local_spans))
    return clauses


def _split_sentences(text: str, spans) -> list[tuple[int, int]]:
    bounds = []
    start = 0
    for m in _SENTENCE_END.finditer(text):
        if _in_spans(m.start(), spans):
            continue
        bounds.append((start, m.start()))
        start = m.end()
    if start < len(text):
        bounds.append((start, len(text)))
    return [(a, b) for a, b in bounds if text[a:b].strip()]


def _keywords(domain: Optional[Domain]) -> tuple[str, ...]:
    return domain.event_keywords if domain is not None else ("if", "when", "whenever")


def _starts_with_keyword(piece: str, domain: Optional[Domain]) -> bool:
    first = piece.split(None, 1)
    return bool(first) and first[0].lower().strip(",") in _keywords(domain)


def _split_leading_event(text: str, spans, start: int, end: int,
                         domain: Optional[Domain]) -> list[tuple[int, int]]:
    sentence = text[start:end]
    stripped = sentence.lstrip()
    offset = start + (len(sentence) - len(stripped))
    if not _starts_with_keyword(stripped, domain):
        return [(start, end)]
    # Prefer a comma outside quotes as the boundary.
    for i in range(offset, end):
        if text[i] == "," and not _in_spans(i, spans):
            return [(start, i), (i + 1, end)]
    if domain is None:
        return [(start, end)]
    # No comma: the main clause begins at its first action verb, which is the
    # next lexicon verb after the subordinate clause's own verb.
    tokens = _tokens_outside(text, spans, offset, end)
    seen_event_verb = False
    for token, pos in tokens[1:]:  # skip the keyword itself
        lemma = match_lemma(token, domain.verb_lexicon)
        if lemma is None:
            continue
        if not seen_event_verb:
            seen_event_verb = True
            continue
        targets = domain.verb_lexicon[lemma]
        if any(domain.schema(t).kind == ACTION for t in targets):
            return [(start, pos), (pos, end)]
    return [(start, end)]


# ---------------------------------------------------------------------------
# Clause -> core command
# ---------------------------------------------------------------------------


def parse_clause(domain: Domain, world: World, clause: Clause,
                 context: Optional[_ParseContext] = None) -> CoreCommand:
    """Map one clause to a (possibly partial) command by keyword matching."""
    context = context if context is not None else _ParseContext()
    tokens = _tokens_outside(clause.text, clause.quoted_spans)
    if tokens and tokens[0][0].lower() in _keywords(domain) and clause.kind == EVENT:
        tokens = tokens[1:]

    schema, verb_index = _select_schema(domain, clause, tokens, context)
    if schema is None:
        raise UnparseableClauseError(clause.text, clause.order)

    nouns = _scan_nouns(domain, world, clause, tokens[verb_index + 1:], context)
    args = _bind_args(domain, world, schema, clause, tokens, verb_index, nouns, context)
    command = Command(schema.name, tuple(args))
    return CoreCommand(command, clause.order, gate=schema.kind == EVENT)


def _select_schema(domain: Domain, clause: Clause, tokens,
                   context: _ParseContext) -> tuple[Optional[CommandSchema], int]:
    chosen: Optional[CommandSchema] = None
    verb_index = -1
    for i, (token, _pos) in enumerate(tokens):
        lemma = match_lemma(token, domain.verb_lexicon)
        if lemma is None:
            continue
        candidates = [domain.schema(t) for t in domain.verb_lexicon[lemma]
                      if domain.schema(t).kind == clause.kind]
        if not candidates:
            continue
        if chosen is None:
            chosen = candidates[0]
            verb_index = i
        else:
            context.diagnostics.append(
                f"clause {clause.order}: ignoring extra verb {token!r} after "
                f"{tokens[verb_index][0]!r}"
            )
    return chosen, verb_index


def _scan_nouns(domain: Domain, world: World, clause: Clause, tokens,
                context: _ParseContext) -> list[tuple[str, str]]:
    """Longest-first matches: world entity ids, then regions, then types."""
    words = [t[0].lower().strip(".,!?;:'\"") for t in tokens]
    matches: list[tuple[str, str]] = []
    entity_ids = {rec.id.lower(): rec.id for rec in world.entities}
    regions = {r.lower(): r for r in world.regions}
    i = 0
    while i < len(words):
        found = None
        for width in (3, 2, 1):
            if i + width > len(words):
                continue
            phrase = " ".join(words[i:i + width])
            if phrase in entity_ids:
                found = ("entity", entity_ids[phrase], width)
            elif phrase in regions:
                found = ("region", regions[phrase], width)
            else:
                last = match_lemma(words[i + width - 1], domain.noun_lexicon)
                if last is not None and width == 1:
                    found = ("type", domain.noun_lexicon[last], width)
                elif width > 1:
                    joined = " ".join(words[i:i + width - 1] + [last]) if last else None
                    if joined in domain.noun_lexicon:
                        found = ("type", domain.noun_lexicon[joined], width)
            if found:
                break
        if found:
            matches.append((found[0], found[1]))
            i += found[2]
        elif words[i] in _PRONOUNS:
            if context.referent is not None:
                matches.append(context.referent)
            else:
                matches.append(("pronoun", ""))
            i += 1
        else:
            i += 1
    return matches


def _bind_args(domain: Domain, world: World, schema: CommandSchema, clause: Clause,
               tokens, verb_index: int, nouns, context: _ParseContext) -> list:
    args: list = [None] * len(schema.params)

    for kind, value in nouns:
        for slot, param in enumerate(schema.params):
            if args[slot] is not None or param.requires == REQ_TEXT:
                continue
            if _noun_fits(domain, world, kind, value, param.requires):
                if kind == "entity":
                    args[slot] = EntityArg(value)
                    context.referent = ("entity", value)
                elif kind == "region":
                    args[slot] = RegionArg(value)
                elif kind == "type":
                    args[slot] = Hole(category=param.requires, type_name=value)
                    context.referent = ("type", value)
                else:  # unresolved pronoun
                    args[slot] = Hole(category=param.requires)
                break

    for slot, param in enumerate(schema.params):
        if args[slot] is not None:
            continue
        if param.requires == REQ_TEXT:
            args[slot] = _bind_text(domain, world, schema, clause, tokens, verb_index)
        else:
            args[slot] = Hole(category=param.requires)
    return args


def _noun_fits(domain: Domain, world: World, kind: str, value: str, requires: str) -> bool:
    if requires == REQ_TEXT:
        return False
    if kind == "region":
        return requires == REQ_PLACE
    if kind == "entity":
        rec = world.entity(value)
        return rec is not None and (requires == REQ_PLACE or is_a(domain, rec.type, requires))
    if kind == "type":
        return requires == REQ_PLACE or is_a(domain, value, requires)
    return True  # unresolved pronoun can stand for anything but text


def _bind_text(domain: Domain, world: World, schema: CommandSchema, clause: Clause,
               tokens, verb_index: int):
    if clause.quoted_spans:
        a, b = clause.quoted_spans[0]
        return TextArg(clause.text[a:b])
    # Unquoted speech: the clause remainder after the verb, minus a leading
    # article or addressee noun ("tell people the directions ...").
    rest_tokens = tokens[verb_index + 1:]
    while rest_tokens:
        word = rest_tokens[0][0].lower().strip(".,!?;:'\"")
        if word in _ARTICLES and len(rest_tokens) > 1:
            nxt = match_lemma(rest_tokens[1][0], domain.noun_lexicon)
            if nxt and is_a(domain, domain.noun_lexicon[nxt], "person"):
                rest_tokens = rest_tokens[2:]
                continue
        lemma = match_lemma(word, domain.noun_lexicon)
        if lemma and is_a(domain, domain.noun_lexicon[lemma], "person"):
            rest_tokens = rest_tokens[1:]
            continue
        break
    if not rest_tokens:
        return Hole(category=REQ_TEXT)
    start = rest_tokens[0][1]
    return TextArg(clause.text[start:].strip(" ,"))


# ---------------------------------------------------------------------------
# Utterance -> core commands
# ---------------------------------------------------------------------------


def parse_utterance(domain: Domain, world: World, utterance: Utterance,
                    diagnostics: Optional[list[str]] = None) -> list[CoreCommand]:
    """Parse all clauses in order; events gate the actions that follow them."""
    clauses = split_clauses(utterance, domain)
    context = _ParseContext()
    cores: list[CoreCommand] = []
    for clause in clauses:
        try:
            cores.append(parse_clause(domain, world, clause, context))
        except UnparseableClauseError:
            raise UnparseableClauseError(clause.text, clause.order) from None
    sentence_count = len(_split_sentences(utterance.text, utterance.quoted_spans))
    if sentence_count > 2:
        context.diagnostics.append(
            f"utterance has {sentence_count} sentences; recordings usually carry one or two"
        )
    if diagnostics is not None:
        diagnostics.extend(context.diagnostics)
    return cores
