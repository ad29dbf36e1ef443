"""Frequency-based spell correction for query tokens.

Classic candidate-generation approach: try the token itself, then every
dictionary word within one edit, then within two. The most frequent
candidate wins; ties go to the lexicographically smaller word. Tokens that
carry digits or look like part numbers are never touched, since "corrections"
to model numbers do more harm than good.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .abbrev import AbbrevDictionary
from .catalog import CorpusStats, normalize_text, tokenize
from .partnum import DEFAULT_PATTERN, matches_pattern

# Beyond this length an unknown token is almost certainly a glued
# abbreviation rather than a typo, so the distance-2 stage skips it.
MAX_EDITS2_LEN = 12


@dataclass(frozen=True)
class SpellDictionary:
    """Word frequencies plus the alphabet used for candidate generation.

    The alphabet must cover every character of every dictionary word;
    build_spell_dict derives it that way. `_memo` and `_deletes` are
    mutable caches, not part of the dictionary's identity.
    """

    word_frequency: dict[str, int]
    alphabet: tuple[str, ...]
    _memo: dict[str, str] = field(default_factory=dict, repr=False, compare=False)
    _deletes: dict[str, list[str]] = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.word_frequency)

    def __contains__(self, token: str) -> bool:
        return token in self.word_frequency


def build_spell_dict(stats: CorpusStats, abbrev: AbbrevDictionary | None = None) -> SpellDictionary:
    """Corpus token frequencies plus abbreviation keys and expansion words.

    Dictionary-sourced words get a floor frequency of 1 so they are
    correctable targets without outranking real corpus evidence.
    """
    freq = dict(stats.token_frequency)
    if abbrev is not None:
        extra = list(abbrev.entries.keys())
        for expansion in abbrev.entries.values():
            extra.extend(tokenize(expansion))
        for word in extra:
            norm = normalize_text(word)
            if norm and norm not in freq:
                freq[norm] = 1
    alphabet = tuple(sorted({ch for word in freq for ch in word}))
    dictionary = SpellDictionary(word_frequency=freq, alphabet=alphabet)
    # Pay for the distance-2 lookup table here rather than on the first
    # unlucky query; index builds are the declared slow path.
    _build_delete_index(dictionary)
    return dictionary


def _delete_variants(word: str, radius: int = 2) -> set[str]:
    """The word plus everything reachable by removing up to `radius` chars."""
    out = {word}
    frontier = {word}
    for _ in range(radius):
        nxt = {w[:i] + w[i + 1 :] for w in frontier for i in range(len(w))}
        frontier = nxt - out
        out |= nxt
    return out


def _build_delete_index(dictionary: SpellDictionary) -> None:
    index = dictionary._deletes
    for word in dictionary.word_frequency:
        # A token over MAX_EDITS2_LEN never reaches the distance-2 stage,
        # and two edits change length by at most two, so longer words can
        # never be candidates there.
        if len(word) > MAX_EDITS2_LEN + 2:
            continue
        for variant in _delete_variants(word):
            index.setdefault(variant, []).append(word)


def _damerau(a: str, b: str) -> int:
    """Edit distance where adjacent transposition counts as one operation.

    Unrestricted variant (Lowrance-Wagner): transposed characters may be
    edited again, matching what repeated single-edit rewrites can reach.
    """
    da: dict[str, int] = {}
    maxdist = len(a) + len(b)
    d = [[maxdist] * (len(b) + 2) for _ in range(len(a) + 2)]
    for i in range(len(a) + 1):
        d[i + 1][1] = i
    for j in range(len(b) + 1):
        d[1][j + 1] = j
    for i in range(1, len(a) + 1):
        db = 0
        for j in range(1, len(b) + 1):
            k = da.get(b[j - 1], 0)
            l = db
            if a[i - 1] == b[j - 1]:
                cost = 0
                db = j
            else:
                cost = 1
            d[i + 1][j + 1] = min(
                d[i][j] + cost,
                d[i + 1][j] + 1,
                d[i][j + 1] + 1,
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),
            )
        da[a[i - 1]] = i
    return d[len(a) + 1][len(b) + 1]


def _distance2_candidates(token: str, dictionary: SpellDictionary) -> set[str]:
    """Dictionary words within two edits of the token.

    Meet-in-the-middle over deletions: if two strings are within two edits,
    they share a variant reachable by deleting at most two characters from
    each side. The shared-variant test admits some extra words, so every
    candidate is verified with the real distance.
    """
    if not dictionary._deletes and dictionary.word_frequency:
        _build_delete_index(dictionary)
    pool: set[str] = set()
    for variant in _delete_variants(token):
        pool.update(dictionary._deletes.get(variant, ()))
    return {w for w in pool if _damerau(token, w) <= 2}


def _edits1(token: str, alphabet: tuple[str, ...]):
    splits = [(token[:i], token[i:]) for i in range(len(token) + 1)]
    for left, right in splits:
        if right:
            yield left + right[1:]
        if len(right) > 1:
            yield left + right[1] + right[0] + right[2:]
        for ch in alphabet:
            if right:
                yield left + ch + right[1:]
            yield left + ch + right


def correct_token(token: str, dictionary: SpellDictionary) -> str:
    """Nearest dictionary word by edit distance, the token itself when known."""
    if token in dictionary:
        return token
    cached = dictionary._memo.get(token)
    if cached is not None:
        return cached
    freq = dictionary.word_frequency
    near = {e for e in _edits1(token, dictionary.alphabet) if e in freq}
    if not near and len(token) <= MAX_EDITS2_LEN:
        near = _distance2_candidates(token, dictionary)
    best = min(near, key=lambda w: (-freq[w], w)) if near else token
    dictionary._memo[token] = best
    return best


def _skip_correction(token: str) -> bool:
    if matches_pattern(token, DEFAULT_PATTERN) is not None:
        return True
    return any(ch.isdigit() for ch in token)


def correct_query(query: str, dictionary: SpellDictionary) -> str:
    """Correct each whitespace token of the normalized query independently."""
    tokens = normalize_text(query).split(" ")
    out = [t if _skip_correction(t) else correct_token(t, dictionary) for t in tokens if t]
    return " ".join(out)
