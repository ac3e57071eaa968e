"""Digit-conditioned probabilistic grammar describing a single digit in English.

Word-level tokens only: a sentence is the list of its space-separated words.
"""

from __future__ import annotations

import functools
import itertools
import logging
from collections import defaultdict, namedtuple
from typing import Iterator

import numpy as np

logger = logging.getLogger(__name__)

Rule = namedtuple("Rule", ["lhs", "rhs"])

ROOT = "STATEMENT"
HAZY = ("Reply", "hazy,", "try", "again")

DIGIT_NAMES = ("zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine")

# ===================
# Rule weights
# ===================

INTRO_WEIGHTS = {
    ("It's",): 0.138,
    ("It", "is"): 0.086,
    ("That's",): 0.218,
    ("That", "is"): 0.185,
    ("Sure,", "it's"): 0.096,
    ("Sure,", "it", "is"): 0.02,
    ("Sure,", "that's"): 0.17,
    ("Sure,", "that", "is"): 0.087,
}

# As published these sum to 1.78; normalized when the grammar is built.
VALUE_WEIGHTS_RAW = {
    "say_digit": 0.56,
    "parity": 0.19,
    "spell": 0.13,
    "spell_length": 0.9,
}

SAY_DIGIT_WEIGHTS = {"plain": 0.616, "the_number": 0.384}
DIGIT_WEIGHTS = {"name": 0.323, "value": 0.677}
STATEMENT_WEIGHTS = {"intro_value": 0.99, "hazy": 0.01}


def _splits(n: int, k: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """All ways to cut a span of ``n`` tokens into ``k`` nonempty pieces."""
    if k > n:
        return
    for cuts in itertools.combinations(range(1, n), k - 1):
        indices = (0, *cuts, n)
        yield tuple((indices[i], indices[i + 1]) for i in range(k))


class Pcfg:
    """Weighted grammar, not necessarily in Chomsky normal form.

    Any symbol that never appears as a left-hand side is a terminal token.
    There are no empty productions, so every symbol covers at least one token.
    """

    def __init__(self, rules: dict[Rule, float], root: str = ROOT):
        self.rules = dict(rules)
        self.root = root
        self.by_lhs: dict[str, list[tuple[Rule, float]]] = defaultdict(list)
        for rule, p in self.rules.items():
            self.by_lhs[rule.lhs].append((rule, p))

    def is_terminal(self, symbol: str) -> bool:
        return symbol not in self.by_lhs

    def rule_sums(self) -> dict[str, float]:
        return {lhs: float(sum(p for _, p in rules)) for lhs, rules in self.by_lhs.items()}

    def inside(self, tokens) -> float:
        """Total probability of ``tokens`` over all derivations from the root."""
        xs = tuple(tokens)
        if not xs:
            return 0.0

        @functools.cache
        def f(symbol: str, start: int, size: int) -> float:
            if self.is_terminal(symbol):
                return 1.0 if size == 1 and xs[start] == symbol else 0.0
            total = 0.0
            for rule, p in self.by_lhs[symbol]:
                for split in _splits(size, len(rule.rhs)):
                    sub = p
                    for part, (lo, hi) in zip(rule.rhs, split):
                        sub *= f(part, start + lo, hi - lo)
                        if sub == 0.0:
                            break
                    total += sub
            return total

        return f(self.root, 0, len(xs))

    def enumerate(self, symbol: str | None = None) -> list[tuple[tuple[str, ...], float]]:
        """Every derivation yield of ``symbol`` with its probability (finite grammars only).

        Different derivations of the same token sequence are merged.
        """
        merged: dict[tuple[str, ...], float] = defaultdict(float)
        for tokens, p in self._expand(symbol or self.root):
            merged[tokens] += p
        return list(merged.items())

    def _expand(self, symbol: str) -> list[tuple[tuple[str, ...], float]]:
        if self.is_terminal(symbol):
            return [((symbol,), 1.0)]
        out = []
        for rule, p in self.by_lhs[symbol]:
            partials = [((), p)]
            for part in rule.rhs:
                partials = [
                    (prefix + tokens, q * r)
                    for prefix, q in partials
                    for tokens, r in self._expand(part)
                ]
            out.extend(partials)
        return out

    def sample(self, rng: np.random.Generator) -> tuple[str, ...]:
        """Ancestral sample: expand the leftmost nonterminal until only tokens remain."""
        sequence = []
        stack = [self.root]
        while stack:
            symbol = stack.pop()
            if self.is_terminal(symbol):
                sequence.append(symbol)
                continue
            options = self.by_lhs[symbol]
            weights = np.array([p for _, p in options])
            rule = options[rng.choice(len(options), p=weights / weights.sum())][0]
            stack.extend(reversed(rule.rhs))
        return tuple(sequence)

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "rules": [
                {"lhs": rule.lhs, "rhs": list(rule.rhs), "p": p} for rule, p in self.rules.items()
            ],
        }


def spelled(digit: int) -> tuple[str, ...]:
    return tuple(DIGIT_NAMES[digit].upper())


def parity(digit: int) -> str:
    return "even" if digit % 2 == 0 else "odd"


def spell_length(digit: int) -> str:
    return str(len(DIGIT_NAMES[digit]))


@functools.lru_cache(maxsize=10)
def digit_grammar(digit: int) -> Pcfg:
    """The grammar conditioned on the true digit value ``digit``."""
    if digit not in range(10):
        raise ValueError(f"digit must be in 0..9, got {digit}")
    total = sum(VALUE_WEIGHTS_RAW.values())
    if abs(total - 1.0) > 1e-12:
        logger.warning("VALUE rule weights sum to %.4g; renormalizing", total)
    value = {k: v / total for k, v in VALUE_WEIGHTS_RAW.items()}

    rules: dict[Rule, float] = {
        Rule(ROOT, ("INTRO", "VALUE")): STATEMENT_WEIGHTS["intro_value"],
        Rule(ROOT, HAZY): STATEMENT_WEIGHTS["hazy"],
        Rule("VALUE", ("SAY-DIGIT",)): value["say_digit"],
        Rule("VALUE", ("an", "EVEN-ODD", "number")): value["parity"],
        Rule("VALUE", ("spelled", "SPELL")): value["spell"],
        Rule("VALUE", ("spelled", "with", "SPELL-LENGTH", "letters")): value["spell_length"],
        Rule("SAY-DIGIT", ("DIGIT",)): SAY_DIGIT_WEIGHTS["plain"],
        Rule("SAY-DIGIT", ("the", "number", "DIGIT")): SAY_DIGIT_WEIGHTS["the_number"],
        Rule("DIGIT", ("DIGIT-NAME",)): DIGIT_WEIGHTS["name"],
        Rule("DIGIT", ("DIGIT-VAL",)): DIGIT_WEIGHTS["value"],
        Rule("DIGIT-NAME", (DIGIT_NAMES[digit],)): 1.0,
        Rule("DIGIT-VAL", (str(digit),)): 1.0,
        Rule("EVEN-ODD", (parity(digit),)): 1.0,
        Rule("SPELL", spelled(digit)): 1.0,
        Rule("SPELL-LENGTH", (spell_length(digit),)): 1.0,
    }
    for intro, p in INTRO_WEIGHTS.items():
        rules[Rule("INTRO", intro)] = p
    return Pcfg(rules)


def tokenize(sentence: str) -> tuple[str, ...]:
    return tuple(sentence.split())


def pcfg_inside_prob(digit: int, sentence) -> float:
    """Exact probability of ``sentence`` (a string or a token list) given the digit."""
    tokens = tokenize(sentence) if isinstance(sentence, str) else tuple(sentence)
    return digit_grammar(digit).inside(tokens)


# ===================
# Semantic equivalence
# ===================

_INTROS_LONGEST_FIRST = sorted(INTRO_WEIGHTS, key=len, reverse=True)
_DIGIT_WORDS = {name: d for d, name in enumerate(DIGIT_NAMES)} | {str(d): d for d in range(10)}
_SPELLINGS = {spelled(d): DIGIT_NAMES[d] for d in range(10)}


def equivalence_key(sentence) -> tuple | None:
    """Key shared by sentences that differ only in how INTRO, SAY-DIGIT and DIGIT expanded.

    Returns None for token sequences the grammar cannot produce for any digit.
    """
    tokens = tokenize(sentence) if isinstance(sentence, str) else tuple(sentence)
    if tokens == HAZY:
        return ("hazy",)
    body = None
    for intro in _INTROS_LONGEST_FIRST:
        if tokens[: len(intro)] == intro:
            body = tokens[len(intro):]
            break
    if not body:
        return None
    if body[:2] == ("the", "number"):
        body_digit = body[2:]
        if len(body_digit) == 1 and body_digit[0] in _DIGIT_WORDS:
            return ("value", _DIGIT_WORDS[body_digit[0]])
        return None
    if len(body) == 1 and body[0] in _DIGIT_WORDS:
        return ("value", _DIGIT_WORDS[body[0]])
    if len(body) == 3 and body[0] == "an" and body[2] == "number" and body[1] in ("even", "odd"):
        return ("parity", body[1])
    if len(body) == 4 and body[:2] == ("spelled", "with") and body[3] == "letters":
        return ("length", body[2]) if body[2] in {"3", "4", "5"} else None
    if body[0] == "spelled" and body[1:] in _SPELLINGS:
        return ("spell", _SPELLINGS[body[1:]])
    return None


def pcfg_enumerate_support(digit: int) -> list[tuple[str, float, tuple]]:
    """Complete support for ``digit`` as ``(sentence, probability, equivalence key)``."""
    out = []
    for tokens, p in digit_grammar(digit).enumerate():
        out.append((" ".join(tokens), p, equivalence_key(tokens)))
    out.sort(key=lambda item: item[0])
    return out


@functools.lru_cache(maxsize=1)
def sentence_alphabet() -> tuple[str, ...]:
    """Union of the supports of all ten digits, sorted."""
    sentences = {s for d in range(10) for s, _, _ in pcfg_enumerate_support(d)}
    return tuple(sorted(sentences))
