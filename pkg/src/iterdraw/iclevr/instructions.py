"""Template instructions and their fixed grammar.

Three turn forms exist. Turn 1 places at the center. Turn 2 refers to the
only existing object as "it" with both relation axes. Turns >= 3 add a
second referent named by attributes, described by its depth relation.
"""

from __future__ import annotations

import re
from typing import List, Sequence, Tuple

from ..core.types import ObjectSpec
from .config import COLORS, SHAPES
from .relations import BEHIND, LEFT, Relation

_DEPTH_WORDS = {BEHIND: "behind", "front": "in front of"}
_COLOR_ALT = "|".join(COLORS)
_SHAPE_ALT = "|".join(SHAPES)
_DEPTH_ALT = "behind|in front of"
_SIDE_ALT = "left|right"

TURN1_RE = re.compile(
    rf"^Add a (?P<color>{_COLOR_ALT}) (?P<shape>{_SHAPE_ALT}) at the center$")
TURN2_RE = re.compile(
    rf"^Add a (?P<color>{_COLOR_ALT}) (?P<shape>{_SHAPE_ALT}) "
    rf"(?P<depth>{_DEPTH_ALT}) it on the (?P<side>{_SIDE_ALT})$")
TURN3_RE = re.compile(
    rf"^Add a (?P<color>{_COLOR_ALT}) (?P<shape>{_SHAPE_ALT}) "
    rf"(?P<depth>{_DEPTH_ALT}) it on the (?P<side>{_SIDE_ALT}) "
    rf"and (?P<depth2>{_DEPTH_ALT}) "
    rf"the (?P<color2>{_COLOR_ALT}) (?P<shape2>{_SHAPE_ALT})$")


def grammar_pattern(turn_index: int) -> re.Pattern:
    if turn_index == 1:
        return TURN1_RE
    if turn_index == 2:
        return TURN2_RE
    return TURN3_RE


def _depth_word(relation: Relation) -> str:
    return _DEPTH_WORDS[relation.depth]


def render_instruction(turn_index: int, new_obj: ObjectSpec,
                       refs: Sequence[Tuple[ObjectSpec, Relation]]) -> str:
    """Deterministic instruction text for one turn.

    Turn 1 takes no refs; turn 2 exactly one (the object called "it");
    turns >= 3 exactly two, the first being the most recently added object.
    """
    head = f"Add a {new_obj.color} {new_obj.shape}"
    if turn_index == 1:
        if refs:
            raise ValueError("turn 1 takes no references")
        return f"{head} at the center"
    if turn_index == 2:
        if len(refs) != 1:
            raise ValueError("turn 2 takes exactly one reference")
        _, rel = refs[0]
        return f"{head} {_depth_word(rel)} it on the {rel.horizontal}"
    if len(refs) != 2:
        raise ValueError("turns >= 3 take exactly two references")
    _, rel1 = refs[0]
    ref2, rel2 = refs[1]
    return (f"{head} {_depth_word(rel1)} it on the {rel1.horizontal} "
            f"and {_depth_word(rel2)} the {ref2.color} {ref2.shape}")


def parse_instruction(text: str, turn_index: int) -> dict:
    """Match `text` against the turn's grammar; returns the captured fields."""
    match = grammar_pattern(turn_index).match(text)
    if match is None:
        raise ValueError(f"instruction does not match turn-{turn_index} "
                         f"grammar: {text!r}")
    return match.groupdict()


def relation_words(relation: Relation) -> Tuple[str, str]:
    """(depth phrase, side word) as they appear in instruction text."""
    return _depth_word(relation), relation.horizontal


def matches_grammar(text: str, turn_index: int) -> bool:
    return grammar_pattern(turn_index).match(text) is not None
