"""Semantic tagging of user commands.

A closed kitchen lexicon assigns parts of speech; positional rules then pull
out the task verb, the manipulated objects and the destination of each
clause. Everything here is a pure function of the input text.
"""
import re

from .errors import EmptyObjects, NoTaskFound
from .models import Clause, Pos, TaggedCommand, Token

TASKS = ('clean', 'arrange', 'put', 'serve', 'stack')
NEEDS_OBJECTS = ('put', 'serve', 'stack')

TASK_VERBS = {
    'clean': 'clean', 'cleaning': 'clean', 'clear': 'clean', 'clearing': 'clean',
    'arrange': 'arrange', 'arranging': 'arrange',
    'put': 'put', 'putting': 'put',
    'move': 'put', 'moving': 'put',
    'place': 'put', 'placing': 'put',
    'bring': 'put', 'bringing': 'put',
    'serve': 'serve', 'serving': 'serve',
    'stack': 'stack', 'stacking': 'stack',
}

LOCATIVE = frozenset({'in', 'on', 'to', 'into', 'onto'})

LEXICON = {
    Pos.DET: {'the', 'a', 'an', 'all', 'some', 'every', 'each', 'this', 'these', 'that', 'those', 'my', 'your'},
    Pos.PREP: LOCATIVE | {'by', 'from', 'with', 'at', 'of', 'for', 'before', 'after', 'near', 'off', 'inside', 'next'},
    Pos.CONJ: {'and', 'or', 'then', 'but'},
    Pos.ADJ: {
        'left', 'right', 'green', 'red', 'blue', 'yellow', 'white', 'black', 'boxed',
        'small', 'large', 'big', 'empty', 'dirty', 'wooden', 'top', 'bottom',
    },
    Pos.NOUN: {
        'apple', 'apples', 'banana', 'bananas', 'bread', 'orange', 'oranges', 'food', 'items', 'item',
        'sugar_box', 'tomato_can', 'cracker_box', 'box', 'boxes', 'can', 'cans', 'sugar', 'tomato', 'cracker',
        'bowl', 'bowls', 'plate', 'plates', 'cup', 'cups', 'mug', 'mugs', 'crockery',
        'fork', 'forks', 'knife', 'knives', 'spoon', 'spoons', 'utensils', 'cutlery',
        'kettle', 'pan', 'tray', 'basket', 'table', 'tables', 'left_table', 'right_table', 'objects', 'things',
    },
    Pos.OTHER: {
        'breakfast', 'lunch', 'dinner', 'please', 'now', 'it', 'them', 'is', 'are', 'be', 'you',
        'robot', 'first', 'last', 'next_to', 'up', 'down', 'away',
    },
}

_WORDS = {word: pos for pos, words in LEXICON.items() for word in words}
_TOKEN_RE = re.compile(r'\w+|[^\w\s]')


def tokenize(text):
    return [Token(text=match.group(0), index=i) for i, match in enumerate(_TOKEN_RE.finditer(text))]


def _pos_of(word):
    lower = word.lower()
    if lower in TASK_VERBS:
        return Pos.VERB
    if not re.search(r'\w', lower):
        return Pos.PUNCT
    if lower in _WORDS:
        return _WORDS[lower]
    if re.search(r'[a-z_]\d+$', lower):
        return Pos.NOUN
    if lower.endswith('ly'):
        return Pos.OTHER
    return Pos.NOUN


def tag_pos(tokens):
    return [Token(text=token.text, index=token.index, pos=_pos_of(token.text)) for token in tokens]


def _is_task_verb(token):
    return token.pos is Pos.VERB and token.text.lower() in TASK_VERBS


def _segments(tokens):
    """Split at commas (or conjunctions) that introduce a new task verb."""
    segment = []
    for i, token in enumerate(tokens):
        opens_clause = False
        if token.text == ',' or token.pos is Pos.CONJ or token.text in '.;':
            following = next((t for t in tokens[i + 1:] if t.pos is not Pos.CONJ), None)
            opens_clause = token.text in '.;' or (following is not None and _is_task_verb(following))
        if opens_clause:
            if segment:
                yield segment
            segment = []
        else:
            segment.append(token)
    if segment:
        yield segment


class _Phrase:
    def __init__(self):
        self.words = []
        self.has_noun = False

    def add(self, token):
        self.words.append(token.text.lower())
        self.has_noun = self.has_noun or token.pos is Pos.NOUN

    def take(self):
        """Return the underscore-joined phrase (or None) and reset."""
        while self.words and _WORDS.get(self.words[-1]) is Pos.ADJ:
            self.words.pop()
        name = '_'.join(self.words) if self.has_noun and self.words else None
        self.words = []
        self.has_noun = False
        return name


def _parse_clause(segment):
    start = next((i for i, token in enumerate(segment) if _is_task_verb(token)), None)
    if start is None:
        return None
    task = TASK_VERBS[segment[start].text.lower()]

    objects = []
    destination = None
    phrase = _Phrase()
    mode = 'objects'  # objects -> closed -> dest

    for token in segment[start + 1:]:
        word = token.text.lower()
        if token.pos is Pos.PREP and word in LOCATIVE:
            name = phrase.take()
            if mode == 'objects' and name:
                objects.append(name)
            elif mode == 'dest' and name:
                destination = name
            mode = 'dest'
            continue
        if token.pos in (Pos.NOUN, Pos.ADJ):
            if mode != 'closed':
                phrase.add(token)
            continue
        if token.pos is Pos.DET:
            name = phrase.take()
            if name and mode == 'objects':
                objects.append(name)
            elif name and mode == 'dest':
                destination = name
            continue

        # Conjunctions and commas continue an object run; anything else ends it.
        name = phrase.take()
        if mode == 'objects':
            if name:
                objects.append(name)
            if objects and not (token.pos is Pos.CONJ or token.text == ','):
                mode = 'closed'
        elif mode == 'dest' and name:
            destination = name

    name = phrase.take()
    if name and mode == 'objects':
        objects.append(name)
    elif name and mode == 'dest':
        destination = name

    if task in NEEDS_OBJECTS and not objects:
        raise EmptyObjects(f"no object found for '{task}'")
    return Clause(task=task, objects=tuple(objects), destination=destination)


def extract_command(text):
    """Parse ``text`` into clauses of (task, objects, destination)."""
    tokens = tag_pos(tokenize(text))
    clauses = []
    for segment in _segments(tokens):
        clause = _parse_clause(segment)
        if clause is not None:
            clauses.append(clause)
    if not clauses:
        raise NoTaskFound(f"no task verb ({', '.join(TASKS)}) in {text!r}")
    return TaggedCommand(clauses=tuple(clauses))
