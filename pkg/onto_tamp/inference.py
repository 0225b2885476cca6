"""Contextual inference: turns a tagged command into ordering guidance.

Each clause's objects are classified against the knowledge base and sorted
by the ActionPriority rules of the clause's action. The result is rendered
as a plain-text block that goes into the prompt and can be parsed back.
"""
import logging
import re
from dataclasses import dataclass, field

from .ontology import UNKNOWN, classify_label, query_action_priority, query_object_type

logger = logging.getLogger(__name__)

_COLLECTIVE_TAILS = ('items', 'objects', 'things')


@dataclass(frozen=True)
class ClauseGuidance:
    task: str
    destination: str = None
    ordered_objects: tuple = ()
    priorities: dict = field(default_factory=dict)
    members: dict = field(default_factory=dict)
    notes: tuple = ()
    warnings: tuple = ()


@dataclass(frozen=True)
class Guidance:
    clauses: tuple = ()
    feedback: tuple = ()

    @property
    def notes(self):
        return [note for clause in self.clauses for note in clause.notes]

    @property
    def warnings(self):
        return [warning for clause in self.clauses for warning in clause.warnings]

    def order(self):
        """All clause objects sorted by priority across clauses.

        Returns ``(name, clause_index)`` pairs. Clause order breaks ties and
        unranked objects go last.
        """
        entries = []
        for index, clause in enumerate(self.clauses):
            for name in clause.ordered_objects:
                priority = clause.priorities.get(name)
                for member in clause.members.get(name, (name,)):
                    entries.append((member, priority, index))
        entries.sort(key=lambda entry: (entry[1] is None, entry[1] or 0))
        return [(name, index) for name, _, index in entries]


def resolve_type(kb, name):
    """Classify an object name, including collective names like ``crockery_items``.

    Returns ``(class_name, kind)`` where kind is ``individual``, ``class`` or
    ``plural``; unmatched names give ``(Unknown, None)``.
    """
    if query_object_type(kb, name):
        return classify_label(kb, name), 'individual'
    words = name.lower().split('_')
    phrases = [' '.join(words)]
    if len(words) > 1 and words[-1] in _COLLECTIVE_TAILS:
        phrases.append(' '.join(words[:-1]))
    for phrase in phrases:
        class_name = kb.class_for_label(phrase)
        if class_name:
            return class_name, 'class'
    if name.endswith('s') and query_object_type(kb, name[:-1]):
        return classify_label(kb, name[:-1]), 'plural'
    return UNKNOWN, None


def classify_objects(kb, command):
    return {name: resolve_type(kb, name)[0] for clause in command.clauses for name in clause.objects}


def _members(kb, name, state):
    class_name, kind = resolve_type(kb, name)
    if state is None or kind in (None, 'individual'):
        return None
    if kind == 'class':
        found = [obj.name for obj in state.objects.values()
                 if classify_label(kb, obj.name, obj.type_hint) == class_name]
    else:
        pattern = re.compile(rf'^{re.escape(name[:-1])}\d*$')
        found = [obj.name for obj in state.objects.values() if pattern.match(obj.name)]
    return tuple(sorted(found)) or None


def _contexts(command, index):
    """Actions whose rules rank a clause, most specific first."""
    clause = command.clauses[index]
    if clause.task == 'put' and any(c.task == 'clean' for c in command.clauses[:index]):
        return ('clean', 'put')
    return (clause.task,)


def _rank(kb, object_type, contexts):
    for action in contexts:
        found = query_action_priority(kb, action, object_type)
        if found:
            return found
    return None


def _join(names):
    names = list(names)
    if len(names) < 2:
        return ''.join(names)
    return f"{', '.join(names[:-1])} and {names[-1]}"


def _area(name, members, state):
    if state is None:
        return 0.0
    names = members.get(name, (name,))
    areas = [state.objects[n].area for n in names if n in state.objects]
    return max(areas) if areas else 0.0


def _notes(kb, task, groups):
    """One sentence per ranked object type, phrased relative to the others."""
    verb = task.capitalize()
    notes = []
    for object_type, (priority, description, names) in groups.items():
        higher = [kb.class_label(t) for t, g in groups.items() if g[0] < priority]
        lower = [kb.class_label(t) for t, g in groups.items() if g[0] > priority]
        parts = []
        if lower:
            parts.append(f"before {_join(lower)}")
        if higher:
            parts.append(f"after {_join(higher)}")
        if parts:
            notes.append(f"{verb} {_join(names)} {' and '.join(parts)} because {description}.")
        else:
            notes.append(f"{verb} {_join(names)} with priority {priority} because {description}.")
    return tuple(notes)


def build_clause_guidance(kb, command, index, state=None):
    clause = command.clauses[index]
    contexts = _contexts(command, index)
    members = {}
    priorities = {}
    types = {}
    warnings = []
    for name in clause.objects:
        object_type, _ = resolve_type(kb, name)
        types[name] = object_type
        expanded = _members(kb, name, state)
        if expanded:
            members[name] = expanded
        if object_type == UNKNOWN:
            warnings.append(f"{name} is not in the knowledge base; handle it last.")
            logger.warning("Unknown object %r in '%s' clause", name, clause.task)
            priorities[name] = None
            continue
        found = _rank(kb, object_type, contexts)
        priorities[name] = found[0] if found else None

    mention = {name: i for i, name in enumerate(clause.objects)}

    def sort_key(name):
        priority = priorities[name]
        area = _area(name, members, state) if clause.task == 'stack' else 0.0
        return (priority is None, priority or 0, -area, mention[name])

    ordered = tuple(sorted(clause.objects, key=sort_key))
    if clause.task == 'stack' and state is not None:
        members = {
            name: tuple(sorted(names, key=lambda n: (-state.objects[n].area, n)))
            for name, names in members.items()
        }

    groups = {}
    for name in ordered:
        if priorities[name] is None:
            continue
        priority, description = _rank(kb, types[name], contexts)
        groups.setdefault(types[name], (priority, description, []))[2].append(name)

    return ClauseGuidance(
        task=clause.task,
        destination=clause.destination,
        ordered_objects=ordered,
        priorities=priorities,
        members=members,
        notes=_notes(kb, clause.task, groups),
        warnings=tuple(warnings),
    )


def build_guidance(kb, command, state=None):
    """Ordering guidance for every clause of ``command``.

    ``state`` is optional; with it, stacking uses footprint areas and
    collective names are expanded to the matching scene objects.
    """
    return Guidance(clauses=tuple(
        build_clause_guidance(kb, command, i, state) for i in range(len(command.clauses))
    ))


def with_feedback(guidance, messages):
    return Guidance(clauses=guidance.clauses, feedback=tuple(messages))


def render_guidance(guidance):
    lines = []
    for number, clause in enumerate(guidance.clauses, start=1):
        target = f" -> {clause.destination}" if clause.destination else ""
        lines.append(f"Clause {number} ({clause.task}{target}): {', '.join(clause.ordered_objects)}")
        if clause.ordered_objects:
            ranks = ', '.join(
                f"{name}={'-' if clause.priorities.get(name) is None else clause.priorities[name]}"
                for name in clause.ordered_objects
            )
            lines.append(f"Priorities: {ranks}")
        for name, names in clause.members.items():
            lines.append(f"Group {name}: {', '.join(names)}")
        lines.extend(clause.notes)
        lines.extend(f"Warning: {warning}" for warning in clause.warnings)
    lines.extend(guidance.feedback)
    return "\n".join(lines)


_CLAUSE_RE = re.compile(r'^Clause \d+ \((\w+)(?: -> (\w+))?\):\s*(.*)$')
_GROUP_RE = re.compile(r'^Group (\w+):\s*(.*)$')


def _names(text):
    return tuple(part.strip() for part in text.split(',') if part.strip())


def parse_guidance(text):
    """Rebuild the structured part of a rendered guidance block.

    Notes and warnings are kept as prose; feedback lines start with FAILURE.
    """
    clauses = []
    feedback = []
    current = None

    def close():
        if current is not None:
            clauses.append(ClauseGuidance(**current))

    for raw in text.splitlines():
        line = raw.strip()
        match = _CLAUSE_RE.match(line)
        if match:
            close()
            task, destination, objects = match.groups()
            current = {'task': task, 'destination': destination, 'ordered_objects': _names(objects),
                       'priorities': {}, 'members': {}, 'notes': (), 'warnings': ()}
        elif line.startswith('FAILURE:'):
            feedback.append(line)
        elif current is None:
            continue
        elif line.startswith('Priorities:'):
            for item in _names(line[len('Priorities:'):]):
                name, _, value = item.partition('=')
                current['priorities'][name] = None if value == '-' else int(value)
        elif _GROUP_RE.match(line):
            name, members = _GROUP_RE.match(line).groups()
            current['members'][name] = _names(members)
        elif line.startswith('Warning:'):
            current['warnings'] += (line[len('Warning:'):].strip(),)
        elif line:
            current['notes'] += (line,)
    close()
    return Guidance(clauses=tuple(clauses), feedback=tuple(feedback))
