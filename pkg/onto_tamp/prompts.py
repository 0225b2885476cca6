"""Prompt composition: template text with three slots filled in place."""
import re
from dataclasses import dataclass, field

from .errors import TemplateError
from .inference import Guidance, render_guidance

SLOTS = ('GUIDANCE', 'ENV_STATE', 'USER_INPUT')
_SLOT_RE = re.compile(r'\{(' + '|'.join(SLOTS) + r')\}')


@dataclass(frozen=True)
class PromptTemplate:
    # ('text', str) or ('slot', name), in order
    sections: tuple = ()


@dataclass(frozen=True)
class Prompt:
    text: str
    provenance: dict = field(default_factory=dict)

    def block(self, slot):
        start, end = self.provenance[slot]
        return self.text[start:end]

    def __str__(self):
        return self.text


def parse_template(text):
    sections = []
    position = 0
    for match in _SLOT_RE.finditer(text):
        if match.start() > position:
            sections.append(('text', text[position:match.start()]))
        sections.append(('slot', match.group(1)))
        position = match.end()
    if position < len(text):
        sections.append(('text', text[position:]))

    for slot in SLOTS:
        count = sum(1 for kind, value in sections if kind == 'slot' and value == slot)
        if count != 1:
            raise TemplateError(f"slot {{{slot}}} must appear exactly once, found {count}")
    return PromptTemplate(sections=tuple(sections))


def load_template(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return parse_template(handle.read())
    except OSError as exc:
        raise TemplateError(f"cannot read template {path}: {exc.strerror}") from exc


def compose(template, guidance, env_description, user_input):
    """Fill the template slots and record where each block landed."""
    if isinstance(guidance, Guidance):
        guidance = render_guidance(guidance)
    values = {'GUIDANCE': guidance, 'ENV_STATE': env_description, 'USER_INPUT': user_input}

    seen = {value for kind, value in template.sections if kind == 'slot'}
    missing = [slot for slot in SLOTS if slot not in seen]
    if missing:
        raise TemplateError(f"template is missing {', '.join('{' + s + '}' for s in missing)}")

    parts = []
    provenance = {}
    offset = 0
    for kind, value in template.sections:
        chunk = values[value] if kind == 'slot' else value
        if kind == 'slot':
            provenance[value] = (offset, offset + len(chunk))
        parts.append(chunk)
        offset += len(chunk)
    return Prompt(text=''.join(parts), provenance=provenance)
