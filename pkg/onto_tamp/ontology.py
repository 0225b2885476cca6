"""Kitchen knowledge base: line-format loader, rdflib graph and the two lookups.

The document format is one triple per line::

    <subject> <predicate> <object> .
    <subject> <predicate> "literal" .
    <subject> <predicate> "3"^^int .

Lines starting with ``#`` are comments. Integer literals are stored as
``xsd:integer`` so SPARQL comparisons behave numerically.
"""
import logging
import re

from rdflib import BNode, Graph, Literal, Namespace, URIRef
from rdflib.namespace import OWL, RDF, RDFS, XSD
from rdflib.plugins.sparql import prepareQuery

from .errors import AmbiguityError, ParseError, SchemaError
from .models import ActionPriorityRule

logger = logging.getLogger(__name__)

EX = Namespace("http://www.example.org/kitchen_ontology#")

RULE_PROPERTIES = ('hasAction', 'hasObjectType', 'hasPriority', 'hasDescription')
UNKNOWN = 'Unknown'

_TERM = r'(<[^>]*>|_:\w+)'
_LITERAL = r'"((?:[^"\\]|\\.)*)"(\^\^int)?'
_LINE_RE = re.compile(rf'^{_TERM}\s+(<[^>]*>)\s+(?:{_TERM}|{_LITERAL})\s*\.\s*$')

# Individuals with their asserted classes. Classes themselves also carry labels
# (used for prose), so they are filtered out next to the NamedIndividual marker.
_LABELLED_TYPES = prepareQuery(
    """
    SELECT ?obj ?label ?type WHERE {
        ?obj a ?type ;
             rdfs:label ?label .
        FILTER (?type != owl:NamedIndividual)
        FILTER (?type != owl:Class)
    }
    """,
    initNs={"rdfs": RDFS, "owl": OWL},
)

_RULES = prepareQuery(
    """
    SELECT ?rule ?action ?type ?priority ?description WHERE {
        ?rule rdf:type ex:ActionPriority ;
              ex:hasAction ?action ;
              ex:hasObjectType ?type ;
              ex:hasPriority ?priority ;
              ex:hasDescription ?description .
    }
    """,
    initNs={"rdf": RDF, "ex": EX},
)


def local_name(term):
    text = str(term)
    for sep in ('#', '/'):
        if sep in text:
            text = text.rsplit(sep, 1)[1]
    return text


def _unescape(text):
    return re.sub(r'\\(.)', r'\1', text)


def _escape(text):
    return text.replace('\\', '\\\\').replace('"', '\\"')


def _node(token):
    if token.startswith('_:'):
        return BNode(token[2:])
    iri = token[1:-1]
    if not iri:
        raise ValueError("empty IRI")
    return URIRef(iri)


def parse_triples(document):
    """Yield rdflib triples from the line format, raising ParseError with the line number."""
    for number, raw in enumerate(document.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        match = _LINE_RE.match(line)
        if not match:
            raise ParseError(f"malformed triple: {line[:60]!r}", line=number)
        subject, predicate, node, text, is_int = match.groups()
        try:
            s, p = _node(subject), _node(predicate)
            if node is not None:
                o = _node(node)
            elif is_int:
                o = Literal(int(text), datatype=XSD.integer)
            else:
                o = Literal(_unescape(text))
        except ValueError as exc:
            raise ParseError(str(exc), line=number) from exc
        yield s, p, o


def _term_text(term):
    if isinstance(term, BNode):
        return f"_:{term}"
    if isinstance(term, Literal):
        if term.datatype == XSD.integer:
            return f'"{int(term)}"^^int'
        return f'"{_escape(str(term))}"'
    return f"<{term}>"


class KnowledgeBase:
    """Immutable view over a loaded triple set plus its lookup indices."""

    def __init__(self, graph):
        self.graph = graph
        self.class_index, self.rule_index, self.class_labels = build_indices(graph)

    @property
    def triples(self):
        return set(self.graph)

    @property
    def rules(self):
        return [rule for rules in self.rule_index.values() for rule in rules]

    def __len__(self):
        return len(self.graph)

    def class_label(self, class_name):
        """Readable (plural) label of a class, falling back to its name."""
        return self.class_labels.get(class_name, class_name)

    def class_for_label(self, phrase):
        wanted = phrase.strip().lower()
        for name, label in sorted(self.class_labels.items()):
            if label.lower() == wanted:
                return name
        return None


def build_indices(graph):
    """Derive the label and rule indices from a graph.

    Rebuilding from the same graph must give equal indices; tests rely on it.
    """
    owners = {}
    class_index = {}
    for row in graph.query(_LABELLED_TYPES):
        label = str(row.label).lower()
        owners.setdefault(label, set()).add(row.obj)
        class_index.setdefault(label, set()).add(local_name(row.type))
    duplicated = sorted(label for label, subjects in owners.items() if len(subjects) > 1)
    if duplicated:
        raise SchemaError(f"labels shared by several individuals: {', '.join(duplicated)}")

    for rule in set(graph.subjects(RDF.type, EX.ActionPriority)):
        missing = [name for name in RULE_PROPERTIES if graph.value(rule, EX[name]) is None]
        if missing:
            raise SchemaError(f"ActionPriority {local_name(rule)} lacks {', '.join(missing)}")

    rule_index = {}
    for row in graph.query(_RULES):
        try:
            rule = ActionPriorityRule(
                action=str(row.action).lower(),
                object_type=str(row.type),
                priority=int(row.priority),
                description=str(row.description),
                iri=str(row.rule),
            )
        except ValueError as exc:
            raise SchemaError(f"ActionPriority {local_name(row.rule)}: {exc}") from exc
        rule_index.setdefault((rule.action, rule.object_type), []).append(rule)

    class_labels = {
        local_name(cls): str(label)
        for cls in graph.subjects(RDF.type, OWL.Class)
        for label in graph.objects(cls, RDFS.label)
    }
    return (
        {label: tuple(sorted(classes)) for label, classes in class_index.items()},
        {key: tuple(sorted(rules, key=lambda r: r.iri)) for key, rules in rule_index.items()},
        class_labels,
    )


def load_kb(document):
    graph = Graph()
    graph.bind("ex", EX)
    for triple in parse_triples(document):
        graph.add(triple)
    kb = KnowledgeBase(graph)
    logger.debug("Loaded knowledge base: %d triples, %d rules", len(kb), len(kb.rules))
    return kb


def load_kb_file(path):
    try:
        with open(path, encoding='utf-8') as handle:
            return load_kb(handle.read())
    except OSError as exc:
        raise ParseError(f"cannot read knowledge base {path}: {exc.strerror}") from exc


def serialize_kb(kb):
    lines = sorted(f"{_term_text(s)} {_term_text(p)} {_term_text(o)} ." for s, p, o in kb.graph)
    return "\n".join(lines) + ("\n" if lines else "")


def query_object_type(kb, label):
    """Classes asserted for the individual labelled ``label`` (case-insensitive)."""
    return list(kb.class_index.get(label.strip().lower(), ()))


def classify_label(kb, label, hint=None):
    """Single class name for ``label``: the KB entry, else ``hint``, else Unknown."""
    classes = query_object_type(kb, label)
    if classes:
        return classes[0]
    return hint or UNKNOWN


def query_action_priority(kb, action, object_type):
    """Return ``(priority, description)`` for the matching rule, or None."""
    rules = kb.rule_index.get((action.lower(), object_type), ())
    if len(rules) > 1:
        raise AmbiguityError(
            f"{len(rules)} ActionPriority rules match ({action}, {object_type}): "
            + ", ".join(local_name(rule.iri) for rule in rules)
        )
    if not rules:
        return None
    return rules[0].priority, rules[0].description
