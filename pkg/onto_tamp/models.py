"""Data types shared across the pipeline.

Everything here is a plain value: frozen dataclasses with their structural
invariants checked on construction. Behaviour lives in the stage modules.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

from .errors import ConfigError, InvariantError

Box = tuple  # (xmin, ymin, xmax, ymax)


class Pos(str, Enum):
    VERB = 'VERB'
    NOUN = 'NOUN'
    ADJ = 'ADJ'
    DET = 'DET'
    PREP = 'PREP'
    CONJ = 'CONJ'
    PUNCT = 'PUNCT'
    OTHER = 'OTHER'


# --- Knowledge base ---

@dataclass(frozen=True)
class ActionPriorityRule:
    action: str
    object_type: str
    priority: int
    description: str
    iri: str = ''

    def __post_init__(self):
        if self.priority < 1:
            raise ValueError(f"priority must be >= 1, got {self.priority}")
        if not self.description.strip():
            raise ValueError("rule description must not be empty")


# --- Semantic tagging ---

@dataclass(frozen=True)
class Token:
    text: str
    index: int
    pos: Optional[Pos] = None


@dataclass(frozen=True)
class Clause:
    task: str
    objects: tuple = ()
    destination: Optional[str] = None

    def to_dict(self):
        return {"task": self.task, "objects": list(self.objects), "destination": self.destination}

    @classmethod
    def from_dict(cls, data):
        return cls(task=data["task"], objects=tuple(data.get("objects", ())),
                   destination=data.get("destination"))


@dataclass(frozen=True)
class TaggedCommand:
    clauses: tuple = ()

    @property
    def objects(self):
        return tuple(name for clause in self.clauses for name in clause.objects)

    def to_dict(self):
        return {"clauses": [clause.to_dict() for clause in self.clauses]}

    @classmethod
    def from_dict(cls, data):
        return cls(clauses=tuple(Clause.from_dict(item) for item in data["clauses"]))


# --- World ---

@dataclass(frozen=True)
class Surface:
    name: str
    region: Box
    z: float = 0.0

    def contains(self, x, y):
        xmin, ymin, xmax, ymax = self.region
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class SceneObject:
    name: str
    position: tuple
    yaw: float
    footprint: Box
    length: float
    width: float
    height: float = 0.05
    support: Optional[str] = None
    type_hint: Optional[str] = None

    def __post_init__(self):
        xmin, ymin, xmax, ymax = self.footprint
        if not (xmax > xmin and ymax > ymin):
            raise InvariantError(f"{self.name}: degenerate footprint {self.footprint}")
        if abs(self.length - (xmax - xmin)) > 1e-9 or abs(self.width - (ymax - ymin)) > 1e-9:
            raise InvariantError(f"{self.name}: length/width disagree with footprint")
        if self.support == self.name:
            raise InvariantError(f"{self.name} cannot support itself")

    @property
    def area(self):
        return self.length * self.width

    @property
    def top(self):
        return self.position[2] + self.height / 2.0

    def contains(self, x, y):
        xmin, ymin, xmax, ymax = self.footprint
        return xmin <= x <= xmax and ymin <= y <= ymax


@dataclass(frozen=True)
class WorldState:
    objects: dict
    surfaces: dict
    held: Optional[str] = None
    gripper: tuple = (0.0, 0.0)

    def get(self, name):
        return self.objects.get(name)

    def supported_by(self, name):
        """Names of the objects resting directly on ``name``."""
        return sorted(o.name for o in self.objects.values() if o.support == name)


@dataclass(frozen=True)
class Predicate:
    kind: str  # on | at_surface | stacked_order
    subject: Optional[str] = None
    targets: tuple = ()

    def __str__(self):
        if self.kind == 'stacked_order':
            return f"stacked_order([{', '.join(self.targets)}])"
        return f"{self.kind}({self.subject}, {'|'.join(self.targets)})"


@dataclass(frozen=True)
class GoalSpec:
    predicates: tuple = ()

    @property
    def names(self):
        found = []
        for predicate in self.predicates:
            if predicate.subject:
                found.append(predicate.subject)
            found.extend(predicate.targets)
        return found


# --- Plans ---

PICK = 'Pick'
PLACE = 'Place'


@dataclass(frozen=True)
class PrimitiveAction:
    verb: str
    object: str
    params: tuple = ()

    def __post_init__(self):
        if self.verb == PICK and self.params:
            raise ValueError("Pick takes no parameters")
        if self.verb == PLACE:
            if len(self.params) != 4 or not all(math.isfinite(v) for v in self.params):
                raise ValueError("Place needs four finite parameters x, y, z, theta")
        if self.verb not in (PICK, PLACE):
            raise ValueError(f"unknown verb {self.verb!r}")

    def __str__(self):
        return f"{self.verb} {self.object}"


@dataclass(frozen=True)
class SymbolicPlan:
    actions: tuple = ()

    def __len__(self):
        return len(self.actions)


BACKEND_KINDS = ('mock-guided', 'mock-naive', 'http')


@dataclass(frozen=True)
class BackendConfig:
    kind: str = 'mock-guided'
    endpoint: Optional[str] = None
    model: Optional[str] = None
    timeout: float = 30.0
    credential_env: str = 'LLM_API_KEY'
    temperature: float = 0.0
    text_path: str = 'choices.0.message.content'

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == 'http' and not (self.endpoint and self.model):
            raise ConfigError("http backend requires an endpoint and a model")

    @property
    def label(self):
        return self.model if self.kind == 'http' else self.kind


# --- Motion ---

@dataclass(frozen=True)
class MotionQuery:
    start: tuple
    goal: tuple
    half_extents: tuple
    obstacles: tuple
    bounds: Box
    seed: int = 0
    step: float = 0.05
    max_iterations: int = 5000
    goal_tolerance: float = 0.01
    inflation: float = 0.005

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmin <= self.start[0] <= xmax and ymin <= self.start[1] <= ymax):
            raise ValueError(f"start {self.start} lies outside bounds {self.bounds}")


@dataclass(frozen=True)
class Trajectory:
    waypoints: tuple
    length: float

    @classmethod
    def from_waypoints(cls, waypoints):
        points = tuple((float(x), float(y)) for x, y in waypoints)
        length = sum(math.dist(a, b) for a, b in zip(points, points[1:]))
        return cls(waypoints=points, length=length)


GOAL_IN_COLLISION = 'GoalInCollision'
START_IN_COLLISION = 'StartInCollision'
ITERATION_LIMIT = 'IterationLimit'


@dataclass(frozen=True)
class MotionResult:
    trajectory: Optional[Trajectory] = None
    reason: Optional[str] = None
    elapsed: float = 0.0
    iterations: int = 0

    @property
    def ok(self):
        return self.trajectory is not None


# --- Execution ---

SUCCESS = 'Success'
PLANNING_FAILURE = 'PlanningFailure'
EXECUTION_FAILURE = 'ExecutionFailure'


@dataclass
class ExecutionStep:
    action: str
    motion_ok: bool
    motion_reason: Optional[str]
    motion_length: float
    state_hash: str
    motion_time: float = 0.0


@dataclass
class ExecutionTrace:
    steps: list = field(default_factory=list)
    llm_calls: int = 0
    outcome: str = PLANNING_FAILURE
    motion_time_total: float = 0.0
    motion_calls: int = 0
    failure_messages: list = field(default_factory=list)
    plans: list = field(default_factory=list)
    final_supports: dict = field(default_factory=dict)

    def to_json(self, timings=True):
        """JSON form; ``timings=False`` leaves out the wall-clock fields."""
        data = asdict(self)
        if not timings:
            data.pop("motion_time_total")
            for step in data["steps"]:
                step.pop("motion_time")
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        data["steps"] = [ExecutionStep(**step) for step in data.get("steps", [])]
        return cls(**data)


# --- Evaluation ---

@dataclass(frozen=True)
class TaskSpec:
    id: int
    prompt: str
    scene: str
    goal: GoalSpec
    gold_parse: TaggedCommand
    gold_order: tuple = ()
    order_sensitive: bool = False
