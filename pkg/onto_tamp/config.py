import os


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value else default


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


class Config:
    """Base configuration class for the application and the CLI."""

    basedir = os.path.abspath(os.path.dirname(__file__))
    data_dir = os.path.join(basedir, 'data')

    # Knowledge base, prompt template and benchmark corpus
    KB_PATH = os.environ.get('ONTO_TAMP_KB_PATH') or os.path.join(data_dir, 'kitchen.nt')
    TEMPLATE_PATH = os.environ.get('ONTO_TAMP_TEMPLATE_PATH') or os.path.join(data_dir, 'prompt_template.txt')
    SCENES_DIR = os.environ.get('ONTO_TAMP_SCENES_DIR') or os.path.join(data_dir, 'scenes')
    TASKS_PATH = os.environ.get('ONTO_TAMP_TASKS_PATH') or os.path.join(data_dir, 'tasks.json')
    NOISE_PATH = os.environ.get('ONTO_TAMP_NOISE_PATH') or os.path.join(data_dir, 'noise_prompts.json')

    # LLM backend. Only the *name* of the variable holding the key is configured.
    LLM_BACKEND = os.environ.get('LLM_BACKEND', 'mock')
    LLM_ENDPOINT = os.environ.get('LLM_ENDPOINT')
    LLM_MODEL = os.environ.get('LLM_MODEL')
    LLM_TIMEOUT = _env_float('LLM_TIMEOUT', 30.0)
    LLM_CRED_ENV = os.environ.get('LLM_CRED_ENV', 'LLM_API_KEY')
    LLM_TEXT_PATH = os.environ.get('LLM_TEXT_PATH', 'choices.0.message.content')
    LLM_TEMPERATURE = _env_float('LLM_TEMPERATURE', 0.0)

    # Evaluation
    SEED = _env_int('ONTO_TAMP_SEED', 0)
    TRIALS = _env_int('ONTO_TAMP_TRIALS', 10)
    MAX_CALLS = _env_int('ONTO_TAMP_MAX_CALLS', 10)

    # RRT-Connect
    MOTION_STEP = _env_float('MOTION_STEP', 0.05)
    MOTION_MAX_ITERATIONS = _env_int('MOTION_MAX_ITERATIONS', 5000)
    MOTION_GOAL_TOLERANCE = _env_float('MOTION_GOAL_TOLERANCE', 0.01)
    MOTION_INFLATION = _env_float('MOTION_INFLATION', 0.005)


def motion_options(config=Config):
    """RRT-Connect keyword arguments from a Config class or a Flask config mapping."""
    get = config.get if isinstance(config, dict) else lambda key: getattr(config, key)
    return {
        'step': get('MOTION_STEP'),
        'max_iterations': get('MOTION_MAX_ITERATIONS'),
        'goal_tolerance': get('MOTION_GOAL_TOLERANCE'),
        'inflation': get('MOTION_INFLATION'),
    }
