import json
import os

from ..errors import ConfigError, ParseError


def read_json(path, what='file'):
    """Load a JSON document, turning I/O and syntax problems into ParseError."""
    try:
        with open(path, encoding='utf-8') as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {what} {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} {path} is not valid JSON: {exc.msg}", line=exc.lineno) from exc


def scene_path(scene, scenes_dir):
    """Accept either a scene name (``scene_a``) or a path to a scene file."""
    if scene.endswith('.json') or os.sep in scene:
        return scene
    return os.path.join(scenes_dir, f"{scene}.json")


def list_scenes(scenes_dir):
    try:
        names = os.listdir(scenes_dir)
    except OSError:
        return []
    return sorted(name[:-len('.json')] for name in names if name.endswith('.json'))


def parse_id_list(text):
    """Parse ``"1,2,5-7"`` into ``[1, 2, 5, 6, 7]``."""
    ids = []
    for part in (p.strip() for p in text.split(',')):
        if not part:
            continue
        try:
            if '-' in part:
                low, high = (int(v) for v in part.split('-', 1))
                ids.extend(range(low, high + 1))
            else:
                ids.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"bad task id {part!r}") from exc
    return ids
