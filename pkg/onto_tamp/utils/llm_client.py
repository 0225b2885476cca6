import logging
import os

import requests

from ..errors import AuthError, BackendTimeoutError, TransportError

logger = logging.getLogger(__name__)


def extract_text(data, path):
    """Follow a dotted path such as ``choices.0.message.content`` into a JSON reply."""
    node = data
    for part in path.split('.'):
        try:
            node = node[int(part)] if part.isdigit() else node[part]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(f"response has no field '{path}' (stopped at '{part}')") from exc
    if not isinstance(node, str):
        raise TransportError(f"response field '{path}' is not text")
    return node


def read_credential(env_name):
    api_key = os.environ.get(env_name)
    if not api_key:
        raise AuthError(f"credential variable {env_name} is not set")
    return api_key


def request_chat_completion(endpoint, model, prompt, api_key, temperature=0.0, timeout=30.0,
                            text_path='choices.0.message.content'):
    """
    Send a single-turn chat completion request and return the reply text.
    """
    headers = {"Authorization": f"Bearer {api_key}", "Content-Type": "application/json"}
    payload = {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
    }

    logger.debug("POST %s (model %s, %d prompt chars)", endpoint, model, len(prompt))
    try:
        response = requests.post(endpoint, headers=headers, json=payload, timeout=timeout)
    except requests.exceptions.Timeout as exc:
        raise BackendTimeoutError(f"no answer from {endpoint} within {timeout}s") from exc
    except requests.exceptions.RequestException as exc:
        raise TransportError(f"request to {endpoint} failed: {exc}") from exc

    if response.status_code in (401, 403):
        raise AuthError(f"{endpoint} rejected the credential (HTTP {response.status_code})")
    if response.status_code >= 400:
        raise TransportError(f"{endpoint} answered HTTP {response.status_code}")

    try:
        data = response.json()
    except ValueError as exc:
        raise TransportError(f"{endpoint} did not return JSON") from exc
    return extract_text(data, text_path)
