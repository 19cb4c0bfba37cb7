"""Web search. Offline by default: answers come from the canned fixtures"""

import logging
import os
from typing import Any

import requests

from models.errors import SearchUnavailable
from .context import ToolContext

logger = logging.getLogger(__name__)


def live_search(query: str, k: int, settings: dict[str, Any]) -> list[str]:
    """Queries the configured search endpoint, which answers
    ``{"results": [{"snippet": ...}, ...]}``

    :raises SearchUnavailable: No endpoint, transport error or unexpected reply
    """
    endpoint = settings.get('endpoint')
    if not endpoint:
        raise SearchUnavailable('Live search is on but no endpoint is configured')
    headers = {}
    key_env = settings.get('api_key_env')
    if key_env and os.environ.get(key_env):
        headers['Authorization'] = f"Bearer {os.environ[key_env]}"
    try:
        response = requests.get(endpoint, params={'q': query, 'num': k}, headers=headers,
                                timeout=settings.get('timeout_s', 30))
        response.raise_for_status()
        items = response.json().get('results', [])
    except (requests.RequestException, ValueError, AttributeError) as err:
        logger.warning("Search endpoint failed: %s", err)
        raise SearchUnavailable(f'Search endpoint failed: {err}') from err
    return [item.get('snippet', '') if isinstance(item, dict) else str(item) for item in items][:k]


def google_search(context: ToolContext, args: dict) -> dict:
    k = args.get('k') or 3
    if k < 1:
        k = 1
    if context.search.get('live'):
        return {'results': live_search(args['query'], k, context.search), 'offline': False}
    return {'results': context.fixtures.search(args['query'])[:k], 'offline': True}
