"""Model-facing text: the system prompt, the wire form of actions and the chat
messages built from a working memory"""

from pathlib import Path
from string import Template

from models.registry import ToolRegistry
from models.trajectory import Action, Observation, WorkingMemory
from models.utils import truncate_utf8

ACTION_FENCE = '```action'
DEFAULT_ECHO_BYTES = 8192


def load_template(path: str | Path) -> Template:
    with open(path, 'r', encoding='utf-8') as file:
        return Template(file.read())


def render_tools(registry: ToolRegistry) -> str:
    return '\n'.join(tool.render() for tool in registry.values())


def system_prompt(template: Template, registry: ToolRegistry) -> str:
    return template.substitute(tools=render_tools(registry), fence=ACTION_FENCE)


def render_action(action: Action) -> str:
    """Wire text of an action: the thought, then one fenced action object"""
    parts = []
    if action.thought:
        parts.append(f'Thought: {action.thought}')
    if action.call is not None:
        parts.append(f'{ACTION_FENCE}\n{action.call.wire()}\n```')
    return '\n'.join(parts)


def render_observation(observation: Observation | None, limit: int = DEFAULT_ECHO_BYTES) -> str:
    if observation is None:
        return 'Observation: none, continue with a tool call.'
    return f'Observation: {truncate_utf8(observation.wire(), limit)}'


def render_task(memory: WorkingMemory) -> str:
    lines = [f'Task: {memory.instruction}']
    if memory.inputs:
        lines.append('Inputs:')
        for ref in memory.inputs:
            extra = f' (GSD {ref.gsd_m_per_px} m/px)' if ref.gsd_m_per_px is not None else ''
            lines.append(f'- {ref.kind}: {ref.path}{extra}')
    if memory.metadata:
        lines.append('Metadata: ' + ', '.join(f'{key}={val}' for key, val in sorted(memory.metadata.items())))
    return '\n'.join(lines)


def build_messages(memory: WorkingMemory, registry: ToolRegistry, template: Template,
                   echo_bytes: int = DEFAULT_ECHO_BYTES) -> list[dict[str, str]]:
    """Chat messages for the next turn. Observations are cut at ``echo_bytes``
    bytes of UTF-8; the stored transcript keeps them whole"""
    messages = [
        {'role': 'system', 'content': system_prompt(template, registry)},
        {'role': 'user', 'content': render_task(memory)},
    ]
    for _, action, observation in memory.entries():
        messages.append({'role': 'assistant', 'content': render_action(action)})
        messages.append({'role': 'user', 'content': render_observation(observation, echo_bytes)})
    return messages
