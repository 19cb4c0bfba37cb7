"""Lists the registered tools"""

from typing import Any

from colors import *
from .loaders import load_registry

def tools(config: dict[str, Any]) -> int:
    registry = load_registry(config)
    print(B(f"{'Tool':<28} {'Category':<11} {'Executor':<26} Parameters"))
    for name, tool in registry.items():
        params = ', '.join(param.name if param.required else f"[{param.name}]" for param in tool.params)
        print(f"{CY(f'{name:<28}')} {tool.category:<11} {tool.executor_id:<26} {params}")
    return 0
