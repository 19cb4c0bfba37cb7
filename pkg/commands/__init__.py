import os
import sys
from typing import Any

import yaml

from colors import *
from models.errors import GeorchError
from . import build
from . import config as cfg
from . import evaluate
from . import run
from . import stats
from . import tools
from . import validate

def do(command: str, config: dict, args: Any) -> int:
    """Execute the given command

    :param command: Name of the command
    :param config: program configuration, command line flags applied
    :param args: arguments the script was invoked with
    :return: Exit code: 0 success, 1 rejected records, 2 usage or config error
    """
    try:
        match command:
            case 'validate':
                return validate.validate(config, args)
            case 'evaluate':
                return evaluate.evaluate(config, args)
            case 'run':
                return run.run(config, args)
            case 'stats':
                return stats.stats(config, args.by)
            case 'tools':
                return tools.tools(config)
            case 'build':
                return build.build(config)
            case 'config':
                return cfg.config(os.environ.get('EDITOR', 'vi'), config, args.show)
    except GeorchError as err:
        print(RD(f"{err.code}: {err}"), file=sys.stderr)
    except (OSError, ValueError, yaml.YAMLError) as err:
        print(RD(f"{type(err).__name__}: {err}"), file=sys.stderr)
    return 2
