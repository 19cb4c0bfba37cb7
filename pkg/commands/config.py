"""Opens configuration file"""

import subprocess
import sys

from models.errors import ConfigError

HIDDEN = ('yaml_dump',)

def config(editor: str, config: dict, show: bool = False) -> int:
    if show:
        config['yaml_dump']({key: val for key, val in config.items() if key not in HIDDEN}, sys.stdout)
        return 0
    if not config.get('config_file'):
        raise ConfigError('No user config file to open')
    subprocess.run([editor, config['config_file']])
    return 0
