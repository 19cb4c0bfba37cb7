import argparse
from typing import Any

import commands
from colors import *
from models import VERSION
from models.trajectory import DOMAINS, MODALITIES

parser = argparse.ArgumentParser(
    formatter_class=argparse.RawDescriptionHelpFormatter,
    description="Runs, replays and evaluates tool-using geospatial agents",
    epilog=f"Exit codes: {GR('0')} success, {YL('1')} rejected records, {RD('2')} usage or config error",
    prog="georch"
)
parser.add_argument('-v', '--version', action='version', version=f'georch {VERSION}')

# Flags every command understands, given after the command name
common = argparse.ArgumentParser(add_help=False)
common.add_argument('--registry', help="Tool registry file")
common.add_argument('--category-map', help="Tool -> category overrides")
common.add_argument('--fixtures', help="Fixture directory")
common.add_argument('--corpus', help="Corpus file (JSONL)")
common.add_argument('--out', help="Output directory")

policy = argparse.ArgumentParser(add_help=False)
policy.add_argument('--policy', choices=['scripted', 'rule', 'remote'], default='scripted',
                    help="Policy answering the tasks (default: scripted)")
policy.add_argument('--endpoint', help="Base URL of the chat completions endpoint")
policy.add_argument('--model', help="Model name sent to the endpoint")
policy.add_argument('--max-steps', type=int, help="Step budget of a session")

subparsers = parser.add_subparsers(dest="command", title="Commands", help="commands")

validate_parser = subparsers.add_parser('validate', parents=[common], help="Replays the corpus and rejects the records that fail")
validate_parser.add_argument('--workers', type=int, help="Records replayed in parallel")

evaluate_parser = subparsers.add_parser('evaluate', parents=[common, policy], help="Scores a policy against the corpus")
evaluate_parser.add_argument('mode', help="step (teacher forced) or e2e (end to end)")
evaluate_parser.add_argument('--workers', type=int, help="Tasks evaluated in parallel")
evaluate_parser.add_argument('--judge', choices=['none', 'remote', 'overlap'], help="Grader of text answers")

run_parser = subparsers.add_parser('run', parents=[common, policy], help="Runs one live session")
run_parser.add_argument('--task', help="Corpus record whose query and inputs are used")
run_parser.add_argument('--query', help="Task instruction")
run_parser.add_argument('--input', action='append', default=[], metavar='KIND:PATH',
                        help="Task input, e.g. image:images/a.png or geo_bundle:bundles/b. Repeatable")
run_parser.add_argument('--gsd', type=float, help="Ground sample distance of the image inputs, m/px")
run_parser.add_argument('--answer-kind', default='text', choices=['numeric', 'bbox', 'text', 'generation'])
run_parser.add_argument('--id', help="Id of an ad hoc task (default: adhoc)")
run_parser.add_argument('--domain', default='urban', choices=DOMAINS, help="Domain of an ad hoc task")
run_parser.add_argument('--modality', choices=MODALITIES, help="Modality of an ad hoc task (default: rgb with an image input, gis otherwise)")

stats_parser = subparsers.add_parser('stats', parents=[common], help="Corpus statistics")
stats_parser.add_argument('--by', choices=['domain', 'modality', 'tool'], help="Prints one histogram")

tools_parser = subparsers.add_parser('tools', parents=[common], help="Lists the registered tools")

build_parser = subparsers.add_parser('build', parents=[common], help="Builds the corpus from its skeleton by running every call")
build_parser.add_argument('--skeleton', help="Corpus skeleton (YAML)")

config_parser = subparsers.add_parser('config', help="Opens the config file")
config_parser.add_argument('--show', action='store_true', help="Prints the effective config instead")


def apply_flags(config: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    """Command line flags override the config files"""
    flag = lambda name: getattr(args, name, None)
    for key, name in (('registry', 'registry'), ('category_map', 'category_map'),
                      ('fixtures', 'fixtures'), ('corpus', 'corpus'), ('output_dir', 'out'),
                      ('skeleton', 'skeleton')):
        if flag(name) is not None:
            config[key] = flag(name)
    for section, key, name in (('remote', 'base_url', 'endpoint'), ('remote', 'model', 'model'),
                               ('session', 'max_steps', 'max_steps'),
                               ('evaluation', 'workers', 'workers'), ('judge', 'kind', 'judge')):
        if flag(name) is not None:
            config[section] = {**(config.get(section) or {}), key: flag(name)}
    return config


def parse_args(config: dict, argv: list[str] | None = None) -> int:
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    return commands.do(args.command, apply_flags(config, args), args)
