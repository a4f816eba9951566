"""
Resonance CLI - resonances of periodically distorted Schroedinger operators
and the viscosity (complex absorbing potential) limit.

    python cli.py resonances --config well.conf --out out/
    python cli.py flow --set potential.family=sinc --format csv,json
    python cli.py validate
    python cli.py region --set band=3
"""

import argparse
import json
import logging
import sys

from commands import (
    build_config, cmd_flow, cmd_region, cmd_resonances, cmd_validate, job_to_dict
)
from resonance_py.errors import EXIT_NUMERICAL, EXIT_OK, ResonanceError

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger('resonance')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='resonance',
        description='Complex resonances via periodic distortion and their CAP limit.',
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH', help='flat key = value config file')
    common.add_argument('--set', metavar='KEY=VALUE', action='append', default=[],
                        dest='assignments', help='override one config key (repeatable)')
    common.add_argument('--out', metavar='DIR', help='output directory')
    common.add_argument('--format', metavar='FORMATS', dest='formats',
                        help='comma list out of csv,json,svg')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')

    sub = parser.add_subparsers(dest='command', required=True)
    res = sub.add_parser('resonances', parents=[common], help='discrete eigenvalues in Omega_n')
    res.add_argument('--dump-matrix', action='store_true',
                     help='also write the assembled matrix as matrix.npy')
    sub.add_parser('flow', parents=[common], help='track CAP eigenvalues as eps -> 0')
    val = sub.add_parser('validate', parents=[common], help='run the acceptance checks')
    val.add_argument('--only', action='append', metavar='CHECK',
                     help='run only this check (repeatable)')
    sub.add_parser('region', parents=[common], help='write the region curves')
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        config = build_config(args.config, args.assignments, args.out, args.formats)
        if args.command == 'resonances':
            job = cmd_resonances(config, dump_matrix=args.dump_matrix)
        elif args.command == 'flow':
            job = cmd_flow(config)
        elif args.command == 'validate':
            job = cmd_validate(config, only=args.only)
        else:
            job = cmd_region(config)
    except ResonanceError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code
    except MemoryError as e:
        logger.error(f"{args.command}: out of memory ({e}); reduce grid.N")
        return EXIT_NUMERICAL

    print(json.dumps(job_to_dict(job), sort_keys=True, indent=2))
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
