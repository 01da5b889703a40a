""" Command line entry point of the D2D energy experiments """


# global imports
import sys
import logging
import argparse
from typing import Any, Dict, List, Optional

# local imports
from src.CLI.app import ExperimentApplication
from src.backend.alloc import EXACT_MAX_NODES, exact_allocate, greedy_allocate
from src.backend.instance_io import load_instance
from src.backend.model import BeamformingState
from src.backend.oracle import brute_force_allocate
from src.backend.settings import Settings
from src.errors.errors import InvalidFileFormat, InvalidInstanceError, ReadFileError, ValidationError


logger = logging.getLogger("d2d_energy")


def build_parser() -> argparse.ArgumentParser:
    """
    Parser of the run, validate and oracle commands.

    :return: Argument parser.
    """
    parser = argparse.ArgumentParser(description="Energy minimization experiments for D2D edge networks.")
    parser.add_argument("--verbose", "-v", action="store_true", help="log solver details")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario and write its CSV files")
    run.add_argument("--config", default="settings.json", help="settings file (default: settings.json)")
    run.add_argument("--scenario", help="links_sweep, iterations, subchannels_sweep, nodes_sweep or single")
    run.add_argument("--nodes", type=int, help="number of nodes K")
    run.add_argument("--antennas", type=int, help="antennas per node N")
    run.add_argument("--subchannels", type=int, help="number of subchannels S")
    run.add_argument("--power", type=float, help="power budget P in watts")
    run.add_argument("--seeds", type=int, nargs="+", help="instance seeds")
    run.add_argument("--seed-count", type=int, help="use seeds 0..n-1")
    run.add_argument("--methods", nargs="+", help="subset of exact, greedy, random, local")
    run.add_argument("--out", help="CSV output path")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("--report", choices=("best", "mean"), help="report the best restart or the mean over restarts")
    run.add_argument("--strict-properness", action="store_true", default=None,
                     help="reject configurations violating 2N >= floor(K/2) + 1")

    validate = commands.add_parser("validate", help="validate a settings file")
    validate.add_argument("--config", default="settings.json", help="settings file (default: settings.json)")

    oracle = commands.add_parser("oracle", help="compare allocators with brute force on a dumped instance")
    oracle.add_argument("--instance", required=True, help="instance .json file")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """
    Settings overrides given on the command line.

    :param args: Parsed arguments of the run command.
    :return: Mapping of settings keys to values, None where not given.
    """
    seeds = args.seeds
    if args.seed_count is not None:
        seeds = list(range(args.seed_count))
    return {"scenario": args.scenario, "num_nodes": args.nodes, "antennas": args.antennas,
            "subchannels": args.subchannels, "power_budget": args.power, "seeds": seeds, "methods": args.methods,
            "output_path": args.out, "workers": args.workers, "report": args.report,
            "strict_properness": args.strict_properness}


def run_oracle(path: str) -> int:
    """
    Compare the exact and greedy allocators with brute force under default signals.

    :param path: Instance file path.
    :return: Exit status, 1 when exact and brute force disagree.
    """
    net, ch = load_instance(path)
    bf = BeamformingState()

    reference, reference_energy = brute_force_allocate(net, bf, ch)
    print(f"brute force: {list(reference.links)} E_P={reference_energy.total:.9g} J")
    greedy = greedy_allocate(net, bf, ch)
    print(f"greedy:      {list(greedy.allocation.links)} E_P={greedy.energy.total:.9g} J")

    if net.num_nodes > EXACT_MAX_NODES:
        print(f"exact:       skipped, instance has more than {EXACT_MAX_NODES} nodes")
        return 0
    exact = exact_allocate(net, bf, ch)
    print(f"exact:       {list(exact.allocation.links)} E_P={exact.energy.total:.9g} J")
    if exact.allocation.links != reference.links or exact.energy.total != reference_energy.total:
        logger.error("Exact allocation disagrees with brute force.")
        return 1
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run a command line command.

    :param argv: Arguments without program name, sys.argv by default.
    :return: Exit status.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            ExperimentApplication(args.config, overrides_from_args(args)).start()
        elif args.command == "validate":
            Settings.from_json(args.config)
            print(f"Settings file '{args.config}' is valid.")
        else:
            return run_oracle(args.instance)
    except (ValidationError, ReadFileError, InvalidFileFormat, InvalidInstanceError, FileNotFoundError) as error:
        logger.error("%s", error)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
