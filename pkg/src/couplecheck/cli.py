# ruff: noqa: PLC0415

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction

import jsonschema

from . import _version, errors, report, scenarios
from .analysis import analyze_system
from .config import DEFAULT_FORMAT, load_config, load_targets, resolve_config, write_config
from .coupling import (
    couple_with_equality_targets,
    identity_connected_coupling,
    independent_coupling,
    maximally_connected_coupling,
    verify_coupling,
)
from .system import System, product_independence_test, validate_system
from .systemfile import print_system_file, read_system_file, write_system_file

log = logging.getLogger(__name__)

EXIT_OK = 0
"""Valid input; noncontextual system; coupling found."""
EXIT_INVALID = 1
"""The input or the runtime configuration could not be parsed or is invalid."""
EXIT_STRUCTURE = 2
"""The input does not have the structure (or satisfy the preconditions) the command needs."""
EXIT_CONTEXTUAL = 3
"""Contextual system; no coupling with the requested properties exists."""

COUPLING_KINDS = ("independent", "identity", "maximal", "targets")


def couplecheck_cli(argv: list[str] | None = None) -> int:
    args = _parse_cli_args(argv)

    logging.basicConfig()
    if args.verbose:
        logging.getLogger("couplecheck").setLevel(logging.DEBUG)
    if args.debug:
        logging.root.setLevel(logging.DEBUG)

    try:
        config = load_runtime_config(args)
    except jsonschema.ValidationError as exc:
        _error(f"invalid configuration: {exc.message}")
        return EXIT_INVALID
    except (errors.ParseError, errors.BadParameter, errors.UnknownScenario) as exc:
        _error(f"invalid configuration: {exc.__class__.__name__}: {exc}")
        return EXIT_INVALID

    if args.write_config:
        log.info("writing resolved config to %s", args.write_config)
        write_config(config, args.write_config)

    if args.command is None:
        return EXIT_OK

    commands = {
        "validate": cmd_validate,
        "analyze": cmd_analyze,
        "couple": cmd_couple,
        "demo": cmd_demo,
        "sweep": cmd_sweep,
    }
    return commands[args.command](args, config)


def load_runtime_config(args: argparse.Namespace) -> dict:
    """Resolve the runtime config selected on the command line.

    Command line arguments take precedence over the config file, which takes precedence over the
    defaults.
    """
    return resolve_config(
        load_config(args.config),
        format=getattr(args, "format", None),
        n_systems=getattr(args, "n_systems", None),
        seed=getattr(args, "seed", None),
        grid=getattr(args, "grid", None),
        selective_fraction=getattr(args, "selective_fraction", None),
    )


def _error(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_system(path: str) -> System | None:
    """Read and validate a SystemFile, printing every problem found. ``None`` if it is invalid."""
    try:
        parsed = read_system_file(path)
    except OSError as exc:
        _error(f"{path}: {exc}")
        return None
    except errors.ParseError as exc:
        _error(f"{path}: ParseError: {exc}")
        return None

    try:
        return validate_system(parsed.system)
    except errors.InvalidSystemError as exc:
        for violation in exc.violations:
            location = parsed.source_map.locate(violation)
            where = "" if location is None else f" [{location[0]}] line {location[1]}:"
            _error(f"{path}:{where} {violation.kind}: {violation}")
        return None


def cmd_validate(args: argparse.Namespace, _config: dict) -> int:
    code = EXIT_OK
    for path in args.files:
        if _load_system(path) is None:
            code = EXIT_INVALID
        else:
            print(f"{path}: valid")
    return code


def _analyze_one(system: System, source: str | None, fmt: str) -> tuple[int, report.AnalysisReport | None]:
    try:
        result = analyze_system(system)
    except (errors.StructuralMismatch, errors.NonBinarySupport, errors.ConnectionArityUnsupported) as exc:
        _error(f"{source or 'system'}: {exc.__class__.__name__}: {exc}")
        return EXIT_STRUCTURE, None

    if fmt == "machine":
        print(report.format_machine(result, source))
    else:
        print(report.format_text(result, source))
    return (EXIT_OK if result.noncontextual else EXIT_CONTEXTUAL), result


def cmd_analyze(args: argparse.Namespace, config: dict) -> int:
    codes, results = [], {}
    for path in args.files:
        system = _load_system(path)
        if system is None:
            codes.append(EXIT_INVALID)
            continue
        code, result = _analyze_one(system, path if len(args.files) > 1 else None, config["format"])
        codes.append(code)
        if result is not None:
            results[path] = result

    if args.write_report:
        report.write_report(results, args.write_report)
    return max(codes)


def cmd_couple(args: argparse.Namespace, _config: dict) -> int:
    system = _load_system(args.file)
    if system is None:
        return EXIT_INVALID

    try:
        if args.kind == "independent":
            coupling = independent_coupling(system)
        elif args.kind == "identity":
            coupling = identity_connected_coupling(system)
        elif args.kind == "maximal":
            coupling = maximally_connected_coupling(system)
        else:
            if args.targets is None:
                _error("--kind targets needs a targets file (--targets)")
                return EXIT_INVALID
            coupling = couple_with_equality_targets(system, load_targets(args.targets))
    except jsonschema.ValidationError as exc:
        _error(f"{args.targets}: invalid targets file: {exc.message}")
        return EXIT_INVALID
    except (
        errors.DistributionsDiffer,
        errors.ConnectionArityUnsupported,
        errors.UnknownConnection,
        errors.BadParameter,
    ) as exc:
        _error(f"{exc.__class__.__name__}: {exc}")
        return EXIT_STRUCTURE

    if coupling is None:
        print("INFEASIBLE")
        return EXIT_CONTEXTUAL

    check = verify_coupling(coupling)
    if not check.ok:
        msg = f"constructed coupling does not reproduce the bunches: {check.violations}"
        raise RuntimeError(msg)

    log.info("observable order: %s", " ".join(str(obs) for obs in coupling.observables))
    print("\n".join(report.coupling_lines(coupling)))
    return EXIT_OK


def cmd_demo(args: argparse.Namespace, config: dict) -> int:
    try:
        scenario = scenarios.parse_scenario_id(args.scenario)
        system = scenarios.build(scenario, config["scenario_parameters"].get(scenario.value))
    except (errors.UnknownScenario, errors.BadParameter) as exc:
        _error(f"{exc.__class__.__name__}: {exc}")
        return EXIT_STRUCTURE

    print(f"# {scenario.value}: {scenarios.DESCRIPTIONS[scenario]}")
    if args.output:
        write_system_file(system, args.output)
    else:
        print(print_system_file(system))

    if len(system.contexts) == 1:
        for (first, second), independent in product_independence_test(system.bunches[system.contexts[0].id]).items():
            print(f"{first} and {second}: {'independent' if independent else 'not independent'}")
        return EXIT_OK

    if all(len(c.observables) < 2 for c in system.connections()):
        print("no shared contents across contexts: no contextual analysis possible")
        return EXIT_OK

    return _analyze_one(system, None, config["format"])[0]


def cmd_sweep(_args: argparse.Namespace, config: dict) -> int:
    from .random_systems import sweep

    settings = config["sweep"]
    result = sweep(
        n_systems=settings["n_systems"],
        seed=settings["seed"],
        grid=settings["grid"],
        selective_fraction=Fraction(settings["selective_fraction"]),
    )
    print(f"n_systems={result.n_systems}")
    print(f"n_selective={result.n_selective}")
    print(f"n_contextual={result.n_contextual}")
    print(f"n_boundary={result.n_boundary}")
    print(f"n_disagreements={len(result.disagreements)}")
    for system in result.disagreements:
        _error(print_system_file(system))
    return EXIT_OK if not result.disagreements else EXIT_INVALID


def _parse_cli_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="couplecheck",
        description="%(prog)s command line interface",
    )

    # global options
    parser.add_argument(
        "--version",
        action="version",
        help="""Print %(prog)s version and exit""",
        version=_version.__version__,
    )
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="""Increase the program verbosity""",
    )
    parser.add_argument(
        "--debug",
        "-d",
        action="store_true",
        help="""Increase the program verbosity to maximum""",
    )
    parser.add_argument(
        "--config",
        action="store",
        help="""Select a config file (YAML or JSON) to read the runtime configuration from""",
    )
    parser.add_argument(
        "--write-config",
        action="store",
        help="""Filename to write the resolved config to, i.e. the config with every scenario
        parameter and sweep setting filled in. The result can be edited by hand and fed back in
        via --config.""",
    )

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    validate = subparsers.add_parser("validate", help="""Check SystemFiles for every violated invariant""")
    validate.add_argument("files", nargs="+", help="""SystemFiles to validate""")

    analyze = subparsers.add_parser(
        "analyze",
        help="""Decide whether systems are contextual. Exit code 0: noncontextual, 1: invalid input,
        2: unsuitable structure, 3: contextual (the maximum over all files)""",
    )
    analyze.add_argument("files", nargs="+", help="""SystemFiles to analyse""")
    analyze.add_argument(
        "--format",
        choices=("text", "machine"),
        help=f"""Output format, machine output is one key=value per line. (default: {DEFAULT_FORMAT})""",
    )
    analyze.add_argument(
        "--write-report",
        action="store",
        help="""Filename to write a YAML report of all analysed systems to, including the maximally
        connected couplings found""",
    )

    couple = subparsers.add_parser(
        "couple",
        help="""Print the atoms of a coupling of a system, or INFEASIBLE (exit code 3). The
        coordinates of each atom follow the observables ordered by content, then context""",
    )
    couple.add_argument("file", help="""SystemFile of the system to couple""")
    couple.add_argument(
        "--kind",
        choices=COUPLING_KINDS,
        default="independent",
        help="""Which coupling to construct. (default: %(default)s)""",
    )
    couple.add_argument(
        "--targets",
        action="store",
        help="""YAML/JSON file mapping contents to required equality probabilities p/q, for
        --kind targets""",
    )

    demo = subparsers.add_parser("demo", help="""Build a preset scenario, print its SystemFile and analyse it""")
    demo.add_argument(
        "scenario", help=f"""One of: {", ".join(s.value for s in scenarios.ScenarioId)}"""
    )
    demo.add_argument("--output", "-o", action="store", help="""Write the SystemFile here instead of printing it""")
    demo.add_argument("--format", choices=("text", "machine"), help="""Output format of the analysis""")

    sweep = subparsers.add_parser(
        "sweep",
        help="""Cross-validate the closed-form criterion and the coupling search on random systems.
        Exit code 0 iff all verdicts agree""",
    )
    sweep.add_argument("--n-systems", type=int, help="""Number of random systems""")
    sweep.add_argument("--seed", type=int, help="""Seed of the random generator""")
    sweep.add_argument("--grid", type=int, help="""Probabilities are multiples of 1/GRID""")
    sweep.add_argument("--selective-fraction", help="""Fraction p/q of marginally selective systems""")

    args = parser.parse_args(argv)

    if args.command is None and not args.write_config:
        parser.error("no command and no config output specified")

    return args
