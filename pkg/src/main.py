"""
Programmable processor simulator.
Command-line entry point.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from channel_design import (
    amplitude_damping_family,
    feasibility_search,
    no_go_witness,
    phase_damping_family,
)
from errors import ProcessorError, SchemaError, VerificationFailure
from operator_core import SPECTRAL_CUTOFF, make_rng, max_abs, random_state_vector
from probabilistic import ZERO_PROBABILITY, computational_basis, run_conditional, run_unconditional, x_basis
from processor import (
    ProgramState,
    check_mapcond,
    dual_residual,
    extract_basis,
    orthogonality_residual,
    random_processor,
)
from processor_zoo import PROCESSOR_KINDS, build_processor, make_partial_swap
from serialization import (
    controlled_spec_from_json,
    dumps,
    load_json,
    matrix_from_json,
    matrix_to_json,
    measurement_from_json,
    outcome_to_json,
    processor_from_json,
    processor_to_json,
    program_from_json,
    write_atomic,
)
from settings import RunConfig, SimulatorConfig

logger = logging.getLogger(__name__)

SEARCH_FAMILIES = {
    "phase": phase_damping_family,
    "amp": amplitude_damping_family,
}

# (payload, optional extra line for standard output)
CommandResult = Tuple[Dict[str, Any], Optional[str]]


def setup_logging(level: int = logging.INFO, log_file: Optional[Path] = None):
    """Setup application logging. Standard output is kept for JSON."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )
    return logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="processor-sim",
        description="Simulate programmable quantum processors and the channels they induce.",
    )
    parser.add_argument("--tolerance", type=float, help="numerical tolerance (default 1e-10)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out", help="write JSON here instead of standard output")
    parser.add_argument("--format", choices=["json", "pretty"], help="compact or indented JSON")
    parser.add_argument("--config", type=Path, help="JSON file with run settings")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--log-file", type=Path, help="also log to this file")

    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build", help="construct a processor")
    build.add_argument("kind", choices=PROCESSOR_KINDS)
    build.add_argument("params", nargs="?", type=Path, help="params JSON (unitaries, basis, dim, phi)")

    run = sub.add_parser("run", help="run a program on a data state")
    run.add_argument("processor", type=Path)
    run.add_argument("program", type=Path)
    run.add_argument("state", type=Path)
    run.add_argument("--measure", help="measurement basis file, or 'x' / 'z'")
    run.add_argument("--accept", type=int, help="accepted outcome index")

    verify = sub.add_parser("verify", help="check the identities a processor must satisfy")
    verify.add_argument("processor", nargs="?", type=Path)
    verify.add_argument("--random", nargs=2, type=int, metavar=("M", "N"), help="verify a seeded random processor")

    nogo = sub.add_parser("nogo", help="amplitude-damping no-go bound table")
    nogo.add_argument("m_witness", type=int)
    nogo.add_argument("n_ambient", type=int)

    search = sub.add_parser("search", help="numerical feasibility search for a channel family")
    search.add_argument("family", choices=sorted(SEARCH_FAMILIES))
    search.add_argument("prog_dim", type=int)
    search.add_argument("iterations", nargs="?", type=int)
    search.add_argument("--grid", nargs="+", type=float, help="theta values (default from config)")
    search.add_argument("--starts", type=int)
    search.add_argument("--workers", type=int)

    return parser


def cmd_build(args, run_config: RunConfig, sim_config: SimulatorConfig) -> CommandResult:
    params = load_json(args.params) if args.params else None
    if args.kind == "swap":
        params = params or {}
        dim = params.get("dim", 2)
        phi = params.get("phi", 0.0)
        if isinstance(dim, bool) or not isinstance(dim, int):
            raise SchemaError(f"params.dim must be an integer, got {dim!r}")
        if isinstance(phi, bool) or not isinstance(phi, (int, float)):
            raise SchemaError(f"params.phi must be a number, got {phi!r}")
        proc = make_partial_swap(dim, float(phi))
    else:
        spec = controlled_spec_from_json(params) if params is not None else None
        proc = build_processor(args.kind, spec, eps=run_config.tolerance)
    logger.info(f"Built {args.kind} processor with M={proc.data_dim}, N={proc.prog_dim}")
    return processor_to_json(proc), None


def _measurement(name: str, prog_dim: int, eps: float):
    if name == "x":
        return x_basis()
    if name == "z":
        return computational_basis(prog_dim)
    return measurement_from_json(load_json(name), eps)


def cmd_run(args, run_config: RunConfig, sim_config: SimulatorConfig) -> CommandResult:
    eps = run_config.tolerance
    proc = processor_from_json(load_json(args.processor), eps=eps)
    prog = program_from_json(load_json(args.program), eps)
    rho = matrix_from_json(load_json(args.state), "state")

    payload: Dict[str, Any] = {"output": matrix_to_json(run_unconditional(proc, prog, rho, eps))}
    if args.measure is None:
        if args.accept is not None:
            raise SchemaError("--accept needs --measure")
        return payload, None

    basis = _measurement(args.measure, proc.prog_dim, eps)
    outcomes = run_conditional(
        proc, prog, rho, basis, eps=eps,
        zero_probability=sim_config.get_tolerance("zero_probability", ZERO_PROBABILITY),
        cutoff=sim_config.get_tolerance("spectral_cutoff", SPECTRAL_CUTOFF),
    )
    payload["outcomes"] = [outcome_to_json(o) for o in outcomes]
    if args.accept is not None:
        if not 0 <= args.accept < len(outcomes):
            raise SchemaError(f"--accept {args.accept} out of range for {len(outcomes)} outcomes")
        accepted = outcomes[args.accept]
        payload["accept"] = args.accept
        payload["success_probability"] = accepted.probability
        payload["accepted_state"] = None if accepted.post_state is None else matrix_to_json(accepted.post_state)
        logger.info(f"Outcome {args.accept} accepted with probability {accepted.probability:.6f}")
    return payload, None


def cmd_verify(args, run_config: RunConfig, sim_config: SimulatorConfig) -> CommandResult:
    if args.random is not None:
        m, n = args.random
        proc = random_processor(m, n, seed=run_config.seed)
        source = f"random:{m}x{n}:seed={run_config.seed}"
    elif args.processor is not None:
        proc = processor_from_json(load_json(args.processor), check=False)
        source = str(args.processor)
    else:
        raise SchemaError("verify needs a processor file or --random M N")

    basis = extract_basis(proc)
    pairs = sim_config.get_verify_setting("program_pairs", 20)
    rng = make_rng(run_config.seed)
    mapcond = 0.0
    for _ in range(pairs):
        xi1 = ProgramState.pure(random_state_vector(proc.prog_dim, rng))
        xi2 = ProgramState.pure(random_state_vector(proc.prog_dim, rng))
        mapcond = max(mapcond, check_mapcond(basis, xi1, xi2))

    residuals = {
        "unitarity": max_abs(proc.G.conj().T @ proc.G - np.eye(proc.size)),
        "orthogonality": orthogonality_residual(basis),
        "dual": dual_residual(basis),
        "mapcond": mapcond,
    }
    passed = all(r <= run_config.tolerance for r in residuals.values())
    for name, value in residuals.items():
        level = logging.DEBUG if value <= run_config.tolerance else logging.WARNING
        logger.log(level, f"{name} residual {value:.3e}")
    payload = {
        "source": source,
        "data_dim": proc.data_dim,
        "prog_dim": proc.prog_dim,
        "tolerance": run_config.tolerance,
        "program_pairs": pairs,
        "residuals": residuals,
        "passed": passed,
    }
    return payload, None


def cmd_nogo(args, run_config: RunConfig, sim_config: SimulatorConfig) -> CommandResult:
    return no_go_witness(args.m_witness, args.n_ambient).to_dict(), None


def cmd_search(args, run_config: RunConfig, sim_config: SimulatorConfig) -> CommandResult:
    grid = args.grid if args.grid else sim_config.get_search_grid(args.family)
    family = SEARCH_FAMILIES[args.family](grid)
    iterations = args.iterations or sim_config.get_search_setting("iterations", 5000)
    starts = args.starts or sim_config.get_search_setting("starts", 8)
    workers = args.workers or sim_config.get_search_setting("workers", 1)
    result = feasibility_search(family, args.prog_dim, iterations=iterations, seed=run_config.seed,
                                starts=starts, workers=workers)
    payload = result.to_dict()
    payload["iterations"] = iterations
    payload["starts"] = starts
    payload["theta_grid"] = list(family.theta_grid)
    return payload, f"residual {result.best_residual!r}"


COMMANDS: Dict[str, Callable[..., CommandResult]] = {
    "build": cmd_build,
    "run": cmd_run,
    "verify": cmd_verify,
    "nogo": cmd_nogo,
    "search": cmd_search,
}


def emit(payload: Dict[str, Any], run_config: RunConfig):
    text = dumps(payload, run_config.format)
    if run_config.output_path:
        write_atomic(run_config.output_path, text + "\n")
        logger.info(f"Wrote {run_config.output_path}")
    else:
        print(text)


def main(argv=None) -> int:
    """Main entry point. Returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else SchemaError.exit_code

    logger = setup_logging(logging.DEBUG if args.verbose else logging.INFO, args.log_file)

    try:
        sim_config = SimulatorConfig()
        run_config = RunConfig.load(args.config, base=sim_config.defaults).override(
            tolerance=args.tolerance,
            seed=args.seed,
            output_path=args.out,
            format=args.format,
        )
        payload, extra = COMMANDS[args.command](args, run_config, sim_config)
        emit(payload, run_config)
        if extra is not None:
            print(extra)
        if payload.get("passed") is False:
            logger.error(f"Verification failed at tolerance {run_config.tolerance:.1e}")
            return VerificationFailure.exit_code
        return 0

    except ProcessorError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    except KeyboardInterrupt:
        logger.info("Interrupted")
        return 130

    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
