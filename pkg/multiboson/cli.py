"""
Command-line surface.

    multiboson distribution --scenario S [--out PATH] [--format csv|json]
    multiboson dip-scan     --scenario S [--tau-min T] [--tau-max T] [--steps K] [--out PATH]
    multiboson sample       --scenario S --count K --seed X [--out PATH]
    multiboson permanent    --matrix PATH [--algorithm ryser|naive|glynn]
    multiboson validate     --scenario S

Exit codes: 0 success, 1 validation or physics failure, 2 input parse
failure, 3 feasibility refusal. Data goes to stdout (or ``--out``),
diagnostics and timing to stderr.
"""

import argparse
import csv
import io
import itertools
import json
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from .client import Multiboson
from .distribution import build_distribution, fock_oracle, iter_samples, sample
from .errors import InputValidationError, MultibosonError, ScenarioError
from .permanent import permanent
from .probability import (
    probability_distinguishable,
    probability_general,
    probability_identical,
    probability_mixed_groups,
)
from .scenario import Scenario, load_scenario
from .spectra import GramMatrix, SpectrumKind, dip_visibility, overlap
from .unitary import GENERATION_TOLERANCE, INGESTION_TOLERANCE, PortConfiguration

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-9
NORMALIZATION_TOLERANCE = 1e-8
# Fast-path consistency is checked on at most this many samples.
CONSISTENCY_SAMPLES = 200
CONSISTENCY_PHOTONS = 6


def cmd_distribution(scenario: Scenario, out: Optional[str] = None, fmt: Optional[str] = None) -> int:
    """Writes the full output distribution of the scenario."""
    started = time.perf_counter()
    U = scenario.unitary.build()
    U.validate(INGESTION_TOLERANCE)
    dist = build_distribution(U, scenario.input_ports, scenario.gram())
    fmt = fmt or scenario.output.format
    with _output(out or scenario.output.path) as stream:
        stream.write(dist.dumps(fmt))
    print(f"total probability: {dist.total:.12f}", file=sys.stderr)
    print(f"elapsed: {time.perf_counter() - started:.3f} s", file=sys.stderr)
    return 0


def cmd_dip_scan(scenario: Scenario, tau_min: float, tau_max: float, steps: int,
                 out: Optional[str] = None, coincidence: Optional[Sequence[int]] = None) -> int:
    """
    Sweeps the emission-time offset of the second photon relative to the first
    and writes ``tau, |g|^2, P`` rows for the coincidence sample (by default one
    photon in each of the input ports' output counterparts).
    """
    if scenario.n != 2:
        raise InputValidationError(f"The dip scan needs exactly 2 photons, got {scenario.n}.")
    spectra = scenario.spectra()
    if any(s.kind is not SpectrumKind.GAUSSIAN_PULSE for s in spectra):
        raise InputValidationError("The dip scan is defined for Gaussian-pulse spectra only.")
    if steps < 1:
        raise InputValidationError(f"Need at least one step, got {steps}.")

    U = scenario.unitary.build()
    U.validate(INGESTION_TOLERANCE)
    ports = scenario.input_ports
    cfg = PortConfiguration.from_ports(ports, coincidence or ports, U.dim)
    first, second = spectra

    with _output(out) as stream:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["tau", "overlap_sq", "probability"])
        for tau in np.linspace(tau_min, tau_max, steps):
            tau = float(tau)
            delayed = second.model_copy(update={"emission_time": first.emission_time + tau})
            g = overlap(first, delayed)
            G = GramMatrix.from_entries([[1.0, g], [np.conj(g), 1.0]])
            p = probability_general(U, cfg, G).value
            writer.writerow([repr(tau), repr(dip_visibility(first, delayed)), repr(float(p))])
    return 0


def cmd_sample(scenario: Scenario, count: int, seed: int, out: Optional[str] = None) -> int:
    """Draws ``count`` samples, one occupation vector per line."""
    if count < 0:
        raise InputValidationError(f"Sample count must be non-negative, got {count}.")
    with _output(out) as stream:
        if count == 0:
            return 0
        U = scenario.unitary.build()
        U.validate(INGESTION_TOLERANCE)
        dist = build_distribution(U, scenario.input_ports, scenario.gram())
        for occupation in sample(dist, count, seed):
            stream.write(" ".join(str(c) for c in occupation) + "\n")
    return 0


def cmd_permanent(matrix_path: str, algorithm: str = "ryser") -> int:
    """Prints the permanent of a matrix file and the time it took."""
    matrix = read_matrix(matrix_path)
    result = permanent(matrix, algorithm=algorithm)
    print(f"n: {result.n}")
    print(f"algorithm: {result.algorithm.value}")
    print(f"permanent: {result.value!r}")
    print(f"seconds: {result.seconds:.6f}")
    return 0


def cmd_validate(scenario: Scenario, stream: Optional[TextIO] = None) -> int:
    """
    Runs the invariant checks that fit the scenario's size and prints a table.
    """
    stream = stream or sys.stdout
    checks = run_checks(scenario)
    width = max(len(name) for name, _, _ in checks)
    for name, status, detail in checks:
        stream.write(f"{name.ljust(width)}  {status:<4}  {detail}\n")
    return 1 if any(status == "FAIL" for _, status, _ in checks) else 0


def run_checks(scenario: Scenario) -> List[Tuple[str, str, str]]:
    checks: List[Tuple[str, str, str]] = []
    ports = scenario.input_ports
    n = scenario.n

    U = scenario.unitary.build()
    tolerance = INGESTION_TOLERANCE if scenario.unitary.explicit is not None else GENERATION_TOLERANCE
    error = U.unitarity_error()
    unitary_ok = error < tolerance
    checks.append(("unitarity", "PASS" if unitary_ok else "FAIL",
                   f"max |U U^H - I| = {error:.3e} (tolerance {tolerance:.0e})"))

    G = None
    try:
        G = scenario.gram(validate=False)
        problems = G.violations()
    except MultibosonError as e:
        problems = [str(e)]
    gram_ok = not problems
    checks.append(("gram", "PASS" if gram_ok else "FAIL",
                   "Hermitian, unit diagonal, PSD" if gram_ok else "; ".join(problems)))

    if not (unitary_ok and gram_ok):
        for name in ("fast-paths", "reality", "normalization", "oracle"):
            checks.append((name, "SKIP", "needs a unitary interferometer and a valid Gram matrix"))
        return checks

    if n <= CONSISTENCY_PHOTONS:
        worst = 0.0
        residual_ok = True
        for occupation in itertools.islice(iter_samples(U.dim, n), CONSISTENCY_SAMPLES):
            cfg = PortConfiguration(ports, occupation)
            pairs = [
                (probability_distinguishable(U, cfg), probability_general(U, cfg, GramMatrix.identity(n))),
                (probability_identical(U, cfg), probability_general(U, cfg, GramMatrix.ones(n))),
            ]
            if n >= 2:
                group = range(n // 2 + n % 2)
                pairs.append((
                    probability_mixed_groups(U, cfg, [ports[s] for s in group]),
                    probability_general(U, cfg, GramMatrix.block(n, group)),
                ))
            for fast, general in pairs:
                worst = max(worst, abs(fast.value - general.value))
            scenario_value = probability_general(U, cfg, G)
            if (scenario_value.imaginary_residual >= 1e-9 * max(1.0, scenario_value.raw_rate)
                    or scenario_value.value < -1e-10):
                residual_ok = False
        checks.append(("fast-paths", "PASS" if worst < CONSISTENCY_TOLERANCE else "FAIL",
                       f"max deviation from the general path {worst:.3e}"))
        checks.append(("reality", "PASS" if residual_ok else "FAIL",
                       "imaginary residual and sign of every probability"))
    else:
        checks.append(("fast-paths", "SKIP", f"checked for N <= {CONSISTENCY_PHOTONS}"))
        checks.append(("reality", "SKIP", f"checked for N <= {CONSISTENCY_PHOTONS}"))

    try:
        dist = build_distribution(U, ports, G)
    except MultibosonError as e:
        checks.append(("normalization", "SKIP", str(e)))
        checks.append(("oracle", "SKIP", str(e)))
        return checks
    deviation = abs(dist.total - 1.0)
    checks.append(("normalization", "PASS" if deviation < NORMALIZATION_TOLERANCE else "FAIL",
                   f"|total - 1| = {deviation:.3e}"))

    try:
        truth = fock_oracle(U, ports, G)
    except MultibosonError as e:
        checks.append(("oracle", "SKIP", str(e)))
        return checks
    gap = float(np.max(np.abs(dist.probabilities() - truth.probabilities())))
    checks.append(("oracle", "PASS" if gap < ORACLE_TOLERANCE else "FAIL",
                   f"max entrywise deviation from the Fock oracle {gap:.3e}"))
    return checks


def read_matrix(path: str) -> np.ndarray:
    """
    Reads a square complex matrix from JSON (rows of numbers or ``[re, im]``
    pairs, optionally under a ``"matrix"`` key) or CSV (cells such as ``1+2j``).
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read matrix {file}: {e}") from e
    try:
        if file.suffix.lower() == ".csv":
            rows = [[complex(cell.strip().replace(" ", "")) for cell in row]
                    for row in csv.reader(io.StringIO(text)) if row]
        else:
            data = json.loads(text)
            if isinstance(data, dict):
                data = data["matrix"]
            rows = [[complex(*entry) if isinstance(entry, list) else complex(entry) for entry in row] for row in data]
    except (ValueError, KeyError, TypeError) as e:
        raise ScenarioError(f"Cannot parse matrix {file}: {e}") from e
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ScenarioError(f"Matrix in {file} is not square.")
    return np.array(rows, dtype=complex)


@contextmanager
def _output(path: Optional[str]) -> Iterator[TextIO]:
    if path is None or path == "-":
        yield sys.stdout
        return
    with open(path, "w", encoding="utf-8", newline="") as stream:
        yield stream


def _ports(text: str) -> List[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated port indices, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiboson",
        description="Exact output distributions of partially distinguishable photons in linear interferometers.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--trace", action="store_true", help="print OpenTelemetry spans to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    def with_scenario(name: str, help: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help)
        sub.add_argument("--scenario", required=True, help="scenario JSON file")
        sub.add_argument("--out", help="output file (default: stdout)")
        return sub

    dist = with_scenario("distribution", "write the full output distribution")
    dist.add_argument("--format", choices=["csv", "json"], help="overrides the scenario's output format")

    dip = with_scenario("dip-scan", "sweep the emission-time offset of a two-photon scenario")
    dip.add_argument("--tau-min", type=float, default=-5.0)
    dip.add_argument("--tau-max", type=float, default=5.0)
    dip.add_argument("--steps", type=int, default=101)
    dip.add_argument("--coincidence", type=_ports, help="output ports of the coincidence sample, e.g. 0,1")

    draw = with_scenario("sample", "draw output samples")
    draw.add_argument("--count", type=int, required=True)
    draw.add_argument("--seed", type=int, default=0)

    perm = commands.add_parser("permanent", help="permanent of a matrix file, with timing")
    perm.add_argument("--matrix", required=True, help="JSON or CSV matrix file")
    perm.add_argument("--algorithm", choices=["ryser", "naive", "glynn"], default="ryser")

    commands.add_parser("validate", help="run the invariant suite on a scenario").add_argument(
        "--scenario", required=True, help="scenario JSON file"
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        client = Multiboson.initialize(console=args.trace)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    try:
        if args.command == "permanent":
            return cmd_permanent(args.matrix, args.algorithm)
        scenario = load_scenario(args.scenario)
        logger.debug("scenario %s: M = %d, N = %d", args.scenario, scenario.m, scenario.n)
        if args.command == "distribution":
            return cmd_distribution(scenario, args.out, args.format)
        if args.command == "dip-scan":
            return cmd_dip_scan(scenario, args.tau_min, args.tau_max, args.steps, args.out, args.coincidence)
        if args.command == "sample":
            return cmd_sample(scenario, args.count, args.seed, args.out)
        return cmd_validate(scenario)
    except MultibosonError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    finally:
        client.shutdown()


if __name__ == "__main__":
    sys.exit(main())
