import argparse
import csv
import io
import json
import logging
import sys
from time import perf_counter
from typing import Literal

from pydantic import BaseModel, Field, ValidationError
from tqdm import tqdm

from matargs import __version__
from matargs.backend import verify
from matargs.backend.logic import DEFAULT_CHUNK_SIZE
from matargs.backend.tools.misc import MatargsError, ParseError, exception_logger
from matargs.backend.tools.partitions import Partition, enumerate_partitions
from matargs.backend.tools.randmat import DEFAULT_SEED, parse_matrix_spec
from matargs.backend.tools.specfun import (
    ASCENDING,
    DESCENDING,
    VARIANTS,
    gen_pochhammer,
    multivariate_gamma,
    pochhammer_falling,
    pochhammer_rising,
    theorem1_constant,
)
from matargs.backend.tools.zonal import cached_table, eval_eigs, eval_matrix, table_to_csv, table_to_json

logger = logging.getLogger(__name__)

DEFAULT_MC_SAMPLES = 200_000
DEFAULT_SELFTEST_SAMPLES = 20_000
EXIT_CODES = {"pass": 0, "fail": 1, "inconclusive": 3}


class CliConfig(BaseModel):
    command: str
    format: Literal["json", "csv", "text"] = "json"
    verbose: bool = False
    progress: bool = False
    seed: int = Field(DEFAULT_SEED, ge=0, lt=2**64)

    k: int | None = Field(None, ge=0)
    max_parts: int | None = Field(None, ge=1)
    kappa: str | None = None
    eigs: str | None = None
    matrix: str | None = None
    m: int | None = Field(None, ge=1)
    a: float | None = None
    b: float | None = None
    x: float | None = None
    q: int | None = Field(None, ge=0)
    falling: bool = False
    form: str | None = None
    log: bool = False
    variant: Literal["corrected", "muirhead_incorrect"] = "corrected"

    z: str | None = None
    v: str | None = None
    t: str | None = None
    y: str | None = None
    samples: int | None = Field(None, ge=2)
    chunk_size: int = Field(DEFAULT_CHUNK_SIZE, ge=1)
    grid_size: int | None = Field(None, ge=1)
    quad_points: int = Field(verify.DEFAULT_QUAD_POINTS, ge=1)
    z_pass: float = Field(verify.Z_PASS, gt=0)
    z_reject: float = Field(verify.Z_REJECT, gt=0)

    def partition(self) -> Partition:
        return Partition.parse(self.kappa)

    def operand(self, name: str, stream: int = 0):
        return parse_matrix_spec(getattr(self, name), self.m, self.seed, stream)


class ProgressBar:
    """update(processed, total) on a tqdm bar written to stderr."""

    def __init__(self, label: str):
        self.label = label
        self.bar = None

    def update(self, processed: int, total: int):
        if self.bar is None:
            self.bar = tqdm(total=total, desc=self.label, unit="chunk", file=sys.stderr)
        self.bar.n = processed
        self.bar.refresh()

    def complete(self):
        if self.bar is not None:
            self.bar.close()


def _progress(cfg: CliConfig):
    return ProgressBar(cfg.command) if cfg.progress else None


def _verdict_code(report) -> int:
    return EXIT_CODES[report.verdict]


def cmd_partitions(cfg: CliConfig):
    parts = enumerate_partitions(cfg.k, cfg.max_parts)
    return {"k": cfg.k, "partitions": [str(p) for p in parts]}, 0


def cmd_zonal_table(cfg: CliConfig):
    return {"max_degree": cfg.k, "table": table_to_json(cached_table(cfg.k))}, 0


def cmd_zonal_eval(cfg: CliConfig):
    kappa = cfg.partition()
    table = cached_table(max(kappa.weight, 1))
    if cfg.eigs is not None:
        try:
            eigs = [float(e) for e in cfg.eigs.split(",")]
        except ValueError:
            raise ParseError(f"malformed eigenvalue list {cfg.eigs!r}, expected e.g. '1,2'")
        value = eval_eigs(table, kappa, eigs)
    elif cfg.matrix is not None and cfg.m is not None:
        value = eval_matrix(table, kappa, cfg.operand("matrix"))
    else:
        raise ParseError("zonal-eval needs --eigs, or --matrix together with --m")
    return {"kappa": str(kappa), "value": value}, 0


def cmd_gamma_mv(cfg: CliConfig):
    form = cfg.form or ASCENDING
    value = multivariate_gamma(cfg.a, cfg.m, form, log=cfg.log)
    return {"m": cfg.m, "a": cfg.a, "form": form, "log": cfg.log, "value": value}, 0


def cmd_pochhammer(cfg: CliConfig):
    value = pochhammer_falling(cfg.x, cfg.q) if cfg.falling else pochhammer_rising(cfg.x, cfg.q)
    return {"x": cfg.x, "q": cfg.q, "falling": cfg.falling, "value": value}, 0


def cmd_gen_pochhammer(cfg: CliConfig):
    kappa = cfg.partition()
    return {"b": cfg.b, "kappa": str(kappa), "m": cfg.m, "value": gen_pochhammer(cfg.b, kappa, cfg.m)}, 0


def cmd_constant(cfg: CliConfig):
    kappa = cfg.partition()
    form = cfg.form or "pochhammer"
    value = theorem1_constant(cfg.a, cfg.m, kappa, cfg.variant, form)
    return {"m": cfg.m, "a": cfg.a, "kappa": str(kappa), "variant": cfg.variant, "form": form, "value": value}, 0


def cmd_verify_theorem1(cfg: CliConfig):
    progress = _progress(cfg)
    report = verify.verify_theorem1(
        cfg.m,
        cfg.a,
        cfg.partition(),
        cfg.operand("z"),
        cfg.samples or DEFAULT_MC_SAMPLES,
        seed=cfg.seed,
        chunk_size=cfg.chunk_size,
        z_pass=cfg.z_pass,
        z_reject=cfg.z_reject,
        progress=progress,
        label=cfg.z,
    )
    if progress:
        progress.complete()
    return report, _verdict_code(report)


def cmd_verify_corollary1(cfg: CliConfig):
    progress = _progress(cfg)
    report = verify.verify_corollary1(
        cfg.m,
        cfg.a,
        cfg.partition(),
        cfg.operand("v"),
        cfg.operand("t", stream=1),
        cfg.samples or DEFAULT_MC_SAMPLES,
        seed=cfg.seed,
        chunk_size=cfg.chunk_size,
        z_pass=cfg.z_pass,
        z_reject=cfg.z_reject,
        progress=progress,
        labels={"V": cfg.v, "T": cfg.t},
    )
    if progress:
        progress.complete()
    return report, _verdict_code(report)


def cmd_verify_lemma2(cfg: CliConfig):
    report = verify.verify_lemma2(cfg.m, cfg.partition(), cfg.operand("y"), cfg.grid_size)
    return report, _verdict_code(report)


def cmd_verify_gamma_quad(cfg: CliConfig):
    report = verify.verify_gamma_integral(cfg.m, cfg.a, cfg.quad_points)
    return report, _verdict_code(report)


def cmd_selftest(cfg: CliConfig):
    report = verify.run_selftest(cfg.seed, cfg.samples or DEFAULT_SELFTEST_SAMPLES)
    return report, _verdict_code(report)


def _zonal_table_text(payload: dict) -> str:
    lines = []
    for entries in payload["table"].values():
        for entry in entries:
            terms = [f"{c['num']}/{c['den']} m_({c['lambda']})" for c in entry["coeffs"]]
            lines.append(f"C_({entry['kappa']}) = " + " + ".join(terms))
    return "\n".join(lines) + "\n"


def _zonal_table_csv(payload: dict) -> str:
    return table_to_csv(cached_table(payload["max_degree"]))


def _partitions_text(payload: dict) -> str:
    return "".join(f"{p}\n" for p in payload["partitions"])


def _partitions_csv(payload: dict) -> str:
    return "partition\n" + "".join(f"\"{p}\"\n" for p in payload["partitions"])


M = {"type": int, "required": True, "help": "matrix dimension m"}
A = {"type": float, "required": True, "help": "argument a"}
KAPPA = {"required": True, "help": "partition, e.g. 2,1"}
SAMPLES = {"type": int, "help": "number of Monte Carlo samples"}
MC_FLAGS = {
    "--samples": SAMPLES,
    "--chunk-size": {"type": int, "help": f"samples per chunk (default {DEFAULT_CHUNK_SIZE})"},
    "--z-pass": {"type": float, "help": f"largest passing |z_correct| (default {verify.Z_PASS})"},
    "--z-reject": {"type": float, "help": f"smallest rejecting |z_incorrect| (default {verify.Z_REJECT})"},
    "--progress": {"action": "store_true", "default": None, "help": "show a progress bar on stderr"},
}

COMMANDS = {
    "partitions": {
        "description": "Lists the partitions of k in descending lexicographic order.",
        "arguments": {
            "--k": {"type": int, "required": True, "help": "weight"},
            "--max-parts": {"type": int, "help": "largest number of parts"},
        },
        "function": cmd_partitions,
        "render": {"text": _partitions_text, "csv": _partitions_csv},
    },
    "zonal-table": {
        "description": "Prints the exact zonal polynomial coefficients up to degree k.",
        "arguments": {"--k": {"type": int, "required": True, "help": "largest degree K"}},
        "function": cmd_zonal_table,
        "render": {"text": _zonal_table_text, "csv": _zonal_table_csv},
    },
    "zonal-eval": {
        "description": "Evaluates C_kappa at eigenvalues or at a symmetric matrix.",
        "arguments": {
            "--kappa": KAPPA,
            "--eigs": {"help": "comma-separated eigenvalues"},
            "--matrix": {"help": "matrix specifier: file, identity, diag:a,b or random"},
            "--m": {"type": int, "help": "dimension for --matrix"},
        },
        "function": cmd_zonal_eval,
    },
    "gamma-mv": {
        "description": "Multivariate gamma function Gamma_m[a].",
        "arguments": {
            "--m": M,
            "--a": A,
            "--form": {"choices": [ASCENDING, DESCENDING], "help": "product form"},
            "--log": {"action": "store_true", "default": None, "help": "return the logarithm"},
        },
        "function": cmd_gamma_mv,
    },
    "pochhammer": {
        "description": "Rising (or falling) factorial.",
        "arguments": {
            "--x": {"type": float, "required": True, "help": "base"},
            "--q": {"type": int, "required": True, "help": "number of factors"},
            "--falling": {"action": "store_true", "default": None, "help": "falling factorial"},
        },
        "function": cmd_pochhammer,
    },
    "gen-pochhammer": {
        "description": "Generalized Pochhammer symbol (b)_kappa.",
        "arguments": {"--b": {"type": float, "required": True, "help": "base"}, "--kappa": KAPPA, "--m": M},
        "function": cmd_gen_pochhammer,
    },
    "constant": {
        "description": "Matrix Laplace integral constant, corrected or incorrect.",
        "arguments": {
            "--m": M,
            "--a": A,
            "--kappa": KAPPA,
            "--variant": {"choices": list(VARIANTS), "help": "which constant"},
            "--form": {"choices": ["pochhammer", "gamma"], "help": "formula used"},
        },
        "function": cmd_constant,
    },
    "verify-theorem1": {
        "description": "Monte Carlo check of the Laplace integral identity.",
        "arguments": {
            "--m": M,
            "--a": A,
            "--kappa": KAPPA,
            "--z": {"required": True, "help": "Z: file, identity, diag:a,b or random"},
            **MC_FLAGS,
        },
        "function": cmd_verify_theorem1,
    },
    "verify-corollary1": {
        "description": "Monte Carlo check of the identity with C_kappa(T X^-1).",
        "arguments": {
            "--m": M,
            "--a": A,
            "--kappa": KAPPA,
            "--v": {"required": True, "help": "V: file, identity, diag:a,b or random"},
            "--t": {"required": True, "help": "T: file, identity, diag:a,b or random"},
            **MC_FLAGS,
        },
        "function": cmd_verify_corollary1,
    },
    "verify-lemma2": {
        "description": "Extracts the highest-weight coefficient of C_kappa(Y^-1 Z).",
        "arguments": {
            "--m": M,
            "--kappa": KAPPA,
            "--y": {"required": True, "help": "Y: file, identity, diag:a,b or random"},
            "--grid-size": {"type": int, "help": "nodes per axis (default k + 1)"},
        },
        "function": cmd_verify_lemma2,
    },
    "verify-gamma-quad": {
        "description": "Quadrature of the multivariate gamma defining integral.",
        "arguments": {
            "--m": M,
            "--a": A,
            "--quad-points": {"type": int, "help": "nodes per one-dimensional rule"},
        },
        "function": cmd_verify_gamma_quad,
    },
    "selftest": {
        "description": "Runs the property suite and a short Monte Carlo smoke run.",
        "arguments": {"--samples": SAMPLES},
        "function": cmd_selftest,
    },
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "text"], help="output format (default json)")
    common.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--verbose", action="store_true", default=None, help="log progress to stderr")

    parser = argparse.ArgumentParser(
        prog="matargs",
        description="Zonal polynomials, multivariate gamma functions and matrix Laplace integrals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, info in COMMANDS.items():
        command = sub.add_parser(name, parents=[common], help=info["description"], description=info["description"])
        for flag, kwargs in info["arguments"].items():
            command.add_argument(flag, **kwargs)
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def render(payload, fmt: str, renderers: dict) -> str:
    if isinstance(payload, BaseModel):
        payload = payload.model_dump(mode="json")
    if fmt in renderers:
        return renderers[fmt](payload)
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    flat = {key: json.dumps(value) if isinstance(value, (dict, list)) else value for key, value in payload.items()}
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(flat), lineterminator="\n")
        writer.writeheader()
        writer.writerow(flat)
        return buffer.getvalue()
    return "".join(f"{key}: {value}\n" for key, value in flat.items())


def run(argv: list[str] | None = None) -> int:
    """
    Parses argv, runs the command and writes its result to stdout.

    :param argv: Arguments without the program name; sys.argv[1:] when None.
    :type argv: list
    :return: 0 on success or pass, 1 on a failed verification, 2 on usage or
        domain errors, 3 on an inconclusive verification.
    :rtype: int
    """

    try:
        namespace = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    options = {key: value for key, value in vars(namespace).items() if value is not None}
    configure_logging(bool(options.get("verbose")))
    try:
        cfg = CliConfig(**options)
    except ValidationError as e:
        error = e.errors()[0]
        field = ".".join(str(part) for part in error["loc"])
        sys.stderr.write(f"matargs: --{field.replace('_', '-')}: {error['msg']}\n")
        return 2

    start = perf_counter()
    try:
        payload, code = COMMANDS[cfg.command]["function"](cfg)
    except MatargsError as e:
        sys.stderr.write(f"matargs: {e}\n")
        return 2
    except Exception as e:
        exception_logger(e)
        sys.stderr.write(f"matargs: unexpected error ({type(e).__name__}: {e}), see error.log\n")
        return 2

    sys.stdout.write(render(payload, cfg.format, COMMANDS[cfg.command].get("render", {})))
    logger.info("%s finished in %.2f seconds", cfg.command, perf_counter() - start)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
