import csv
import json
import sys
from typing import Optional

import typer
from pydantic import ValidationError
from typing_extensions import Annotated

from .config import Config, load_config

# Initialize environment variables
load_config()

app = typer.Typer(
    help="bggpoincare - Exact Poincare operators for de Rham, twisted and BGG complexes",
    rich_markup_mode=None,
)

EXIT_FAILED = 1
EXIT_USAGE = 2


def _fail_usage(error):
    typer.echo(f"Error: {error}", err=True)
    raise typer.Exit(code=EXIT_USAGE)


def _prepare(**fields):
    """Validate inputs and apply the configured log level"""
    from .schemas import RunConfig
    from .utils import set_log_level

    try:
        Config.validate()
        set_log_level(Config.log_level())
        if fields.get("seed") is None:
            fields["seed"] = Config.default_seed()
        return RunConfig(**fields)
    except (ValueError, ValidationError) as e:
        _fail_usage(e)


def _open_output(out):
    return open(out, "w", newline="", encoding="utf-8") if out else sys.stdout


def _write_identity_reports(reports, output_format, stream):
    if output_format == "json":
        stream.write(json.dumps([r.model_dump() for r in reports], indent=2) + "\n")
    elif output_format == "csv":
        writer = csv.DictWriter(stream, fieldnames=["identity", "scope", "degree", "checked", "passed"])
        writer.writeheader()
        for r in reports:
            writer.writerow({k: getattr(r, k) for k in writer.fieldnames})
    else:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            degree = "" if r.degree is None else f" degree {r.degree}"
            stream.write(f"{status} {r.identity} [{r.scope}]{degree} ({r.checked} checked)\n")
            if not r.passed and r.counterexample is not None:
                stream.write(f"  counterexample: {json.dumps(r.counterexample)}\n")


def _write_sequence_reports(reports, output_format, stream):
    from .verify import reports_to_json, write_dims_csv

    if output_format == "json":
        stream.write(reports_to_json(reports) + "\n")
    elif output_format == "csv":
        write_dims_csv(reports, stream)
    else:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            stream.write(f"{status} {r.name} r={r.r} chi={r.euler_characteristic}\n")
            for i, slot in enumerate(r.slots):
                cohomology = "-" if r.cohomology is None else r.cohomology[i]
                stream.write(f"  {slot}: dim {r.dims[i]}, rank {r.rank_out[i]}, cohomology {cohomology}\n")
            for verdict, ok in r.verdicts.items():
                stream.write(f"  {'ok' if ok else 'FAILED'}: {verdict}\n")


def _emit(reports, output_format, out):
    from .schemas import SequenceReport

    sequences = [r for r in reports if isinstance(r, SequenceReport)]
    identities = [r for r in reports if not isinstance(r, SequenceReport)]
    stream = _open_output(out)
    try:
        if identities:
            _write_identity_reports(identities, output_format, stream)
        if sequences:
            _write_sequence_reports(sequences, output_format, stream)
    finally:
        if stream is not sys.stdout:
            stream.close()


def _diagram_names(diagram):
    from .bggcore import BUILTIN_DIAGRAMS

    if diagram is None:
        return list(BUILTIN_DIAGRAMS)
    if diagram not in BUILTIN_DIAGRAMS:
        raise ValueError(f"Unknown diagram: {diagram}")
    return [diagram]


def _verify_jobs(cfg, count, order, witness):
    from .abstractcx import check_line_example, check_random_instances
    from .bggcore import bgg_suite, builtin_diagram, twisted_suite
    from .derham import homotopy_check_derham
    from .verify import SEQUENCE_NAMES, run_sequence

    if cfg.target == "derham":
        return [(homotopy_check_derham, (k, cfg.r_max, cfg.n)) for k in range(cfg.n + 1)]
    if cfg.target in ("twisted", "bgg"):
        suite = twisted_suite if cfg.target == "twisted" else bgg_suite
        return [
            (suite, (name, degree, cfg.r_max))
            for name in _diagram_names(cfg.diagram)
            for degree in range(builtin_diagram(name).n + 1)
        ]
    if cfg.target == "abstract":
        if count < 1:
            raise ValueError(f"Need at least one random instance, got {count}")
        return [(check_random_instances, (cfg.seed, count)), (check_line_example, (cfg.r_max,))]
    if cfg.name is None:
        raise ValueError(f"polyseq needs --name, one of {', '.join(SEQUENCE_NAMES)}")
    if cfg.name not in SEQUENCE_NAMES:
        raise ValueError(f"Unknown sequence: {cfg.name}")
    r = cfg.r_max if cfg.r is None else cfg.r
    return [(run_sequence, (cfg.name, r, order, witness))]


def _run(jobs, desc):
    from .runner import VerificationRunner

    return VerificationRunner(max_workers=Config.num_threads()).run(jobs, desc=desc)


@app.command("verify")
def verify(
    target: Annotated[str, typer.Argument(help="derham, twisted, bgg, abstract or polyseq")],
    diagram: Annotated[Optional[str], typer.Option("--diagram", help="Builtin diagram (default: all)")] = None,
    name: Annotated[Optional[str], typer.Option("--name", help="Polynomial sequence name")] = None,
    r: Annotated[Optional[int], typer.Option("--r", help="Polynomial degree of a sequence")] = None,
    r_max: Annotated[int, typer.Option("--rmax", help="Maximal coefficient degree checked")] = 3,
    n: Annotated[int, typer.Option("--n", help="Dimension for the de Rham suite")] = 3,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Seed for random instances")] = None,
    count: Annotated[int, typer.Option("--count", help="Number of random finite complexes")] = 20,
    order: Annotated[str, typer.Option("--order", help="Monomial order: grlex or reverse")] = "grlex",
    witness: Annotated[bool, typer.Option("--witness", help="Check D.P = I on kernel bases")] = False,
    output_format: Annotated[str, typer.Option("--format", help="text, json or csv")] = "text",
    out: Annotated[Optional[str], typer.Option("--out", help="Write the report to a file")] = None,
):
    """Check operator identities exactly; exit 1 on the first failing report"""
    cfg = _prepare(
        command="verify", target=target, diagram=diagram, name=name, n=n, r=r,
        r_max=r_max, seed=seed, output_format=output_format, out=out,
    )
    try:
        jobs = _verify_jobs(cfg, count, order, witness)
        reports = _run(jobs, desc=f"verify {target}")
    except ValueError as e:
        _fail_usage(e)

    _emit(reports, cfg.output_format, cfg.out)
    if not all(report.passed for report in reports):
        raise typer.Exit(code=EXIT_FAILED)


FORM_OPERATORS = ("d", "koszul", "euler")
ELEMENT_OPERATORS = ("S", "T", "twisted-d", "twisted-p", "A", "B", "bgg-d", "bgg-p", "bgg-p~")


def _form_operator(name):
    from .derham import exterior_d, interior_euler, koszul_poincare

    return {"d": exterior_d, "koszul": koszul_poincare, "euler": interior_euler}[name]


def _element_operator(name):
    from .bggcore import (bgg_d, bgg_family, bgg_maps, bgg_poincare, complexify,
                          s_apply, t_apply, twisted_d, twisted_poincare)

    if name == "bgg-p~":
        return complexify(bgg_family()).p
    return {
        "S": s_apply, "T": t_apply, "twisted-d": twisted_d, "twisted-p": twisted_poincare,
        "A": lambda u: bgg_maps(u, "A"), "B": lambda u: bgg_maps(u, "B"),
        "bgg-d": bgg_d, "bgg-p": bgg_poincare,
    }[name]


@app.command("apply")
def apply(
    operator: Annotated[str, typer.Argument(help="d, koszul, euler, S, T, twisted-d, twisted-p, A, B, bgg-d, bgg-p or bgg-p~")],
    input_path: Annotated[str, typer.Option("--input", help="JSON form or element; - reads stdin")] = "-",
    times: Annotated[int, typer.Option("--times", help="Apply the operator repeatedly")] = 1,
    diagram_file: Annotated[Optional[str], typer.Option("--diagram-file", help="Diagram JSON with generator or S matrices")] = None,
    out: Annotated[Optional[str], typer.Option("--out", help="Write the result to a file")] = None,
):
    """Apply an operator to a PolyForm or diagram element given as JSON"""
    from .bggcore import diagram_from_json, element_from_json, element_to_json
    from .forms import polyform_from_json, polyform_to_json

    _prepare(command="apply", out=out)
    if operator not in FORM_OPERATORS + ELEMENT_OPERATORS:
        _fail_usage(f"Unknown operator: {operator}")
    if times < 1:
        _fail_usage(f"--times must be >= 1, got {times}")

    try:
        if input_path == "-":
            data = json.load(sys.stdin)
        else:
            with open(input_path, encoding="utf-8") as f:
                data = json.load(f)
        if operator in FORM_OPERATORS:
            value = polyform_from_json(data)
            if operator == "d" and value.k + times > value.n + 1:
                raise ValueError(
                    f"--times {times} takes a {value.k}-form past degree {value.n + 1}, "
                    f"the last form degree in dimension {value.n}"
                )
            op = _form_operator(operator)
            serialize = polyform_to_json
        else:
            diagram = None
            if diagram_file:
                with open(diagram_file, encoding="utf-8") as f:
                    diagram = diagram_from_json(json.load(f))
            value = element_from_json(data, diagram)
            op = _element_operator(operator)
            serialize = element_to_json
        for _ in range(times):
            value = op(value)
    except (ValueError, ValidationError, OSError) as e:
        _fail_usage(e)

    stream = _open_output(out)
    try:
        stream.write(json.dumps(serialize(value), indent=2) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()


@app.command("dims")
def dims(
    name: Annotated[str, typer.Argument(help="Polynomial sequence name")],
    r: Annotated[int, typer.Option("--r", help="First degree")] = 4,
    r_max: Annotated[Optional[int], typer.Option("--rmax", help="Last degree (default: --r)")] = None,
    output_format: Annotated[str, typer.Option("--format", help="text, json or csv")] = "csv",
    out: Annotated[Optional[str], typer.Option("--out", help="Write the table to a file")] = None,
):
    """Slot dimensions, ranks and cohomology of a sequence for a range of degrees"""
    from .verify import SEQUENCE_NAMES, run_sequence

    r_max = r if r_max is None else r_max
    cfg = _prepare(command="dims", name=name, r=r, r_max=r_max, output_format=output_format, out=out)
    if name not in SEQUENCE_NAMES:
        _fail_usage(f"Unknown sequence: {name}")
    if r_max < r:
        _fail_usage(f"--rmax ({r_max}) must be >= --r ({r})")

    try:
        reports = _run([(run_sequence, (name, degree)) for degree in range(r, r_max + 1)], desc=f"dims {name}")
    except ValueError as e:
        _fail_usage(e)

    _emit(reports, cfg.output_format, cfg.out)
    if not all(report.passed for report in reports):
        raise typer.Exit(code=EXIT_FAILED)


def main():
    app()


if __name__ == "__main__":
    main()
