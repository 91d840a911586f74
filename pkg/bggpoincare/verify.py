"""
Exactness and cohomology of polynomial BGG sequences.

Every proxy operator is homogeneous, so a sequence splits into blocks of
fixed polynomial degree; ranks are computed exactly block by block and summed.
"""

import csv
import json
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from .bggcore import (bgg_d, bgg_family, bgg_poincare, builtin_diagram,
                      complexify, element_from_proxy, element_labels,
                      element_to_json, upsilon_basis)
from .derham import proxy_operator
from .forms import (field_in_space, flatten_field, proxy_to_form,
                    shape_field, value_space)
from .linear import LinearOp, in_span, span_rank
from .ratpoly import Poly, monomial_basis, monomial_count
from .schemas import SequenceReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequenceSpec:
    """Slots (value space, degree shift) linked by proxy operators"""

    slots: Tuple[Tuple[str, int], ...]
    operators: Tuple[str, ...]
    expected_h0: int
    diagram: Optional[str] = None


SEQUENCES = {
    "poly-elast": SequenceSpec((("V", 0), ("S", -1), ("S", -3), ("V", -4)), ("def", "inc", "div"), 6, "elasticity"),
    "poly-hess": SequenceSpec((("R", 0), ("S", -2), ("T", -3), ("V", -4)), ("hess", "curl", "div"), 4, "hessian"),
    "poly-divdiv": SequenceSpec((("V", 0), ("T", -1), ("S", -2), ("R", -4)), ("devgrad", "symcurl", "divdiv"), 4, "divdiv"),
    "poly-conf-hess": SequenceSpec((("R", 0), ("ST", -2), ("ST", -3), ("R", -5)), ("devhess", "symcurl", "divdiv"), 5),
    "poly-conf-def": SequenceSpec((("V", 0), ("ST", -1), ("ST", -4), ("V", -5)), ("devdef", "cot", "div"), 10),
}

# Degrees of the homogeneous slots H_(r+4) x V <- H_(r+3) x S <- H_(r+1) x S <- H_r x V
HOMOGENEOUS_SHIFTS = (4, 3, 1, 0)

_DIAGRAM_SEQUENCES = {spec.diagram: name for name, spec in SEQUENCES.items() if spec.diagram}

N = 3


def euler_characteristic(dims):
    return sum((-1) ** i * dim for i, dim in enumerate(dims))


def resolve_sequence(name):
    """Accept a sequence name or the name of its diagram"""
    name = _DIAGRAM_SEQUENCES.get(name, name)
    if name not in SEQUENCES:
        raise ValueError(f"Unknown sequence: {name}")
    return name, SEQUENCES[name]


def slot_basis(tag, degree, reverse=False):
    """Homogeneous fields of the given degree valued in ``tag``"""
    if degree < 0:
        return []
    space = value_space(tag, N)
    fields = []
    for vector in space.basis:
        for m in monomial_basis(N, degree, mode="homogeneous", reverse=reverse):
            values = [Poly.monomial(m, c) if c else Poly.zero(N) for c in vector]
            fields.append(shape_field(values, space.ambient, N))
    return fields


def field_labels(field):
    return {
        (e, m): c
        for e, poly in enumerate(flatten_field(field, N))
        for m, c in poly.terms.items()
    }


def combine_fields(fields, coeffs, tag):
    """Linear combination sum_k coeffs[k] fields[k]"""
    space = value_space(tag, N)
    values = [Poly.zero(N)] * space.ambient_dim
    for k, c in coeffs.items():
        values = [v + p * c for v, p in zip(values, flatten_field(fields[k], N))]
    return shape_field(values, space.ambient, N)


def _is_zero_field(field):
    return not any(flatten_field(field, N))


def _kernel_fields(fields, images):
    if not fields:
        return []
    rows = sorted({label for image in images for label in image}, key=repr)
    return LinearOp.from_columns(rows, images).kernel()


def _witness(spec, index, fields, images, tag):
    """D P u = u for u in the kernel of the outgoing operator"""
    diagram = builtin_diagram(spec.diagram)
    if images is None:
        kernel = [{k: 1} for k in range(len(fields))]
    else:
        kernel = _kernel_fields(fields, images)
    for coeffs in kernel:
        field = combine_fields(fields, coeffs, tag)
        u = element_from_proxy(diagram, index, field)
        if bgg_d(bgg_poincare(u)) != u:
            return element_to_json(u)
    return None


def verify_polynomial_complex(name, r, order="grlex", witness=False):
    """
    Dimensions, ranks and cohomology of a polynomial BGG sequence.

    Args:
        name: One of ``SEQUENCES`` (or its diagram name)
        r: Polynomial degree of the first slot
        order: "grlex" or "reverse" monomial order
        witness: Also check D P = I on kernel bases (diagram-backed sequences)
    """
    if r < 0:
        raise ValueError(f"Degree must be >= 0, got {r}")
    if order not in ("grlex", "reverse"):
        raise ValueError(f"Unknown monomial order: {order}")
    name, spec = resolve_sequence(name)
    if witness and spec.diagram is None:
        raise ValueError(f"{name} has no diagram to witness with")
    reverse = order == "reverse"
    length = len(spec.slots)
    logger.info(f"Verifying {name} at r={r} ({order})")

    dims = [
        value_space(tag, N).dim * monomial_count(N, r + shift) for tag, shift in spec.slots
    ]
    ranks = [0] * length
    verdicts = {"complex": True, "maps into slots": True}
    counterexample = None

    for m in range(r + 1):
        blocks = [slot_basis(tag, m + shift, reverse) for tag, shift in spec.slots]
        for i, op in enumerate(spec.operators):
            fields = blocks[i]
            if not fields:
                continue
            images = [proxy_operator(op, f) for f in fields]
            target = spec.slots[i + 1][0]
            columns = [field_labels(x) for x in images]
            ranks[i] += span_rank(columns)
            if not all(field_in_space(x, target, N) for x in images):
                verdicts["maps into slots"] = False
            if i + 1 < len(spec.operators):
                following = spec.operators[i + 1]
                if not all(_is_zero_field(proxy_operator(following, x)) for x in images):
                    verdicts["complex"] = False
            if witness and i >= 1:
                failure = _witness(spec, i, fields, columns, spec.slots[i][0])
                if failure is not None:
                    verdicts["witness D.P = I"] = False
                    counterexample = counterexample or failure
        if witness and blocks[-1]:
            failure = _witness(spec, length - 1, blocks[-1], None, spec.slots[-1][0])
            if failure is not None:
                verdicts["witness D.P = I"] = False
                counterexample = counterexample or failure
    if witness:
        verdicts.setdefault("witness D.P = I", True)

    cohomology = [
        dims[i] - ranks[i] - (ranks[i - 1] if i >= 1 else 0) for i in range(length)
    ]
    chi = euler_characteristic(dims)
    verdicts["euler characteristic"] = chi == euler_characteristic(cohomology)
    verdicts["exact in positive degrees"] = not any(cohomology[1:])
    verdicts["degree 0 cohomology"] = cohomology[0] == spec.expected_h0
    report = SequenceReport(
        name=name,
        r=r,
        slots=[f"P_{r + shift} x {tag}" for tag, shift in spec.slots],
        dims=dims,
        rank_out=ranks,
        cohomology=cohomology,
        euler_characteristic=chi,
        expected_h0=spec.expected_h0,
        verdicts=verdicts,
        passed=all(verdicts.values()),
        counterexample=counterexample,
    )
    if not report.passed:
        logger.warning(f"{name} at r={r} failed: {verdicts}")
    return report


def degree0_kernel_basis(name, r):
    """Kernel of the first operator on the degree-r slot, as 0-forms"""
    name, spec = resolve_sequence(name)
    tag = spec.slots[0][0]
    op = spec.operators[0]
    basis = []
    for m in range(r + 1):
        fields = slot_basis(tag, m)
        images = [field_labels(proxy_operator(op, f)) for f in fields]
        for coeffs in _kernel_fields(fields, images):
            basis.append(proxy_to_form(combine_fields(fields, coeffs, tag), N, 0, tag))
    return basis


def verify_homogeneous_poincare(r, name="elasticity"):
    """
    The BGG Poincare operators map H_(r+4) x V <- H_(r+3) x S <- H_(r+1) x S <- H_r x V.

    Reported with slot dimensions and the rank of each P; no cohomology.
    """
    if r < 0:
        raise ValueError(f"Degree must be >= 0, got {r}")
    diagram = builtin_diagram(name)
    degrees = [r + shift for shift in HOMOGENEOUS_SHIFTS]
    tags = [tag for tag, _ in resolve_sequence(name)[1].slots]
    dims = []
    ranks = [0]
    verdicts = {}
    counterexample = None
    for i, degree in enumerate(degrees):
        basis = upsilon_basis(diagram, i, degree, mode="homogeneous")
        dims.append(len(basis))
        if i == 0:
            continue
        images = [bgg_poincare(u) for u in basis]
        ranks.append(span_rank([element_labels(x) for x in images]))
        inside = True
        for u, x in zip(basis, images):
            if not all(poly.is_homogeneous(degrees[i - 1]) for poly in x.fibers().values()):
                inside = False
                counterexample = counterexample or element_to_json(u)
                break
        verdicts[f"P^{i} maps into H_{degrees[i - 1]}"] = inside
    report = SequenceReport(
        name="homog-elast" if name == "elasticity" else f"homog-{name}",
        r=r,
        slots=[f"H_{degree} x {tag}" for degree, tag in zip(degrees, tags)],
        dims=dims,
        rank_out=ranks,
        cohomology=None,
        euler_characteristic=euler_characteristic(dims),
        verdicts=verdicts,
        passed=all(verdicts.values()),
        counterexample=counterexample,
    )
    if not report.passed:
        logger.warning(f"Homogeneous grading fails at r={r}: {verdicts}")
    return report


def _enriched_spaces(diagram, r, family):
    length = diagram.n + 1
    base = [upsilon_basis(diagram, i, r) for i in range(length)]
    spaces = []
    for i in range(length):
        extra = [family.p(u) for u in base[i + 1]] if i + 1 < length else []
        spaces.append(base[i] + [x for x in extra if x])
    return base, spaces


def _closure(elements, space_vectors, image_fn):
    """First element whose image leaves the span, or None"""
    images = [element_labels(image_fn(u)) for u in elements]
    if span_rank(space_vectors + images) == span_rank(space_vectors):
        return None
    for u, image in zip(elements, images):
        if not in_span(space_vectors, image):
            return u
    return None


def verify_enriched_complex(name, r):
    """
    The equal-degree sequence P_r x Y^i enlarged by P~[P_r x Y^(i+1)].

    Checks that D and the complexified P preserve the enlarged spaces, the
    homotopy identity on them, and computes the cohomology. Also records an
    element showing that P does not preserve the plain equal-degree spaces.
    """
    name = {v: k for k, v in _DIAGRAM_SEQUENCES.items()}.get(name, name)
    diagram = builtin_diagram(name)
    family = complexify(bgg_family())
    base, spaces = _enriched_spaces(diagram, r, family)
    length = len(spaces)
    vectors = [[element_labels(u) for u in space] for space in spaces]
    logger.info(f"Verifying enriched {name} complex at r={r}")

    verdicts = {}
    counterexample = {}
    for i in range(length):
        if i + 1 < length:
            failure = _closure(spaces[i], vectors[i + 1], family.d)
            verdicts[f"D maps E^{i} into E^{i + 1}"] = failure is None
            if failure is not None:
                counterexample.setdefault("D", element_to_json(failure))
        if i >= 1:
            failure = _closure(spaces[i], vectors[i - 1], family.p)
            verdicts[f"P maps E^{i} into E^{i - 1}"] = failure is None
            if failure is not None:
                counterexample.setdefault("P", element_to_json(failure))

    homotopy = True
    for i, space in enumerate(spaces):
        for u in space:
            du = family.d(u) if i + 1 < length else None
            if i == 0:
                ok = family.d(family.p(du)) == du if du else True
            else:
                lhs = family.d(family.p(u))
                if du:
                    lhs = lhs + family.p(du)
                ok = lhs == u
            if not ok:
                homotopy = False
                counterexample.setdefault("homotopy", element_to_json(u))
                break
    verdicts["D.P + P.D = I"] = homotopy

    # P^1 raises the polynomial degree, so the plain spaces are not preserved
    unenriched = None
    plain = [element_labels(u) for u in base[0]]
    for u in base[1]:
        if not in_span(plain, element_labels(family.p(u))):
            unenriched = u
            break
    if unenriched is not None:
        counterexample["unenriched"] = element_to_json(unenriched)
    verdicts["plain spaces not P-closed"] = unenriched is not None

    dims = [span_rank(v) for v in vectors]
    ranks = [
        span_rank([element_labels(family.d(u)) for u in space]) if i + 1 < length else 0
        for i, space in enumerate(spaces)
    ]
    cohomology = [dims[i] - ranks[i] - (ranks[i - 1] if i >= 1 else 0) for i in range(length)]
    passed_keys = [k for k in verdicts if k != "plain spaces not P-closed"]
    report = SequenceReport(
        name=f"enriched-{name}",
        r=r,
        slots=[f"E^{i}" for i in range(length)],
        dims=dims,
        rank_out=ranks,
        cohomology=cohomology,
        euler_characteristic=euler_characteristic(dims),
        verdicts=verdicts,
        passed=all(verdicts[k] for k in passed_keys),
        counterexample=counterexample or None,
    )
    if not report.passed:
        logger.warning(f"Enriched {name} complex fails at r={r}: {verdicts}")
    return report


# Output


def write_dims_csv(reports, stream):
    """One row per slot: name, r, slot, dim, rank_out, cohomology"""
    writer = csv.DictWriter(stream, fieldnames=["name", "r", "slot", "dim", "rank_out", "cohomology"])
    writer.writeheader()
    for report in reports:
        for i, slot in enumerate(report.slots):
            writer.writerow({
                "name": report.name,
                "r": report.r,
                "slot": slot,
                "dim": report.dims[i],
                "rank_out": report.rank_out[i],
                "cohomology": "" if report.cohomology is None else report.cohomology[i],
            })


def reports_to_json(reports):
    return json.dumps([report.model_dump() for report in reports], indent=2)


HOMOGENEOUS_NAMES = {"homog-elast": "elasticity"}
ENRICHED_NAMES = {f"enriched-{spec.diagram}": spec.diagram for spec in SEQUENCES.values() if spec.diagram}
SEQUENCE_NAMES = tuple(SEQUENCES) + tuple(HOMOGENEOUS_NAMES) + tuple(ENRICHED_NAMES)


def run_sequence(name, r, order="grlex", witness=False):
    """Dispatch a sequence name to the matching verification"""
    if name in HOMOGENEOUS_NAMES:
        return verify_homogeneous_poincare(r, HOMOGENEOUS_NAMES[name])
    if name in ENRICHED_NAMES:
        return verify_enriched_complex(ENRICHED_NAMES[name], r)
    return verify_polynomial_complex(name, r, order, witness)
