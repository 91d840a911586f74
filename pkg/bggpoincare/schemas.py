"""Pydantic models for run configuration, reports and the JSON wire formats."""

from typing import Any, List, Optional

from pydantic import BaseModel, Field, field_validator

from .ratpoly import parse_rational

VERIFY_TARGETS = ("derham", "twisted", "bgg", "abstract", "polyseq")
OUTPUT_FORMATS = ("json", "csv", "text")
VALUE_TAGS = ("R", "V", "M", "S", "K", "T", "ST")


def _check_rational(value):
    parse_rational(value)
    return value


class TermModel(BaseModel):
    I: List[int]
    a: int = Field(ge=0)
    monomial: List[int]
    coeff: str

    @field_validator("coeff")
    @classmethod
    def coeff_is_rational(cls, value):
        return _check_rational(value)

    @field_validator("monomial")
    @classmethod
    def exponents_non_negative(cls, value):
        if any(e < 0 for e in value):
            raise ValueError("Monomial exponents must be non-negative")
        return value


class PolyFormModel(BaseModel):
    n: int = Field(ge=1)
    k: int = Field(ge=0)
    value: str
    terms: List[TermModel] = []

    @field_validator("value")
    @classmethod
    def known_value_space(cls, value):
        if value not in VALUE_TAGS:
            raise ValueError(f"Unknown value space: {value}")
        return value


class MatrixEntryModel(BaseModel):
    row: int = Field(ge=0)
    col: int = Field(ge=0)
    value: str

    @field_validator("value")
    @classmethod
    def value_is_rational(cls, value):
        return _check_rational(value)


class FiniteComplexModel(BaseModel):
    dims: List[int]
    d: List[List[MatrixEntryModel]]

    @field_validator("dims")
    @classmethod
    def dims_non_negative(cls, value):
        if any(dim < 0 for dim in value):
            raise ValueError("Space dimensions must be non-negative")
        return value


class ElementModel(BaseModel):
    """Twisted or BGG element: one PolyForm per diagram row"""

    diagram: str
    degree: int = Field(ge=0)
    components: List[PolyFormModel]


class IdentityReport(BaseModel):
    identity: str
    scope: str
    degree: Optional[int] = None
    checked: int = 0
    passed: bool = True
    counterexample: Optional[Any] = None


class SequenceReport(BaseModel):
    name: str
    r: int
    slots: List[str]
    dims: List[int]
    rank_out: List[int]
    cohomology: Optional[List[int]] = None
    euler_characteristic: int
    expected_h0: Optional[int] = None
    verdicts: dict = {}
    passed: bool = True
    counterexample: Optional[Any] = None


class RunConfig(BaseModel):
    """Validated command-line inputs"""

    command: str
    target: Optional[str] = None
    diagram: Optional[str] = None
    name: Optional[str] = None
    n: int = Field(default=3, ge=1, le=3)
    r: Optional[int] = Field(default=None, ge=0)
    r_max: int = Field(default=3, ge=0)
    seed: int = 0
    output_format: str = "text"
    out: Optional[str] = None

    @field_validator("output_format")
    @classmethod
    def known_format(cls, value):
        if value not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format: {value}")
        return value

    @field_validator("target")
    @classmethod
    def known_target(cls, value):
        if value is not None and value not in VERIFY_TARGETS:
            raise ValueError(f"Unknown verification target: {value}")
        return value
