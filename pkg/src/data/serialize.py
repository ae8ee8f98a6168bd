"""JSON codec for the toolkit's values.

Rationals travel as "num/den" strings (integers as "n"), residues of F_l as
plain integers next to a field tag ("ql" or "f<l>"). Every document read from
disk is validated against one of the schemas shipped in ``schemas/``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError
from referencing import Registry, Resource
from referencing.jsonschema import DRAFT202012

from src.algebra.exactlin import QQ, Matrix, PrimeField, Subspace, field_from_tag
from src.errors import MalformedInput
from src.stability.feathered import FeatherWeights, FlagConfiguration
from src.stability.kronecker import MatrixTuple, OneParamSubgroup, StabilityVerdict
from src.weights.multiweight import CompactnessCertificate, MultiWeight, ParabolicLine

SCHEMA_DIR = Path(__file__).resolve().parents[2] / "schemas"


def frac_to_str(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def frac_from_str(text) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise MalformedInput(f"expected a rational string, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise MalformedInput(f"bad rational {text!r}: {e}") from e


def scalar_to_json(field, x):
    return int(x) if isinstance(field, PrimeField) else frac_to_str(x)


def scalar_from_json(field, x):
    if isinstance(field, PrimeField):
        return field.coerce(frac_from_str(x) if isinstance(x, str) else x)
    return frac_from_str(x)


# -- linear algebra ----------------------------------------------------------

def matrix_to_json(m: Matrix) -> list:
    return [[scalar_to_json(m.field, x) for x in row] for row in m.as_rows()]


def subspace_to_json(u: Subspace) -> dict:
    return {"ambient_dim": u.ambient_dim, "dim": u.dim,
            "basis": [[scalar_to_json(u.field, x) for x in r] for r in u.rows]}


def subspace_from_json(field, n: int, vectors) -> Subspace:
    return Subspace.span(field, n, [[scalar_from_json(field, x) for x in v] for v in vectors])


def tuple_to_json(A: MatrixTuple) -> dict:
    return {"field": A.field.tag, "p": A.p, "q": A.q, "matrices": [matrix_to_json(a) for a in A.mats]}


def tuple_from_json(doc: dict, field_tag: str | None = None) -> MatrixTuple:
    """Parse a tuple; a field_tag other than the document's reduces rational entries mod l."""
    field = field_from_tag(doc["field"])
    mats = [[[scalar_from_json(field, x) for x in row] for row in m] for m in doc["matrices"]]
    A = MatrixTuple.build(field, mats)
    if (A.p, A.q) != (doc.get("p", A.p), doc.get("q", A.q)):
        raise MalformedInput(f"declared shape ({doc.get('p')},{doc.get('q')}) but matrices are {A.q}x{A.p}")
    if field_tag is None or field_tag == A.field.tag:
        return A
    target = field_from_tag(field_tag)
    if A.field != QQ or not isinstance(target, PrimeField):
        raise MalformedInput(f"cannot move a {A.field.tag} tuple to {field_tag}")
    return A.reduce(target.ell)


# -- weights ------------------------------------------------------------------

def _grid(rows) -> list:
    return [[frac_to_str(x) for x in r] for r in rows]


def _grid_from(rows) -> list:
    return [[frac_from_str(x) for x in r] for r in rows]


def multiweight_to_json(mw: MultiWeight) -> dict:
    return {"p": mw.p, "q": mw.q, "s": mw.s, "alpha": _grid(mw.alpha), "beta": _grid(mw.beta)}


def multiweight_from_json(doc: dict) -> MultiWeight:
    mw = MultiWeight.build(doc["p"], doc["q"], _grid_from(doc["alpha"]), _grid_from(doc["beta"]))
    if mw.s != doc.get("s", mw.s):
        raise MalformedInput(f"declared s={doc['s']} but {mw.s} punctures given")
    return mw


def certificate_to_json(cert: CompactnessCertificate) -> dict:
    return {
        "passed": cert.passed,
        "epsilon": frac_to_str(cert.epsilon),
        "interval": [frac_to_str(cert.j_low), frac_to_str(cert.j_high)],
        "d": cert.d,
        "deg_u": frac_to_str(cert.deg_u),
        "deg_v": frac_to_str(cert.deg_v),
        "toledo": frac_to_str(cert.toledo),
        "conditions": dict(cert.conditions),
        "margins": {k: frac_to_str(v) for k, v in cert.margins.items()},
    }


def line_to_json(line: ParabolicLine) -> dict:
    return {"degree": line.degree, "weights": [frac_to_str(w) for w in line.weights],
            "parabolic_degree": frac_to_str(line.parabolic_degree)}


# -- stability ------------------------------------------------------------------

def verdict_to_json(v: StabilityVerdict) -> dict:
    out = {"status": v.status.value, "examined": v.examined}
    if v.witness is not None:
        u, w = v.witness
        out["witness"] = {"U": subspace_to_json(u), "V": subspace_to_json(w)}
    if v.mu_value is not None:
        out["mu"] = frac_to_str(v.mu_value)
    if v.endomorphism_dim is not None:
        out["endomorphism_dim"] = v.endomorphism_dim
    return out


def _flag_from_basis(field, n: int, basis) -> tuple:
    # F_i = span of the first n - i basis vectors
    vecs = [[scalar_from_json(field, x) for x in v] for v in basis]
    if len(vecs) != n or any(len(v) != n for v in vecs):
        raise MalformedInput(f"a complete flag in dim {n} needs {n} basis vectors of length {n}")
    return tuple(Subspace.span(field, n, vecs[:n - i]) for i in range(n + 1))


def flags_from_json(doc: dict) -> FlagConfiguration:
    """Each flag is given by an ordered basis b_1..b_n with F_i = span(b_1, ..., b_(n-i))."""
    field = field_from_tag(doc["field"])
    p, q = len(doc["p_bases"][0]), len(doc["q_bases"][0])
    pf = tuple(_flag_from_basis(field, p, b) for b in doc["p_bases"])
    qf = tuple(_flag_from_basis(field, q, b) for b in doc["q_bases"])
    return FlagConfiguration(doc.get("s", len(pf)), pf, qf)


def feathers_to_json(fw) -> dict:
    return {"eta": _grid(fw.eta), "zeta": _grid(fw.zeta)}


def feathers_from_json(doc: dict) -> FeatherWeights:
    return FeatherWeights.build(_grid_from(doc["eta"]), _grid_from(doc["zeta"]))


def subgroup_from_json(doc: dict, field, p: int, q: int) -> OneParamSubgroup:
    """{"p": [[weight, [vectors]], ...], "q": [...]} with weights strictly decreasing."""
    def grading(pieces, n):
        return tuple((int(w), subspace_from_json(field, n, vecs)) for w, vecs in pieces)
    return OneParamSubgroup(grading(doc["p"], p), grading(doc["q"], q))


# -- documents ----------------------------------------------------------------

def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


@lru_cache(maxsize=None)
def _registry() -> Registry:
    """Every shipped schema keyed by its $id, so schemas can $ref each other."""
    reg = Registry()
    for path in sorted(SCHEMA_DIR.glob("*.json")):
        schema = json.loads(path.read_text())
        reg = reg.with_resource(schema["$id"], Resource.from_contents(schema, default_specification=DRAFT202012))
    return reg


@lru_cache(maxsize=None)
def _validator(name: str) -> Draft202012Validator:
    path = SCHEMA_DIR / f"{name}.json"
    schema = json.loads(path.read_text())
    Draft202012Validator.check_schema(schema)
    return Draft202012Validator(schema, registry=_registry())


def validate_doc(doc, schema: str):
    try:
        _validator(schema).validate(doc)
    except ValidationError as e:
        where = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise MalformedInput(f"{schema} document invalid at {where}: {e.message}") from e
    return doc


def load_json(path, schema: str | None = None):
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise MalformedInput(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise MalformedInput(f"{path} is not valid JSON: {e}") from e
    return validate_doc(doc, schema) if schema else doc
