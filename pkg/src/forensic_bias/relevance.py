"""Task relevance of case information, decided by conditional independence.

A piece of case information I is task-irrelevant for an evidence
comparison when conditioning on it changes nothing about the joint
behaviour of the evidence given the source hypothesis E:

    P(evidence | E) = P(evidence | I, E)   for every cell and outcome.

This module represents small discrete joints exactly, classifies a named
information variable as TaskRelevant or TaskIrrelevant by complete
enumeration, and builds joints from conditional-probability factors given
in topological order.

Joint fixture file format (one directive per line, '#' starts a comment):

    roles hypothesis=E info=I evidence=XY      # evidence may be "X,Y"
    variable E same diff
    variable I curved flat
    variable XY 00 01 10 11
    factor I
    | 0.3 0.7
    factor E | I
    curved | 0.6 0.4
    flat   | 0.5 0.5
    factor XY | I E
    curved same | 0.1 0.1 0.1 0.7
    ...

Each factor row lists the parent assignment left of the bar and the
probabilities over the child's domain (in declared order) right of it.
Probabilities are parsed as exact fractions, so a fixture designed to be
task-irrelevant yields a discrepancy of exactly zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Mapping, Sequence

__all__ = [
    "JointSchemaError",
    "ZeroMassEventError",
    "FiniteJoint",
    "Factor",
    "Verdict",
    "RelevanceVerdict",
    "classify_relevance",
    "classify_fixture",
    "joint_from_dag_factors",
    "parse_joint_fixture",
    "load_builtin_joint",
    "builtin_joint_names",
]

_SUM_TOLERANCE = 1e-9


class JointSchemaError(ValueError):
    """A joint or factor table is malformed (names, domains, keys, rows)."""


class ZeroMassEventError(ValueError):
    """A conditioning event has zero probability, so the check is undefined."""


def _check_domain(name: str, domain: Sequence[str]) -> tuple[str, ...]:
    domain = tuple(domain)
    if not domain:
        raise JointSchemaError(f"variable {name!r} has an empty domain")
    if len(set(domain)) != len(domain):
        raise JointSchemaError(f"variable {name!r} has duplicate domain values: {domain!r}")
    return domain


@dataclass(frozen=True)
class FiniteJoint:
    """An exact joint distribution over finitely many named variables.

    `variables` fixes the order of assignment tuples; `pmf` maps full
    assignments to masses.  Assignments not listed carry zero mass.
    Masses may be floats or Fractions; Fractions keep fixture arithmetic
    exact all the way to the verdict.
    """

    variables: tuple[tuple[str, tuple[str, ...]], ...]
    pmf: Mapping[tuple[str, ...], object] = field(hash=False)

    def __post_init__(self) -> None:
        variables = tuple((name, _check_domain(name, dom)) for name, dom in self.variables)
        if not variables:
            raise JointSchemaError("a joint needs at least one variable")
        names = [name for name, _ in variables]
        if len(set(names)) != len(names):
            raise JointSchemaError(f"duplicate variable names: {names!r}")
        pmf = {tuple(key): mass for key, mass in self.pmf.items()}
        total = 0
        for key, mass in pmf.items():
            if len(key) != len(variables):
                raise JointSchemaError(
                    f"assignment {key!r} has {len(key)} values for {len(variables)} variables"
                )
            for value, (name, dom) in zip(key, variables):
                if value not in dom:
                    raise JointSchemaError(
                        f"assignment {key!r}: {value!r} is not in the domain of {name!r}"
                    )
            if mass < 0:
                raise JointSchemaError(f"negative mass {mass!r} at {key!r}")
            total += mass
        if abs(total - 1) > _SUM_TOLERANCE:
            raise JointSchemaError(f"joint mass sums to {total!r}, not 1")
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "pmf", pmf)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.variables)

    def domain(self, name: str) -> tuple[str, ...]:
        for var, dom in self.variables:
            if var == name:
                return dom
        raise JointSchemaError(f"no variable named {name!r} in joint over {self.names!r}")

    def index(self, name: str) -> int:
        for i, (var, _) in enumerate(self.variables):
            if var == name:
                return i
        raise JointSchemaError(f"no variable named {name!r} in joint over {self.names!r}")

    def outcomes(self):
        """All assignments in domain order, including zero-mass ones."""
        return itertools.product(*(dom for _, dom in self.variables))

    def mass(self, assignment: tuple[str, ...]):
        return self.pmf.get(tuple(assignment), 0)


class Verdict(Enum):
    TASK_RELEVANT = "TaskRelevant"
    TASK_IRRELEVANT = "TaskIrrelevant"


@dataclass(frozen=True)
class RelevanceVerdict:
    verdict: Verdict
    max_discrepancy: float

    @property
    def task_relevant(self) -> bool:
        return self.verdict is Verdict.TASK_RELEVANT


def classify_relevance(
    joint: FiniteJoint,
    tolerance: float = 1e-9,
    *,
    evidence: Sequence[str] = ("X", "Y"),
    info: str = "I",
    hypothesis: str = "E",
) -> RelevanceVerdict:
    """Classify `info` by comparing P(evidence|E) with P(evidence|I,E).

    Enumerates every hypothesis outcome, every info outcome, and every
    joint evidence cell; the verdict is TaskIrrelevant exactly when the
    largest absolute difference between the two conditionals is within
    `tolerance`.  Raises ZeroMassEventError if any conditioning event
    (a hypothesis outcome, or a hypothesis-info pair) has zero mass.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be nonnegative, got {tolerance!r}")
    evidence = tuple(evidence)
    if not evidence:
        raise JointSchemaError("evidence must name at least one variable")
    roles = (*evidence, info, hypothesis)
    if len(set(roles)) != len(roles):
        raise JointSchemaError(f"evidence/info/hypothesis roles overlap: {roles!r}")
    ev_idx = tuple(joint.index(name) for name in evidence)
    i_idx = joint.index(info)
    e_idx = joint.index(hypothesis)

    # One sweep over the support accumulates every marginal we need.
    mass_e: dict[str, object] = {}
    mass_ie: dict[tuple[str, str], object] = {}
    mass_ze: dict[tuple[tuple[str, ...], str], object] = {}
    mass_zie: dict[tuple[tuple[str, ...], str, str], object] = {}
    for key, mass in joint.pmf.items():
        z = tuple(key[i] for i in ev_idx)
        i_val, e_val = key[i_idx], key[e_idx]
        mass_e[e_val] = mass_e.get(e_val, 0) + mass
        mass_ie[i_val, e_val] = mass_ie.get((i_val, e_val), 0) + mass
        mass_ze[z, e_val] = mass_ze.get((z, e_val), 0) + mass
        mass_zie[z, i_val, e_val] = mass_zie.get((z, i_val, e_val), 0) + mass

    cells = tuple(itertools.product(*(joint.domain(name) for name in evidence)))
    worst = 0
    for e_val in joint.domain(hypothesis):
        p_e = mass_e.get(e_val, 0)
        if p_e == 0:
            raise ZeroMassEventError(f"conditioning event {hypothesis}={e_val} has zero mass")
        for i_val in joint.domain(info):
            p_ie = mass_ie.get((i_val, e_val), 0)
            if p_ie == 0:
                raise ZeroMassEventError(
                    f"conditioning event {info}={i_val}, {hypothesis}={e_val} has zero mass"
                )
            for z in cells:
                lhs = mass_ze.get((z, e_val), 0) / p_e
                rhs = mass_zie.get((z, i_val, e_val), 0) / p_ie
                gap = abs(lhs - rhs)
                if gap > worst:
                    worst = gap
    verdict = Verdict.TASK_IRRELEVANT if worst <= tolerance else Verdict.TASK_RELEVANT
    return RelevanceVerdict(verdict, float(worst))


@dataclass(frozen=True)
class Factor:
    """Conditional table P(variable | parents) for one node of a DAG.

    `table` maps each full parent assignment (a tuple, empty for roots)
    to the probabilities over `domain` in order.  Every row must sum to 1
    within 1e-9.
    """

    variable: str
    domain: tuple[str, ...]
    parents: tuple[str, ...] = ()
    table: Mapping[tuple[str, ...], Sequence[object]] = field(default_factory=dict, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "domain", _check_domain(self.variable, self.domain))
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", {tuple(k): tuple(v) for k, v in self.table.items()})


def joint_from_dag_factors(factors: Sequence[Factor]) -> FiniteJoint:
    """Multiply conditional factors, given in topological order, into a joint.

    Each factor's parents must already have been declared by an earlier
    factor; rows are validated for arity, domain membership, and unit sum.
    """
    factors = tuple(factors)
    if not factors:
        raise JointSchemaError("joint_from_dag_factors requires at least one factor")
    declared: dict[str, tuple[str, ...]] = {}
    for f in factors:
        if f.variable in declared:
            raise JointSchemaError(f"variable {f.variable!r} declared twice")
        for parent in f.parents:
            if parent not in declared:
                raise JointSchemaError(
                    f"factor for {f.variable!r} references undeclared parent {parent!r}"
                )
        expected_rows = 1
        for parent in f.parents:
            expected_rows *= len(declared[parent])
        if len(f.table) != expected_rows:
            raise JointSchemaError(
                f"factor for {f.variable!r} has {len(f.table)} rows, expected {expected_rows}"
            )
        for key, row in f.table.items():
            if len(key) != len(f.parents):
                raise JointSchemaError(
                    f"factor for {f.variable!r}: row key {key!r} does not match parents {f.parents!r}"
                )
            for value, parent in zip(key, f.parents):
                if value not in declared[parent]:
                    raise JointSchemaError(
                        f"factor for {f.variable!r}: {value!r} not in domain of parent {parent!r}"
                    )
            if len(row) != len(f.domain):
                raise JointSchemaError(
                    f"factor for {f.variable!r}: row {key!r} has {len(row)} entries "
                    f"for a domain of size {len(f.domain)}"
                )
            if any(p < 0 for p in row):
                raise JointSchemaError(f"factor for {f.variable!r}: negative entry in row {key!r}")
            total = sum(row)
            if abs(total - 1) > _SUM_TOLERANCE:
                raise JointSchemaError(
                    f"factor for {f.variable!r}: row {key!r} sums to {total!r}, not 1"
                )
        declared[f.variable] = f.domain

    variables = tuple((f.variable, f.domain) for f in factors)
    order = {f.variable: i for i, f in enumerate(factors)}
    pmf: dict[tuple[str, ...], object] = {}
    for assignment in itertools.product(*(f.domain for f in factors)):
        mass = 1
        for f in factors:
            parent_key = tuple(assignment[order[p]] for p in f.parents)
            mass = mass * f.table[parent_key][f.domain.index(assignment[order[f.variable]])]
            if mass == 0:
                break
        if mass != 0:
            pmf[assignment] = mass
    return FiniteJoint(variables, pmf)


def _parse_number(token: str) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise JointSchemaError(f"cannot parse probability {token!r}") from exc


def parse_joint_fixture(text: str) -> tuple[FiniteJoint, dict[str, tuple[str, ...]]]:
    """Parse the fixture format described in the module docstring.

    Returns the joint and a role map with keys "hypothesis", "info",
    "evidence" (each a tuple of variable names).
    """
    roles: dict[str, tuple[str, ...]] = {}
    domains: dict[str, tuple[str, ...]] = {}
    var_order: list[str] = []
    factors: list[Factor] = []
    current: dict | None = None  # {"variable": str, "parents": tuple, "rows": dict}

    def flush() -> None:
        nonlocal current
        if current is not None:
            factors.append(
                Factor(
                    variable=current["variable"],
                    domain=domains[current["variable"]],
                    parents=current["parents"],
                    table=current["rows"],
                )
            )
            current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "roles":
            for spec in tokens[1:]:
                if "=" not in spec:
                    raise JointSchemaError(f"line {lineno}: bad role {spec!r}")
                role, names = spec.split("=", 1)
                if role not in ("hypothesis", "info", "evidence"):
                    raise JointSchemaError(f"line {lineno}: unknown role {role!r}")
                roles[role] = tuple(n for n in names.split(",") if n)
        elif head == "variable":
            if len(tokens) < 3:
                raise JointSchemaError(f"line {lineno}: variable needs a name and a domain")
            name = tokens[1]
            if name in domains:
                raise JointSchemaError(f"line {lineno}: variable {name!r} declared twice")
            domains[name] = tuple(tokens[2:])
            var_order.append(name)
        elif head == "factor":
            flush()
            rest = [t for t in tokens[1:] if t != "|"]
            if not rest:
                raise JointSchemaError(f"line {lineno}: factor needs a variable name")
            child, parents = rest[0], tuple(rest[1:])
            if child not in domains:
                raise JointSchemaError(f"line {lineno}: factor for undeclared variable {child!r}")
            current = {"variable": child, "parents": parents, "rows": {}}
        elif "|" in line:
            if current is None:
                raise JointSchemaError(f"line {lineno}: probability row outside a factor block")
            left, _, right = line.partition("|")
            key = tuple(left.split())
            row = tuple(_parse_number(t) for t in right.split())
            if key in current["rows"]:
                raise JointSchemaError(f"line {lineno}: duplicate row for parents {key!r}")
            current["rows"][key] = row
        else:
            raise JointSchemaError(f"line {lineno}: cannot parse {raw!r}")
    flush()

    if {f.variable for f in factors} != set(var_order):
        missing = sorted(set(var_order) - {f.variable for f in factors})
        raise JointSchemaError(f"variables without a factor: {missing!r}")
    for role in ("hypothesis", "info", "evidence"):
        if role not in roles:
            raise JointSchemaError(f"fixture does not declare a {role} role")
        for name in roles[role]:
            if name not in domains:
                raise JointSchemaError(f"role {role} names undeclared variable {name!r}")
    if len(roles["hypothesis"]) != 1 or len(roles["info"]) != 1:
        raise JointSchemaError("hypothesis and info roles must each name exactly one variable")
    return joint_from_dag_factors(factors), roles


def classify_fixture(text: str, tolerance: float = 1e-9) -> RelevanceVerdict:
    """Parse a fixture and classify its info variable."""
    joint, roles = parse_joint_fixture(text)
    return classify_relevance(
        joint,
        tolerance,
        evidence=roles["evidence"],
        info=roles["info"][0],
        hypothesis=roles["hypothesis"][0],
    )


def _joint_dir():
    return resources.files("forensic_bias").joinpath("fixtures/joints")


def builtin_joint_names() -> tuple[str, ...]:
    return tuple(
        sorted(
            path.name.removesuffix(".txt")
            for path in _joint_dir().iterdir()
            if path.name.endswith(".txt")
        )
    )


def load_builtin_joint(name: str) -> tuple[FiniteJoint, dict[str, tuple[str, ...]]]:
    path = _joint_dir().joinpath(f"{name}.txt")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise KeyError(f"no built-in joint fixture named {name!r}; have {builtin_joint_names()!r}")
    return parse_joint_fixture(text)
