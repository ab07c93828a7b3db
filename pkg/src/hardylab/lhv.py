"""Local-hidden-variable side: deduction replay and exact feasibility.

A local deterministic model assigns a fixed 0/1 value to each of the four
observables; a local model in general is a probability mixture over the
16 such assignments.  :func:`feasibility` decides, in exact rational
arithmetic end to end, whether a given four-context probability table is
such a mixture, and always emits a machine-checkable certificate:

* feasible   -> an explicit weight vector reproducing every cell exactly;
* infeasible -> a separating linear functional (rational coefficients)
  that is nonnegative on every deterministic assignment but strictly
  negative on the table, together with the human-readable deduction chain
  whenever the table exhibits the Hardy pattern.

Stochastic local models are mixtures of deterministic ones, so deciding
over the 16-vertex polytope loses no generality.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Sequence

from .core import HardyLabError, tolerance
from .observables import CONTEXT_KEYS, HardyClaimSet, ProbabilityTable

#: Denominator bound used when converting float tables to exact rationals.
MAX_DENOMINATOR = 2**20

#: One deterministic assignment: values (d1, d2, u1, u2), each 0 or 1.
Assignment = tuple[int, int, int, int]

ASSIGNMENTS: tuple[Assignment, ...] = tuple(product((0, 1), repeat=4))

# context key -> the assignment components it constrains (first, second)
_CONTEXT_SLOTS: Mapping[str, tuple[int, int]] = {
    "d1d2": (0, 1),
    "d1u2": (0, 3),
    "u1d2": (2, 1),
    "u1u2": (2, 3),
}

#: One table cell: (context key, outcome of first, outcome of second).
Cell = tuple[str, int, int]

CELLS: tuple[Cell, ...] = tuple(
    (key, a, b) for key in CONTEXT_KEYS for a in (0, 1) for b in (0, 1)
)

ExactTable = dict[str, list[list[Fraction]]]


class RationalizationError(HardyLabError):
    """A float entry does not sit near a small-denominator rational."""


class MalformedTableError(HardyLabError):
    """A probability table fails its shape or normalization contract."""


def assignment_matches(assignment: Assignment, cell: Cell) -> bool:
    key, a, b = cell
    i, j = _CONTEXT_SLOTS[key]
    return assignment[i] == a and assignment[j] == b


def rationalize_table(
    table: ProbabilityTable | Mapping[str, Sequence[Sequence]],
    tol: float | None = None,
    max_denominator: int = MAX_DENOMINATOR,
) -> ExactTable:
    """Convert a table to exact rationals, refusing to round silently.

    Each float entry must be within ``tol`` of a rational with denominator
    at most ``max_denominator``; each context must then sum to exactly 1.
    Entries that are already Fractions or ints pass through unchanged.
    """
    tol = tolerance(tol)
    raw = table.contexts if isinstance(table, ProbabilityTable) else table
    if set(raw) != set(CONTEXT_KEYS):
        raise MalformedTableError(f"contexts must be exactly {CONTEXT_KEYS}")
    exact: ExactTable = {}
    for key in CONTEXT_KEYS:
        grid = [list(row) for row in raw[key]]
        if len(grid) != 2 or any(len(row) != 2 for row in grid):
            raise MalformedTableError(f"context {key!r} is not a 2x2 table")
        rows = []
        for row in grid:
            out = []
            for value in row:
                if isinstance(value, Fraction):
                    frac = value
                elif isinstance(value, int):
                    frac = Fraction(value)
                else:
                    frac = Fraction(float(value)).limit_denominator(max_denominator)
                    if abs(float(frac) - float(value)) > tol:
                        raise RationalizationError(
                            f"{value!r} in context {key!r} is not within {tol} of a "
                            f"rational with denominator <= {max_denominator}"
                        )
                if frac < 0:
                    raise MalformedTableError(f"negative entry {frac} in {key!r}")
                out.append(frac)
            rows.append(out)
        if sum(rows[0]) + sum(rows[1]) != 1:
            raise MalformedTableError(f"context {key!r} does not sum to 1")
        exact[key] = rows
    return exact


# --- deduction replay -----------------------------------------------------


@dataclass(frozen=True)
class DeductionStep:
    index: int
    name: str
    fired: bool
    detail: str

    def to_jsonable(self) -> dict:
        return {
            "step": self.index,
            "name": self.name,
            "fired": self.fired,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class DeductionTrace:
    steps: tuple[DeductionStep, ...]
    contradiction: bool
    halted_at: int | None

    def to_jsonable(self) -> dict:
        return {
            "steps": [s.to_jsonable() for s in self.steps],
            "contradiction": self.contradiction,
            "halted_at": self.halted_at,
        }


def replay_deductions(claims: HardyClaimSet, tol: float | None = None) -> DeductionTrace:
    """Replay the element-of-reality argument on a set of claimed values.

    The rules fire only on certainties: the conditionals must equal 1 and
    the final joint probability must equal 0 (within ``tol``).  The trace
    records each step; if a premise fails, later steps are not reached and
    ``halted_at`` names the first rule that could not fire.
    """
    tol = tolerance(tol)
    exists = claims.p_joint > tol
    c12_certain = abs(claims.c_d1u2 - 1.0) <= tol
    c21_certain = abs(claims.c_d2u1 - 1.0) <= tol
    u1u2_zero = abs(claims.p_u1u2) <= tol

    steps: list[DeductionStep] = []

    fired1 = exists and c12_certain
    if not exists:
        detail = f"joint D1=D2=1 run has probability {claims.p_joint}; no run to reason about"
    elif not c12_certain:
        detail = f"P(U2=1|D1=1) = {claims.c_d1u2} is not a certainty"
    else:
        detail = (
            f"a D1=D2=1 run exists (probability {claims.p_joint}) and "
            "P(U2=1|D1=1) = 1, so U2=1 is predetermined for it"
        )
    steps.append(DeductionStep(1, "U2 is an element of reality", fired1, detail))

    fired2 = fired1
    steps.append(
        DeductionStep(
            2,
            "locality transfer",
            fired2,
            "the distant choice of measurement cannot change the predetermined U2"
            if fired2
            else "not reached",
        )
    )

    fired3 = fired2 and c21_certain
    if not fired2:
        detail = "not reached"
    elif not c21_certain:
        detail = f"P(U1=1|D2=1) = {claims.c_d2u1} is not a certainty"
    else:
        detail = "the same run has D2=1 and P(U1=1|D2=1) = 1, so U1=1 is predetermined"
    steps.append(DeductionStep(3, "U1 is an element of reality", fired3, detail))

    fired4 = fired3 and u1u2_zero
    if not fired3:
        detail = "not reached"
    elif not u1u2_zero:
        detail = (
            f"the run would give U1=U2=1, but P(U1=1,U2=1) = {claims.p_u1u2} "
            "does not forbid that outcome"
        )
    else:
        detail = (
            "the run would give U1=U2=1, yet P(U1=1,U2=1) = 0: the local model "
            "contradicts the statistics"
        )
    steps.append(DeductionStep(4, "joint contradiction", fired4, detail))

    if fired4:
        return DeductionTrace(tuple(steps), True, None)
    halted = next(s.index for s in steps if not s.fired)
    return DeductionTrace(tuple(steps), False, halted)


# --- certificates ---------------------------------------------------------


@dataclass(frozen=True)
class LhvModel:
    """Mixture over deterministic assignments, exact weights summing to 1."""

    weights: Mapping[Assignment, Fraction]

    def __post_init__(self) -> None:
        weights = {k: Fraction(v) for k, v in self.weights.items()}
        if any(w < 0 for w in weights.values()):
            raise HardyLabError("model weights must be nonnegative")
        if sum(weights.values(), Fraction(0)) != 1:
            raise HardyLabError("model weights must sum to exactly 1")
        object.__setattr__(self, "weights", weights)

    def cell_probability(self, cell: Cell) -> Fraction:
        return sum(
            (w for a, w in self.weights.items() if assignment_matches(a, cell)),
            Fraction(0),
        )

    def to_jsonable(self) -> dict:
        return {
            "weights": [
                {
                    "assignment": {"d1": a[0], "d2": a[1], "u1": a[2], "u2": a[3]},
                    "weight": {"num": w.numerator, "den": w.denominator},
                }
                for a, w in sorted(self.weights.items())
                if w != 0
            ]
        }


@dataclass(frozen=True)
class InfeasibilityWitness:
    """Separating functional, optionally with the deduction chain behind it.

    ``functional`` maps table cells to rational coefficients f such that
    sum(f * cell_value) < 0 for the rejected table while
    sum(f * [assignment hits cell]) >= 0 for all 16 assignments; no
    nonnegative mixture can therefore reproduce the table.
    """

    functional: Mapping[Cell, Fraction]
    chain: tuple[DeductionStep, ...] | None = None

    @property
    def kind(self) -> str:
        return "deduction-chain" if self.chain is not None else "separating-functional"

    def to_jsonable(self) -> dict:
        payload = {
            "kind": self.kind,
            "functional": [
                {
                    "context": key,
                    "first": a,
                    "second": b,
                    "coefficient": {"num": c.numerator, "den": c.denominator},
                }
                for (key, a, b), c in sorted(self.functional.items())
            ],
        }
        if self.chain is not None:
            payload["chain"] = [s.to_jsonable() for s in self.chain]
        return payload


@dataclass(frozen=True)
class LhvCertificate:
    verdict: str  # "feasible" | "infeasible"
    model: LhvModel | None = None
    witness: InfeasibilityWitness | None = None

    def __post_init__(self) -> None:
        if self.verdict not in ("feasible", "infeasible"):
            raise HardyLabError(f"bad verdict {self.verdict!r}")
        if (self.verdict == "feasible") != (self.model is not None) or (
            self.verdict == "infeasible"
        ) != (self.witness is not None):
            raise HardyLabError("certificate must carry exactly the matching payload")

    def to_jsonable(self) -> dict:
        out: dict = {"verdict": self.verdict}
        if self.model is not None:
            out["model"] = self.model.to_jsonable()
        if self.witness is not None:
            out["witness"] = self.witness.to_jsonable()
        return out


# --- exact phase-1 simplex ------------------------------------------------


def _phase1_simplex(
    columns: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> tuple[list[Fraction] | None, list[Fraction] | None]:
    """Exact feasibility of ``A x = b, x >= 0`` with ``b >= 0``.

    Returns ``(x, None)`` when feasible.  Otherwise returns ``(None, y)``
    with the Farkas dual satisfying ``y . A_j <= 0`` for every column and
    ``y . b > 0``.  Bland's rule guarantees termination.
    """
    m = len(rhs)
    n = len(columns)
    # rows of [A | I | b], starting basis = artificial columns
    tableau = [
        [columns[j][i] for j in range(n)]
        + [Fraction(int(i == k)) for k in range(m)]
        + [rhs[i]]
        for i in range(m)
    ]
    basis = [n + i for i in range(m)]
    width = n + m + 1

    # reduced-cost row for objective: minimize the sum of artificials
    cost = [Fraction(0)] * width
    for j in range(width):
        total = sum((tableau[i][j] for i in range(m)), Fraction(0))
        cj = Fraction(1) if n <= j < n + m else Fraction(0)
        cost[j] = cj - total

    while True:
        entering = next((j for j in range(n + m) if cost[j] < 0), None)
        if entering is None:
            break
        pivot_row = None
        best = None
        for i in range(m):
            coef = tableau[i][entering]
            if coef > 0:
                ratio = tableau[i][-1] / coef
                if best is None or ratio < best or (
                    ratio == best and basis[i] < basis[pivot_row]
                ):
                    best, pivot_row = ratio, i
        if pivot_row is None:
            # Σ artificials is bounded below by 0; an unbounded pivot
            # column cannot occur for this objective.
            raise HardyLabError("phase-1 simplex lost boundedness")
        pivot = tableau[pivot_row][entering]
        tableau[pivot_row] = [v / pivot for v in tableau[pivot_row]]
        for i in range(m):
            if i != pivot_row and tableau[i][entering] != 0:
                f = tableau[i][entering]
                tableau[i] = [v - f * p for v, p in zip(tableau[i], tableau[pivot_row])]
        if cost[entering] != 0:
            f = cost[entering]
            cost = [v - f * p for v, p in zip(cost, tableau[pivot_row])]
        basis[pivot_row] = entering

    objective = -cost[-1]
    if objective == 0:
        x = [Fraction(0)] * n
        for i, var in enumerate(basis):
            if var < n:
                x[var] = tableau[i][-1]
        return x, None
    # duality: y_i = 1 - reduced cost of artificial column i; then
    # y.A_j = -cost_j <= 0 for structural columns and y.b = objective > 0.
    y = [Fraction(1) - cost[n + i] for i in range(m)]
    return None, y


# --- feasibility decision -------------------------------------------------


def _hardy_pattern_cells(exact: ExactTable) -> dict[Cell, Fraction] | None:
    """The four-cell Hardy pattern, if this table exhibits it."""
    p = exact["d1d2"][1][1]
    if (
        p > 0
        and exact["d1u2"][1][0] == 0
        and exact["u1d2"][0][1] == 0
        and exact["u1u2"][1][1] == 0
    ):
        return {
            ("d1d2", 1, 1): Fraction(-1),
            ("d1u2", 1, 0): Fraction(1),
            ("u1d2", 0, 1): Fraction(1),
            ("u1u2", 1, 1): Fraction(1),
        }
    return None


def _chain_for_pattern(exact: ExactTable) -> tuple[DeductionStep, ...]:
    p = exact["d1d2"][1][1]
    claims = HardyClaimSet(
        p_joint=float(p), c_d1u2=1.0, c_d2u1=1.0, p_u1u2=0.0
    )
    # tol=0: the pattern was established exactly, so the replay must fire
    # even for joint probabilities below the float comparison tolerance
    return replay_deductions(claims, tol=0.0).steps


def feasibility(
    table: ProbabilityTable | Mapping[str, Sequence[Sequence]] | ExactTable,
    tol: float | None = None,
) -> LhvCertificate:
    """Decide whether a table is a mixture of deterministic assignments.

    Accepts float or exact tables; floats are rationalized first (see
    :func:`rationalize_table`).  The decision runs in exact arithmetic:
    a phase-1 simplex over the 16 deterministic assignments.  Infeasible
    tables showing the Hardy pattern get the deduction-chain witness with
    its canonical functional; otherwise the simplex dual supplies the
    separating functional.  Every certificate is validated by
    re-substitution before it is returned.
    """
    exact = rationalize_table(table, tol)
    columns = [
        [Fraction(int(assignment_matches(a, cell))) for cell in CELLS]
        for a in ASSIGNMENTS
    ]
    rhs = [exact[key][a][b] for (key, a, b) in CELLS]
    x, y = _phase1_simplex(columns, rhs)

    if x is not None:
        model = LhvModel(dict(zip(ASSIGNMENTS, x)))
        cert = LhvCertificate("feasible", model=model)
    else:
        pattern = _hardy_pattern_cells(exact)
        if pattern is not None:
            witness = InfeasibilityWitness(pattern, chain=_chain_for_pattern(exact))
        else:
            functional = {
                cell: -y[k] for k, cell in enumerate(CELLS) if y[k] != 0
            }
            witness = InfeasibilityWitness(functional)
        cert = LhvCertificate("infeasible", witness=witness)

    if not validate_certificate(exact, cert, tol):
        raise HardyLabError("internal error: produced certificate failed validation")
    return cert


def validate_certificate(
    table: ProbabilityTable | Mapping[str, Sequence[Sequence]] | ExactTable,
    cert: LhvCertificate,
    tol: float | None = None,
) -> bool:
    """Re-check a certificate against a table, exactly.

    Feasible: every constrained cell must be reproduced by the model with
    exact rational equality.  Infeasible: the functional must be strictly
    negative on the table while nonnegative on all 16 deterministic
    assignments (an all-zero functional therefore never validates).
    """
    try:
        exact = rationalize_table(table, tol)
    except HardyLabError:
        return False

    if cert.verdict == "feasible":
        model = cert.model
        if model is None:
            return False
        try:
            LhvModel(model.weights)  # re-run the invariants
        except HardyLabError:
            return False
        return all(
            model.cell_probability(cell) == exact[cell[0]][cell[1]][cell[2]]
            for cell in CELLS
        )

    witness = cert.witness
    if witness is None or not witness.functional:
        return False
    value = sum(
        (c * exact[key][a][b] for (key, a, b), c in witness.functional.items()),
        Fraction(0),
    )
    if value >= 0:
        return False
    for assignment in ASSIGNMENTS:
        row = sum(
            (
                c
                for cell, c in witness.functional.items()
                if assignment_matches(assignment, cell)
            ),
            Fraction(0),
        )
        if row < 0:
            return False
    return True


# --- the advertised-claims table -------------------------------------------


def claimed_hardy_table(p_joint: Fraction = Fraction(1, 16)) -> ExactTable:
    """The completed table encoding the advertised Hardy conditions.

    The conditions themselves pin only four facts: P(D1=1,D2=1) = p_joint,
    P(U2=1|D1=1) = 1, P(U1=1|D2=1) = 1, and P(U1=1,U2=1) = 0.  The rest of
    the table is completed from the quantum marginals: P(D1=1) = P(D2=1)
    = 1/4 (uniform Bell branch weights) and P(U1=1) = P(U2=1) = 1/2
    (singlet single-qubit marginals).  The completion is consistent for
    any 0 < p_joint <= 1/4, and the infeasibility witness only ever uses
    the four pinned facts, so the completion cannot be the source of the
    contradiction.
    """
    p = Fraction(p_joint)
    if not 0 < p <= Fraction(1, 4):
        raise HardyLabError(f"p_joint must lie in (0, 1/4], got {p}")
    q = Fraction(1, 4)  # P(D1=1) = P(D2=1)
    h = Fraction(1, 2)  # P(U1=1) = P(U2=1)
    return {
        "d1d2": [[1 - 2 * q + p, q - p], [q - p, p]],
        "d1u2": [[1 - h, h - q], [Fraction(0), q]],
        "u1d2": [[1 - h, Fraction(0)], [h - q, q]],
        "u1u2": [[Fraction(0), h], [h, Fraction(0)]],
    }


#: Where each number in the completed table comes from, for reporting.
CLAIMED_TABLE_NOTES = {
    "pinned": {
        "P(D1=1,D2=1)": "the advertised joint probability",
        "P(U2=0|D1=1)": "0, from the advertised certainty P(U2=1|D1=1)=1",
        "P(U1=0|D2=1)": "0, from the advertised certainty P(U1=1|D2=1)=1",
        "P(U1=1,U2=1)": "0, as advertised",
    },
    "derived": {
        "P(D1=1), P(D2=1)": "1/4 each, from the uniform Bell branch weights",
        "P(U1=1), P(U2=1)": "1/2 each, from the singlet single-qubit marginals",
    },
}
