"""The estimand specification language.

A ``.estimand`` file declares one or more estimands through five attributes
(treatments, endpoint, target population, population-level summary, and one
handling strategy per intercurrent-event kind)::

    estimand "Primary" {
      treatment: drug vs placebo
      endpoint: disability@t2
      population: all
      summary: mean_difference
      ice concomitant_therapy: hypothetical
      ice death: composite(worst=10)
    }

Grammar (``#`` starts a comment)::

    spec     := estimand+
    estimand := "estimand" QUOTED_TEXT "{" field+ "}"
    field    := "treatment" ":" IDENT "vs" IDENT
              | "endpoint" ":" IDENT "@" IDENT
              | "population" ":" ("all" | "stratum" "(" IDENT ")" | IDENT)
              | "summary" ":" "mean_difference"
              | "ice" IDENT ":" strategy
    strategy := "treatment_policy" | "hypothetical" | "while_on_treatment"
              | "composite" "(" "worst" "=" NUMBER ")"
              | "principal_stratum" "(" IDENT ")" | "confounder"

The parser is a hand-written recursive-descent parser over a hand-written
lexer; the first error wins and is reported with an exact 1-based
line/column position (:class:`~estimand_lab.errors.ParseError`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, PlanError

ICE_KINDS = ("concomitant_therapy", "death", "withdrawal")
STRATEGY_NAMES = (
    "treatment_policy",
    "hypothetical",
    "composite",
    "while_on_treatment",
    "principal_stratum",
    "confounder",
)
ENDPOINT_SCALES = {"disability": (0.0, 10.0)}
ASSESSMENTS = ("t1", "t2")
ANALYSIS_SET_NAMES = ("itts", "ss", "fas", "pps")
_STRATUM_SYNONYMS = {"P1": "P1", "tolerate_both": "P1"}

_ALLOWED_STRATEGIES = {
    "concomitant_therapy": ("treatment_policy", "hypothetical", "confounder"),
    "death": ("hypothetical", "composite", "while_on_treatment"),
    "withdrawal": ("treatment_policy", "principal_stratum"),
}


@dataclass(frozen=True)
class Strategy:
    """One intercurrent-event handling strategy, with its options."""

    name: str
    worst: float | None = None   # composite only
    stratum: str | None = None   # principal_stratum only

    def render(self) -> str:
        if self.name == "composite":
            return f"composite(worst={_render_number(self.worst)})"
        if self.name == "principal_stratum":
            return f"principal_stratum({self.stratum})"
        return self.name


@dataclass(frozen=True)
class EstimandSpec:
    """Parsed, validated estimand (canonical form)."""

    name: str
    treatment: tuple[str, str]          # (experimental, control)
    endpoint: tuple[str, str]           # (endpoint name, assessment tag)
    population: tuple[str, str]         # ("all"|"stratum"|"analysis_set", arg)
    summary: str = "mean_difference"
    ice_policies: tuple[tuple[str, Strategy], ...] = ()

    def policy_for(self, kind: str) -> Strategy | None:
        for k, strat in self.ice_policies:
            if k == kind:
                return strat
        return None

    def strategy_label(self) -> str:
        if not self.ice_policies:
            return "none"
        return ";".join(f"{k}={s.render()}" for k, s in self.ice_policies)


def _render_number(v: float) -> str:
    return str(int(v)) if v == int(v) else repr(v)


# --- lexer ------------------------------------------------------------------

_PUNCT = "{}():=@"


@dataclass
class _Token:
    kind: str  # IDENT | NUMBER | STRING | one of _PUNCT | EOF
    text: str
    line: int
    column: int


def _lex(source: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == "#":
            while i < n and source[i] != "\n":
                i += 1
        elif ch in _PUNCT:
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
        elif ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n and source[j] not in '"\n':
                j += 1
            if j >= n or source[j] != '"':
                raise ParseError(start_line, start_col, "unterminated quoted text",
                                 expected='closing "')
            tokens.append(_Token("STRING", source[i + 1:j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
        elif ch.isdigit():
            start_col = col
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(_Token("NUMBER", source[i:j], line, start_col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", source[i:j], line, start_col))
            col += j - i
            i = j
        else:
            raise ParseError(line, col, f"unexpected character {ch!r}",
                             expected="identifier, number, quoted text or punctuation")
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# --- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, tok: _Token, message: str, expected: str = ""):
        raise ParseError(tok.line, tok.column, message, expected)

    def expect(self, kind: str, expected: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(tok, f"unexpected {_describe(tok)}", expected)
        return self.advance()

    def expect_word(self, word: str) -> _Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.text != word:
            self.fail(tok, f"unexpected {_describe(tok)}", f"'{word}'")
        return self.advance()

    def parse_spec(self) -> list[EstimandSpec]:
        specs = [self.parse_estimand()]
        while self.peek().kind != "EOF":
            specs.append(self.parse_estimand())
        return specs

    def parse_estimand(self) -> EstimandSpec:
        self.expect_word("estimand")
        name = self.expect("STRING", "quoted estimand name").text
        self.expect("{", "'{'")

        fields: dict[str, object] = {}
        field_tokens: dict[str, _Token] = {}
        ice: dict[str, Strategy] = {}
        ice_strategy_tokens: dict[str, _Token] = {}
        worst_tokens: dict[str, _Token] = {}

        while True:
            tok = self.peek()
            if tok.kind == "}":
                close = self.advance()
                break
            if tok.kind != "IDENT":
                self.fail(tok, f"unexpected {_describe(tok)}",
                          "field name ('treatment', 'endpoint', 'population', "
                          "'summary', 'ice') or '}'")
            if tok.text == "ice":
                self.advance()
                kind_tok = self.expect("IDENT", "intercurrent-event kind")
                if kind_tok.text not in ICE_KINDS:
                    self.fail(kind_tok, f"unknown intercurrent-event kind {kind_tok.text!r}",
                              "one of " + ", ".join(ICE_KINDS))
                if kind_tok.text in ice:
                    self.fail(kind_tok, f"duplicate strategy for {kind_tok.text!r}",
                              "a single strategy per intercurrent-event kind")
                self.expect(":", "':'")
                strat_tok = self.peek()
                strategy, worst_tok = self.parse_strategy()
                ice[kind_tok.text] = strategy
                ice_strategy_tokens[kind_tok.text] = strat_tok
                if worst_tok is not None:
                    worst_tokens[kind_tok.text] = worst_tok
            elif tok.text in ("treatment", "endpoint", "population", "summary"):
                if tok.text in fields:
                    self.fail(tok, f"duplicate field {tok.text!r}",
                              "each field at most once")
                field_tokens[tok.text] = tok
                self.advance()
                self.expect(":", "':'")
                fields[tok.text] = getattr(self, f"parse_{tok.text}")()
            else:
                self.fail(tok, f"unexpected {_describe(tok)}",
                          "field name ('treatment', 'endpoint', 'population', "
                          "'summary', 'ice') or '}'")

        missing = [f for f in ("treatment", "endpoint", "population", "summary")
                   if f not in fields]
        if missing:
            self.fail(close, "missing field(s): " + ", ".join(missing),
                      "all of treatment, endpoint, population, summary")

        # deferred semantic checks, reported at the stored token positions
        scale = ENDPOINT_SCALES[fields["endpoint"][0]]
        for kind, strat in ice.items():
            if strat.name == "composite" and not scale[0] <= strat.worst <= scale[1]:
                tok = worst_tokens[kind]
                self.fail(tok, f"worst={_render_number(strat.worst)} exceeds the "
                               f"endpoint scale [{scale[0]:g}, {scale[1]:g}]",
                          "a value within the endpoint scale")
            if strat.name == "principal_stratum" and fields["population"] != ("stratum", "P1"):
                tok = ice_strategy_tokens[kind]
                self.fail(tok, "principal_stratum strategy requires "
                               "population: stratum(P1)", "population: stratum(P1)")

        policies = tuple((k, ice[k]) for k in ICE_KINDS if k in ice)
        return EstimandSpec(
            name=name,
            treatment=fields["treatment"],
            endpoint=fields["endpoint"],
            population=fields["population"],
            summary=fields["summary"],
            ice_policies=policies,
        )

    def parse_treatment(self):
        exp = self.expect("IDENT", "experimental arm identifier").text
        self.expect_word("vs")
        ctl = self.expect("IDENT", "control arm identifier").text
        return (exp, ctl)

    def parse_endpoint(self):
        name_tok = self.expect("IDENT", "endpoint name")
        if name_tok.text not in ENDPOINT_SCALES:
            self.fail(name_tok, f"unknown endpoint {name_tok.text!r}",
                      "one of " + ", ".join(sorted(ENDPOINT_SCALES)))
        self.expect("@", "'@'")
        at_tok = self.expect("IDENT", "assessment tag")
        if at_tok.text not in ASSESSMENTS:
            self.fail(at_tok, f"unknown assessment {at_tok.text!r}",
                      "one of " + ", ".join(ASSESSMENTS))
        return (name_tok.text, at_tok.text)

    def parse_population(self):
        tok = self.expect("IDENT", "'all', 'stratum(...)' or an analysis-set name")
        if tok.text == "all":
            return ("all", "")
        if tok.text == "stratum":
            self.expect("(", "'('")
            arg = self.expect("IDENT", "stratum name")
            if arg.text not in _STRATUM_SYNONYMS:
                self.fail(arg, f"unknown stratum {arg.text!r}",
                          "one of " + ", ".join(sorted(_STRATUM_SYNONYMS)))
            self.expect(")", "')'")
            return ("stratum", _STRATUM_SYNONYMS[arg.text])
        if tok.text in ANALYSIS_SET_NAMES:
            return ("analysis_set", tok.text)
        self.fail(tok, f"unknown population {tok.text!r}",
                  "'all', 'stratum(P1)' or one of " + ", ".join(ANALYSIS_SET_NAMES))

    def parse_summary(self):
        self.expect_word("mean_difference")
        return "mean_difference"

    def parse_strategy(self):
        tok = self.expect("IDENT", "strategy name")
        worst_tok = None
        if tok.text == "composite":
            self.expect("(", "'('")
            self.expect_word("worst")
            self.expect("=", "'='")
            worst_tok = self.expect("NUMBER", "numeric worst value")
            self.expect(")", "')'")
            strategy = Strategy("composite", worst=float(worst_tok.text))
        elif tok.text == "principal_stratum":
            self.expect("(", "'('")
            arg = self.expect("IDENT", "stratum name")
            if arg.text not in _STRATUM_SYNONYMS:
                self.fail(arg, f"unknown stratum {arg.text!r}",
                          "one of " + ", ".join(sorted(_STRATUM_SYNONYMS)))
            self.expect(")", "')'")
            strategy = Strategy("principal_stratum", stratum=_STRATUM_SYNONYMS[arg.text])
        elif tok.text in ("treatment_policy", "hypothetical", "while_on_treatment",
                          "confounder"):
            strategy = Strategy(tok.text)
        else:
            self.fail(tok, f"unknown strategy {tok.text!r}",
                      "one of " + ", ".join(STRATEGY_NAMES))
        return strategy, worst_tok


def _describe(tok: _Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "STRING":
        return f'quoted text "{tok.text}"'
    return f"token {tok.text!r}"


def parse_spec(source: str) -> list[EstimandSpec]:
    """Parse estimand declarations; raises :class:`ParseError` on first error."""
    return _Parser(_lex(source)).parse_spec()


def print_spec(spec: EstimandSpec) -> str:
    """Canonical rendering: fixed field order, one field per line, 2-space indent."""
    lines = [f'estimand "{spec.name}" {{']
    lines.append(f"  treatment: {spec.treatment[0]} vs {spec.treatment[1]}")
    lines.append(f"  endpoint: {spec.endpoint[0]}@{spec.endpoint[1]}")
    kind, arg = spec.population
    if kind == "all":
        lines.append("  population: all")
    elif kind == "stratum":
        lines.append(f"  population: stratum({arg})")
    else:
        lines.append(f"  population: {arg}")
    lines.append(f"  summary: {spec.summary}")
    for ice_kind, strat in spec.ice_policies:
        lines.append(f"  ice {ice_kind}: {strat.render()}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_specs(specs: list[EstimandSpec]) -> str:
    return "\n".join(print_spec(s) for s in specs)


# --- analysis plans ----------------------------------------------------------


@dataclass(frozen=True)
class AnalysisPlan:
    """Deterministic mapping of an estimand to executable analysis steps.

    Steps apply in the fixed composition order: composite recoding, then
    while-on-treatment selection, then hypothetical imputation, then
    stratum restriction, then regression adjustment.
    """

    estimand_name: str
    population: tuple[str, str]
    composite_worst: float | None = None
    while_on_treatment: bool = False
    adjust_time: bool = False
    impute_therapy: bool = False
    impute_death: bool = False
    principal_stratum: bool = False
    adjust_m: bool = False
    n_imputations: int = 20
    strategy_label: str = "none"

    @property
    def estimator_name(self) -> str:
        """Canonical estimator this plan reduces to (for reporting)."""
        steps = []
        if self.composite_worst is not None:
            steps.append("composite")
        if self.while_on_treatment:
            steps.append("while_on_treatment")
        if self.impute_therapy or self.impute_death:
            steps.append("hypothetical")
        if self.principal_stratum:
            steps.append("principal_stratum")
        if self.adjust_m:
            steps.append("confounder_adjusted")
        if not steps:
            return "treatment_policy"
        if len(steps) == 1:
            return steps[0]
        return "+".join(steps)


def plan_of(spec: EstimandSpec) -> AnalysisPlan:
    """Turn a valid estimand into an analysis plan (pure function).

    Raises :class:`PlanError` for combinations the execution engine does not
    support (wrong assessment, or a strategy applied to an event kind it
    cannot handle).
    """
    if spec.endpoint != ("disability", "t2"):
        raise PlanError(
            f"estimand {spec.name!r}: only disability@t2 is executable, "
            f"got {spec.endpoint[0]}@{spec.endpoint[1]}"
        )
    plan = {
        "estimand_name": spec.name,
        "population": spec.population,
        "strategy_label": spec.strategy_label(),
    }
    for kind, strat in spec.ice_policies:
        if strat.name not in _ALLOWED_STRATEGIES[kind]:
            raise PlanError(
                f"estimand {spec.name!r}: strategy {strat.name!r} cannot handle "
                f"intercurrent-event kind {kind!r} (allowed: "
                + ", ".join(_ALLOWED_STRATEGIES[kind]) + ")"
            )
        if kind == "concomitant_therapy":
            if strat.name == "hypothetical":
                plan["impute_therapy"] = True
            elif strat.name == "confounder":
                plan["adjust_m"] = True
            # treatment_policy: therapy folded into the regime, nothing to do
        elif kind == "death":
            if strat.name == "composite":
                plan["composite_worst"] = strat.worst
            elif strat.name == "while_on_treatment":
                plan["while_on_treatment"] = True
                plan["adjust_time"] = True
            elif strat.name == "hypothetical":
                plan["impute_death"] = True
        elif kind == "withdrawal":
            if strat.name == "principal_stratum":
                plan["principal_stratum"] = True
            # treatment_policy: withdrawal ignored
    if spec.population[0] == "stratum":
        plan["principal_stratum"] = True
    return AnalysisPlan(**plan)
