import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from cflab import catalog, finite_catalog as fc
from cflab.dsl import (DSLSemanticError, DSLSyntaxError, DSLError, Linear, build, load, parse_system,
                       print_system)
from cflab.finite_rank import RankKSystem
from cflab.groups import fmt_element

CORPUS = Path(__file__).parent / "dsl_corpus"
CASES = sorted(p.stem for p in CORPUS.glob("*.cf"))


def summarize(sys) -> list[str]:
    lines = [f"name: {sys.name}", f"horizon: {sys.horizon}"]
    if isinstance(sys, RankKSystem):
        lines.append("heights: " + " ".join("/".join(map(str, sys.heights(n))) for n in range(sys.horizon + 1)))
        lines += [f"C_{n}: " + " ".join(f"({e.src},{e.g[0]},{e.tgt})" for e in sys.C(n))
                  for n in range(1, min(sys.horizon, 2) + 1)]
    else:
        lines.append("sizes: " + " ".join(str(len(sys.F(n))) for n in range(sys.horizon + 1)))
        lines.append(f"F_{sys.horizon} bbox: {sys.F(sys.horizon).bbox()}")
        lines += [f"C_{n}: " + " ".join(fmt_element(c) for c in sys.C(n).sorted())
                  for n in range(1, min(sys.horizon, 3) + 1)]
    return lines


def render(text: str) -> str:
    try:
        desc = parse_system(text)
        sys = build(desc)
    except DSLError as exc:
        kind = "syntax" if isinstance(exc, DSLSyntaxError) else "semantic"
        out = [f"error {kind} at {exc.line}:{exc.col}", exc.message]
        if isinstance(exc, DSLSemanticError) and exc.condition:
            out.append(f"condition {exc.condition} level {exc.level}")
        return "\n".join(out) + "\n"
    return "ok\n" + print_system(desc) + "---\n" + "\n".join(summarize(sys)) + "\n"


def test_corpus_size():
    assert len(CASES) == 30
    valid = [c for c in CASES if (CORPUS / f"{c}.golden").read_text().startswith("ok")]
    assert 10 <= len(valid) <= 20


@pytest.mark.parametrize("case", CASES)
def test_corpus_golden(case):
    got = render((CORPUS / f"{case}.cf").read_text())
    golden = CORPUS / f"{case}.golden"
    if os.environ.get("CFLAB_REGEN_GOLDENS"):
        golden.write_text(got)
    assert got == golden.read_text()


@pytest.mark.parametrize("case", CASES)
def test_corpus_print_parse_round_trip(case):
    text = (CORPUS / f"{case}.cf").read_text()
    try:
        desc = parse_system(text)
    except DSLError:
        return
    printed = print_system(desc)
    again = parse_system(printed)
    assert again == desc
    assert print_system(again) == printed


def test_custom_chacon_equals_catalog():
    sys = load("horizon = 6\nC[n+1] = {0, h, 2h+1}\n")
    ref = catalog.chacon(6)
    assert sys.Fs == ref.Fs and sys.Cs == ref.Cs


def test_custom_z2lh_equals_catalog():
    sys = load("dim = 2\nhorizon = 4\nC[n+1] = {(0, 0), (10h1, 0)}\nmargin[n+1] = h1\n")
    ref = catalog.z2lh(4)
    assert sys.Fs == ref.Fs and sys.Cs == ref.Cs


def test_custom_r2s_equals_catalog():
    text = (CORPUS / "11_rank2_top.cf").read_text().replace("horizon = 3", "horizon = 5")
    sys, ref = load(text), fc.r2s(5)
    assert sys.Fs == ref.Fs
    assert all(set(a) == set(b) for a, b in zip(sys.Cs, ref.Cs))


def test_overlap_cites_condition_three_at_level_one():
    with pytest.raises(DSLSemanticError) as info:
        load("horizon = 6\nC[n+1] = {0, h-1}\n")
    assert (info.value.condition, info.value.level) == ("III", 1)


def test_catalog_line():
    assert load("catalog chacon horizon=12").horizon == 12


# -- round trip on generated descriptions ------------------------------------

coef = st.integers(-3, 3)
lin_h = st.builds(lambda a, b: Linear.make({"h": a}, b), coef, st.integers(-9, 9))


@st.composite
def descriptions(draw):
    items = draw(st.lists(lin_h, min_size=1, max_size=4))
    lines = [f"horizon = {draw(st.integers(1, 9))}"]
    if draw(st.booleans()):
        lines.insert(0, f'name = "{draw(st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True))}"')
    lines.append("C[n+1] = {" + ", ".join(str(x) for x in items) + "}")
    if draw(st.booleans()):
        lines.append(f"C[{draw(st.integers(1, 9))}] = {{0, {draw(st.integers(1, 30))}}}")
    if draw(st.booleans()):
        lines.append(f"top[n+1] = {draw(lin_h)}")
    return "\n".join(lines) + "\n"


@settings(max_examples=60, suppress_health_check=[HealthCheck.too_slow])
@given(descriptions())
def test_generated_round_trip(text):
    desc = parse_system(text)
    assert parse_system(print_system(desc)) == desc


@settings(max_examples=60)
@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-20, 20))
def test_linear_printing_evaluates_the_same(a, b, c):
    expr = Linear.make({"h1": a, "h2": b}, c)
    reparsed = parse_system(f"rank = 2\nhorizon = 1\ntop[n+1] = ({expr}, 0)\n").rules[0].value.items[0]
    env = {"h1": 7, "h2": 11}
    assert reparsed.evaluate(env) == expr.evaluate(env)
