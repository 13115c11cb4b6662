import random

import pytest

from fractran import catalog
from fractran.compiler import (
    FlowchartError,
    annotate,
    compile_flowchart,
    parse_flowchart,
    recover_arrows,
)
from fractran.testing import random_data, random_flowchart_text, simulation_mismatch
from fractran.vm import Program

TWO_NODE = """
start 5
node 5:
    -> 7 * 1/1
node 7:
    -> 5 * 3/2
"""


def test_addgame_chart_compiles_to_two_thirds():
    compiled = compile_flowchart(parse_flowchart("start 2\nnode 2: -> 2 * 2/3\n"))
    assert [str(f) for f in compiled.program] == ["2/3"]
    assert compiled.elided_node


def test_two_node_cycle():
    chart = parse_flowchart(TWO_NODE)
    assert chart.start == 5
    assert [(a.source, a.target, a.label) for a in chart.arrows()] == [(5, 7, "1/1"), (7, 5, "3/2")]
    compiled = compile_flowchart(chart)
    assert sorted(str(f) for f in compiled.program) == ["15/14", "7/5"]
    # decreasing denominator across nodes
    assert [str(f) for f in compiled.program] == ["15/14", "7/5"]


def test_inline_and_multiple_arrows_on_one_line():
    chart = parse_flowchart("start 5\nnode 5: -> 7 * 1/3 -> 7 * 1/1\nnode 7: -> 5 * 2/1\n")
    assert [a.label for a in chart.node(5).arrows] == ["1/3", "1/1"]


@pytest.mark.parametrize(
    "text, code, line",
    [
        ("start 6\nnode 6:\n    -> 6 * 2/3\n", "NON_PRIME_NODE", 2),
        ("start 5\nnode 5: -> 7 * 1/1\nnode 7: -> 5 * 1/1\nnode 5: -> 7 * 1/1\n", "DUPLICATE_NODE", 4),
        ("start 5\nnode 5: -> 7 * 14/3\nnode 7: -> 5 * 1/1\n", "LABEL_SHARES_NODE_PRIME", 2),
        ("start 5\nnode 5: -> 11 * 1/1\nnode 7: -> 5 * 1/1\n", "UNKNOWN_TARGET", 2),
        ("start 11\nnode 5: -> 7 * 1/1\nnode 7: -> 5 * 1/1\n", "UNKNOWN_START", 1),
        ("start 5\nnode 5:\n    goto 7\n", "SYNTAX", 3),
        ("node 5: -> 5 * 1/1\n", "SYNTAX", None),
        ("start 5\n-> 5 * 1/2\n", "SYNTAX", 2),
        ("start 5\nnode 5: -> 7 * 0/1\nnode 7: -> 5 * 1/1\n", "SYNTAX", 2),
    ],
)
def test_validation_errors(text, code, line):
    with pytest.raises(FlowchartError) as err:
        parse_flowchart(text)
    assert err.value.code == code
    assert err.value.line == line


def test_self_loop_in_multi_node_chart_is_reducible():
    chart = parse_flowchart("start 5\nnode 5: -> 5 * 2/3 -> 7 * 1/1\nnode 7: -> 5 * 3/1\n")
    with pytest.raises(FlowchartError) as err:
        compile_flowchart(chart)
    assert err.value.code == "REDUCIBLE_EMISSION"


def test_per_node_priority_survives_the_merge():
    # node 5's second arrow has the larger denominator but must stay second
    text = "start 5\nnode 5:\n  -> 7 * 1/2\n  -> 7 * 1/9\nnode 7:\n  -> 5 * 1/3\n"
    compiled = compile_flowchart(parse_flowchart(text))
    from5 = [p.label for p in compiled.provenance if p.source == 5]
    assert from5 == ["1/2", "1/9"]


def test_provenance_and_sidecar():
    compiled = compile_flowchart(parse_flowchart(TWO_NODE))
    assert [(p.source, p.target, p.label) for p in compiled.provenance] == [(7, 5, "3/2"), (5, 7, "1/1")]
    rows = compiled.sidecar_text().splitlines()
    assert rows[0] == "line\tsource\ttarget\tlabel\tdsl_line"
    text_lines = compiled.program_text().splitlines()
    for row in rows[1:]:
        line, source, target, label, _ = row.split("\t")
        assert text_lines[int(line) - 1].startswith(("15/14", "7/5"))


def test_compile_is_deterministic():
    a = compile_flowchart(parse_flowchart(TWO_NODE))
    b = compile_flowchart(parse_flowchart(TWO_NODE))
    assert a.program == b.program and a.provenance == b.provenance


def test_annotate_examples():
    pigame = catalog.get("PIGAME").program
    nodes = {89, 11, 47, 23, 79}
    notes = {a.fraction: a for a in annotate(pigame, nodes)}
    ann = notes["517/89"]
    assert ann.source == 89 and ann.target is None
    assert ann.target_candidates == (11, 47)
    ann = notes["79/575"]
    assert (ann.source, ann.target) == (23, 79)
    (ann,) = annotate(Program.from_pairs([(2, 3)]), set())
    assert (ann.source, ann.target) == (None, None)


def check_simulation(text, data, steps=60):
    assert simulation_mismatch(text, data, steps) is None, (text, data)


def test_simulation_equivalence_on_random_charts():
    rng = random.Random(2024)
    for _ in range(300):
        check_simulation(random_flowchart_text(rng), random_data(rng))


def test_round_trip_on_random_charts():
    rng = random.Random(7)
    checked = 0
    for _ in range(200):
        chart = parse_flowchart(random_flowchart_text(rng))
        if len(chart.nodes) < 2:
            continue
        compiled = compile_flowchart(chart)
        recovered = recover_arrows(compiled.program, chart.node_primes)
        assert sorted(recovered) == sorted((a.source, a.target, a.num, a.den) for a in chart.arrows())
        checked += 1
    assert checked > 50


def test_flowchart_text_round_trip():
    rng = random.Random(3)
    for _ in range(30):
        chart = parse_flowchart(random_flowchart_text(rng))
        again = parse_flowchart(chart.to_text())
        assert [(a.source, a.target, a.num, a.den) for a in again.arrows()] == [
            (a.source, a.target, a.num, a.den) for a in chart.arrows()
        ]
