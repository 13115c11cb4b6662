import re
import warnings

import pytest

from fractran import catalog
from fractran.catalog import (
    AccuracyWarning,
    InvalidHaltError,
    ParityError,
    UnknownProgramError,
    audit,
    digit_via_vm,
    get,
    one_hot_observations,
    sqrt2game_phase2_state,
    start_state,
)
from fractran.vm import FactoredRegister, parse_program, run


def test_catalog_names():
    assert set(catalog.CATALOG) == {"ADDGAME", "PIGAME", "SQRT2GAME", "NRSQRT2GAME"}
    assert get("sqrt2game") is get("SQRT2GAME")
    with pytest.raises(UnknownProgramError):
        get("PRIMEGAME")


@pytest.mark.parametrize("name, count", [("ADDGAME", 1), ("PIGAME", 39), ("SQRT2GAME", 58), ("NRSQRT2GAME", 67)])
def test_fraction_counts(name, count):
    assert len(get(name).program) == count


def test_verbatim_fractions_kept():
    pigame = [str(f) for f in get("PIGAME").program]
    sqrt2 = [str(f) for f in get("SQRT2GAME").program]
    assert "638/355" in pigame and "638/355" in sqrt2
    nr = [str(f) for f in get("NRSQRT2GAME").program]
    assert "267/723" in nr  # reducible as printed, kept that way
    assert get("NRSQRT2GAME").program.reducible() == [nr.index("267/723")]


@pytest.mark.parametrize("name", sorted(catalog.CATALOG))
def test_lossless_reserialization(name):
    prog = get(name).program
    again = parse_program(prog.to_text(), name=name)
    assert again == prog
    assert again.to_text() == prog.to_text()


def test_shipped_files_only_hold_fractions_and_comments():
    from importlib import resources

    for entry in catalog.CATALOG.values():
        text = resources.files("fractran.programs").joinpath(entry.source_file).read_text()
        for line in text.splitlines():
            body = line.split("#", 1)[0].strip()
            assert body == "" or re.fullmatch(r"[\d,_]+/[\d,_]+", body)


@pytest.mark.parametrize(
    "name, n, kw, value",
    [
        ("SQRT2GAME", 0, {}, 173),
        ("PIGAME", 3, {}, 712),
        ("NRSQRT2GAME", 2, {}, 4 * 89),
        ("ADDGAME", 0, {"a": 0, "b": 0}, 1),
        ("ADDGAME", 0, {"a": 3, "b": 4}, 648),
    ],
)
def test_start_state(name, n, kw, value):
    assert start_state(name, n, **kw).value == value


def test_start_state_rejects_negative_index():
    with pytest.raises(ValueError):
        start_state("PIGAME", -1)


def test_phase2_state():
    r = sqrt2game_phase2_state(10, 0)
    assert r == FactoredRegister({83: 1, 3: 1, 5: 10, 7: 1, 59: 1})
    assert r.value == 83 * 3 * 5**10 * 7 * 59
    big = sqrt2game_phase2_state(30, 1)
    assert big.exponent(7) == 10


@pytest.mark.parametrize("E", [8, 4, 2, 7])
def test_phase2_state_parity(E):
    with pytest.raises(ParityError):
        sqrt2game_phase2_state(E, 0)


def test_phase2_state_accuracy_warning():
    with pytest.warns(AccuracyWarning):
        sqrt2game_phase2_state(26, 1)  # 26^2 = 676 <= 800
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        sqrt2game_phase2_state(30, 1)


def test_minimal_phase2_E_matches_warning_threshold():
    for n in range(4):
        E = catalog.minimal_phase2_E(n)
        assert E % 4 == 2 and E * E > 8 * 10 ** (2 * n)
        assert (E - 4) ** 2 <= 8 * 10 ** (2 * n) or E - 4 < 6


def test_pigame_digit_zero():
    assert digit_via_vm("PIGAME", 0, 10**4, engine="factored") == 3
    assert digit_via_vm("PIGAME", 0, 10**4, engine="monolithic") == 3


def test_addgame_is_not_a_digit_program():
    with pytest.raises(catalog.CatalogError):
        digit_via_vm("ADDGAME", 0, 10)


def test_budget_exhaustion_is_reported():
    with pytest.raises(catalog.BudgetExhaustedError) as err:
        digit_via_vm("PIGAME", 1, 1000, engine="factored")
    assert err.value.outcome.steps == 1000


def test_non_power_of_two_halt_is_rejected_not_decoded():
    # the printed list halts off a power of two here; it must surface as an error
    with pytest.raises(InvalidHaltError) as err:
        digit_via_vm("NRSQRT2GAME", 0, 10**6, engine="factored")
    assert err.value.outcome.halted


def test_pigame_audit_is_clean():
    report = audit("PIGAME")
    assert report.clean
    assert report.node_primes == [p for p in get("PIGAME").program.prime_basis if p >= 13]


def test_sqrt2game_audit_findings():
    report = audit("SQRT2GAME")
    assert 167 in report.dead_end_nodes
    # 501/83 leaves node 83 for 167, which no fraction ever leaves
    assert any(e[1] == "501/83" and e[3] == [167] for e in report.edges)
    shadowed = {report.edges[j][1] for j, _ in report.shadowed}
    assert {"61/107", "73/71"} <= shadowed


def test_nrsqrt2game_audit_findings():
    report = audit("NRSQRT2GAME")
    assert report.dead_end_nodes == [269, 293, 337, 349, 373]
    assert {report.edges[i][1] for i in report.state_dropping_writes} == {"3350/15437", "5423/2215", "7/30619"}
    assert 257 in report.unreachable_nodes
    shadowed = {report.edges[j][1]: report.edges[i][1] for j, i in report.shadowed}
    assert shadowed["277/267"] == "4979909/89"


def test_audit_lines_render():
    lines = audit("NRSQRT2GAME").lines()
    assert lines[0].startswith("NRSQRT2GAME: 67 fractions")
    assert any("dead-end node 293" in line for line in lines)
    assert audit("ADDGAME").lines()[-1].strip() == "no structural defects"


def test_shadow_findings_are_sound():
    # every reported shadowing is a genuine divisibility of reduced denominators
    for name in catalog.DIGIT_PROGRAMS:
        prog = get(name).program
        for j, i in audit(name).shadowed:
            assert i < j and prog.reduced_pairs[j][1] % prog.reduced_pairs[i][1] == 0


def test_pigame_one_hot_nodes():
    for n in (0, 1):
        assert one_hot_observations("PIGAME", start_state("PIGAME", n), 20_000) == []


def test_one_hot_observations_surface_defects():
    notes = one_hot_observations("SQRT2GAME", start_state("SQRT2GAME", 0), 100, node_primes=get("SQRT2GAME").node_primes)
    assert notes and "167" in notes[0]


def test_pigame_halts_through_every_engine():
    prog = get("PIGAME").program
    results = {e: run(prog, start_state("PIGAME", 0), 10**4, engine=e) for e in ("monolithic", "factored", "accelerated")}
    assert {r.final.value for r in results.values()} == {8}
    assert {r.steps for r in results.values()} == {results["monolithic"].steps}
