"""End-to-end checks of the command line: codes, reports, determinism."""

import json
import re
import subprocess
import sys

import pytest

from locq.fpcat import ensure_rules, fpcat_from_json, fpcat_to_json, make_fpcat
from locq.hda import hda_from_json, hda_to_json, square_complex
from locq.presheaf import presheaf_map_to_json
from locq.simplicial import (
    boundary_of_simplex,
    horn,
    identity_map,
    map_to_json,
    sset_from_json,
    sset_to_json,
    standard_simplex,
    validate_sset,
)
from locq.site import site_to_json, trivial_site, two_object_site

from test_presheaf import empty_into_point


def run_cli(*argv, cwd):
    return subprocess.run(
        [sys.executable, "-m", "locq.cli", *argv],
        cwd=cwd, capture_output=True, text=True, timeout=300,
    )


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")

    def put(name, obj):
        (d / name).write_text(json.dumps(obj))

    put("dl2.json", sset_to_json(standard_simplex(2)))
    put("bd2.json", sset_to_json(boundary_of_simplex(2)))
    put("wedge.json", sset_to_json(horn(2, 1)))
    E = standard_simplex(1)
    put("ide.json", {"source": sset_to_json(E), "target": sset_to_json(E),
                     "assignment": map_to_json(identity_map(E))["assignment"]})
    sq = make_fpcat(
        ["p", "q", "r", "s"],
        {"a": ("p", "q"), "b": ("q", "s"), "c": ("p", "r"), "d": ("r", "s")},
        [(("a", "b"), ("c", "d"), None)],
    )
    put("sqcat.json", fpcat_to_json(sq))
    loop = make_fpcat(["v"], {"a": ("v", "v")}, [])
    put("loop.json", fpcat_to_json(loop))
    put("site2.json", site_to_json(two_object_site()))
    put("sitetriv.json", site_to_json(trivial_site(two_object_site().category)))
    _, f = empty_into_point()
    put("pmap.json", presheaf_map_to_json(f))
    put("square.json", hda_to_json(square_complex(True)))
    put("hollow.json", hda_to_json(square_complex(False)))
    (d / "broken.json").write_text("{not json")
    return d


def canonical(text):
    return json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n"


# -- exit codes ---------------------------------------------------------


def test_yes_is_exit_zero(files):
    r = run_cli("qc", "check", "dl2.json", cwd=files)
    assert r.returncode == 0
    assert json.loads(r.stdout)["verdict"]["verdict"] == "yes"


def test_no_is_exit_one_with_a_witness(files):
    r = run_cli("qc", "check", "bd2.json", cwd=files)
    assert r.returncode == 1
    w = json.loads(r.stdout)["verdict"]["certificate"]["witness_horn"]
    assert (w["n"], w["i"]) == (2, 1)


def test_unknown_is_exit_two(files):
    r = run_cli("cat", "invertible", "loop.json", "--word", "a", cwd=files)
    assert r.returncode == 2
    assert json.loads(r.stdout)["verdict"]["verdict"] == "unknown"


def test_usage_errors_are_exit_64(files):
    assert run_cli("qc", "check", cwd=files).returncode == 64
    assert run_cli("qc", "frobnicate", "dl2.json", cwd=files).returncode == 64
    assert run_cli("site", "local-lift", "site2.json", "pmap.json",
                   "--shape", "pentagon", cwd=files).returncode == 64


def test_invalid_input_is_exit_65(files):
    r = run_cli("qc", "check", "no-such-file.json", cwd=files)
    assert r.returncode == 65
    r = run_cli("qc", "check", "broken.json", cwd=files)
    assert r.returncode == 65
    assert json.loads(r.stdout)["error"]


# -- report form --------------------------------------------------------


def test_reports_are_canonical_json(files):
    for argv in (
        ("qc", "check", "dl2.json"),
        ("qc", "jcore", "dl2.json"),
        ("cat", "equal", "sqcat.json", "--left", "a,b", "--right", "c,d"),
        ("hda", "paths", "square.json", "--from", "p", "--to", "s"),
        ("site", "validate", "site2.json"),
    ):
        r = run_cli(*argv, cwd=files)
        assert r.stdout == canonical(r.stdout)


def test_timing_goes_to_stderr_only(files):
    r = run_cli("qc", "check", "dl2.json", cwd=files)
    assert re.fullmatch(r"locq qc check: \d+\.\d{3}s\n", r.stderr)
    json.loads(r.stdout)


def test_seed_is_echoed_but_threads_are_not(files):
    r = run_cli("qc", "check", "dl2.json", "--seed", "7", "--threads", "8",
                cwd=files)
    rep = json.loads(r.stdout)
    assert rep["bounds"]["seed"] == 7
    assert "threads" not in r.stdout


def test_same_command_twice_is_byte_identical(files):
    a = run_cli("qc", "jcore", "dl2.json", cwd=files)
    b = run_cli("qc", "jcore", "dl2.json", cwd=files)
    assert a.stdout == b.stdout
    assert a.returncode == b.returncode


def test_thread_count_does_not_change_the_report(files):
    argvs = [
        ("qc", "check", "bd2.json"),
        ("hda", "paths", "hollow.json", "--from", "p", "--to", "s"),
        ("site", "local-joyal", "site2.json", "pmap.json"),
    ]
    for argv in argvs:
        one = run_cli(*argv, "--threads", "1", cwd=files)
        eight = run_cli(*argv, "--threads", "8", cwd=files)
        assert one.stdout == eight.stdout
        assert one.returncode == eight.returncode


# -- verbs --------------------------------------------------------------


def test_word_problem_over_the_wire(files):
    r = run_cli("cat", "equal", "sqcat.json", "--left", "a,b", "--right", "c,d",
                cwd=files)
    assert r.returncode == 0
    r = run_cli("cat", "normalize", "sqcat.json", "--word", "c,d", cwd=files)
    assert json.loads(r.stdout)["normal_form"] == ["a", "b"]


def test_execution_verbs(files):
    r = run_cli("hda", "equiv", "square.json", "--p", "a,b", "--q", "c,d",
                cwd=files)
    assert r.returncode == 0
    r = run_cli("hda", "equiv", "hollow.json", "--p", "a,b", "--q", "c,d",
                cwd=files)
    assert r.returncode == 1
    r = run_cli("hda", "paths", "hollow.json", "--from", "p", "--to", "s",
                cwd=files)
    assert json.loads(r.stdout)["paths"]["classes"] == [["a", "b"], ["c", "d"]]


def test_local_lift_sees_the_topology(files):
    yes = run_cli("site", "local-lift", "site2.json", "pmap.json",
                  "--shape", "boundary:0", cwd=files)
    assert yes.returncode == 0
    no = run_cli("site", "local-lift", "sitetriv.json", "pmap.json",
                 "--shape", "boundary:0", cwd=files)
    assert no.returncode == 1
    cert = json.loads(no.stdout)["verdict"]["certificate"]
    assert cert["object"] == "U" and cert["lifting_sieve"] == ["phi"]


def test_joyal_equivalence_over_the_wire(files):
    r = run_cli("qc", "joyal-eq", "ide.json", "--max-n", "2", cwd=files)
    assert r.returncode == 0
    rep = json.loads(r.stdout)
    assert rep["report"]["bound"] == 2


def test_site_validation_lists_the_covers(files):
    r = run_cli("site", "validate", "site2.json", cwd=files)
    assert r.returncode == 0
    assert json.loads(r.stdout)["covering_sieves"]["U"] == [
        ["id:U", "phi"], ["phi"]]


# -- emitted files load back --------------------------------------------


def test_anodyne_output_revalidates(files):
    r = run_cli("qc", "anodyne", "wedge.json", cwd=files)
    assert r.returncode == 0
    rep = json.loads(r.stdout)
    Y = sset_from_json(rep["result"])
    validate_sset(Y)
    assert {n: len(Y.n_cells(n)) for n in range(3)} == {0: 3, 1: 3, 2: 1}


def test_path_category_output_reloads(files):
    r = run_cli("qc", "pathcat", "dl2.json", cwd=files)
    C = ensure_rules(fpcat_from_json(json.loads(r.stdout)["category"]))
    assert C.normalize(("0.1", "1.2")) == C.normalize(("0.2",))


def test_hda_echo_reloads(files):
    r = run_cli("hda", "analyze", "square.json", cwd=files)
    rep = json.loads(r.stdout)
    K = hda_from_json(rep["echo"])
    assert K.squares
    assert rep["triangulation"] == {"0": 4, "1": 5, "2": 2}
