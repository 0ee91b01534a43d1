import hashlib
import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fhesim import fheops as fo
from fhesim.archmodel import ModelParams, load_preset
from fhesim.census import as_dict, census
from fhesim.scheduler import (
    ConfigurationError,
    KernelGraph,
    ProgramError,
    declared_histogram,
    function_units,
    hint_runs,
    interpret,
    load_program,
    lower_to_kernels,
    map_and_schedule,
    parse_program,
    reorder_for_hint_reuse,
    trace_path,
)

CL = load_preset("cryptolight")


# -- program format ----------------------------------------------------------------------
def test_parse_and_round_trip():
    p = parse_program("# demo\nx = ENC(m)  # input\ny = FROT(x, steps=3)\nz = FMUL(x, y)\nout = DEC(z)\n")
    assert [s.op for s in p.statements] == ["ENC", "FROT", "FMUL", "DEC"]
    assert p.inputs == ("m",) and p.header == ("demo",)
    assert p.statements[1].attr("steps") == 3 and p.statements[1].hint == "rot3"
    assert parse_program(p.to_text()).statements == p.statements
    assert p.dependencies() == [(), (0,), (0, 1), (2,)]


@pytest.mark.parametrize("text,line,col", [
    ("x = ENC(m)\nx = ENC(n)", 2, 1),            # reassignment
    ("y = FADD(x, x)", 1, 10),                   # use before definition
    ("x = ENC(m)\ny = FOO(x)", 2, 5),            # unknown op
    ("x = ENC(m)\nd = DEC(x)\ny = FADD(x, d)", 3, 13),  # type mismatch
    ("x = ENC(m)\ny = FROT(x, bogus=1)", 2, 13),  # unknown attribute
    ("x = ENC(m)\ny = FADD(x)", 2, 5),           # arity
    ("this is not a statement", 1, 1),
])
def test_program_errors_carry_position(text, line, col):
    with pytest.raises(ProgramError) as exc:
        parse_program(text)
    assert (exc.value.line, exc.value.col) == (line, col)


def test_bundled_traces_match_declared_histograms():
    for name in ("lr", "lola"):
        p = load_program(trace_path(name))
        assert declared_histogram(p) == p.histogram()
    with pytest.raises(FileNotFoundError):
        trace_path("nope")


# -- reorder pass ---------------------------------------------------------------------
INTERLEAVED = """
a = ENC(m0)
b = ENC(m1)
r1 = FROT(a, steps=1)
r2 = FROT(b, steps=2)
r3 = FROT(a, steps=1)
r4 = FROT(b, steps=2)
s1 = FADD(r1, r3)
s2 = FADD(r2, r4)
t = FADD(s1, s2)
out = DEC(t)
"""


def test_reorder_groups_hints_and_preserves_results():
    p = parse_program(INTERLEAVED)
    q = reorder_for_hint_reuse(p)
    assert hint_runs(q) < hint_runs(p)
    ops = [s.hint for s in q.statements if s.op == "FROT"]
    assert ops == ["rot1", "rot1", "rot2", "rot2"]
    pos = {s.target: i for i, s in enumerate(q.statements)}
    for i, deps in enumerate(p.dependencies()):
        for d in deps:
            assert pos[p.statements[d].target] < pos[p.statements[i].target]
    params = fo.make_params(N=64, k=3, W=64, scale_bits=30)
    g = np.random.default_rng(0)
    inputs = {"m0": g.uniform(-1, 1, 32), "m1": g.uniform(-1, 1, 32)}
    r_p = interpret(p, params, inputs, seed=4)["out"]
    r_q = interpret(q, params, inputs, seed=4)["out"]
    assert np.array_equal(r_p, r_q)
    want = 2 * np.roll(inputs["m0"], -1) + 2 * np.roll(inputs["m1"], -2)
    assert np.max(np.abs(r_p - want)) < 1e-4


def test_reorder_pass_cuts_hint_loads():
    p = parse_program(INTERLEAVED)
    small = CL.replace(spm_bytes=256 << 20)
    on = lower_to_kernels(p, ModelParams(), small)
    off = lower_to_kernels(p, ModelParams(), small, passes=("coalesce",))
    assert on.meta["hint_loads"] < off.meta["hint_loads"]
    with pytest.raises(ValueError):
        lower_to_kernels(p, ModelParams(), small, passes=("bogus",))


# -- census agreement --------------------------------------------------------------------
@pytest.fixture(scope="module")
def census_setup():
    params = fo.make_params(N=256, k=4, seed=1)
    sk, pk = fo.keygen(params, fo.FheRng(1))
    relin = fo.relin_hint(params, sk, fo.FheRng(2))
    rot = fo.rotation_hint(params, sk, 3, fo.FheRng(3))
    v = np.random.default_rng(0).uniform(-1, 1, params.slots)
    pt = fo.encode(params, v)
    c1 = fo.encrypt(params, pk, pt, fo.FheRng(4))
    c2 = fo.encrypt(params, pk, pt, fo.FheRng(5))
    return params, sk, pk, relin, rot, pt, c1, c2


CENSUS_CASES = {
    "FMUL": (lambda s: fo.fmul(s[0], s[6], s[7], s[3]), "a = ENC(m)\nb = ENC(m)\nz = FMUL(a, b)"),
    "FROT": (lambda s: fo.frot(s[0], s[6], 3, s[4]), "a = ENC(m)\nz = FROT(a, steps=3)"),
    "FADD": (lambda s: fo.fadd(s[0], s[6], s[7]), "a = ENC(m)\nb = ENC(m)\nz = FADD(a, b)"),
    "ADDCP": (lambda s: fo.addcp(s[0], s[6], s[5]), "a = ENC(m)\nz = ADDCP(a, m)"),
    "MULTCP": (lambda s: fo.multcp(s[0], s[6], s[5]), "a = ENC(m)\nz = MULTCP(a, m)"),
    "ENC": (lambda s: fo.encrypt(s[0], s[2], s[5], fo.FheRng(9)), "z = ENC(m)"),
    "DEC": (lambda s: fo.decrypt(s[0], s[1], s[6]), "a = ENC(m)\nz = DEC(a)"),
    "KEYGEN": (lambda s: fo.keygen(s[0], fo.FheRng(9)), "z = KEYGEN()"),
}


@pytest.mark.parametrize("op", sorted(CENSUS_CASES))
def test_lowered_census_equals_instrumented(census_setup, op):
    fn, text = CENSUS_CASES[op]
    with census() as c:
        fn(census_setup)
    prog = parse_program(text)
    g = lower_to_kernels(prog, census_setup[0])
    lowered = g.census(op=len(prog) - 1)
    got = as_dict(c)
    assert got == {k: lowered[k] for k in got}


# -- scheduling ------------------------------------------------------------------------
def diamond(lat):
    g = KernelGraph()
    a = g.add("mod_add", (), n=1, latency=lat[0])
    b = g.add("mod_add", (a,), n=1, latency=lat[1])
    c = g.add("mod_add", (a,), n=1, latency=lat[2])
    g.add("mod_add", (b, c), n=1, latency=lat[3])
    return g


def brute_force_makespan(g, units):
    """Minimum makespan over every start order and unit assignment."""
    lat = [nd.latency for nd in g.nodes]
    best = None
    for order in itertools.permutations(range(len(g))):
        pos = {v: i for i, v in enumerate(order)}
        if any(pos[u] > pos[v] for u, v in g.edges):
            continue
        for assign in itertools.product(range(units), repeat=len(g)):
            free = [0] * units
            end = {}
            for v in order:
                s = max([free[assign[v]]] + [end[u] for u in g.preds[v]])
                end[v] = s + lat[v]
                free[assign[v]] = end[v]
            span = max(end.values())
            best = span if best is None else min(best, span)
    return best


def test_diamond_unit_latency():
    assert map_and_schedule(diamond([1, 1, 1, 1]), CL, {"modarith": 1})[0].makespan == 4
    assert map_and_schedule(diamond([1, 1, 1, 1]), CL, {"modarith": 2})[0].makespan == 3


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=4, max_size=4), st.sampled_from([1, 2, 3]))
def test_diamonds_match_exhaustive_optimum(lat, units):
    g = diamond(lat)
    tl, _ = map_and_schedule(g, CL, {"modarith": units})
    assert tl.makespan == brute_force_makespan(g, units)


def random_dag(seed, n=40):
    rng = np.random.default_rng(seed)
    g = KernelGraph()
    kinds = ["ntt", "mod_mult", "mod_add", "automorphism", "hbm_load"]
    for v in range(n):
        deps = tuple(int(u) for u in rng.choice(v, size=min(v, rng.integers(0, 3)), replace=False)) if v else ()
        g.add(kinds[rng.integers(0, len(kinds))], deps, n=1, latency=int(rng.integers(1, 20)))
    return g


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_bounds_on_random_dags(seed):
    g = random_dag(seed)
    tl, rep = map_and_schedule(g, CL)
    assert tl.critical_path <= tl.makespan <= tl.serial_sum
    assert rep.cycles == tl.makespan
    assert 0 <= min(tl.utilization.values()) and max(tl.utilization.values()) <= 1


def test_missing_units_raise():
    g = diamond([1, 1, 1, 1])
    with pytest.raises(ConfigurationError):
        map_and_schedule(g, CL, {"ntt": 2})


def test_cycle_free_by_construction():
    g = KernelGraph()
    with pytest.raises(ValueError):
        g.add("mod_add", (0,))


def test_trace_schedules_are_deterministic():
    p = load_program(trace_path("lola"))
    csvs = {map_and_schedule(lower_to_kernels(p, ModelParams(), CL), CL)[0].to_csv() for _ in range(2)}
    assert len(csvs) == 1


def test_backends_give_identical_timelines():
    code = (
        "import hashlib;from fhesim.archmodel import load_preset, ModelParams;"
        "from fhesim.scheduler import *;a=load_preset('bts');"
        "p=load_program(trace_path('lola'));"
        "print(hashlib.sha256(map_and_schedule(lower_to_kernels(p, ModelParams(), a), a)[0].to_csv().encode()).hexdigest())"
    )
    out = set()
    for backend in ("numba", "numpy"):
        env = dict(os.environ, FHESIM_BACKEND=backend)
        out.add(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                               check=True).stdout.strip())
    assert len(out) == 1


def test_function_units_follow_preset():
    u = function_units(CL)
    assert u["tu"] == CL.sched_groups and u["hbm"] == CL.hbm_count and "noc" not in u
    assert "noc" in function_units(load_preset("lake"))


def test_program_latency_ordering_across_presets():
    p = load_program(trace_path("lr"))
    secs = [map_and_schedule(lower_to_kernels(p, ModelParams(), a), a)[1].seconds
            for a in (load_preset("lake"), load_preset("bts"), CL)]
    assert secs[2] < secs[1] < secs[0]
