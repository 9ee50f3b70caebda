from fractions import Fraction

import pytest

from conftest import state
from ghostwalk.errors import InvalidArgument
from ghostwalk.ghostdet import enumerate_final_states, final_state_weight, formal_sign
from ghostwalk.involution import (
    Casting,
    Stage,
    attribute,
    audit_involution,
    enumerate_candidate_castings,
    first_crossing,
    global_involution,
    lattice_performances,
    rehearse,
    segment_swap,
)
from ghostwalk.spacetime import lattice_instance


def walk(start, *steps):
    path, p = [(start, 0)], start
    for t, d in enumerate(steps, 1):
        p += d
        path.append((p, t))
    return tuple(path)


@pytest.fixture
def four():
    return lattice_instance((0, 2, 4, 6), 2)


def collided_casting(four, signed=1):
    """Walkers 2 and 3 meet at (3,1); 1 and 4 run off to the sides."""
    ghosts = [(2, 4)] if signed == 1 else [(4, 2)]
    stage = Stage(four.graph, four.sources, state([-2, 8], ghosts, t=2))
    paths = (walk(0, -1, -1), walk(2, 1, 1), walk(4, -1, -1), walk(6, 1, 1))
    # columns: 0,1 survivors; 2 = slot (1,1); 3 = slot (1,2)
    pi = (0, 3, 2, 1) if signed == 1 else (0, 2, 3, 1)
    return Casting(stage, pi, paths)


def test_successful_rehearsal_and_attribution(four):
    casting = collided_casting(four)
    assert casting.candidate
    res = rehearse(casting)
    assert res.success
    (col,) = res.performance.collisions
    assert col.vertex == (3, 1) and col.actors == (1, 2)
    back = attribute(res.performance)
    assert back == casting
    # actor 3 (index 2) takes slot (1,1) at a, actor 2 takes (1,2) at b
    assert back.pi[2] == 2 and back.pi[1] == 3


def test_attribution_negative_sign_gives_lower_actor_first_slot(four):
    casting = collided_casting(four, signed=-1)
    res = rehearse(casting)
    assert res.success
    assert attribute(res.performance).pi[1] == 2


def test_k0_non_crossing_casting():
    inst = lattice_instance((0, 2), 2)
    stage = Stage(inst.graph, inst.sources, state([-2, 4], t=2))
    casting = Casting(stage, (0, 1), (walk(0, -1, -1), walk(2, 1, 1)))
    res = rehearse(casting)
    assert res.success and res.collisions == ()
    assert attribute(res.performance) == casting
    assert global_involution(casting) == casting


def failed_casting():
    # actors 1 and 3 fill the ghost pair at (2,2) but 1 and 2 cross first at (1,1)
    inst = lattice_instance((0, 2, 4), 2)
    stage = Stage(inst.graph, inst.sources, state([0], [(2, 2)], t=2))
    paths = (walk(0, 1, 1), walk(2, -1, -1), walk(4, -1, -1))
    return Casting(stage, (2, 0, 1), paths)


def test_failed_rehearsal_reports_first_crossing():
    casting = failed_casting()
    assert casting.candidate
    res = rehearse(casting)
    assert not res.success and not res.stalled
    assert res.crossing == (0, 1, (1, 1))


def test_global_involution_on_failed_casting():
    casting = failed_casting()
    partner = global_involution(casting)
    assert partner != casting and partner.candidate
    assert partner.pi == (0, 2, 1)
    assert global_involution(partner) == casting
    assert partner.path_product == casting.path_product
    assert partner.sign == -casting.sign


def test_rehearse_rejects_non_candidate():
    casting = failed_casting()
    # actor 2 in slot (1,1) and actor 3 in (1,2) breaks the ordering for a <= b
    bad = Casting(casting.stage, (0, 1, 2), (walk(0, 1, -1), walk(2, 1, -1), walk(4, -1, -1)))
    assert not bad.candidate
    with pytest.raises(InvalidArgument):
        rehearse(bad)


def test_segment_swap_properties():
    casting = failed_casting()
    swapped = segment_swap(casting, 0, 1, (1, 1))
    assert segment_swap(swapped, 0, 1, (1, 1)) == casting
    assert swapped.path_product == casting.path_product
    assert swapped.sign == -casting.sign


def test_segment_swap_requires_shared_vertex():
    with pytest.raises(InvalidArgument):
        segment_swap(failed_casting(), 1, 2, (1, 1))


def test_first_crossing_examples():
    assert first_crossing([walk(0, -1, -1), walk(2, 1, 1)]) is None
    assert first_crossing([walk(0, 1, 1), walk(2, -1, 1)]) == (0, 1, (1, 1))
    # pairs (1,2) meet at time 2, (2,3) at time 1, (1,3) at time 3
    paths = [walk(0, 1, 1, 1), walk(2, 1, 0, 0), walk(4, -1, -1, -1)]
    paths[1] = ((2, 0), (3, 1), (2, 2), (3, 3))
    assert first_crossing(paths) == (1, 2, (3, 1))


def test_first_crossing_tie_break():
    # both pairs meet at time 1; the smaller pair wins
    paths = [walk(0, 1), walk(2, -1), walk(4, -1), walk(6, -1)]
    assert first_crossing(paths)[:2] == (0, 1)


def test_enumeration_single_walker():
    inst = lattice_instance((0,), 2)
    castings = enumerate_candidate_castings(inst.graph, inst.sources, state([0], t=2))
    assert len(castings) == 2


def test_enumeration_unreachable_ghosts_empty():
    inst = lattice_instance((0, 2), 2)
    assert enumerate_candidate_castings(inst.graph, inst.sources, state([], [(-2, -2)], t=2)) == []


def test_enumeration_signed_sum_matches_ghostdet():
    inst = lattice_instance((0, 2), 2)
    st = state([], [(0, 2)], t=2)
    castings = enumerate_candidate_castings(inst.graph, inst.sources, st)
    total = sum((formal_sign(c.pi, 0, 1) * c.sign * c.path_product for c in castings), Fraction(0))
    assert total == final_state_weight(inst.graph, inst.sources, st)


@pytest.mark.parametrize("starts,t", [((0, 2), 1), ((0, 2), 2), ((0, 2), 3), ((0, 2, 4), 1), ((0, 2, 4), 2)])
def test_audit_all_states(starts, t):
    inst = lattice_instance(starts, t)
    for st in enumerate_final_states(inst.targets, len(starts)):
        perfs = lattice_performances(starts, t, st, inst.graph)
        report = audit_involution(inst.graph, inst.sources, st, performances=perfs)
        assert report.ok, report.violations


def test_audit_k0_is_classical_cancellation():
    inst = lattice_instance((0, 2), 2)
    report = audit_involution(inst.graph, inst.sources, state([0, 2], t=2))
    assert report.ok and report.paired == 2 and report.fixed_points == 3


def test_audit_report_json():
    inst = lattice_instance((0, 2), 1)
    data = audit_involution(inst.graph, inst.sources, state([], [(1, 1)], t=1)).to_json()
    assert set(data) >= {"checked", "fixed_points", "paired", "violations"}
