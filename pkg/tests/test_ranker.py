import math
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from longnav.georoute import LocalPoint
from longnav.ranker import (
    BEHIND,
    DIRECTIONS,
    CameraModel,
    ExternalBackend,
    HeuristicBackend,
    PromptSpec,
    RankingService,
    RankResponse,
    SceneFacts,
    Unparseable,
    UnprojectableTrajectory,
    build_prompt,
    build_response,
    extract_facts,
    goal_direction,
    heuristic_rank,
    number_right_to_left,
    parse_response,
    project_point,
    read_ppm,
    render_overlay,
    write_ppm,
)
from longnav.ranker.overlay import BOX_BG, GLYPH_FG
from longnav.ranker.response import canonical_reason
from longnav.sim import Label, Pedestrian, RobotState, SemanticGrid, Sign, WorldState
from longnav.sim.sensing import RangeScan
from longnav.trajgen import CandidateSet, Trajectory, VelocityHistory, generate_candidates

GOLDEN = Path(__file__).resolve().parents[1] / "prompts" / "n5_k20_front_left.txt"


def matrix_projection(cam, X, Y):
    """Full K [R | -R C] projection of a body-frame ground point."""
    K = np.array([[cam.focal, 0, cam.cx], [0, cam.focal, cam.cy], [0, 0, 1.0]])
    sp, cp = math.sin(cam.pitch), math.cos(cam.pitch)
    z = np.array([cp, 0.0, -sp])  # optical axis, tilted down
    x = np.array([0.0, -1.0, 0.0])  # image right = body right
    y = np.cross(z, x)
    R = np.vstack([x, y, z])
    C = np.array([0.0, 0.0, cam.height])
    P = K @ np.hstack([R, (-R @ C)[:, None]])
    h = P @ np.array([X, Y, 0.0, 1.0])
    return h[0] / h[2], h[1] / h[2]


def fan(n=5):
    a = -math.pi + 2 * math.pi * np.arange(64) / 64
    return generate_candidates([RangeScan(a, np.full(64, 50.0), 50.0)], VelocityHistory(), n)


def flat_facts(n, mis=None):
    mis = mis or [0.0] * n
    return SceneFacts((False,) * n, (0.0,) * n, (False,) * n, tuple(mis))


# camera


def test_projection_matches_matrix_oracle():
    cam = CameraModel(height=1.0, pitch=0.2, focal=500, width=640, image_height=480)
    for X, Y in [(10.0, 0.0), (10.0, 3.0), (4.0, -2.5), (30.0, 8.0)]:
        u, v = project_point(cam, (X, Y))
        uo, vo = matrix_projection(cam, X, Y)
        assert abs(u - uo) < 0.5 and abs(v - vo) < 0.5


def test_optical_axis_hits_principal_point():
    cam = CameraModel()
    d = cam.height / math.tan(cam.pitch)
    u, v = project_point(cam, (d, 0.0))
    assert u == pytest.approx(cam.cx) and v == pytest.approx(cam.cy)


def test_behind():
    assert project_point(CameraModel(), (-3.0, 0.0)) is BEHIND


@given(st.floats(1.0, 40.0), st.floats(-10.0, 10.0))
def test_ground_ray_inverts_projection(X, Y):
    cam = CameraModel()
    u, v = project_point(cam, (X, Y))
    gx, gy = cam.ground_ray(u, v)
    assert gx == pytest.approx(X, rel=1e-6, abs=1e-6) and gy == pytest.approx(Y, rel=1e-6, abs=1e-6)


def test_camera_validation():
    with pytest.raises(ValueError):
        CameraModel(focal=0)
    with pytest.raises(ValueError):
        CameraModel(pitch=math.pi / 2)


# numbering


def test_numbering_examples():
    cam = CameraModel()
    f, cx = cam.focal, cam.cx
    ends = []
    for u in (600.0, 320.0, 40.0):
        X = 10.0
        zc = X * math.cos(cam.pitch) + cam.height * math.sin(cam.pitch)
        ends.append((X, -(u - cx) * zc / f))
    cs = CandidateSet(tuple(Trajectory(np.linspace([0.0, 0.0], [x, y], 30)) for x, y in ends))
    assert number_right_to_left(cs, cam) == [0, 1, 2]
    assert number_right_to_left(CandidateSet(cs.trajectories[:1]), cam) == [0]


def test_numbering_matches_sort_oracle():
    cam = CameraModel()
    cs = fan(5)
    us = [project_point(cam, t.waypoints[-1])[0] for t in cs.trajectories]
    order = sorted(range(5), key=lambda i: -us[i])
    labels = number_right_to_left(cs, cam)
    assert [labels[i] for i in order] == [0, 1, 2, 3, 4]


def test_numbering_mirror_reverses():
    cam = CameraModel()
    cs = fan(7)
    mirrored = CandidateSet(tuple(Trajectory(t.waypoints * [1.0, -1.0]) for t in cs.trajectories))
    a, b = number_right_to_left(cs, cam), number_right_to_left(mirrored, cam)
    assert [6 - x for x in a] == b


def test_numbering_rejects_behind():
    cs = CandidateSet((Trajectory([[0.0, 0.0], [-1.0, 0.0]]),))
    with pytest.raises(UnprojectableTrajectory):
        number_right_to_left(cs, CameraModel())


# prompt


def test_prompt_golden():
    assert build_prompt(PromptSpec(5, 20, "Front Left")).encode() == GOLDEN.read_bytes()


def test_golden_has_fixed_sentences():
    text = GOLDEN.read_text()
    for anchor in (
        "Rank trajectories for social navigation",
        "output the format: [robot mode], [ranked numbers], reason",
        "keep in crosswalks",
        "recognize the traffic signs",
        "avoid off-road terrain for small wheeled robots",
        "keep away from the groups of pedestrians",
    ):
        assert anchor in text


def test_prompt_degenerate_range():
    assert "[0-0]" in build_prompt(PromptSpec(1, 5.5))


def test_prompt_locality_in_k():
    a = build_prompt(PromptSpec(5, 20, "Front"))
    b = build_prompt(PromptSpec(5, 35, "Front"))
    diff = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    assert len(a) == len(b) and len(diff) == 4  # two digits at each of two slots
    assert a.replace("20 meters", "35 meters") == b


@given(
    st.tuples(st.integers(1, 16), st.floats(0.1, 500.0), st.sampled_from(DIRECTIONS)),
    st.tuples(st.integers(1, 16), st.floats(0.1, 500.0), st.sampled_from(DIRECTIONS)),
)
def test_prompt_injective(s1, s2):
    if s1 != s2:
        assert build_prompt(PromptSpec(*s1)) != build_prompt(PromptSpec(*s2))


def test_prompt_spec_validation():
    for bad in [(0, 5, "Front"), (3, 0, "Front"), (3, 5, "Right Front")]:
        with pytest.raises(ValueError):
            PromptSpec(*bad)


@pytest.mark.parametrize(
    "deg,name",
    [(0, "Front"), (30, "Front"), (31, "Front Left"), (-60, "Front Right"), (120, "Left"), (-150, "Right"), (179, "Back"), (-170, "Back")],
)
def test_goal_direction(deg, name):
    assert goal_direction(math.radians(deg)) == name


# response parsing

MALFORMED = [
    ("", Unparseable),
    ("I cannot help with that.", Unparseable),
    ("[]", Unparseable),
    ("Normal", None),
    ("normal, [3, 0, 1, 2, 4], ok", None),
    ("NORMAL,[3,0,1,2,4]", None),
    ("Slow [4 3 2 1 0] crowd ahead", None),
    ("Stop, [9, 8, 7], blocked", None),
    ("Normal, [2, 2, 2, 2, 2]", None),
    ("Normal, [-1, 0, 1]", None),
    ("Walk fast, [1, 0]", None),
    ("Mode: Slow. Ranking: 3, 1, 0. Reason: people", None),
    ("[0, 1, 2, 3, 4]", None),
    ("Normal, [a, b, c], [2, 1]", None),
    ("Normal, [3, 0, 1, 2, 4, 5, 6, 7], extra", None),
    ("Normal, [3,, 0,, 1]", None),
    ("Normal, (3, 0, 1, 2, 4)", None),
    ("```\nSlow, [1, 0, 2, 3, 4], kids\n```", None),
    ("Normal, [99999999999999999999, 1]", None),
    ("Stop\n[0]\n", None),
    ("Normal, [1.5, 2.0, 0]", None),
    ("\x00\x01Slow", None),
    ("slow, stop, [0, 1]", None),
]


@pytest.mark.parametrize("text,err", MALFORMED)
def test_malformed_corpus(text, err):
    if err is not None:
        with pytest.raises(err):
            parse_response(text, 5)
        return
    r = parse_response(text, 5)
    assert sorted(r.ranking) == [0, 1, 2, 3, 4]
    assert r.mode in ("Normal", "Slow", "Stop")


def test_reference_vector():
    r = parse_response("Normal, [3, 0, 1, 2, 4], path 3 avoids the group", 5)
    assert (r.mode, r.ranking, r.reason) == ("Normal", (3, 0, 1, 2, 4), "path 3 avoids the group")
    assert r.repairs == ()
    r6 = parse_response("Slow, [4, 5, 0, 1, 2, 3], people on the left", 6)
    assert r6.ranking == (4, 5, 0, 1, 2, 3)


def test_single_label():
    assert parse_response("Slow, [0], busy", 1).ranking == (0,)


def test_hand_repair():
    r = parse_response("Normal, [2, 2, 0]", 4)
    assert r.ranking == (2, 0, 1, 3) and r.mode == "Normal"
    assert len(r.repairs) == 2


def test_unknown_mode_falls_back_to_slow():
    assert parse_response("Hurry, [1, 0]", 2).mode == "Slow"


reasons = st.text(st.characters(blacklist_categories=("Cs",)), max_size=40).map(canonical_reason)


@given(st.integers(1, 16).flatmap(lambda n: st.permutations(list(range(n)))), st.sampled_from(["Normal", "Slow", "Stop"]), reasons)
def test_round_trip(perm, mode, reason):
    r = RankResponse(mode, tuple(perm), reason)
    assert parse_response(build_response(r), len(perm)) == r


@given(st.text(max_size=80), st.integers(1, 12))
def test_parser_total(text, n):
    try:
        r = parse_response(text, n)
    except Unparseable:
        return
    assert sorted(r.ranking) == list(range(n))


# heuristic


def test_heuristic_goal_alignment_only():
    r = heuristic_rank(flat_facts(4, [0.3, 0.0, 0.9, 0.1]), PromptSpec(4, 10))
    assert r.mode == "Normal" and r.ranking == (1, 3, 0, 2)


def test_heuristic_ties_lower_label_first():
    assert heuristic_rank(flat_facts(3, [0.2, 0.2, 0.2]), PromptSpec(3, 10)).ranking == (0, 1, 2)


def test_heuristic_stop_close_pedestrian():
    f = SceneFacts((True,) * 3, (0.0,) * 3, (False,) * 3, (0.0,) * 3, ((0.3, 0.0, 0.0, 0.0),))
    assert heuristic_rank(f, PromptSpec(3, 10)).mode == "Stop"


def test_heuristic_slow_when_approaching():
    f = SceneFacts((False,) * 3, (0.0,) * 3, (False,) * 3, (0.0,) * 3, ((3.0, 1.0, -1.0, 0.0),))
    assert heuristic_rank(f, PromptSpec(3, 10)).mode == "Slow"
    receding = SceneFacts((False,) * 3, (0.0,) * 3, (False,) * 3, (0.0,) * 3, ((3.0, 1.0, 1.0, 0.0),))
    assert heuristic_rank(receding, PromptSpec(3, 10)).mode == "Normal"


def test_heuristic_stop_without_open_space():
    f = SceneFacts((True,) * 2, (1.0,) * 2, (False,) * 2, (0.0,) * 2)
    assert heuristic_rank(f, PromptSpec(2, 10)).mode == "Stop"


def test_heuristic_avoids_pedestrian_path_and_offroad():
    f = SceneFacts((True, False, False), (0.0, 0.0, 0.6), (False,) * 3, (0.0, 0.2, 0.0))
    assert heuristic_rank(f, PromptSpec(3, 10)).ranking == (1, 2, 0)


def test_heuristic_sign_slows():
    f = SceneFacts((False,), (0.0,), (False,), (0.0,), (), "stop")
    assert heuristic_rank(f, PromptSpec(1, 10)).mode == "Slow"


def test_extract_facts_scene():
    labels = np.full((80, 80), Label.ROAD, dtype=np.uint8)
    labels[:, 50:] = Label.VEGETATION  # everything beyond x = 25 m is lawn
    world = WorldState(
        SemanticGrid(labels, 0.5),
        RobotState(10.0, 20.0, 0.0),
        pedestrians=(Pedestrian(LocalPoint(14.0, 20.0), (-1.0, 0.0)),),
        signs=(Sign(LocalPoint(18.0, 21.0), "yield"),),
    )
    cs = fan(5)
    lab = number_right_to_left(cs, CameraModel())
    f = extract_facts(world, cs, lab, (30.0, 0.0))
    straight = lab[2]
    assert f.ped_near_path[straight]
    assert f.offroad_fraction[straight] > 0.3
    assert f.sign == "yield"
    assert f.pedestrians[0][:2] == pytest.approx((4.0, 0.0))
    assert heuristic_rank(f, PromptSpec(5, 30)).mode == "Slow"


# overlay


def overlay_scene():
    labels = np.full((100, 100), Label.SIDEWALK, dtype=np.uint8)
    labels[:, :40] = Label.VEGETATION
    return SemanticGrid(labels, 0.5, LocalPoint(-25.0, -25.0))


def test_overlay_deterministic_and_ppm_round_trip(tmp_path):
    cam, cs = CameraModel(), fan(5)
    lab = number_right_to_left(cs, cam)
    a = render_overlay(overlay_scene(), cs, lab, cam)
    b = render_overlay(overlay_scene(), cs, lab, cam)
    assert a.shape == (480, 640, 3) and a.tobytes() == b.tobytes()
    write_ppm(tmp_path / "o.ppm", a)
    assert np.array_equal(read_ppm(tmp_path / "o.ppm"), a)


def test_overlay_empty_is_plain_scene():
    cam = CameraModel()
    img = render_overlay(overlay_scene(), None, [], cam)
    assert not np.any(np.all(img == GLYPH_FG, axis=-1))


def test_label_centred_on_last_waypoint():
    cam = CameraModel()
    for y_end in (-3.0, 0.0, 2.0):
        wps = np.column_stack([np.linspace(0, 12, 13), np.linspace(0, y_end, 13)])
        cs = CandidateSet((Trajectory(wps),))
        img = render_overlay(overlay_scene(), cs, [0], cam)
        mask = np.all(img == BOX_BG, axis=-1) | np.all(img == GLYPH_FG, axis=-1)
        rows, cols = np.nonzero(mask)
        cu, cv = (cols.min() + cols.max() + 1) / 2, (rows.min() + rows.max() + 1) / 2
        u, v = project_point(cam, wps[-1])
        assert abs(cu - u) <= 2 and abs(cv - v) <= 2


# backends


def request_args():
    return PromptSpec(3, 10), flat_facts(3, [0.5, 0.0, 0.2])


def test_external_backend_happy_path():
    seen = {}

    def post(url, payload, token, timeout):
        seen.update(payload)
        return "Slow, [2, 0, 1], people"

    svc = RankingService(ExternalBackend("http://ranker.invalid", "tok", post=post), 1.0)
    r, src = svc.rank(*request_args(), image=np.zeros((4, 4, 3), dtype=np.uint8))
    svc.close()
    assert src == "backend" and r.ranking == (2, 0, 1) and r.mode == "Slow"
    assert "Rank trajectories for social navigation" in seen["prompt"] and "image_ppm_b64" in seen


@pytest.mark.parametrize(
    "post,why",
    [
        (lambda *a: "no idea", "fallback:unparseable"),
        (lambda *a: (_ for _ in ()).throw(ConnectionError("down")), "fallback:error:ConnectionError"),
    ],
)
def test_external_backend_falls_back(post, why):
    svc = RankingService(ExternalBackend("http://ranker.invalid", post=post), 1.0)
    r, src = svc.rank(*request_args())
    svc.close()
    assert src == why
    assert r == heuristic_rank(request_args()[1], request_args()[0])
    assert svc.fallbacks == 1


def test_external_backend_deadline():
    def slow(*a):
        time.sleep(0.5)
        return "Normal, [0, 1, 2], late"

    svc = RankingService(ExternalBackend("http://ranker.invalid", post=slow), 0.05)
    t0 = time.perf_counter()
    _, src = svc.rank(*request_args())
    assert time.perf_counter() - t0 < 0.3
    assert src == "fallback:timeout"
    _, src2 = svc.rank(*request_args())  # previous request still in flight
    assert src2 == "fallback:busy"
    svc.close()


def test_missing_endpoint_falls_back(monkeypatch):
    monkeypatch.delenv("LONGNAV_RANKER_URL", raising=False)
    svc = RankingService(ExternalBackend(), 1.0)
    _, src = svc.rank(*request_args())
    svc.close()
    assert src.startswith("fallback:error")


def test_heuristic_backend_is_direct():
    r, src = RankingService(HeuristicBackend()).rank(*request_args())
    assert src == "backend" and r.ranking == (1, 2, 0)
