#!/usr/bin/env python3
"""Regenerate the intent-reasoning replay fixture under tests/data/.

Produces gt/pred record files, a replay cache covering every judge call the
pipeline makes over them, and an expected-values sidecar computed with plain
arithmetic (independent of the library's aggregation code). Run from the
repository root:

    python3 tools/make_ir_fixture.py
"""

from __future__ import annotations

import json
from pathlib import Path

from condcap.captions import Condition, ConditionKind, ConditionSet, StructuredCaption
from condcap.dataset import CaptionRecord, infer_category, write_records
from condcap.irscore import run_irscore, summarize_conditions, extract_intent
from condcap.judge import JudgeClient, ReplayCache, validate_response

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
FIXED_TIMESTAMP = "2026-08-10T00:00:00+00:00"

# Per record: (aspect, question, gt_answer, pred_answer, correct, quality)
RECORDS = [
    {
        "id": "r001",
        "kinds": [("camera", ["cams/corridor.txt"])],
        "duration": 9.2,
        "short": "A young woman walks toward the viewer down a corridor, happy and carefree.",
        "gt": {
            "dense": "A young woman walks down a bright corridor in the daytime, adjusting her wide-brimmed hat as the camera retreats in front of her.",
            "main_object": "A young woman with long hair, wearing a light blue t-shirt with pink lettering, blue jeans, and a wide-brimmed hat, stays in the center of the frame, happy and carefree.",
            "background": "A corridor with beige walls and large windows; the day outside is clear and it appears to be daytime.",
            "camera": "Moving backward at roughly the same height as the person, maintaining a medium close-up shot of the upper body.",
            "style": "Casual and candid; the corridor has a modern and clean design.",
            "action": "She walks forward with her hands on her hat, occasionally adjusting it with both hands.",
        },
        "pred": {
            "dense": "A young woman strolls down a bright corridor in the daytime, adjusting her wide-brimmed hat.",
            "main_object": "A young woman with long hair, wearing a white t-shirt, blue jeans, and a wide-brimmed hat, stays in the center of the frame, happy and carefree.",
            "background": "A corridor with beige walls and large windows; the day outside is clear and it appears to be daytime.",
            "camera": "The camera does not move, holding a medium close-up of the upper body at the same height as the person.",
            "style": "Casual and candid; the corridor has a modern and clean design.",
            "action": "She walks forward with her hands on her hat, occasionally adjusting it with both hands.",
        },
        "aspects": {
            "subject": "a young woman in casual clothes with a wide-brimmed hat",
            "background": "a bright corridor in daytime",
            "movement": "she walks forward adjusting her hat",
            "camera": "the camera retreats in front of her",
            "style": "casual, candid footage",
        },
        "pairs": [
            ("subject", "What is the young woman adjusting as she walks down the corridor?", "Her wide-brimmed hat.", "Her wide-brimmed hat.", True, 5),
            ("subject", "What color is the young woman's T-shirt?", "Light blue.", "White.", False, 1),
            ("subject", "How does the young woman feel as she walks down the corridor?", "Happy and carefree.", "Happy and carefree.", True, 5),
            ("subject", "What is the young woman wearing?", "Light blue t-shirt with pink lettering, blue jeans, and a wide-brimmed hat.", "A white t-shirt, blue jeans, and a wide-brimmed hat.", False, 2),
            ("subject", "What is the young woman's hair length?", "Long.", "Long.", True, 5),
            ("subject", "What is the position of the young woman in the frame?", "In the center of the frame.", "In the center of the frame.", True, 5),
            ("background", "Where is the young woman walking?", "Down a corridor.", "Down a corridor.", True, 5),
            ("background", "What time of day does the scene appear to be set?", "Daytime.", "Daytime.", True, 5),
            ("background", "What can be seen in the background of the corridor?", "Beige walls and large windows.", "Beige walls and large windows.", True, 5),
            ("background", "What is the weather like in the video?", "Clear.", "Clear.", True, 5),
            ("camera", "How does the camera follow the young woman?", "Moving backward", "The camera does not move.", False, 1),
            ("camera", "What is the camera's height relative to the person?", "Roughly the same height as the person.", "Roughly the same height as the person.", True, 5),
            ("camera", "What shot type does the camera maintain?", "Medium close-up shot of the upper body.", "Medium close-up shot of the upper body.", True, 5),
            ("style", "What is the style of the video?", "Casual and candid.", "Casual and candid.", True, 5),
            ("style", "What kind of design does the corridor have?", "Modern and clean design.", "Modern and clean design.", True, 5),
            ("movement", "What does the young woman do with both hands occasionally?", "Adjusts her hat.", "Adjusts her hat.", True, 5),
            ("movement", "What is the young woman doing as she moves?", "Walking forward with her hands on her hat.", "Walking forward with her hands on her hat.", True, 5),
        ],
    },
    {
        "id": "r002",
        "kinds": [("depth", ["depth/shark.bin"])],
        "duration": 12.4,
        "short": "A large shark rests on the ocean floor while smaller fish drift around it.",
        "gt": {
            "dense": "A large shark lies motionless on the ocean floor of a blue underwater scene, surrounded by smaller fish, viewed from a higher angle.",
            "main_object": "A large shark resting on the sand; the underwater scene is blue.",
            "background": "The ocean floor, with smaller fish surrounding the shark.",
            "camera": "Positioned at a higher angle, shooting downward, capturing the environment from a medium distance.",
            "style": "Naturalistic style with clear, vivid visuals.",
            "action": "The shark lies motionless; the fish are calm and occasionally darting, drifting around it without disturbing it.",
        },
        "pred": "same",
        "aspects": {
            "subject": "a large shark",
            "background": "a blue underwater scene on the ocean floor",
            "movement": "the shark rests while fish drift",
            "camera": "a high angle looking down",
            "style": "naturalistic underwater footage",
            "interaction": "fish moving around the resting shark",
        },
        "pairs": [
            ("subject", "What is the main object in the video?", "A large shark.", "A large shark.", True, 5),
            ("subject", "What is the color of the underwater scene?", "Blue.", "Blue.", True, 5),
            ("background", "Where is the shark located?", "On the ocean floor.", "On the ocean floor.", True, 5),
            ("background", "What surrounds the shark in the video?", "Smaller fish.", "Smaller fish.", True, 5),
            ("camera", "How does the camera position itself to capture the subject?", "At a higher angle, shooting downward.", "At a higher angle, shooting downward.", True, 5),
            ("camera", "How does the camera capture the environment?", "From a medium distance.", "From a medium distance.", True, 5),
            ("style", "What style does the video portray?", "Naturalistic style with clear, vivid visuals.", "Naturalistic style with clear, vivid visuals.", True, 5),
            ("movement", "What is the main action of the shark in the video?", "Lying motionless.", "Lying motionless.", True, 5),
            ("movement", "What is the movement of the fish like?", "Calm and occasionally darting.", "Calm and occasionally darting.", True, 5),
            ("interaction", "How do the smaller fish interact with the shark?", "They drift around it without disturbing it.", "They drift around it without disturbing it.", True, 5),
        ],
    },
    {
        "id": "r003",
        "kinds": [("identities", ["ids/scientist_a.png", "ids/scientist_b.png"])],
        "duration": 10.8,
        "short": "Two scientists run an experiment side by side while the camera pans right.",
        "gt": {
            "dense": "Two scientists in white lab coats and gloves work in a brightly lit laboratory with shelves filled with bottles, while the camera pans to the right at their eye level.",
            "main_object": "Two scientists wearing white lab coats and gloves; the first scientist is using a microscope.",
            "background": "A laboratory in a brightly lit environment with shelves filled with bottles; the scientific setting is highlighted with static emphasis.",
            "camera": "At approximately the same eye level as the subjects, maintaining a close-up shot; it pans to the right.",
            "style": "Clinical, high-tech, and scientific precision; the lighting theme is bright and cool; the laboratory has a professional and scientific atmosphere.",
            "action": "The first scientist examines a microscope at the beginning; the second scientist handles a pipette and a beaker filled with green liquid, carefully transferring liquid using a pipette into the beaker; occasional small particles float in the background.",
        },
        "pred": {
            "dense": "Two scientists in white lab coats and gloves work in a brightly lit laboratory with shelves filled with bottles, while the camera pans to the right at their eye level.",
            "main_object": "Two scientists wearing white lab coats and gloves; the first scientist is using a microscope.",
            "background": "A laboratory in a brightly lit environment with shelves filled with bottles; the scientific setting is highlighted with static emphasis.",
            "camera": "At approximately the same eye level as the subjects, maintaining a close-up shot; it pans to the right.",
            "action": "The first scientist examines a microscope at the beginning; the second scientist handles a pipette and a beaker filled with green liquid, carefully transferring liquid using a pipette into the beaker; occasional small particles float in the background.",
        },
        "aspects": {
            "subject": "two scientists in lab gear",
            "background": "a brightly lit laboratory",
            "movement": "precise lab manipulations",
            "camera": "an eye-level close-up panning right",
            "style": "clinical and precise",
            "interaction": "the scientists working together on one experiment",
        },
        "pairs": [
            ("subject", "What are the two scientists wearing?", "White lab coats and gloves.", "White lab coats and gloves.", True, 5),
            ("subject", "What is the first scientist using?", "A microscope.", "A microscope.", True, 5),
            ("background", "Where is the laboratory setting?", "In a brightly lit environment with shelves filled with bottles.", "In a brightly lit environment with shelves filled with bottles.", True, 5),
            ("background", "What detail does the background highlight?", "The scientific setting with static emphasis.", "The scientific setting with static emphasis.", True, 5),
            ("camera", "How is the camera positioned?", "At approximately the same eye level as the subjects, maintaining a close-up shot.", "At approximately the same eye level as the subjects, maintaining a close-up shot.", True, 5),
            ("camera", "How does the camera move in the video?", "It pans to the right.", "It pans to the right.", True, 5),
            ("style", "What does the video style emphasize?", "Clinical, high-tech, and scientific precision.", "unanswerable", False, 0),
            ("style", "What is the color theme of the lighting?", "Bright and cool.", "unanswerable", False, 0),
            ("style", "What kind of atmosphere does the laboratory have?", "Professional and scientific.", "unanswerable", False, 0),
            ("movement", "What is the movement of the first scientist at the beginning?", "Examines a microscope.", "Examines a microscope.", True, 5),
            ("movement", "What task is the second scientist engaged in?", "Handling a pipette and a beaker filled with green liquid.", "Handling a pipette and a beaker filled with green liquid.", True, 5),
            ("movement", "How does the second scientist transfer the liquid?", "Carefully using a pipette into the beaker.", "Carefully using a pipette into the beaker.", True, 5),
            ("movement", "Are there any noticeable movements in the background?", "Occasional small particles floating.", "Occasional small particles floating.", True, 5),
            ("interaction", "How do the two scientists work together?", "They work side by side, exchanging samples.", "They work side by side, exchanging samples.", True, 4),
            ("interaction", "What happens between the scientists and the equipment?", "Each operates their own instrument carefully.", "Each operates their own instrument carefully.", True, 4),
        ],
    },
    {
        "id": "r004",
        "kinds": [("camera", ["cams/plaza.txt"])],
        "duration": 7.5,
        "short": "A woman walks through a plaza, the camera following her.",
        "gt": {
            "dense": "A woman in a summer dress walks at a steady pace through an open plaza with fountains while the camera follows her from behind.",
            "main_object": "A woman in a summer dress.",
            "background": "An open plaza with fountains.",
            "camera": "It follows her from behind.",
            "action": "Walking at a steady pace.",
        },
        "pred": "same",
        "aspects": {
            "subject": "a woman in a summer dress",
            "movement": "steady walking",
            "camera": "a following shot from behind",
            "background": "an open plaza",
        },
        "pairs": [
            ("subject", "Who is the main subject of the video?", "A woman in a summer dress.", "A woman in a summer dress.", True, 5),
            ("movement", "What is the woman doing?", "Walking at a steady pace.", "Walking at a steady pace.", True, 5),
            ("camera", "How does the camera behave?", "It follows her from behind.", "It follows her from behind.", True, 4),
            ("background", "Where does the scene take place?", "In an open plaza with fountains.", "In an open plaza with fountains.", True, 5),
        ],
    },
    {
        "id": "r005",
        "kinds": [("depth", ["depth/lighthouse.bin"])],
        "duration": 6.1,
        "short": "A watercolor style clip of a lighthouse on a cliff.",
        "gt": {
            "dense": "A lighthouse on a cliff rendered in watercolor with soft washes of muted blues and grays.",
            "main_object": "A lighthouse on a cliff.",
            "style": "Watercolor with soft washes; muted blues and grays dominate.",
        },
        "pred": {
            "dense": "A lighthouse on a cliff under a soft sky.",
            "main_object": "A lighthouse on a cliff.",
            "style": "Photorealistic; muted blues and grays dominate.",
        },
        "aspects": {"subject": "a lighthouse on a cliff", "style": "watercolor rendering"},
        "pairs": [
            ("subject", "What structure does the video center on?", "A lighthouse on a cliff.", "A lighthouse on a cliff.", True, 5),
            ("style", "What artistic style does the video use?", "Watercolor with soft washes.", "Photorealistic.", False, 1),
            ("style", "What palette dominates the scene?", "Muted blues and grays.", "Muted blues and grays.", True, 4),
        ],
    },
    {
        "id": "r006",
        "kinds": [("pose", ["pose/dancer.jsonl"])],
        "duration": 11.3,
        "short": "A ballet dancer performs slow pirouettes.",
        "gt": {
            "dense": "A ballet dancer in a red leotard performs slow pirouettes on an empty stage and finishes with a low bow.",
            "main_object": "A ballet dancer in a red leotard.",
            "action": "Slow pirouettes, finishing with a low bow.",
        },
        "pred": {
            "dense": "A ballet dancer in a red leotard performs slow pirouettes on an empty stage.",
            "main_object": "A ballet dancer in a red leotard.",
            "action": "Slow pirouettes.",
        },
        "aspects": {"subject": "a ballet dancer", "movement": "slow pirouettes"},
        "pairs": [
            ("subject", "Who performs in the video?", "A ballet dancer in a red leotard.", "A ballet dancer in a red leotard.", True, 5),
            ("subject", "What does the dancer wear?", "A red leotard.", "A red leotard.", True, 5),
            ("movement", "What move does the dancer repeat?", "Slow pirouettes.", "Slow pirouettes.", True, 4),
            ("movement", "How does the dancer finish?", "With a low bow.", "unanswerable", False, 0),
        ],
    },
    {
        "id": "r007",
        "kinds": [("identities", ["ids/man.png", "ids/woman.png", "ids/child.png"])],
        "duration": 14.9,
        "short": "Three people share a picnic under an oak tree.",
        "gt": {
            "dense": "Three people share food around a blanket under an oak tree in a meadow on a sunny day with scattered clouds.",
            "main_object": "Three people; the eldest man carries the basket.",
            "background": "Under an oak tree in a meadow; sunny with scattered clouds.",
            "action": "They share food around a blanket; the woman in the green scarf pours the drinks.",
        },
        "pred": {
            "dense": "Three people share food around a blanket under an oak tree in a meadow on a sunny day with scattered clouds.",
            "main_object": "Three people; the eldest man carries the basket.",
            "background": "Under an oak tree in a meadow; sunny with scattered clouds.",
            "action": "They share food around a blanket; the child pours the drinks.",
        },
        "aspects": {
            "subject": "three picnickers",
            "interaction": "sharing a meal together",
            "background": "a meadow under an oak tree",
        },
        "pairs": [
            ("subject", "How many people appear?", "Three.", "Three.", True, 5),
            ("subject", "Who carries the basket?", "The eldest man.", "The eldest man.", True, 4),
            ("interaction", "What do the three people do together?", "They share food around a blanket.", "They share food around a blanket.", True, 5),
            ("interaction", "Who pours the drinks?", "The woman in the green scarf.", "The child.", False, 2),
            ("background", "Where is the picnic set?", "Under an oak tree in a meadow.", "Under an oak tree in a meadow.", True, 5),
            ("background", "What is the weather?", "Sunny with scattered clouds.", "Sunny with scattered clouds.", True, 5),
        ],
    },
    {
        "id": "r008",
        "kinds": [("camera", ["cams/canyon.txt"]), ("depth", ["depth/canyon.bin"])],
        "duration": 9.9,
        "short": "Glide forward through a red sandstone canyon.",
        "gt": {
            "dense": "The camera glides forward through a canyon of steep red sandstone walls, tilting slightly downward at a narrow green river.",
            "background": "Steep red sandstone walls with a narrow green river at the canyon floor.",
            "camera": "It glides forward through the canyon, tilting slightly downward at the river.",
            "style": "Documentary realism.",
        },
        "pred": {
            "dense": "The camera glides forward through a canyon of steep red sandstone walls, tilting slightly downward at a dirt road.",
            "background": "Steep red sandstone walls with a dirt road at the canyon floor.",
            "camera": "It glides forward through the canyon, tilting slightly downward.",
            "style": "Documentary realism.",
        },
        "aspects": {
            "camera": "a forward glide",
            "background": "a sandstone canyon",
            "style": "documentary footage",
        },
        "pairs": [
            ("camera", "How does the camera travel?", "It glides forward through the canyon.", "It glides forward through the canyon.", True, 5),
            ("camera", "Does the camera tilt?", "Yes, slightly downward at the river.", "Yes, slightly downward.", True, 4),
            ("background", "What landform dominates?", "Steep red sandstone walls.", "Steep red sandstone walls.", True, 5),
            ("background", "What lies at the canyon floor?", "A narrow green river.", "A dirt road.", False, 1),
            ("style", "What is the overall look?", "Documentary realism.", "Documentary realism.", True, 5),
        ],
    },
    {
        "id": "r009",
        "kinds": [("pose", ["pose/boxers.jsonl"]), ("identities", ["ids/boxer_blue.png", "ids/boxer_gold.png"])],
        "duration": 13.7,
        "short": "Two boxers spar in a ring.",
        "gt": {
            "dense": "Two boxers in blue and gold trunks touch gloves, circle each other in a ring with red ropes, and the boxer in gold lands the final hit.",
            "main_object": "Two boxers in blue and gold trunks; the ring ropes are red.",
            "action": "The boxer in blue throws a left jab first; they circle each other; the boxer in gold lands the final hit.",
        },
        "pred": {
            "dense": "Two boxers in blue and gold trunks touch gloves and circle each other in a ring with red ropes.",
            "main_object": "Two boxers in blue and gold trunks; the ring ropes are red.",
            "action": "The boxer in blue throws a left jab first; they circle each other.",
        },
        "aspects": {
            "subject": "two boxers",
            "movement": "sparring exchanges",
            "interaction": "a boxing match between the two",
        },
        "pairs": [
            ("subject", "Who faces off in the ring?", "Two boxers in blue and gold trunks.", "Two boxers in blue and gold trunks.", True, 5),
            ("movement", "What does the boxer in blue throw first?", "A left jab.", "A left jab.", True, 5),
            ("movement", "How do the boxers move around the ring?", "They circle each other.", "They circle each other.", True, 5),
            ("interaction", "How do the boxers begin the match?", "They touch gloves.", "They touch gloves.", True, 5),
            ("interaction", "Who lands the final hit?", "The boxer in gold.", "unanswerable", False, 0),
            ("subject", "What color are the ring ropes?", "Red.", "Red.", True, 3),
        ],
    },
    {
        "id": "r010",
        "kinds": [("depth", ["depth/street.bin"])],
        "duration": 5.4,
        "short": "A cyclist crosses a rainy neon-lit street.",
        "gt": {
            "dense": "A cyclist with a yellow poncho and a messenger bag crosses a street in steady rain while neon shop signs reflect on the asphalt.",
            "main_object": "A cyclist with a yellow poncho carrying a messenger bag.",
            "background": "Neon shop signs reflecting on wet asphalt; steady rain.",
        },
        "pred": "same",
        "aspects": {"subject": "a cyclist in the rain", "background": "a neon-lit street"},
        "pairs": [
            ("subject", "Who crosses the street?", "A cyclist with a yellow poncho.", "A cyclist with a yellow poncho.", True, 5),
            ("subject", "What does the cyclist carry?", "A messenger bag.", "A messenger bag.", True, 5),
            ("background", "What reflects on the asphalt?", "Neon shop signs.", "Neon shop signs.", True, 5),
            ("background", "What is the weather?", "Steady rain.", "Steady rain.", True, 5),
        ],
    },
    {
        "id": "r011",
        "kinds": [("camera", ["cams/statue.txt"])],
        "duration": 8.8,
        "short": "Orbit slowly around a bronze statue.",
        "gt": {
            "dense": "The camera performs a slow orbit around a bronze statue at shoulder height while pigeons take off from the base.",
            "camera": "A slow orbit around the statue at the statue's shoulder height.",
            "action": "The statue stays still; pigeons take off from the base.",
        },
        "pred": {
            "dense": "The camera performs a slow orbit around a bronze statue from ground level.",
            "camera": "A slow orbit around the statue from ground level.",
            "action": "The statue stays still.",
        },
        "aspects": {"camera": "a slow orbit", "movement": "a still subject with ambient motion"},
        "pairs": [
            ("camera", "What path does the camera take?", "A slow orbit around the statue.", "A slow orbit around the statue.", True, 5),
            ("camera", "At what height does the camera stay?", "At the statue's shoulder height.", "Ground level.", False, 1),
            ("movement", "Does the statue move?", "No, it stays still.", "No, it stays still.", True, 5),
            ("movement", "What moves in the scene besides the camera?", "Pigeons take off from the base.", "unanswerable", False, 0),
        ],
    },
    {
        "id": "r012",
        "kinds": [
            ("camera", ["cams/kitchen.txt"]),
            ("identities", ["ids/chef_tall.png", "ids/chef_short.png"]),
            ("depth", ["depth/kitchen.bin"]),
        ],
        "duration": 16.2,
        "short": "Two chefs cook side by side in a warm kitchen.",
        "gt": {
            "dense": "Two chefs cook at separate stations in a warmly lit kitchen with copper pans hanging behind the counter and a busy evening street visible through the window, while the camera pans between the two stations; the taller chef chops fresh basil.",
            "main_object": "Two chefs; the taller chef chops fresh basil.",
            "background": "Copper pans hang behind the counter; a busy evening street is visible through the window.",
            "camera": "It pans between the two stations.",
            "style": "Warm and soft lighting.",
        },
        "pred": {
            "dense": "Two chefs cook at separate stations in a warmly lit kitchen with copper pans hanging behind the counter and a garden visible through the window, while the camera pans between the two stations; the taller chef chops fresh basil.",
            "main_object": "Two chefs; the taller chef chops fresh basil.",
            "background": "Copper pans hang behind the counter; a garden is visible through the window.",
            "camera": "It pans between the two stations.",
            "style": "Warm and soft lighting.",
        },
        "aspects": {
            "subject": "two chefs",
            "camera": "panning between stations",
            "style": "warm lighting",
            "background": "a kitchen interior",
        },
        "pairs": [
            ("subject", "How many chefs cook together?", "Two.", "Two.", True, 5),
            ("subject", "What does the taller chef chop?", "Fresh basil.", "Fresh basil.", True, 4),
            ("camera", "How does the camera cover the kitchen?", "It pans between the two stations.", "It pans between the two stations.", True, 5),
            ("style", "What is the lighting style?", "Warm and soft.", "Warm and soft.", True, 5),
            ("background", "What hangs behind the counter?", "Copper pans.", "Copper pans.", True, 5),
            ("background", "What is visible through the window?", "A busy evening street.", "A garden.", False, 2),
        ],
    },
]

# Standalone intent-extraction fixture: a style-only prompt with no conditions.
STYLE_ONLY_PROMPT = "A watercolor style clip of a lighthouse."
STYLE_ONLY_ASPECTS = {
    "subject": "a lighthouse",
    "style": "watercolor rendering",
}


class ScriptedJudge(JudgeClient):
    def __init__(self, queues: dict[str, list[dict]]):
        self.queues = {k: list(v) for k, v in queues.items()}

    def complete(self, request):
        payload = self.queues[request.schema_id].pop(0)
        return validate_response(request.schema_id, payload)


class RecordingJudge(JudgeClient):
    def __init__(self, inner: JudgeClient, cache: ReplayCache):
        self.inner = inner
        self.cache = cache

    def complete(self, request):
        payload = self.inner.complete(request)
        self.cache.append(request, payload)
        return payload


def build_records() -> tuple[list[CaptionRecord], list[CaptionRecord]]:
    gt_records, pred_records = [], []
    for row in RECORDS:
        conditions = ConditionSet(
            tuple(Condition(ConditionKind(kind), tuple(refs)) for kind, refs in row["kinds"])
        )
        common = dict(
            id=row["id"],
            video_ref=f"videos/{row['id']}.mp4",
            duration_s=row["duration"],
            conditions=conditions,
            short_caption=row["short"],
            category=infer_category(conditions),
        )
        gt_caption = StructuredCaption(**row["gt"])
        pred_fields = row["gt"] if row["pred"] == "same" else row["pred"]
        gt_records.append(CaptionRecord(structured_caption=gt_caption, **common))
        pred_records.append(CaptionRecord(structured_caption=StructuredCaption(**pred_fields), **common))
    return gt_records, pred_records


def scripted_queues(row: dict) -> dict[str, list[dict]]:
    return {
        "ir_intent.v1": [
            {"aspects": [{"aspect": a, "note": n} for a, n in row["aspects"].items()]}
        ],
        "ir_qa_pairs.v1": [
            {
                "pairs": [
                    {"aspect": a, "question": q, "gt_answer": g}
                    for a, q, g, _, _, _ in row["pairs"]
                ]
            }
        ],
        "ir_answer.v1": [{"answer": p} for _, _, _, p, _, _ in row["pairs"]],
        "ir_verdict.v1": [
            {"correct": c, "quality": quality, "rationale": "scripted fixture verdict"}
            for _, _, _, _, c, quality in row["pairs"]
        ],
    }


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    cache_path = DATA / "ir_replay_cache.jsonl"
    if cache_path.exists():
        cache_path.unlink()
    cache = ReplayCache(cache_path)

    gt_records, pred_records = build_records()
    write_records(gt_records, DATA / "ir_gt_records.jsonl")
    write_records(pred_records, DATA / "ir_pred_records.jsonl")

    expected_records = {}
    for row, gt, pred in zip(RECORDS, gt_records, pred_records):
        judge = RecordingJudge(ScriptedJudge(scripted_queues(row)), cache)
        run = run_irscore(
            gt_caption=gt.structured_caption,
            pred_caption=pred.structured_caption,
            short_prompt=gt.short_caption,
            condition_summaries=summarize_conditions(gt.conditions),
            judge=judge,
        )
        # independent arithmetic over the fixture table (not the library report)
        n = len(row["pairs"])
        n_correct = sum(1 for item in row["pairs"] if item[4])
        q_total = sum(item[5] for item in row["pairs"])
        expected_records[row["id"]] = {
            "accuracy": 100.0 * n_correct / n,
            "mean_quality": q_total / n,
            "n_pairs": n,
        }
        assert run.report.n_pairs == n, row["id"]

    # standalone style-only intent fixture (no record attached)
    judge = RecordingJudge(
        ScriptedJudge(
            {
                "ir_intent.v1": [
                    {"aspects": [{"aspect": a, "note": n} for a, n in STYLE_ONLY_ASPECTS.items()]}
                ]
            }
        ),
        cache,
    )
    extract_intent(STYLE_ONLY_PROMPT, [], judge)

    n_records = len(RECORDS)
    corpus = {
        "accuracy": sum(r["accuracy"] for r in expected_records.values()) / n_records,
        "mean_quality": sum(r["mean_quality"] for r in expected_records.values()) / n_records,
        "n_records": n_records,
        "n_pairs": sum(r["n_pairs"] for r in expected_records.values()),
    }
    expected = {
        "records": expected_records,
        "corpus": corpus,
        "pairs": [
            {
                "record": row["id"],
                "aspect": a,
                "question": q,
                "gt_answer": g,
                "pred_answer": p,
                "correct": c,
                "quality": quality,
            }
            for row in RECORDS
            for a, q, g, p, c, quality in row["pairs"]
        ],
        "style_only_prompt": STYLE_ONLY_PROMPT,
        "style_only_aspects": sorted(STYLE_ONLY_ASPECTS),
    }
    (DATA / "ir_expected.json").write_text(json.dumps(expected, indent=2) + "\n")

    # pin timestamps so regeneration is reproducible
    lines = []
    for line in cache_path.read_text().splitlines():
        entry = json.loads(line)
        entry["timestamp"] = FIXED_TIMESTAMP
        lines.append(json.dumps(entry, sort_keys=True))
    cache_path.write_text("\n".join(lines) + "\n")

    n_calls = len(lines)
    print(f"records: {n_records}  judge calls recorded: {n_calls}")
    assert n_calls >= 150, "fixture must hold at least 150 recorded judge calls"


if __name__ == "__main__":
    main()
