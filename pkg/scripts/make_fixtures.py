#!/usr/bin/env python3
"""Generate the committed test fixtures.

Everything here is computed independently of the package under test: the
manifest writer, the portable RNG, question generation, answer folding,
and the expected report tables are all reimplemented from their documented
recipes using only the standard library, numpy, and PIL.  Tests then check
that the package reproduces these frozen artifacts exactly.

Run from the repository root:  python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

# --- the 80 instance labels, ascending official category id ---------------

CATEGORIES = {
    1: "person", 2: "bicycle", 3: "car", 4: "motorcycle", 5: "airplane",
    6: "bus", 7: "train", 8: "truck", 9: "boat", 10: "traffic light",
    11: "fire hydrant", 13: "stop sign", 14: "parking meter", 15: "bench",
    16: "bird", 17: "cat", 18: "dog", 19: "horse", 20: "sheep", 21: "cow",
    22: "elephant", 23: "bear", 24: "zebra", 25: "giraffe", 27: "backpack",
    28: "umbrella", 31: "handbag", 32: "tie", 33: "suitcase", 34: "frisbee",
    35: "skis", 36: "snowboard", 37: "sports ball", 38: "kite",
    39: "baseball bat", 40: "baseball glove", 41: "skateboard",
    42: "surfboard", 43: "tennis racket", 44: "bottle", 46: "wine glass",
    47: "cup", 48: "fork", 49: "knife", 50: "spoon", 51: "bowl",
    52: "banana", 53: "apple", 54: "sandwich", 55: "orange", 56: "broccoli",
    57: "carrot", 58: "hot dog", 59: "pizza", 60: "donut", 61: "cake",
    62: "chair", 63: "couch", 64: "potted plant", 65: "bed",
    67: "dining table", 70: "toilet", 72: "tv", 73: "laptop", 74: "mouse",
    75: "remote", 76: "keyboard", 77: "cell phone", 78: "microwave",
    79: "oven", 80: "toaster", 81: "sink", 82: "refrigerator", 84: "book",
    85: "clock", 86: "vase", 87: "scissors", 88: "teddy bear",
    89: "hair drier", 90: "toothbrush",
}
LABELS = tuple(CATEGORIES.values())
NAME_TO_ID = {name: cid for cid, name in CATEGORIES.items()}
assert len(LABELS) == 80


# --- portable RNG, reimplemented from the documented recipe ----------------

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return (x ^ (x >> 31)) & MASK64


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


class PortableRng:
    def __init__(self, seed: int, key):
        k = key & MASK64 if isinstance(key, int) else fnv1a64(str(key).encode())
        self.state = mix64(mix64(seed) ^ k)

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def sample(self, items, k):
        pool = list(items)
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


# --- independent manifest writer -------------------------------------------

def write_manifest(path: Path, tensors: dict[str, np.ndarray], metadata: dict) -> None:
    path.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, arr in tensors.items():
        arr32 = np.ascontiguousarray(arr, dtype="<f4")
        fname = name.replace("/", "_") + ".f32"
        (path / fname).write_bytes(arr32.tobytes())
        entries.append(
            {"name": name, "dtype": "f32le", "shape": list(arr32.shape), "file": fname}
        )
    doc = {"version": 1, "tensors": entries, "metadata": metadata}
    (path / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True))


# --- geometry helpers -------------------------------------------------------

def shoelace(poly: list[float]) -> float:
    xs = poly[0::2]
    ys = poly[1::2]
    n = len(xs)
    acc = 0.0
    for k in range(n):
        acc += xs[k] * ys[(k + 1) % n] - xs[(k + 1) % n] * ys[k]
    return abs(acc) / 2.0


def rect_poly(x0: float, y0: float, x1: float, y1: float) -> list[float]:
    return [x0, y0, x1, y0, x1, y1, x0, y1]


def ngon_poly(cx: float, cy: float, r: float, n: int, phase: float = 0.0) -> list[float]:
    poly = []
    for k in range(n):
        ang = phase + 2.0 * np.pi * k / n
        poly.extend([cx + r * np.cos(ang), cy + r * np.sin(ang)])
    return [round(float(v), 2) for v in poly]


def mpl_polygon_area(poly: list[float], size: tuple[int, int]) -> int:
    """Third-opinion pixel-center rasterized area, to sanity-check fixtures."""
    from matplotlib.path import Path as MplPath

    h, w = size
    verts = list(zip(poly[0::2], poly[1::2]))
    yy, xx = np.mgrid[0:h, 0:w]
    pts = np.column_stack([(xx + 0.5).ravel(), (yy + 0.5).ravel()])
    return int(MplPath(verts).contains_points(pts).sum())


def encode_rle_cm(mask: np.ndarray) -> list[int]:
    """Column-major uncompressed RLE, zero-run first."""
    flat = mask.ravel(order="F")
    counts = []
    run_val = False
    run_len = 0
    for v in flat:
        if bool(v) == run_val:
            run_len += 1
        else:
            counts.append(run_len)
            run_val = bool(v)
            run_len = 1
    counts.append(run_len)
    return counts


# --- answer-classification + scoring, independent fold ----------------------

PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"


def classify(raw_text: str) -> str:
    tokens = raw_text.split()
    if not tokens:
        return "Unsure"
    head = tokens[0].strip(PUNCT).lower()
    if head == "yes":
        return "Yes"
    if head == "no":
        return "No"
    return "Unsure"


def fold_metrics(pairs: list[tuple[str, str]]) -> dict:
    """pairs of (ground_truth, raw_text) -> percentage metrics dict."""
    tp = fp = tn = fn = up = un = 0
    for gt, raw in pairs:
        v = classify(raw)
        present = gt == "present"
        if v == "Yes":
            tp += present
            fp += not present
        elif v == "No":
            fn += present
            tn += not present
        else:
            up += present
            un += not present
    total = tp + fp + tn + fn + up + un

    def pct(num, den):
        return round(100.0 * num / den, 2) if den > 0 else None

    prec = tp / (tp + fp) if tp + fp > 0 else None
    rec = tp / (tp + fn + up) if tp + fn + up > 0 else None
    f1 = None
    if prec is not None and rec is not None and prec + rec > 0:
        f1 = round(100.0 * 2 * prec * rec / (prec + rec), 2)
    return {
        "accuracy": pct(tp + tn, total),
        "precision": pct(tp, tp + fp),
        "recall": pct(tp, tp + fn + up),
        "tnr": pct(tn, tn + fp + un),
        "f1": f1,
    }


def markers_for(metrics: dict, baseline: dict) -> dict:
    marks = {}
    for key in ("accuracy", "precision", "recall", "tnr", "f1"):
        v, b = metrics[key], baseline[key]
        if v is None or b is None or v == b:
            marks[key] = ""
        else:
            marks[key] = "▲" if v > b else "▽"
    return marks


def assert_no_rounding_ties(metrics: dict) -> None:
    # Frozen percentages must not sit exactly on a 2-decimal rounding tie,
    # so round-half-even vs half-away cannot matter.
    for key, v in metrics.items():
        if isinstance(v, float):
            assert not f"{v:.3f}".endswith("5"), (key, v)


# --- corpus: 5 images + synthetic exports + annotations ----------------------

P = 24
EMBED_DIM = 16

CORPUS = [
    # image_id, (H, W), [(label, kind, geometry)]
    (101, (96, 128), [("dog", "rect", (20, 30, 60, 90)), ("person", "rect", (10, 100, 80, 120))]),
    (102, (120, 96), [("car", "ngon", (48, 60, 28, 8)), ("dog", "rect", (80, 10, 110, 40))]),
    (103, (80, 80), [("cat", "ngon", (40, 40, 22, 6))]),
    (104, (128, 160), [("person", "rect", (30, 20, 100, 60)), ("bicycle", "ngon", (64, 110, 26, 12))]),
    (105, (96, 96), [("bird", "rect", (8, 8, 40, 40)), ("bird", "rect", (56, 56, 88, 88))]),
]


def shape_mask(kind: str, geom, size) -> np.ndarray:
    h, w = size
    yy, xx = np.mgrid[0:h, 0:w]
    cy, cx = yy + 0.5, xx + 0.5
    if kind == "rect":
        y0, x0, y1, x1 = geom
        return (cy >= y0) & (cy < y1) & (cx >= x0) & (cx < x1)
    cy0, cx0, r, _n = geom
    return (cy - cy0) ** 2 + (cx - cx0) ** 2 <= r * r


def shape_polygon(kind: str, geom) -> list[float]:
    if kind == "rect":
        y0, x0, y1, x1 = geom
        return rect_poly(x0, y0, x1, y1)
    cy0, cx0, r, n = geom
    return ngon_poly(cx0, cy0, r, n)


def build_corpus() -> None:
    out = FIXTURES / "corpus"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240814)

    images = []
    annotations = []
    ann_id = 1000
    for image_id, (h, w), objs in CORPUS:
        images.append({"id": image_id, "height": h, "width": w,
                       "file_name": f"img_{image_id}.png"})
        # Scene: noisy background, shapes brightened so overlays are visible.
        pix = rng.integers(40, 90, size=(h, w, 3), dtype=np.uint8)
        combined = np.zeros((h, w), dtype=bool)
        for label, kind, geom in objs:
            m = shape_mask(kind, geom, (h, w))
            combined |= m
            tint = rng.integers(120, 240, size=3)
            pix[m] = (0.4 * pix[m] + 0.6 * tint).astype(np.uint8)
            poly = shape_polygon(kind, geom)
            annotations.append({
                "id": ann_id,
                "image_id": image_id,
                "category_id": NAME_TO_ID[label],
                "segmentation": [poly],
                "area": round(shoelace(poly), 2),
                "bbox": [min(poly[0::2]), min(poly[1::2]),
                         max(poly[0::2]) - min(poly[0::2]),
                         max(poly[1::2]) - min(poly[1::2])],
                "iscrowd": 0,
            })
            ann_id += 1
        Image.fromarray(pix, mode="RGB").save(out / f"img_{image_id}.png")

        # Per-patch occupancy of the object union drives the synthetic export,
        # so attribution maps genuinely highlight the annotated objects.
        occ = np.zeros((P, P))
        ys = np.linspace(0, h, P + 1)
        xs = np.linspace(0, w, P + 1)
        for i in range(P):
            for j in range(P):
                cell = combined[int(ys[i]):max(int(ys[i + 1]), int(ys[i]) + 1),
                                int(xs[j]):max(int(xs[j + 1]), int(xs[j]) + 1)]
                occ[i, j] = cell.mean() if cell.size else 0.0

        text = rng.normal(size=EMBED_DIM).astype(np.float32)
        text /= np.linalg.norm(text)
        text = (text / np.linalg.norm(text)).astype(np.float32)

        ortho = rng.normal(size=EMBED_DIM).astype(np.float32)
        ortho -= ortho @ text * text
        ortho /= np.linalg.norm(ortho)

        weights = occ.reshape(-1)
        noise = 0.15 * rng.normal(size=(P * P,))
        contributions = (
            (0.2 + 0.8 * weights)[:, None] * text[None, :]
            + (0.5 + noise)[:, None] * ortho[None, :]
        )[None, :, :]
        final_tokens = (
            (0.9 - 0.7 * weights)[:, None] * text[None, :]
            + (0.4 + 0.1 * rng.normal(size=(P * P,)))[:, None] * ortho[None, :]
        )
        write_manifest(
            out / f"export_clip_{image_id}",
            {
                "clip.contributions": contributions,
                "clip.final_tokens": final_tokens,
                "clip.text_embedding": text,
            },
            {"source_model": "clip-vit-synthetic", "layer_indices": "22",
             "image_id": str(image_id)},
        )

        attn = rng.random(size=(3, 4, P * P)) * (0.2 + weights)[None, None, :]
        attn /= attn.sum(axis=2, keepdims=True)
        write_manifest(
            out / f"export_llava_{image_id}",
            {"llava.attention": attn},
            {"source_model": "llava-synthetic", "layer_indices": "20",
             "image_id": str(image_id)},
        )

    doc = {
        "info": {"description": "synthetic desk-scale corpus", "version": "1.0"},
        "licenses": [],
        "images": images,
        "annotations": annotations,
        "categories": [{"id": cid, "name": name, "supercategory": "thing"}
                       for cid, name in CATEGORIES.items()],
    }
    (out / "annotations.json").write_text(json.dumps(doc, indent=2, sort_keys=True))


# --- questions + recorded answers -------------------------------------------

QUESTION_SEED = 7
PROMPT = "Is there a {label} in the image? Answer Yes, No, or Not Sure"

YES_TEXTS = ["Yes.", "Yes, it is clearly visible.", "yes there is"]
NO_TEXTS = ["No.", "No, I do not see one.", "no"]
UNSURE_TEXTS = ["Not sure.", "It is hard to tell.", "Maybe?"]


def generate_questions() -> list[dict]:
    present_by_image = {
        image_id: sorted({label for label, _, _ in objs},
                         key=lambda lb: NAME_TO_ID[lb])
        for image_id, _, objs in CORPUS
    }
    records = []
    for image_id in sorted(present_by_image):
        present = set(present_by_image[image_id])
        candidates = [lb for lb in LABELS if lb not in present]
        rng = PortableRng(QUESTION_SEED, image_id)
        absent = rng.sample(candidates, 3)
        ordered = [lb for lb in LABELS if lb in present] + absent
        truths = ["present"] * len(present) + ["absent"] * 3
        for label, gt in zip(ordered, truths):
            records.append({
                "question_id": f"{image_id}:{label}",
                "image_id": image_id,
                "label": label,
                "ground_truth": gt,
                "prompt": PROMPT.format(label=label),
            })
    return records


def pick_text(rng: PortableRng, verdict: str) -> str:
    pool = {"Yes": YES_TEXTS, "No": NO_TEXTS, "Unsure": UNSURE_TEXTS}[verdict]
    return pool[rng.below(len(pool))]


def craft_answers(questions: list[dict], run: str,
                  p_correct_present: float, p_correct_absent: float,
                  p_unsure: float = 0.0) -> list[dict]:
    """Deterministic verdict assignment at target correctness rates."""
    out = []
    for q in questions:
        rng = PortableRng(fnv1a64(run.encode()), q["question_id"])
        present = q["ground_truth"] == "present"
        roll = rng.below(10_000) / 10_000.0
        if roll < p_unsure:
            verdict = "Unsure"
        else:
            p_ok = p_correct_present if present else p_correct_absent
            correct = rng.below(10_000) / 10_000.0 < p_ok
            if present:
                verdict = "Yes" if correct else "No"
            else:
                verdict = "No" if correct else "Yes"
        out.append({"question_id": q["question_id"],
                    "raw_text": pick_text(rng, verdict)})
    return out


def write_jsonl(records: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def build_answers() -> None:
    out = FIXTURES / "answers"
    out.mkdir(parents=True, exist_ok=True)
    questions = generate_questions()
    write_jsonl(questions, out / "questions.jsonl")

    runs = {
        "baseline": craft_answers(questions, "baseline", 0.55, 0.65, p_unsure=0.10),
        "api_clip": craft_answers(questions, "api_clip", 0.90, 0.85),
        "api_seg": craft_answers(questions, "api_seg", 0.30, 0.95, p_unsure=0.05),
    }
    sweep_rates = {0.0: 0.60, 0.1: 0.65, 0.2: 0.70, 0.3: 0.80, 0.4: 0.85, 0.5: 0.90}
    for theta, rate in sweep_rates.items():
        runs[f"cutoff_{theta:g}"] = craft_answers(
            questions, f"cutoff_{theta:g}", rate, 0.80
        )
    for name, answers in runs.items():
        write_jsonl(answers, out / f"{name}.jsonl")

    truth = {q["question_id"]: q["ground_truth"] for q in questions}
    text_by_run = {
        name: [(truth[a["question_id"]], a["raw_text"]) for a in answers]
        for name, answers in runs.items()
    }
    folded = {name: fold_metrics(pairs) for name, pairs in text_by_run.items()}
    for metrics in folded.values():
        assert_no_rounding_ties(metrics)

    base = folded["baseline"]
    expected = {
        "delta": {
            "baseline": base,
            "variants": [
                {"name": name, "metrics": folded[name],
                 "markers": markers_for(folded[name], base)}
                for name in ("api_clip", "api_seg")
            ],
        },
        "sweep": {
            "baseline": base,
            "rows": [
                {"name": f"cutoff={theta:g}",
                 "metrics": folded[f"cutoff_{theta:g}"],
                 "markers": markers_for(folded[f"cutoff_{theta:g}"], base)}
                for theta in sweep_rates
            ],
        },
    }

    # Segmentation-run stratification of the api_clip variant, folded by hand.
    seg_ok = {}
    for q, a in zip(questions, runs["api_seg"]):
        assert q["question_id"] == a["question_id"]
        v = classify(a["raw_text"])
        seg_ok[q["question_id"]] = (
            v == "Yes" if q["ground_truth"] == "present" else v == "No"
        )
    strata = {True: [], False: []}
    for q, a in zip(questions, runs["api_clip"]):
        strata[seg_ok[q["question_id"]]].append(
            (q["ground_truth"], a["raw_text"])
        )
    n = len(questions)
    expected["seg_strata"] = {
        "n_correct": len(strata[True]),
        "n_incorrect": len(strata[False]),
        "correct_share": round(100.0 * len(strata[True]) / n, 2),
        "incorrect_share": round(100.0 * len(strata[False]) / n, 2),
        "correct_metrics": fold_metrics(strata[True]) if strata[True] else None,
        "incorrect_metrics": fold_metrics(strata[False]) if strata[False] else None,
    }

    (out / "expected_tables.json").write_text(
        json.dumps(expected, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    )


# --- 20-annotation area fixture ----------------------------------------------

def build_area_fixture() -> None:
    out = FIXTURES / "coco"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(99)

    images = [
        {"id": 1, "height": 480, "width": 640, "file_name": "000001.png"},
        {"id": 2, "height": 360, "width": 500, "file_name": "000002.png"},
        {"id": 3, "height": 420, "width": 560, "file_name": "000003.png"},
    ]
    sizes = {img["id"]: (img["height"], img["width"]) for img in images}

    anns = []
    ann_id = 1

    def add_polygon(image_id: int, cat: str, polys: list[list[float]]):
        nonlocal ann_id
        area = sum(shoelace(p) for p in polys)
        h, w = sizes[image_id]
        for p in polys:
            raster_area = mpl_polygon_area(p, (h, w))
            assert abs(raster_area - shoelace(p)) <= 0.015 * shoelace(p) + 10, (
                ann_id, raster_area, shoelace(p)
            )
        xs = [v for p in polys for v in p[0::2]]
        ys = [v for p in polys for v in p[1::2]]
        anns.append({
            "id": ann_id, "image_id": image_id, "category_id": NAME_TO_ID[cat],
            "segmentation": polys, "area": round(area, 2),
            "bbox": [min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys)],
            "iscrowd": 0,
        })
        ann_id += 1

    def add_rle(image_id: int, cat: str, mask: np.ndarray):
        nonlocal ann_id
        h, w = sizes[image_id]
        assert mask.shape == (h, w)
        counts = encode_rle_cm(mask)
        anns.append({
            "id": ann_id, "image_id": image_id, "category_id": NAME_TO_ID[cat],
            "segmentation": {"size": [h, w], "counts": counts},
            "area": int(mask.sum()),
            "bbox": [0, 0, w, h],
            "iscrowd": 0,
        })
        ann_id += 1

    # Image 1: axis-aligned and gently rotated rectangles, a triangle.
    add_polygon(1, "person", [rect_poly(50, 40, 180, 300)])
    add_polygon(1, "dog", [rect_poly(220.5, 100.25, 400.5, 260.25)])
    add_polygon(1, "car", [[430, 60, 610, 90, 590, 210, 410, 180]])
    add_polygon(1, "bench", [[60, 330, 300, 340, 180, 460]])
    add_polygon(1, "umbrella", [ngon_poly(480, 350, 90, 32)])
    add_polygon(1, "sports ball", [ngon_poly(330, 300, 45, 32, phase=0.3)])
    # Two disjoint parts in one annotation (valid COCO: multi-polygon object).
    add_polygon(1, "bird", [rect_poly(20, 400, 100, 460), rect_poly(540, 400, 620, 460)])

    # Image 2: hexagons, rotated square, big triangle, thin-ish rectangle.
    add_polygon(2, "cat", [ngon_poly(120, 120, 80, 6)])
    add_polygon(2, "tv", [ngon_poly(350, 100, 70, 4, phase=0.4)])
    add_polygon(2, "pizza", [[40, 220, 240, 240, 120, 340]])
    add_polygon(2, "laptop", [rect_poly(300, 220, 480, 270)])
    add_polygon(2, "chair", [ngon_poly(260, 280, 60, 8, phase=0.15)])
    add_polygon(2, "book", [rect_poly(20, 20, 90, 340)])

    # Image 3: larger organic-ish shapes plus RLE annotations.
    add_polygon(3, "horse", [ngon_poly(150, 150, 100, 12, phase=0.05)])
    add_polygon(3, "truck", [rect_poly(300.75, 40.5, 520.25, 180.5)])
    add_polygon(3, "bottle", [rect_poly(40, 280, 110, 400)])
    add_polygon(3, "cup", [ngon_poly(400, 300, 55, 16, phase=0.2)])

    blob = np.zeros((420, 560), dtype=bool)
    yy, xx = np.mgrid[0:420, 0:560]
    blob |= ((yy - 320) ** 2 + (xx - 200) ** 2) <= 70 ** 2
    blob |= ((yy - 300) ** 2 + (xx - 300) ** 2) <= 50 ** 2
    add_rle(3, "sheep", blob)

    stripes = np.zeros((360, 500), dtype=bool)
    stripes[40:120, 300:470] = True
    stripes[200:340, 350:420] = True
    add_rle(2, "zebra", stripes)

    checker = np.zeros((480, 640), dtype=bool)
    checker[310:470, 460:620] = True
    checker[330:350, 480:500] = False
    add_rle(1, "kite", checker)

    assert len(anns) == 20, len(anns)

    doc = {
        "info": {"description": "desk-scale area fixture", "version": "1.0"},
        "licenses": [],
        "images": images,
        "annotations": anns,
        "categories": [{"id": cid, "name": name, "supercategory": "thing"}
                       for cid, name in CATEGORIES.items()],
    }
    (out / "area_fixture.json").write_text(json.dumps(doc, indent=2, sort_keys=True))

    # Crowd-region fixture: one compressed (string counts) crowd region that
    # parsers must skip with a warning, plus one ordinary polygon.
    crowd = {
        "info": {"description": "crowd filter fixture", "version": "1.0"},
        "licenses": [],
        "images": [{"id": 9, "height": 100, "width": 100, "file_name": "c.png"}],
        "annotations": [
            {"id": 1, "image_id": 9, "category_id": 1,
             "segmentation": {"size": [100, 100], "counts": "`]o31n2000O2N"},
             "area": 2500, "bbox": [0, 0, 50, 50], "iscrowd": 1},
            {"id": 2, "image_id": 9, "category_id": 18,
             "segmentation": [rect_poly(10, 10, 60, 60)],
             "area": 2500.0, "bbox": [10, 10, 50, 50], "iscrowd": 0},
        ],
        "categories": [{"id": cid, "name": name, "supercategory": "thing"}
                       for cid, name in CATEGORIES.items()],
    }
    (out / "crowd_fixture.json").write_text(json.dumps(crowd, indent=2, sort_keys=True))


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    build_corpus()
    build_answers()
    build_area_fixture()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
