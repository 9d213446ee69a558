"""Annotation parsing, RLE codec, and polygon rasterization."""

import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from attnprompt.coco import (
    COCO_CATEGORIES,
    COCO_LABELS,
    AnnotationError,
    category_mask,
    decode_rle,
    encode_rle,
    mask_to_manifest,
    mask_to_png,
    object_size_fraction,
    parse_annotations,
    rasterize_polygon,
)
from attnprompt.exchange import BinaryMask, load_manifest

FIXTURES = Path(__file__).parent / "fixtures"


def oracle_decode(counts, h, w):
    # Straight-line loop decoder: runs alternate starting from False,
    # filling columns top to bottom.
    flat = []
    val = False
    for c in counts:
        flat.extend([val] * c)
        val = not val
    out = np.zeros((h, w), dtype=bool)
    k = 0
    for j in range(w):
        for i in range(h):
            out[i, j] = flat[k]
            k += 1
    return out


def shoelace(poly):
    xs, ys = poly[0::2], poly[1::2]
    n = len(xs)
    return abs(sum(xs[k] * ys[(k + 1) % n] - xs[(k + 1) % n] * ys[k] for k in range(n))) / 2.0


class TestVocabulary:
    def test_eighty_labels(self):
        assert len(COCO_LABELS) == 80
        assert len(set(COCO_LABELS)) == 80

    def test_official_ids(self):
        assert COCO_CATEGORIES[1] == "person"
        assert COCO_CATEGORIES[90] == "toothbrush"
        assert 12 not in COCO_CATEGORIES  # gap in the official numbering
        assert 26 not in COCO_CATEGORIES

    def test_label_order_follows_ids(self):
        assert COCO_LABELS[0] == "person"
        assert COCO_LABELS[-1] == "toothbrush"
        assert list(COCO_CATEGORIES.keys()) == sorted(COCO_CATEGORIES.keys())


class TestRle:
    def test_spec_example_2x2(self):
        mask = decode_rle([1, 3], (2, 2))
        np.testing.assert_array_equal(
            mask.bits, [[False, True], [True, True]]
        )

    def test_single_run_all_false(self):
        mask = decode_rle([12], (3, 4))
        assert not mask.bits.any()

    def test_zero_leading_run_all_true(self):
        mask = decode_rle([0, 6], (2, 3))
        assert mask.bits.all()

    def test_sum_mismatch_rejected(self):
        with pytest.raises(ValueError, match="sum"):
            decode_rle([1, 2], (2, 2))

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            decode_rle([5, -1], (2, 2))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), h=st.integers(1, 12), w=st.integers(1, 12))
    def test_encode_decode_round_trip(self, seed, h, w):
        bits = np.random.default_rng(seed).random((h, w)) < 0.5
        mask = BinaryMask(bits)
        counts = encode_rle(mask)
        again = decode_rle(counts, (h, w))
        np.testing.assert_array_equal(again.bits, bits)

    def test_encode_starts_with_zero_run_convention(self):
        # A mask whose first column-major bit is set must emit a 0 first.
        bits = np.ones((2, 2), dtype=bool)
        assert encode_rle(BinaryMask(bits)) == [0, 4]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_decode_matches_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        h, w = int(rng.integers(1, 10)), int(rng.integers(1, 10))
        bits = rng.random((h, w)) < 0.4
        counts = encode_rle(BinaryMask(bits))
        ours = decode_rle(counts, (h, w))
        np.testing.assert_array_equal(ours.bits, oracle_decode(counts, h, w))


class TestRasterizePolygon:
    @pytest.mark.parametrize("k", [1, 3, 8, 20])
    def test_integer_square_covers_k_squared(self, k):
        poly = [2.0, 2.0, 2.0 + k, 2.0, 2.0 + k, 2.0 + k, 2.0, 2.0 + k]
        mask = rasterize_polygon([poly], (k + 6, k + 6))
        assert mask.popcount() == k * k
        assert mask.bits[2 : 2 + k, 2 : 2 + k].all()

    def test_whole_image_polygon_all_true(self):
        h, w = 7, 9
        poly = [0.0, 0.0, float(w), 0.0, float(w), float(h), 0.0, float(h)]
        assert rasterize_polygon([poly], (h, w)).bits.all()

    def test_two_disjoint_triangles_areas_add(self):
        t1 = [1.0, 1.0, 13.0, 1.0, 1.0, 13.0]
        t2 = [20.0, 20.0, 30.0, 20.0, 20.0, 30.0]
        both = rasterize_polygon([t1, t2], (40, 40))
        only1 = rasterize_polygon([t1], (40, 40))
        only2 = rasterize_polygon([t2], (40, 40))
        assert both.popcount() == only1.popcount() + only2.popcount()
        np.testing.assert_array_equal(both.bits, only1.bits | only2.bits)

    def test_degenerate_polygon_rejected(self):
        with pytest.raises(ValueError, match="3"):
            rasterize_polygon([[0.0, 0.0, 1.0, 1.0]], (4, 4))

    def test_odd_coordinate_count_rejected(self):
        with pytest.raises(ValueError):
            rasterize_polygon([[0.0, 0.0, 5.0, 0.0, 5.0]], (8, 8))

    def test_triangle_area_near_analytic(self):
        poly = [5.0, 5.0, 55.0, 10.0, 20.0, 50.0]
        mask = rasterize_polygon([poly], (60, 60))
        assert abs(mask.popcount() - shoelace(poly)) <= 0.02 * shoelace(poly)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_matches_point_in_polygon_reference(self, seed):
        # Random convex polygon vs. matplotlib's independent point test.
        from matplotlib.path import Path as MplPath

        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 9))
        angles = np.sort(rng.random(n) * 2 * np.pi)
        r = 5.0 + 10.0 * rng.random(n)
        cx, cy = 16 + 4 * rng.random(2)
        xs = cx + r * np.cos(angles)
        ys = cy + r * np.sin(angles)
        poly = [float(v) for pair in zip(xs, ys) for v in pair]
        ours = rasterize_polygon([poly], (32, 32)).bits
        yy, xx = np.mgrid[0:32, 0:32]
        pts = np.column_stack([(xx + 0.5).ravel(), (yy + 0.5).ravel()])
        ref = MplPath(list(zip(xs, ys))).contains_points(pts).reshape(32, 32)
        # Tolerate single-pixel disagreement only exactly on edges.
        disagree = ours ^ ref
        assert disagree.sum() <= max(1, int(0.01 * ours.size))


class TestParseAnnotations:
    def test_area_fixture_counts(self):
        text = (FIXTURES / "coco" / "area_fixture.json").read_text()
        parsed = parse_annotations(text)
        # Independent walk of the raw JSON for the expected counts.
        raw = json.loads(text)
        assert len(parsed.objects) == len(raw["annotations"]) == 20
        assert set(parsed.image_sizes) == {img["id"] for img in raw["images"]}

    def test_present_labels_deduplicated(self):
        doc = {
            "images": [{"id": 1, "height": 10, "width": 10}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 18,
                 "segmentation": [[1, 1, 5, 1, 5, 5]], "area": 8.0},
                {"id": 2, "image_id": 1, "category_id": 18,
                 "segmentation": [[6, 6, 9, 6, 9, 9]], "area": 4.5},
            ],
        }
        parsed = parse_annotations(json.dumps(doc))
        assert len(parsed.objects) == 2
        assert parsed.present_labels[1] == {"dog"}

    def test_unknown_category_id_named_in_error(self):
        doc = {
            "images": [{"id": 1, "height": 4, "width": 4}],
            "annotations": [
                {"id": 7, "image_id": 1, "category_id": 999,
                 "segmentation": [[0, 0, 2, 0, 2, 2]], "area": 2.0}
            ],
            "categories": [{"id": 1, "name": "person"}],
        }
        with pytest.raises(AnnotationError, match="999"):
            parse_annotations(json.dumps(doc))

    def test_missing_image_record_rejected(self):
        doc = {
            "images": [],
            "annotations": [
                {"id": 3, "image_id": 42, "category_id": 1,
                 "segmentation": [[0, 0, 2, 0, 2, 2]], "area": 2.0}
            ],
        }
        with pytest.raises(AnnotationError, match="42"):
            parse_annotations(json.dumps(doc))

    def test_malformed_json_rejected(self):
        with pytest.raises(AnnotationError, match="malformed"):
            parse_annotations("{not json")

    def test_compressed_crowd_rle_skipped_with_warning(self):
        text = (FIXTURES / "coco" / "crowd_fixture.json").read_text()
        with pytest.warns(UserWarning, match="compressed"):
            parsed = parse_annotations(text)
        # The crowd region is dropped; the plain polygon survives.
        assert len(parsed.objects) == 1
        assert parsed.objects[0].category == "dog"
        assert parsed.present_labels[9] == {"dog"}

    def test_category_name_outside_vocabulary_rejected(self):
        doc = {
            "images": [{"id": 1, "height": 4, "width": 4}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 5,
                 "segmentation": [[0, 0, 2, 0, 2, 2]], "area": 2.0}
            ],
            "categories": [{"id": 5, "name": "unicorn"}],
        }
        with pytest.raises(AnnotationError, match="unicorn"):
            parse_annotations(json.dumps(doc))


class TestDeclaredAreas:
    def test_rasterized_within_two_percent_of_declared(self):
        text = (FIXTURES / "coco" / "area_fixture.json").read_text()
        parsed = parse_annotations(text)
        assert len(parsed.objects) == 20
        for obj in parsed.objects:
            area = obj.mask().popcount()
            rel = abs(area - obj.declared_area) / obj.declared_area
            assert rel <= 0.02, (obj.ann_id, obj.category, area, obj.declared_area)

    def test_rle_objects_match_exactly(self):
        text = (FIXTURES / "coco" / "area_fixture.json").read_text()
        parsed = parse_annotations(text)
        rle_objs = [o for o in parsed.objects if o.seg_kind == "rle"]
        assert len(rle_objs) == 3
        for obj in rle_objs:
            assert obj.mask().popcount() == obj.declared_area


class TestCategoryMask:
    def fixture_objects(self):
        text = (FIXTURES / "coco" / "area_fixture.json").read_text()
        return list(parse_annotations(text).objects)

    def test_union_is_order_independent(self):
        objects = self.fixture_objects()
        fwd = category_mask(objects, 1, "bird", multi="union")
        rev = category_mask(list(reversed(objects)), 1, "bird", multi="union")
        np.testing.assert_array_equal(fwd.bits, rev.bits)

    def test_union_covers_each_instance(self):
        # The bird annotation is two disjoint rectangles in one object.
        objects = self.fixture_objects()
        union = category_mask(objects, 1, "bird")
        per_instance = [o.mask() for o in objects
                        if o.image_id == 1 and o.category == "bird"]
        combined = np.zeros_like(union.bits)
        for m in per_instance:
            combined |= m.bits
        np.testing.assert_array_equal(union.bits, combined)

    def test_largest_selects_biggest_instance(self):
        doc = {
            "images": [{"id": 1, "height": 20, "width": 20}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 18,
                 "segmentation": [[1, 1, 5, 1, 5, 5, 1, 5]], "area": 16.0},
                {"id": 2, "image_id": 1, "category_id": 18,
                 "segmentation": [[8, 8, 18, 8, 18, 18, 8, 18]], "area": 100.0},
            ],
        }
        objects = list(parse_annotations(json.dumps(doc)).objects)
        largest = category_mask(objects, 1, "dog", multi="largest")
        assert largest.popcount() == 100
        union = category_mask(objects, 1, "dog", multi="union")
        assert union.popcount() == 116

    def test_missing_category_rejected(self):
        objects = self.fixture_objects()
        with pytest.raises(ValueError, match="giraffe"):
            category_mask(objects, 1, "giraffe")

    def test_bad_multi_mode_rejected(self):
        with pytest.raises(ValueError, match="multi"):
            category_mask(self.fixture_objects(), 1, "bird", multi="first")


class TestSizeFraction:
    def make_object(self, counts, h, w):
        doc = {
            "images": [{"id": 1, "height": h, "width": w}],
            "annotations": [
                {"id": 1, "image_id": 1, "category_id": 1,
                 "segmentation": {"size": [h, w], "counts": counts},
                 "area": sum(counts[1::2])}
            ],
        }
        return parse_annotations(json.dumps(doc)).objects[0]

    def test_full_image_fraction_one(self):
        obj = self.make_object([0, 16], 4, 4)
        assert object_size_fraction(obj) == 1.0

    def test_empty_fraction_zero(self):
        obj = self.make_object([16], 4, 4)
        assert object_size_fraction(obj) == 0.0

    def test_half_rectangle(self):
        obj = self.make_object([0, 8, 8], 4, 4)
        assert object_size_fraction(obj) == 0.5


class TestMaskExports:
    def test_mask_to_png_values(self, tmp_path):
        from PIL import Image

        bits = np.array([[True, False], [False, True]])
        mask_to_png(BinaryMask(bits), tmp_path / "m.png")
        arr = np.asarray(Image.open(tmp_path / "m.png"))
        np.testing.assert_array_equal(arr, [[255, 0], [0, 255]])

    def test_mask_to_manifest_round_trip(self, tmp_path):
        bits = np.random.default_rng(21).random((5, 7)) < 0.5
        mask_to_manifest(BinaryMask(bits), tmp_path)
        loaded = load_manifest(tmp_path)["map"]
        np.testing.assert_array_equal(loaded, bits.astype(np.float32))
        meta = load_manifest(tmp_path).metadata
        assert meta["source_model"] == "coco"
