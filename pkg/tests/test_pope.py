"""Question generation, answer classification, and metric scoring."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from attnprompt.coco import COCO_LABELS
from attnprompt.pope import (
    PROMPT_SUFFIX,
    PopeAnswer,
    PopeQuestion,
    Verdict,
    classify_answer,
    generate_questions,
    read_answers,
    read_questions,
    score,
    write_answers,
    write_questions,
)


def make_answer(ground_truth: str, raw_text: str, label="dog", image_id=1):
    q = PopeQuestion(
        image_id=image_id,
        label=label,
        ground_truth=ground_truth,
        prompt_text=f"Is there a {label} in the image? {PROMPT_SUFFIX}",
    )
    return PopeAnswer.from_text(q, raw_text)


def answers_from_counts(tp=0, fn=0, tn=0, fp=0, unsure_pos=0, unsure_neg=0):
    out = []
    idx = 0

    def add(gt, text, n):
        nonlocal idx
        for _ in range(n):
            out.append(make_answer(gt, text, image_id=idx))
            idx += 1

    add("present", "Yes.", tp)
    add("present", "No.", fn)
    add("absent", "No.", tn)
    add("absent", "Yes.", fp)
    add("present", "Not sure.", unsure_pos)
    add("absent", "Maybe?", unsure_neg)
    return out


class TestQuestionValidation:
    def test_prompt_must_end_with_suffix(self):
        with pytest.raises(ValueError, match="suffix|Answer"):
            PopeQuestion(
                image_id=1, label="dog", ground_truth="present",
                prompt_text="Is there a dog in the image?",
            )

    def test_ground_truth_vocabulary(self):
        with pytest.raises(ValueError, match="ground truth"):
            PopeQuestion(
                image_id=1, label="dog", ground_truth="maybe",
                prompt_text=f"Is there a dog in the image? {PROMPT_SUFFIX}",
            )

    def test_question_id_joins_image_and_label(self):
        q = PopeQuestion(
            image_id=7, label="hot dog", ground_truth="absent",
            prompt_text=f"Is there a hot dog in the image? {PROMPT_SUFFIX}",
        )
        assert q.question_id == "7:hot dog"


class TestGenerateQuestions:
    def test_present_plus_three_absent(self):
        qs = generate_questions({"person", "dog"}, image_id=5, seed=0)
        present = [q for q in qs if q.ground_truth == "present"]
        absent = [q for q in qs if q.ground_truth == "absent"]
        assert len(present) == 2 and len(absent) == 3
        assert {q.label for q in present} == {"person", "dog"}
        assert not {q.label for q in absent} & {"person", "dog"}
        for q in qs:
            assert q.prompt_text == (
                f"Is there a {q.label} in the image? Answer Yes, No, or Not Sure"
            )

    def test_present_questions_follow_vocabulary_order(self):
        qs = generate_questions({"dog", "person", "car"}, image_id=5, seed=0)
        present = [q.label for q in qs if q.ground_truth == "present"]
        assert present == ["person", "car", "dog"]  # ascending category id

    def test_same_seed_image_reproduces(self):
        a = generate_questions({"cat"}, image_id=9, seed=4)
        b = generate_questions({"cat"}, image_id=9, seed=4)
        assert [(q.label, q.ground_truth) for q in a] == [
            (q.label, q.ground_truth) for q in b
        ]

    def test_different_images_differ(self):
        # 77 choose 3 makes a collision across two images vanishingly rare.
        a = generate_questions({"cat"}, image_id=1, seed=4)
        b = generate_questions({"cat"}, image_id=2, seed=4)
        assert {q.label for q in a if q.ground_truth == "absent"} != {
            q.label for q in b if q.ground_truth == "absent"
        }

    def test_unknown_present_label_rejected(self):
        with pytest.raises(ValueError, match="vocabulary"):
            generate_questions({"unicorn"}, image_id=1, seed=0)

    def test_too_few_absent_candidates_rejected(self):
        vocab = ("person", "dog", "cat", "car")
        with pytest.raises(ValueError, match="absent"):
            generate_questions(
                {"person", "dog"}, image_id=1, seed=0, vocabulary=vocab, k_absent=3
            )

    def test_k_absent_override(self):
        qs = generate_questions({"person"}, image_id=1, seed=0, k_absent=5)
        assert sum(q.ground_truth == "absent" for q in qs) == 5

    def test_absent_frequency_matches_three_over_seventy_eight(self):
        # One present label leaves 79 candidates for 3 slots; over 10k images
        # every candidate should appear with frequency ~ 3/79.
        counts = {label: 0 for label in COCO_LABELS if label != "person"}
        n_draws = 10_000
        for image_id in range(n_draws):
            for q in generate_questions({"person"}, image_id=image_id, seed=11):
                if q.ground_truth == "absent":
                    counts[q.label] += 1
        observed = np.array(list(counts.values()))
        expected = np.full(79, n_draws * 3 / 79)
        stat, pvalue = stats.chisquare(observed, expected)
        assert pvalue > 1e-4, (stat, pvalue)


class TestClassifyAnswer:
    @pytest.mark.parametrize(
        "text,verdict",
        [
            ("Yes, there is a dog.", Verdict.YES),
            ("no", Verdict.NO),
            ("Not sure, the image is unclear", Verdict.UNSURE),
            ("YES!!!", Verdict.YES),
            ("No.", Verdict.NO),
            ("  yes  indeed", Verdict.YES),
            ("Nope", Verdict.UNSURE),
            ("I think yes", Verdict.UNSURE),
            ("", Verdict.UNSURE),
            ("   ", Verdict.UNSURE),
            ("'Yes'", Verdict.YES),
        ],
    )
    def test_leading_token_rule(self, text, verdict):
        assert classify_answer(text) is verdict

    def test_answer_carries_verdict(self):
        ans = make_answer("present", "Yes, clear as day")
        assert ans.verdict is Verdict.YES
        assert ans.raw_text == "Yes, clear as day"


class TestScore:
    def test_fixture_40_10_35_15(self):
        answers = answers_from_counts(tp=40, fn=10, tn=35, fp=15)
        m = score(answers)
        assert m.accuracy == 75.00
        assert m.precision == 72.73
        assert m.recall == 80.00
        assert m.tnr == 70.00
        assert m.f1 == 76.19
        assert m.unsure_rate == 0.0
        assert (m.tp, m.fn, m.tn, m.fp) == (40, 10, 35, 15)

    def test_all_correct_is_all_hundred(self):
        answers = answers_from_counts(tp=6, tn=4)
        m = score(answers)
        assert (m.accuracy, m.precision, m.recall, m.tnr, m.f1) == (
            100.0, 100.0, 100.0, 100.0, 100.0
        )

    def test_all_unsure_degenerate(self):
        answers = answers_from_counts(unsure_pos=3, unsure_neg=2)
        m = score(answers)
        assert m.accuracy == 0.0
        assert m.unsure_rate == 100.0
        assert m.precision is None
        assert m.recall == 0.0  # 0 / (0 + 0 + 3)
        assert m.tnr == 0.0
        assert m.f1 is None

    def test_unsure_enters_recall_and_tnr_denominators(self):
        answers = answers_from_counts(tp=3, fn=1, unsure_pos=1, tn=3, fp=1, unsure_neg=1)
        m = score(answers)
        assert m.recall == 60.0  # 3 / (3+1+1)
        assert m.tnr == 60.0  # 3 / (3+1+1)
        assert m.precision == 75.0  # unsure stays out of precision
        assert m.accuracy == 60.0  # (3+3) / 10

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            score([])

    def test_count_identity_present_side(self):
        answers = answers_from_counts(tp=5, fn=2, unsure_pos=3, tn=1)
        m = score(answers)
        n_present = sum(a.question.ground_truth == "present" for a in answers)
        assert m.tp + m.fn + m.unsure_pos == n_present

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 60))
    def test_permutation_invariant(self, seed, n):
        rng = np.random.default_rng(seed)
        texts = ["Yes.", "No.", "Not sure."]
        answers = [
            make_answer(
                "present" if rng.random() < 0.5 else "absent",
                texts[rng.integers(3)],
                image_id=i,
            )
            for i in range(n)
        ]
        perm = list(answers)
        rng.shuffle(perm)
        assert score(answers) == score(perm)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40), times=st.integers(2, 4))
    def test_duplication_leaves_percentages_unchanged(self, seed, n, times):
        rng = np.random.default_rng(seed)
        texts = ["Yes.", "No.", "Huh?"]
        answers = [
            make_answer(
                "present" if rng.random() < 0.5 else "absent",
                texts[rng.integers(3)],
                image_id=i,
            )
            for i in range(n)
        ]
        once = score(answers)
        many = score(answers * times)
        assert once.as_row() == many.as_row()
        assert once.unsure_rate == many.unsure_rate

    def test_f1_from_unrounded_parts(self):
        # prec = 2/3, rec = 2/5 -> f1 = 2*(2/3)*(2/5)/(2/3+2/5) = 0.5 exactly;
        # folding the rounded 66.67/40.00 instead would give 50.0025....
        answers = answers_from_counts(tp=2, fp=1, fn=3)
        assert score(answers).f1 == 50.0


class TestSerialization:
    def test_question_round_trip(self, tmp_path):
        qs = generate_questions({"person", "dog"}, image_id=3, seed=1)
        write_questions(qs, tmp_path / "q.jsonl")
        again = read_questions(tmp_path / "q.jsonl")
        assert again == qs

    def test_answer_round_trip(self, tmp_path):
        qs = generate_questions({"cat"}, image_id=2, seed=1)
        answers = [PopeAnswer.from_text(q, "Yes." if i % 2 else "No.")
                   for i, q in enumerate(qs)]
        write_questions(qs, tmp_path / "q.jsonl")
        write_answers(answers, tmp_path / "a.jsonl")
        again = read_answers(tmp_path / "a.jsonl", read_questions(tmp_path / "q.jsonl"))
        assert again == answers

    def test_unknown_question_id_rejected(self, tmp_path):
        qs = generate_questions({"cat"}, image_id=2, seed=1)
        (tmp_path / "a.jsonl").write_text(
            '{"question_id": "999:ghost", "raw_text": "Yes."}\n'
        )
        with pytest.raises(ValueError, match="999:ghost"):
            read_answers(tmp_path / "a.jsonl", qs)
