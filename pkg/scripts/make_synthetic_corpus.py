"""Regenerate the bundled demonstration corpus (data/synthetic_corpus.jsonl).

Thirty sentences from six short essays on remote work, annotated with eight
argument labels. Exactly three sentences carry two labels (to exercise the
multi-label sampling protocol) and five carry none (to exercise singleton
injection), so the derived cluster count is 8 + 5 = 13. Sentences sharing a
label deliberately share vocabulary so that character n-gram similarity has
signal to find.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

# (essay_id, sentence_id, text, labels)
SENTENCES = [
    ("e01", "s01", "Many companies now let their employees decide where to work.", []),
    ("e01", "s02", "Skipping the daily commute gives workers back several hours every week.", ["commute"]),
    ("e01", "s03", "Without constant office interruptions, many people finish their tasks faster at home.", ["productivity"]),
    ("e01", "s04", "Staying home also saves money that would otherwise go to fuel and lunches.", ["cost_savings"]),
    ("e01", "s05", "Employees can arrange their working hours around their personal lives.", ["flexibility"]),
    ("e02", "s06", "Remote work sounds attractive at first glance.", []),
    ("e02", "s07", "Spending every working day alone at home quickly becomes lonely.", ["isolation"]),
    ("e02", "s08", "Brainstorming with colleagues over video calls never feels as natural as meeting in person.", ["collaboration"]),
    ("e02", "s09", "Household chores and television constantly tempt people away from their tasks.", ["distraction"]),
    ("e02", "s10", "When the office is the kitchen table, work never really ends.", ["work_life_balance"]),
    ("e03", "s11", "Commuting to the office wastes time that remote employees can spend on real work.", ["commute"]),
    ("e03", "s12", "People are more productive when they can choose the hours in which they work best.", ["productivity", "flexibility"]),
    ("e03", "s13", "Many remote workers report feeling isolated from their colleagues.", ["isolation"]),
    ("e03", "s14", "Working from home cuts the cost of travel tickets and office clothes.", ["cost_savings"]),
    ("e03", "s15", "In the end each person has to weigh these points for themselves.", []),
    ("e04", "s16", "Avoiding rush hour traffic is the benefit remote workers mention most often.", ["commute"]),
    ("e04", "s17", "Quick questions that took seconds at the office now require scheduled video meetings.", ["collaboration"]),
    ("e04", "s18", "At home the fridge, the laundry and the doorbell interrupt concentration all day.", ["distraction"]),
    ("e04", "s19", "Living and working in the same room blurs boundaries and leaves people feeling cut off.", ["work_life_balance", "isolation"]),
    ("e04", "s20", "A flexible schedule lets parents pick their children up from school.", ["flexibility"]),
    ("e05", "s21", "My own experience with working from home is mixed.", []),
    ("e05", "s22", "I get much more done at home because nobody drops by my desk.", ["productivity"]),
    ("e05", "s23", "Still, after a week without seeing my colleagues I feel cut off from the team.", ["isolation"]),
    ("e05", "s24", "Not having to commute saves me ninety minutes every single day.", ["commute"]),
    ("e05", "s25", "On bad days the television wins against the spreadsheet.", ["distraction"]),
    ("e06", "s26", "The debate about remote work will continue for years.", []),
    ("e06", "s27", "Creative teamwork suffers when colleagues only meet on a screen.", ["collaboration"]),
    ("e06", "s28", "Remote employees save both the money and the time that commuting consumes.", ["cost_savings", "commute"]),
    ("e06", "s29", "Clear boundaries between working hours and free time disappear in a home office.", ["work_life_balance"]),
    ("e06", "s30", "Focused work is easier in a quiet home office than in a noisy open plan one.", ["productivity"]),
]


def check_shape() -> None:
    assert len(SENTENCES) == 30
    assert len({essay for essay, *_ in SENTENCES}) == 6
    labels = {lbl for *_, lbls in SENTENCES for lbl in lbls}
    assert len(labels) == 8, sorted(labels)
    assert sum(1 for *_, lbls in SENTENCES if len(lbls) == 2) == 3
    assert sum(1 for *_, lbls in SENTENCES if not lbls) == 5


def write_corpus(path: Path) -> None:
    check_shape()
    with path.open("w", encoding="utf-8") as fh:
        for essay_id, sentence_id, text, labels in SENTENCES:
            record = {
                "essay_id": essay_id,
                "sentence_id": sentence_id,
                "text": text,
                "labels": labels,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parent.parent / "data" / "synthetic_corpus.jsonl"),
    )
    args = parser.parse_args()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(out)
    print(f"wrote {len(SENTENCES)} sentences -> {out}")


if __name__ == "__main__":
    main()
