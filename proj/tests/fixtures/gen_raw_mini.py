#!/usr/bin/env python3
"""Regenerates the synthetic five-policy raw corpus under raw_mini/.

Layout mirrors the ingestion contract: annotations/<policy>.csv with nine
columns and sanitized_policies/<policy>.html with segments joined by "|||".
Span indices are code-point offsets computed with str.find, so the fixture
stays correct if the texts are edited. Run from this directory:

    python3 gen_raw_mini.py
"""

import csv
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
RAW = os.path.join(HERE, "raw_mini")


def span_attr(attr_name, segment, selected, value):
    """Attribute with valid start/end indices covering `selected`."""
    start = segment.find(selected)
    assert start >= 0, (selected, segment)
    return attr_name, {
        "startIndexInSegment": start,
        "endIndexInSegment": start + len(selected),
        "selectedText": selected,
        "value": value,
    }


def text_attr(attr_name, selected, value):
    """Attribute with broken indices; importer falls back to selectedText."""
    return attr_name, {
        "startIndexInSegment": -1,
        "endIndexInSegment": -1,
        "selectedText": selected,
        "value": value,
    }


def value_attr(attr_name, value):
    """Attribute with neither indices nor text; importer keeps the whole segment."""
    return attr_name, {"value": value}


POLICIES = {
    "p01_alpha.com": {
        "segments": [
            "Welcome to Alpha. This policy explains our practices.",
            "We collect your email address and share it with advertisers.",
            "Thanks for reading.",
        ],
        "annotations": [
            # (segment_id, annotator, practice, [attribute builders])
            (0, 101, "Other",
             [lambda seg: span_attr("Other Type", seg,
                                    "This policy explains our practices.",
                                    "Introductory/Generic")]),
            (1, 101, "First Party Collection/Use",
             [lambda seg: span_attr("Action First-Party", seg,
                                    "We collect your email address",
                                    "Collect on website")]),
            (1, 102, "Third Party Sharing/Collection",
             [lambda seg: span_attr("Action Third Party", seg,
                                    "share it with advertisers",
                                    "Receive/Shared with")]),
        ],
    },
    "p02_beta.org": {
        "segments": [
            "Securité: we use TLS débité encryption for all data.",
            "You may opt out of marketing emails.",
        ],
        "annotations": [
            (0, 101, "Data Security",
             [lambda seg: text_attr("Security Measure",
                                    "we use TLS débité encryption",
                                    "Generic")]),
            # Two spanned attributes; the import hull covers both.
            (1, 102, "User Choice/Control",
             [lambda seg: span_attr("Choice Type", seg, "opt out", "Opt-out"),
              lambda seg: span_attr("Choice Scope", seg, "marketing emails",
                                    "Use")]),
        ],
    },
    "p03_gamma.net": {
        "segments": [
            "We retain logs for 30 days. Contact privacy@gamma.net with questions.",
            "We honor Do Not Track signals.",
        ],
        "annotations": [
            (0, 101, "Data Retention",
             [lambda seg: span_attr("Retention Period", seg,
                                    "We retain logs for 30 days",
                                    "Limited")]),
            (0, 102, "Other",
             [lambda seg: value_attr("Other Type",
                                     "Privacy contact information")]),
            (1, 101, "Do Not Track",
             [lambda seg: span_attr("Do Not Track policy", seg,
                                    "We honor Do Not Track signals",
                                    "Honored")]),
            # Second annotator, identical label and span: import dedups it.
            (1, 102, "Do Not Track",
             [lambda seg: span_attr("Do Not Track policy", seg,
                                    "We honor Do Not Track signals",
                                    "Honored")]),
        ],
    },
    "p04_delta.io": {
        "segments": [
            "Our policy may change; we will notify you.",
            "Children under 13 may not use Delta.",
        ],
        "annotations": [
            (0, 101, "Policy Change",
             [lambda seg: span_attr("Notification Type", seg,
                                    "Our policy may change",
                                    "General notice")]),
            (1, 102, "International and Specific Audiences",
             [lambda seg: span_attr("Audience Type", seg,
                                    "Children under 13",
                                    "Children")]),
        ],
    },
    "p05_epsilon.co": {
        "segments": [
            "You can access, edit or delete your data anytime. "
            "Practices not described here may apply.",
            "We may keep backups.",
        ],
        "annotations": [
            (0, 101, "User Access, Edit and Deletion",
             [lambda seg: span_attr("Access Type", seg,
                                    "access, edit or delete your data",
                                    "Edit information")]),
            (0, 102, "Other",
             [lambda seg: span_attr("Other Type", seg,
                                    "Practices not described here may apply",
                                    "Practice not covered")]),
            # End index past the segment: importer falls back to selectedText.
            (1, 101, "Data Retention",
             [lambda seg: (lambda name, attr: (name, {
                 "startIndexInSegment": 3,
                 "endIndexInSegment": 99,
                 "selectedText": attr["selectedText"],
                 "value": attr["value"],
             }))(*text_attr("Retention Period", "keep backups",
                            "Stated Period"))]),
        ],
    },
}


def main():
    os.makedirs(os.path.join(RAW, "annotations"), exist_ok=True)
    os.makedirs(os.path.join(RAW, "sanitized_policies"), exist_ok=True)
    ann_id = 1000
    for idx, (policy, spec) in enumerate(sorted(POLICIES.items())):
        html = os.path.join(RAW, "sanitized_policies", policy + ".html")
        with open(html, "w", encoding="utf-8") as fh:
            fh.write("|||".join(spec["segments"]))
        csv_path = os.path.join(RAW, "annotations", policy + ".csv")
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            for seg_id, annotator, practice, builders in spec["annotations"]:
                segment = spec["segments"][seg_id]
                attrs = dict(build(segment) for build in builders)
                ann_id += 1
                writer.writerow([
                    ann_id, "b1", annotator, 500 + idx, seg_id, practice,
                    json.dumps(attrs, ensure_ascii=False, sort_keys=True),
                    "2016-01-15", policy.split("_", 1)[1],
                ])
    mini = os.path.join(HERE, "mini")
    os.makedirs(mini, exist_ok=True)
    with open(os.path.join(mini, "train_policies.txt"), "w") as fh:
        fh.write("p01_alpha.com\np03_gamma.net\np05_epsilon.co\n")
    with open(os.path.join(mini, "test_policies.txt"), "w") as fh:
        fh.write("p02_beta.org\np04_delta.io\n")
    print("wrote raw_mini for", len(POLICIES), "policies")


if __name__ == "__main__":
    main()
