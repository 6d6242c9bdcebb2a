#!/usr/bin/env python3
"""Runs `chartreview report` on the replay fixture and validates metrics.json
with the jsonschema package against docs/report.schema.json.

usage: validate_report.py <chartreview binary> <source dir>
"""
import csv
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main():
    cli, src = pathlib.Path(sys.argv[1]).resolve(), pathlib.Path(sys.argv[2]).resolve()
    schema = json.loads((src / "docs" / "report.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as tmp:
        out = pathlib.Path(tmp) / "out"
        subprocess.run([str(cli), "--data", str(src / "data"), "--index-dir", str(pathlib.Path(tmp) / "idx"),
                        "report", "--runs", str(src / "data" / "fixtures" / "replay"), "--out", str(out)],
                       check=True, cwd=tmp)
        report = json.loads((out / "metrics.json").read_text())
        jsonschema.validate(report, schema, cls=jsonschema.Draft202012Validator)
        rows = list(csv.reader((out / "metrics.csv").open()))
    assert rows[0] == ["metric", "v1_mean", "v1_sd"], rows[0]
    assert [r[0] for r in rows[1:]] == ["Precision", "Recall", "F1", "Accuracy (%)"], rows
    assert len(report["heatmap"]["category"]["columns"]) == 8
    assert len(report["heatmap"]["severity"]["columns"]) == 4
    print("metrics.json valid; csv columns", ",".join(rows[0]))


if __name__ == "__main__":
    main()
