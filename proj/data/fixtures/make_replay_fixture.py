#!/usr/bin/env python3
"""Regenerates the three-run replay fixture.

Each (case, replicate) gets its own scripted mock so the three runs of a case
disagree the way real model runs do. The runs are recorded through the CLI,
then the header's replicate number is set from the run id.

usage: make_replay_fixture.py <chartreview binary>
"""
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent
DATA = HERE.parent

SBAR = ("SITUATION: Medication chart review.\nBACKGROUND: Admission medication list.\n"
        "ASSESSMENT: See the listed problems.\nRECOMMENDATION: Act on each problem below.\n")


def drp(drugs, category, action, rationale=""):
    return f"DRP | drugs={';'.join(drugs)} | category={category} | action={action} | rationale={rationale}"


# None: the final summary has no findings block at all.
RUNS = {
    "4": [
        [],
        [drp(["Aspirin"], "NoIndication", "stop aspirin", "no documented indication")],
        [],
    ],
    "6": [
        [drp(["Simvastatin", "Atorvastatin"], "DuplicationOfTherapy", "stop simvastatin"),
         drp(["Co-amoxiclav"], "AdverseDrugReaction", "switch to doxycycline", "rash"),
         drp(["Aspirin"], "Allergy", "monitor for reaction")],
        [drp(["Simvastatin"], "DuplicationOfTherapy", "discontinue simvastatin"),
         drp(["Atorvastatin 80 mg"], "InappropriateDosageRegimen", "reduce to 40 mg")],
        [drp(["Simvastatin", "Atorvastatin"], "DuplicationOfTherapy", "discontinue one statin"),
         drp(["Atorvastatin"], "InappropriateDosageRegimen", "reduce dose"),
         drp(["Co-amoxiclav"], "Allergy", "stop co-amoxiclav", "penicillin allergy"),
         drp(["Lisinopril"], "AdverseDrugReaction", "noted")],
    ],
    "13": [
        [drp(["Azathioprine", "Allopurinol"], "DrugDrugInteraction", "reduce azathioprine dose by 75%"),
         drp(["Colchicine"], "OmissionOfTherapy", "start colchicine for the flare")],
        [drp(["Azathioprine", "Allopurinol"], "DrugDrugInteraction", "reduce azathioprine"),
         drp(["NSAID"], "OmissionOfTherapy", "start an NSAID")],
        None,
    ],
    "14": [
        [drp(["Lactulose"], "OmissionOfTherapy", "start lactulose 15 mL twice daily"),
         drp(["Epclusa", "Omeprazole"], "DrugDrugInteraction", "change omeprazole timing"),
         drp(["Paracetamol"], "InappropriateDosageRegimen", "reduce to 2 g daily")],
        [drp(["Paracetamol"], "InappropriateDosageRegimen", "decrease the daily maximum"),
         drp(["Omeprazole"], "DrugDrugInteraction", "hold omeprazole")],
        [drp(["Lactulose"], "OmissionOfTherapy", "initiate lactulose"),
         drp(["Furosemide"], "AdverseDrugReaction", "monitor potassium")],
    ],
    "16": [
        [drp(["Calcium Carbonate", "Tetracycline"], "DrugDrugInteraction", "change dosing times"),
         drp(["Metronidazole"], "AdverseDrugReaction", "reduce metronidazole dose")],
        [drp(["Calcium Carbonate", "Tetracycline"], "DrugDrugInteraction", "separate and adjust timing"),
         drp(["Metronidazole"], "InappropriateDosageRegimen", "reduce to 400 mg three times daily")],
        [],
    ],
}


def summary(lines):
    if lines is None:
        return SBAR + "No structured list provided."
    return SBAR + "```drp\n" + "".join(l + "\n" for l in lines) + "```\n"


def main():
    cli = pathlib.Path(sys.argv[1]).resolve()
    out_dir = HERE / "replay"
    scripts = HERE / "scripts"
    out_dir.mkdir(exist_ok=True)
    scripts.mkdir(exist_ok=True)
    for old in out_dir.glob("*.jsonl"):
        old.unlink()
    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        for case_id, runs in RUNS.items():
            for rep, lines in enumerate(runs, 1):
                run_id = f"replay-{case_id}-r{rep}"
                script = scripts / f"case{case_id}-r{rep}.json"
                rules = [{"pattern": "Review task: FINAL_SUMMARY", "response": summary(lines)}]
                script.write_text(json.dumps({"rules": rules, "default": "No issue for this task."}, indent=2) + "\n")
                subprocess.run([str(cli), "--data", str(DATA), "--runs-dir", str(tmp / "runs"),
                                "--index-dir", str(tmp / "idx"), "review", "--case", case_id, "--backend", "mock",
                                "--version", "v1", "--label", "v1", "--script", str(script), "--run-id", run_id],
                               check=True)
                src = tmp / "runs" / f"{run_id}.jsonl"
                records = [json.loads(l) for l in src.read_text().splitlines() if l.strip()]
                for r in records:
                    if r.get("type") == "header":
                        r["replicate"] = rep
                with open(out_dir / f"{run_id}.jsonl", "w") as fh:
                    for r in records:
                        fh.write(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n")
    shutil.rmtree(HERE / "__pycache__", ignore_errors=True)


if __name__ == "__main__":
    main()
