#!/usr/bin/env python3
# Writes the 200-record per-architecture fixtures. Every case gets ten
# samples; outcome counts per architecture are fixed in PLAN and spread
# over the cases with a seeded shuffle.
import json
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = sorted(os.listdir(os.path.join(HERE, "..", "..", "corpus")))
# arch: (n_exec, n_succ)
PLAN = {"x86_64": (131, 57), "aarch64": (148, 71), "riscv64": (156, 65)}
COMPILE = ["UnrecognizedCharacter", "InstructionError", "AbsoluteExpressionError",
           "InvalidRegisterUsage", "UndefinedReferenceError", "SymbolRedefinitionError"]
EXEC = [("SegmentationFault", {"kind": "signaled", "signal": "SIGSEGV"}),
        ("IllegalInstruction", {"kind": "signaled", "signal": "SIGILL"}),
        ("WrongResult", {"kind": "exited", "code": 0})]

def record(arch, case, idx, outcome, rng):
    r = {
        "run_id": "table-" + arch, "case_id": case, "arch": arch,
        "model_name": "fixture", "prompt_version": "v1", "sample_index": idx,
        "temperature": 0.8, "max_output_tokens": 4096, "hint_categories": [],
        "splice_mode": "single-unit-splice", "attempts": 1, "tolerance": 0.0001,
        "request_digest": None, "raw_response_digest": None,
        "extraction_method": "fenced-block", "generation_error": None,
        "build": None, "exec": None, "verdict": None,
        "latency_ms": 0, "started_at_ms": 0, "finished_at_ms": 0,
    }
    if outcome == "compile":
        cat = rng.choice(COMPILE)
        r["build"] = {"succeeded": False, "stage": "assemble", "diagnostics": "", "duration_ms": 0}
        r["verdict"] = {"kind": "CompileError", "category": cat, "evidence": ""}
        return r
    r["build"] = {"succeeded": True, "stage": "link", "diagnostics": "", "duration_ms": 0}
    exit_kind = {"kind": "exited", "code": 0}
    if outcome == "success":
        r["verdict"] = {"kind": "Success", "evidence": ""}
    else:
        cat, exit_kind = rng.choice(EXEC)
        r["verdict"] = {"kind": "ExecError", "category": cat, "evidence": ""}
    r["exec"] = {"exit_kind": exit_kind, "stdout_text": "", "stderr_text": "",
                 "stdout_overflow": False, "duration_ms": 0, "comparison": None}
    return r

for arch, (n_exec, n_succ) in PLAN.items():
    rng = random.Random(arch)
    outcomes = ["success"] * n_succ + ["exec"] * (n_exec - n_succ) + ["compile"] * (200 - n_exec)
    rng.shuffle(outcomes)
    with open(os.path.join(HERE, arch + ".jsonl"), "w") as f:
        for i, outcome in enumerate(outcomes):
            f.write(json.dumps(record(arch, CASES[i // 10], i % 10, outcome, rng), separators=(",", ":")) + "\n")
