#!/usr/bin/env python3
# Regenerates the execution fixtures in this directory by building the
# saxpy driver against small hand-written kernels and running the result.
import json
import os
import signal
import subprocess
import tempfile

HERE = os.path.dirname(os.path.abspath(__file__))
CASE = os.path.join(HERE, "..", "..", "corpus", "saxpy")

HEAD = "\t.text\n\t.globl saxpy\n\t.type saxpy, @function\nsaxpy:\n"
KERNELS = {
    "x86_64_null_store": HEAD + "\tmovl $0, (0)\n\tret\n",
    "x86_64_ud2": HEAD + "\tud2\n",
    "x86_64_missing_add": HEAD + """\ttestl %edi, %edi
\tjle 2f
\tmovslq %edi, %rdi
\txorl %eax, %eax
1:\tmovss (%rsi,%rax,4), %xmm1
\tmulss %xmm0, %xmm1
\tmovss %xmm1, (%rdx,%rax,4)
\tincq %rax
\tcmpq %rdi, %rax
\tjl 1b
2:\tret
""",
}

def exit_kind(code):
    if code < 0:
        return {"kind": "signaled", "signal": signal.Signals(-code).name}
    return {"kind": "exited", "code": code}

with tempfile.TemporaryDirectory() as work:
    subprocess.run(["gcc", "-c", os.path.join(CASE, "main.c"), "-o", os.path.join(work, "main.o")], check=True)
    subprocess.run(["gcc", os.path.join(CASE, "kernel.c"), os.path.join(CASE, "main.c"), "-o", os.path.join(work, "ref"), "-lm"], check=True)
    expected = subprocess.run([os.path.join(work, "ref")], capture_output=True, text=True, check=True).stdout
    for name, asm in KERNELS.items():
        src = os.path.join(work, "kernel.s")
        with open(src, "w") as f:
            f.write(asm)
        prog = os.path.join(work, "prog")
        subprocess.run(["gcc", src, os.path.join(work, "main.o"), "-o", prog, "-lm"], check=True)
        run = subprocess.run([prog], capture_output=True, text=True)
        fixture = {
            "case": "saxpy",
            "kernel": asm,
            "exit_kind": exit_kind(run.returncode),
            "stdout": run.stdout,
            "expected": expected,
        }
        with open(os.path.join(HERE, name + ".json"), "w") as f:
            json.dump(fixture, f, indent=2)
            f.write("\n")
