"""Test simulator that emits one column too many."""
import sys

for line in sys.stdin:
    if line.startswith("SIMULATE"):
        _, step, length = line.split()
        rows = round(float(length) / float(step)) + 1
    elif line.startswith("END"):
        print("diagnostic: about to send a malformed trace", file=sys.stderr, flush=True)
        print(f"TRACE 1 {rows}")
        for i in range(rows):
            print(f"{i * float(step)!r},1.0,2.0")
        print("END", flush=True)
