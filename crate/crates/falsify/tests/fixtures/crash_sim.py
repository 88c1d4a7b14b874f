"""Test simulator that dies on the first request."""
import sys

sys.stdin.readline()
print("fatal: license server unavailable", file=sys.stderr, flush=True)
sys.exit(3)
