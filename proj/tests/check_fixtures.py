"""Regenerates the fixture corpus and compares it byte for byte."""

import filecmp
import os
import shutil
import subprocess
import sys


def listing(top):
    out = set()
    for root, _, files in os.walk(top):
        for name in files:
            out.add(os.path.relpath(os.path.join(root, name), top))
    return out


generator, checked_in, scratch = sys.argv[1:4]
shutil.rmtree(scratch, ignore_errors=True)
subprocess.run([generator, scratch], check=True)
fresh, kept = listing(scratch), listing(checked_in)
bad = sorted(fresh ^ kept)
for rel in sorted(fresh & kept):
    if not filecmp.cmp(os.path.join(scratch, rel), os.path.join(checked_in, rel), shallow=False):
        bad.append(rel)
if bad:
    print("fixtures differ from generator output:", ", ".join(bad))
    sys.exit(1)
print("fixtures match")
