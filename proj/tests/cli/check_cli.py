"""Exit codes and outputs of the newsky command line tool."""

import csv
import io
import json
import os
import shutil
import socket
import subprocess
import sys
import time
import urllib.request
from pathlib import Path

TOP_RELIABLE = ["theguardian.com", "nytimes.com", "bbc.com", "washingtonpost.com", "spiegel.de",
                   "cnn.com", "reuters.com", "nbcnews.com", "npr.org", "rawstory.com"]

failures = []


def check(ok, what):
    print(("ok   " if ok else "FAIL ") + what)
    if not ok:
        failures.append(what)


def main():
    exe, fixtures, scratch = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
    shutil.rmtree(scratch, ignore_errors=True)
    scratch.mkdir(parents=True)
    config = scratch / "newsky.toml"
    ratings = fixtures / "ratings"
    config.write_text(f"""
[store]
path = "obs.db"

[resolver]
fixture = "{fixtures / 'posts_fixture.json'}"
rate_per_second = 1000000.0

[ratings]
score_file = "{ratings / 'scores.csv'}"
mbfc_file = "{ratings / 'mbfc.csv'}"
allsides_file = "{ratings / 'allsides.csv'}"
newsguard_orientation_file = "{ratings / 'newsguard_orientation.csv'}"
reload_ms = 0
""")
    env = {k: v for k, v in os.environ.items() if not k.startswith("NEWSKY_")}

    def run(*args, timeout=120):
        return subprocess.run([exe, "--config", str(config), "--log-level", "error", *args],
                              capture_output=True, text=True, env=env, timeout=timeout)

    r = run("ingest", "--source", "replay:" + str(scratch / "missing.jsonl"))
    check(r.returncode == 2, f"missing replay file exits 2 (got {r.returncode})")
    r = run("frobnicate")
    check(r.returncode == 2, f"unknown subcommand exits 2 (got {r.returncode})")

    r = run("ingest", "--source", "replay:" + str(fixtures / "top_domains.jsonl"))
    check(r.returncode == 0, f"replay ingest exits 0 (got {r.returncode}: {r.stderr.strip()})")
    lines = r.stdout.splitlines()
    total = sum(1 for _ in open(fixtures / "top_domains.jsonl"))
    check(bool(lines) and lines[0] == f"resume_cursor={total}", f"prints resume cursor ({lines[:1]})")

    r = run("ingest", "--source", "replay:" + str(fixtures / "top_domains.jsonl"))
    check(r.returncode == 0 and "observations=0" in r.stdout, "second ingest adds nothing")

    out = scratch / "out"
    r = run("analyze", "rankfreq", "--class", "reliable", "--limit", "10", "--out", str(out))
    check(r.returncode == 0, f"rankfreq exits 0 (got {r.returncode})")
    rows = list(csv.DictReader(open(out / "rankfreq_reliable.csv")))
    check([row["domain"] for row in rows] == TOP_RELIABLE, "rankfreq follows the reliable top-10 order")
    check([int(row["rank"]) for row in rows] == list(range(1, 11)), "ranks are 1..10")

    empty = scratch / "empty"
    r = run("analyze", "rankfreq", "--from", "2030-01-01T00:00:00Z", "--to", "2030-01-02T00:00:00Z",
            "--out", str(empty))
    text = (empty / "rankfreq_all.csv").read_text() if r.returncode == 0 else ""
    check(r.returncode == 0 and len(text.splitlines()) == 1, "empty window writes a header-only csv")

    r = run("analyze", "rankfreq", "--from", "2024-08-01T00:00:00Z")
    check(r.returncode == 2, f"half a window exits 2 (got {r.returncode})")

    first, second = scratch / "aud1", scratch / "aud2"
    codes = [run("analyze", "audiences", "--out", str(d)).returncode for d in (first, second)]
    check(codes == [0, 0], f"audiences exit 0 ({codes})")
    check((first / "audiences.json").read_bytes() == (second / "audiences.json").read_bytes(),
          "audience runs are identical")

    r = run("export", "--from", "2024-08-01T00:00:00Z", "--to", "2024-08-02T00:00:00Z", "--granularity", "day")
    exported = list(csv.DictReader(io.StringIO(r.stdout)))
    check(r.returncode == 0 and len(exported) == 1, "export writes one daily row")

    r = run("ratings", "nytimes.com", "www.censor.net")
    out_lines = r.stdout.splitlines()
    check(r.returncode == 0 and any(l.startswith("nytimes.com,reliable,") for l in out_lines)
          and any(l.startswith("www.censor.net,unreliable,") for l in out_lines), "ratings check classifies domains")

    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    sock.listen(1)
    busy = sock.getsockname()[1]
    r = run("serve", "--port", str(busy), timeout=30)
    check(r.returncode == 3, f"port collision exits 3 (got {r.returncode})")
    sock.close()

    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    proc = subprocess.Popen([exe, "--config", str(config), "--log-level", "error", "serve", "--port", str(port)],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE, env=env)
    try:
        body = None
        for _ in range(100):
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/v1/health", timeout=2) as resp:
                    body = json.loads(resp.read())
                    status = resp.status
                break
            except OSError:
                time.sleep(0.1)
        check(body is not None and status == 200 and body["last_cursor"] == total, "serve answers /v1/health")
    finally:
        proc.terminate()
        proc.wait(timeout=10)
    check(proc.returncode == 0, f"serve exits 0 on SIGTERM (got {proc.returncode})")

    if failures:
        print(f"{len(failures)} failure(s)")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
