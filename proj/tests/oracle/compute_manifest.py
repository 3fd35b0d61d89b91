"""Expected aggregates for a replay corpus, computed without the C++ code.

Reads a replay JSONL file, an optional getPosts-shaped post fixture and a
score CSV, and writes bucket totals that the ingest path must reproduce.
"""

import argparse
import csv
import ipaddress
import json
from collections import defaultdict
from datetime import datetime, timedelta, timezone
from urllib.parse import urlsplit

from publicsuffixlist import PublicSuffixList

PSL = PublicSuffixList()
THRESHOLD = 60.0


def registrable(url):
    url = url.strip()
    try:
        parts = urlsplit(url)
        host = parts.hostname
        parts.port
    except ValueError:
        return None
    if not parts.scheme or not host:
        return None
    host = host.rstrip(".")
    try:
        ipaddress.IPv4Address(host)
        return host
    except ValueError:
        pass
    if host.startswith("www.") and len(host) > 4:
        host = host[4:]
    return PSL.privatesuffix(host) or host


def replay_links(record):
    urls = [f["value"] for f in record.get("facets", []) if f.get("type") == "link"]
    return urls + list(record.get("embed_uris", []))


def lexicon_links(record):
    urls = []
    for facet in record.get("facets", []):
        for feature in facet.get("features", []):
            if feature.get("$type") == "app.bsky.richtext.facet#link":
                urls.append(feature["uri"])
    embed = record.get("embed") or {}
    if embed.get("$type") == "app.bsky.embed.recordWithMedia":
        embed = embed.get("media") or {}
    if embed.get("$type") == "app.bsky.embed.external":
        urls.append(embed["external"]["uri"])
    return urls


def domains_of(urls):
    seen, out = set(), []
    for url in urls:
        if not url or url in seen:
            continue
        domain = registrable(url)
        if domain is None:
            continue
        seen.add(url)
        out.append(domain)
    return out


def parse_time(text):
    return datetime.fromisoformat(text.replace("Z", "+00:00")).astimezone(timezone.utc)


def iso(t):
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--replay", required=True)
    ap.add_argument("--posts")
    ap.add_argument("--scores", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    scores = {}
    with open(args.scores, newline="") as f:
        for row in csv.DictReader(f):
            scores[row["domain"].lower()] = float(row["score"])

    known = {}
    if args.posts:
        with open(args.posts) as f:
            for view in json.load(f)["posts"]:
                known[view["uri"]] = domains_of(lexicon_links(view["record"]))

    # (kind, time, actor, origin post uri, domains)
    observations = []
    counts = defaultdict(int)
    decode_errors = 0
    last_cursor = None
    with open(args.replay) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            try:
                event = json.loads(line)
                cursor = event["cursor"]
                kind = event["kind"]
            except (ValueError, KeyError):
                decode_errors += 1
                continue
            if last_cursor is not None and cursor <= last_cursor:
                counts["duplicate"] += 1
                continue
            last_cursor = cursor
            if kind not in ("post", "repost", "like"):
                counts["skipped"] += 1
                continue
            counts[kind] += 1
            when = parse_time(event["created_at"])
            actor = event["actor"]
            if kind == "post":
                uri = f"at://{actor}/app.bsky.feed.post/{cursor}"
                domains = domains_of(replay_links(event["record"]))
                known[uri] = domains
            else:
                uri = event["subject"]["uri"]
                if uri not in known:
                    counts["not_found"] += 1
                    continue
                domains = known[uri]
            observations.append((kind, when, actor, uri, domains))

    def classify(domain):
        score = scores.get(domain)
        if score is None:
            return None
        return "reliable" if score >= THRESHOLD else "unreliable"

    def buckets(step, align, dedup):
        first = align(min(o[1] for o in observations))
        last = align(max(o[1] for o in observations)) + step
        out = {}
        t = first
        while t < last:
            out[t] = {"bucket_start": iso(t), "total_links": 0, "total_rated": 0, "reliable": 0, "unreliable": 0}
            t += step
        seen = set()
        for kind, when, actor, uri, domains in observations:
            for domain in domains:
                key = (kind, actor, uri, domain)
                if dedup == "per_post":
                    if key in seen:
                        continue
                    seen.add(key)
                b = out[align(when)]
                b["total_links"] += 1
                cls = classify(domain)
                if cls:
                    b["total_rated"] += 1
                    b[cls] += 1
        return [out[k] for k in sorted(out)]

    hour = lambda t: t.replace(minute=0, second=0, microsecond=0)
    day = lambda t: t.replace(hour=0, minute=0, second=0, microsecond=0)
    result = {
        "events": dict(counts),
        "decode_errors": decode_errors,
        "last_cursor": last_cursor,
        "observations": sum(len(o[4]) for o in observations),
    }
    for name, step, align in (("hour", timedelta(hours=1), hour), ("day", timedelta(days=1), day)):
        result[name] = {d: buckets(step, align, d) for d in ("per_link", "per_post")}
    domain_totals = defaultdict(int)
    for _, _, _, _, domains in observations:
        for d in domains:
            domain_totals[d] += 1
    result["domains"] = dict(sorted(domain_totals.items()))
    result["window"] = {"from": result["day"]["per_link"][0]["bucket_start"],
                        "to": iso(parse_time(result["day"]["per_link"][-1]["bucket_start"]) + timedelta(days=1))}

    with open(args.out, "w") as f:
        json.dump(result, f, indent=1, sort_keys=True)


if __name__ == "__main__":
    main()
