"""Simulate a small run with the CLI and check every log line against the event schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def main() -> int:
    cli, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    validator = jsonschema.Draft202012Validator(schema)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([cli, "--log-level", "off", "simulate", "--scenario", "mixed", "--n", "6",
                        "--seed", "4", "--out", tmp], check=True)
        bad = lines = 0
        kinds = set()
        for path in sorted(pathlib.Path(tmp, "sessions").glob("*.jsonl")):
            for n, line in enumerate(path.read_text().splitlines(), 1):
                record = json.loads(line)
                kinds.add(record["kind"])
                lines += 1
                for err in validator.iter_errors(record):
                    bad += 1
                    print(f"{path.name}:{n}: {err.message}")
    print(f"{lines} lines, {len(kinds)} kinds, {bad} schema errors")
    return 1 if bad or lines == 0 else 0


if __name__ == "__main__":
    sys.exit(main())
