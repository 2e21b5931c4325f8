"""Validate a pipeline config file (pipeline.conf.json) using JSON Schema."""
import json
import pathlib
import sys

from jsonschema import ValidationError, validate

SCHEMA_PATH = pathlib.Path(__file__).with_name("pipeline.schema.json")


def validate_config(config_path: str) -> dict:
    schema = json.loads(SCHEMA_PATH.read_text())
    try:
        data = json.loads(pathlib.Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        print(f"[config] Invalid pipeline config: {config_path}: {e}")
        sys.exit(2)
    try:
        validate(instance=data, schema=schema)
    except ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path)
        print(f"[config] Invalid pipeline config: {where + ': ' if where else ''}{e.message}")
        sys.exit(2)
    return data


if __name__ == "__main__":
    for path in sys.argv[1:] or ["pipeline.conf.json"]:
        validate_config(path)
        print(f"[config] {path} ok")
