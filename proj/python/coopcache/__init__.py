"""Cooperative multi-BS edge caching testbed (Python bindings)."""

import json as _json

from ._coopcache import (  # noqa: F401
    ConfigError,
    Error,
    Instance,
    InstanceConfig,
    RewardConfig,
    Session,
    StructuralError,
    build_instance,
    export_sft,
    group_advantage,
    parse_instance,
    zipf_pmf,
)
from . import _coopcache as _core

RUN_SCHEMA = "coopcache.run/v1"


def run(config=None, **overrides):
    """Evaluate policies; returns one report dict per (seed, policy).

    `config` is a run-configuration dict (schema optional); keyword
    arguments override its top-level keys.
    """
    doc = dict(config or {})
    doc.update(overrides)
    doc.setdefault("schema", RUN_SCHEMA)
    return _json.loads(_core._run(_json.dumps(doc)))


def summary_csv(reports):
    return _core._summary_csv(_json.dumps(reports))


def audit_dataset(text):
    return _json.loads(_core._audit(text))


def verify_pbrs(instance, slots=20):
    return _json.loads(_core._verify_pbrs(instance, slots))
