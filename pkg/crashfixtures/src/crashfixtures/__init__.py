"""Vulnerable C fixture corpus for exercising the crash repair pipeline."""

from .corpus import (
    CASES_ROOT,
    CorpusError,
    ExpectedCrash,
    FixtureManifest,
    ManifestCheck,
    OptimizedOutProbe,
    build_fixture,
    check_manifest,
    fixture_dir,
    fixture_names,
    load_constraint,
    load_manifest,
    reference_patches,
    stage_fixture,
)

__all__ = [
    "CASES_ROOT",
    "CorpusError",
    "ExpectedCrash",
    "FixtureManifest",
    "ManifestCheck",
    "OptimizedOutProbe",
    "build_fixture",
    "check_manifest",
    "fixture_dir",
    "fixture_names",
    "load_constraint",
    "load_manifest",
    "reference_patches",
    "stage_fixture",
]
