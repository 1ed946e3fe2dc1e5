"""Shared fixtures: one full pipeline run over the local mini site."""

from __future__ import annotations

import time
from types import SimpleNamespace

import pytest

import minisite
from tmforge.manifest import load_project_manifest
from tmforge.pipeline import run_pipeline


@pytest.fixture(scope="session")
def minisite_run(tmp_path_factory):
    """Serve the fixture site, run the whole pipeline against it once.

    Several test modules assert on different artifacts of the same run, so
    this is session scoped; the run itself is deterministic.
    """
    project_dir = tmp_path_factory.mktemp("minisite_project")
    server, base_url = minisite.serve_site()
    try:
        manifest_path = minisite.write_project(project_dir, base_url)
        manifest = load_project_manifest(manifest_path)
        started = time.monotonic()
        report = run_pipeline(manifest)
        elapsed = time.monotonic() - started
    finally:
        server.shutdown()
        server.server_close()
    return SimpleNamespace(
        project_dir=project_dir,
        manifest_path=manifest_path,
        manifest=manifest,
        report=report,
        out=manifest.output_dir,
        elapsed=elapsed,
    )
