"""Shared fixtures: a disk-cached experiment runner for the acceptance
suite, and a session summary printing one line per acceptance criterion."""

import hashlib
import shutil
from pathlib import Path

import pytest

from latentqd.cli import run_experiment
from latentqd.config import ExperimentConfig

CACHE_DIR = Path(__file__).parent / "_acceptance_cache"


def _source_hash() -> str:
    """Hash of the package sources; code changes invalidate cached runs."""
    import latentqd

    root = Path(latentqd.__file__).parent
    digest = hashlib.sha1()
    for path in sorted(root.rglob("*.py")) + sorted(root.rglob("*.cfg")) + sorted(
        root.rglob("*.txt")
    ):
        digest.update(str(path.relative_to(root)).encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


class CachedRunner:
    """Runs experiments through the CLI layer, caching whole output trees.

    The cache key covers the fully resolved configuration and the package
    source hash, so results are reused only while they still describe the
    current code.
    """

    def __init__(self, cache_dir: Path):
        self.cache_dir = cache_dir
        self.src_hash = _source_hash()

    def experiment(self, config_source: str, overrides: list[str] | None = None) -> Path:
        """Execute (or reuse) one experiment; returns the variant directory."""
        overrides = list(overrides or [])
        exp = ExperimentConfig.load(config_source, overrides + ["output_dir=run"])
        key_text = exp.resolved_text() + self.src_hash
        key = hashlib.sha1(key_text.encode()).hexdigest()[:16]
        slot = self.cache_dir / key
        marker = slot / "COMPLETE"
        variant_dir = slot / "run" / exp.variant().label()
        if not marker.exists():
            if slot.exists():
                shutil.rmtree(slot)
            slot.mkdir(parents=True)
            code = run_experiment(config_source, overrides + ["output_dir=run"],
                                  output_root=str(slot))
            assert code == 0, f"run_experiment failed for {config_source} {overrides}"
            marker.write_text(key_text)
        return variant_dir


@pytest.fixture(scope="session")
def runner():
    return CachedRunner(CACHE_DIR)


# -- acceptance summary ----------------------------------------------------------

_acceptance_reports = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and "test_acceptance" in str(item.fspath):
        _acceptance_reports.append((item, report))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_reports:
        return
    terminalreporter.section("acceptance criteria")
    for item, report in _acceptance_reports:
        doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
        status = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(f"{status}  {doc}")
