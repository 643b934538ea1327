"""Shared fixtures: one hermetic archive pair and one stub bridge per session."""

import pytest

from memento_audit.fetching import PoliteFetcher
from memento_audit.fixture_archive import FixtureService, StubBridge
from memento_audit.fixture_archive.scenarios import build_all


@pytest.fixture(scope="session")
def manifest():
    return build_all()


@pytest.fixture(scope="session")
def service(manifest):
    with FixtureService(manifest) as svc:
        yield svc


@pytest.fixture(scope="session")
def endpoint(service):
    return service.endpoint()


@pytest.fixture(scope="session")
def stub_bridge():
    with StubBridge() as bridge:
        yield bridge


@pytest.fixture()
def fetcher():
    f = PoliteFetcher(politeness_s=0.0)
    yield f
    f.close()
