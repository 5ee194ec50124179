from __future__ import annotations

import pytest

from studypilot.catalog import load_catalog
from studypilot.config import ServiceConfig
from studypilot.gateway import rule_based_profile
from studypilot.planner import build_plan

#: The onboarding answers behind the bundled golden schedule: one free-text
#: answer per personalization dimension (time, pace, content preference).
SCENARIO_ANSWERS = {
    "time": (
        "I can spend two focused hours studying each evening when I feel the "
        "most productive. I like to take a break every 40 minutes to stay "
        "refreshed."
    ),
    "pace": (
        "I prefer a learning pace that allows me to dedicate more time to "
        "mastering fundamental concepts at the start and gradually reduce the "
        "intensity as I progress."
    ),
    "path": (
        "I learn best through engaging and visually rich content, so I prefer "
        "video-based lessons that explain complex ideas with animations or "
        "diagrams."
    ),
}

SCENARIO_GOAL = "foundational concepts of cosmology and astronomy"

COSMO = "cosmology-astro"

#: The tutoring query used by the structural-contract tests: it targets the
#: wheels-on-different-surfaces analogy in the refraction transcript.
REFRACTION_QUERY = (
    "In the analogy of a car crossing from mud (slow medium) to a road (fast "
    "medium), how does the idea of traction—where one wheel moves faster "
    "than the others—explain the bending of a wave's direction during "
    "refraction? Why does this depend on the wave's angle of approach?"
)


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(ServiceConfig().resolved_catalog_dir())


@pytest.fixture(scope="session")
def cosmo_syllabus(catalog):
    return catalog.syllabus(COSMO)


@pytest.fixture(scope="session")
def scenario_profile():
    return rule_based_profile(SCENARIO_ANSWERS)


@pytest.fixture(scope="session")
def golden_plan(cosmo_syllabus, scenario_profile):
    return build_plan(cosmo_syllabus, scenario_profile)
