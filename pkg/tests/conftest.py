import datetime as dt
import json
from pathlib import Path

import pytest

from vobe.records import record_from_dict

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


def load_json(name):
    return json.loads((FIXTURES / name).read_text())


def load_record(name):
    return record_from_dict(load_json(name))


def view_from_json(doc):
    """Property view from a JSON fixture: lists become sets, ISO strings that
    look like dates become dates."""
    view = {}
    for path, value in doc.items():
        if isinstance(value, list):
            view[path] = frozenset(value)
        elif isinstance(value, str):
            try:
                view[path] = dt.date.fromisoformat(value)
            except ValueError:
                view[path] = value
        else:
            view[path] = value
    return view


@pytest.fixture
def softwarecompany():
    return load_record("softwarecompany.json")


@pytest.fixture
def softwaredev():
    return load_record("softwaredev.json")


@pytest.fixture
def softis():
    return load_record("softis.json")


@pytest.fixture
def softis_view():
    return view_from_json(load_json("softis_view.json"))


@pytest.fixture
def psc_class():
    from vobe.dsl import parse_class

    return parse_class((FIXTURES / "polish_software_company.ocls").read_text())


@pytest.fixture
def network():
    from vobe.socialnet import network_from_dict

    return network_from_dict(load_json("network.json"))


@pytest.fixture
def demo_spec_doc():
    return load_json("demo_spec.json")
