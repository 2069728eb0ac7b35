import json
import os
from fractions import Fraction

import pytest
from pydantic import ValidationError

from models import CertificateModel, MarkovSystemModel, PointModel, SessionConfig
from services import codec
from services.berk_points import BerkPoint, same_point
from services.ext_field import INFINITY
from services.julia_struct import sextic_certificate, verify_theorem_a

from conftest import DATA_DIR, zeta


def load(name):
    with open(os.path.join(DATA_DIR, name), encoding="utf-8") as fh:
        return json.load(fh)


def test_point_text_forms(K6):
    plain = codec.point_from_model(K6, PointModel(center="1/2", logradius="-1/6"))
    assert same_point(plain, zeta(K6, Fraction(1, 2), Fraction(-1, 6)))
    listed = codec.point_from_model(K6, PointModel(center=["0", "1"], logradius="1/6"))
    assert listed.center == K6.pi()
    classical = codec.point_from_model(K6, PointModel(center="1", logradius="inf"))
    assert classical.logradius == INFINITY
    assert codec.point_from_model(K6, PointModel(infinity=True)).infinity


def test_point_needs_a_radius():
    with pytest.raises(ValidationError):
        PointModel(center="0")


def test_point_model_of_infinity():
    assert codec.point_to_model(BerkPoint.point_at_infinity()).infinity


def test_bundled_config_builds_the_sextic(phi):
    config = SessionConfig.model_validate(load("sextic_config.json"))
    field = codec.field_from_model(config.field)
    assert codec.map_from_model(field, config.map).num == phi.num


def test_bundled_certificate_matches_the_template(phi, K6):
    cert = codec.certificate_from_model(K6, CertificateModel.model_validate(load("sextic_certificate.json")))
    assert verify_theorem_a(phi, cert).passed
    assert len(cert.tree.edges) == len(sextic_certificate(phi).tree.edges)


def test_bundled_system_matches_the_partition(sextic_system):
    bundled = codec.system_from_model(MarkovSystemModel.model_validate(load("sextic_system.json")))
    assert codec.system_to_model(bundled) == codec.system_to_model(sextic_system)


def test_explicit_map_model(phi, K6):
    model = codec.map_to_model(phi)
    assert codec.map_from_model(K6, model).den == phi.den


def test_nats_rounds_to_twelve_digits():
    assert codec.nats(1.23456789012345) == 1.23456789012
    assert codec.rational_text(Fraction(5, 11)) == "5/11"
