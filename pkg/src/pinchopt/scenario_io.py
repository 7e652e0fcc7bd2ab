"""Scenario file parsing and serialization (JSON, schema version 1).

Keys carry their unit in the name (p_dbm, fc_hz, mu_sq_db) because the
source material mixes dB, dBm and linear scales freely. Missing defaults
fall back to the reference simulation setup: f_c = 28 GHz, d_v = 10 m,
P = 40 dBm, sigma^2 = -90 dBm, mu^2 = -90 dB, D_y = 10 m, beta = 0.01,
guide index 1.4, eps_t = 1e-3.

Example document:

    {
      "schema": 1,
      "region": {"dx": 30.0, "dy": 10.0, "dv": 10.0},
      "defaults": {"fc_hz": 2.8e10, "p_dbm": 40.0, "noise_dbm": -90.0,
                   "mu_sq_db": -90.0, "beta": 0.01},
      "users": [{"x": 10.0, "y": 5.0},
                {"x": 25.0, "y": -3.0, "noise_dbm": -85.0}],
      "outage": {"epsilon": 0.1},
      "tolerances": {"eps_t": 1e-3}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .maxmin import SolverTolerances
from .model import (
    ChannelParams,
    Scenario,
    SPEED_OF_LIGHT,
    UserPosition,
    dbm_to_linear,
    eta_from_carrier,
)
from .outage import OutageSpec

SCHEMA_VERSION = 1

DEFAULTS = {
    "fc_hz": 28e9,
    "p_dbm": 40.0,
    "noise_dbm": -90.0,
    "mu_sq_db": -90.0,
    "beta": 0.01,
    "guide_index": 1.4,
}
REGION_DEFAULTS = {"dy": 10.0, "dv": 10.0}
TOLERANCE_DEFAULTS = {"eps_t": 1e-3, "eps_y": None, "eps_u": None, "max_iter": 200}

_USER_KEYS = {"x", "y", "noise_dbm", "mu_sq_db"}


class ScenarioFormatError(ValueError):
    """Scenario document is malformed; the message names the offending field."""


@dataclass(frozen=True)
class ScenarioBundle:
    """Parsed scenario plus solver configuration and the normalized document."""

    scenario: Scenario
    outage: OutageSpec | None
    tol_avg: SolverTolerances
    tol_outage: SolverTolerances
    document: dict
    name: str = "scenario"


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioFormatError(f"{where}: missing required field '{key}'")
    return doc[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _channel_from(defaults: dict, noise_dbm: float, mu_sq_db: float) -> ChannelParams:
    wavelength = SPEED_OF_LIGHT / defaults["fc_hz"]
    return ChannelParams(
        beta=defaults["beta"],
        eta=eta_from_carrier(defaults["fc_hz"]),
        mu_sq=dbm_to_linear(mu_sq_db),
        rho=dbm_to_linear(defaults["p_dbm"]) / dbm_to_linear(noise_dbm),
        guided_wavelength=wavelength / defaults["guide_index"],
        carrier_wavelength=wavelength,
    )


def parse_scenario_dict(doc: dict, name: str = "scenario") -> ScenarioBundle:
    """Validate and build a ScenarioBundle from a JSON-compatible dict."""
    if not isinstance(doc, dict):
        raise ScenarioFormatError("top level: expected an object")
    schema = _require(doc, "schema", "top level")
    if schema != SCHEMA_VERSION:
        raise ScenarioFormatError(f"top level: unsupported schema {schema!r}, expected {SCHEMA_VERSION}")
    unknown = set(doc) - {"schema", "region", "defaults", "users", "outage", "tolerances"}
    if unknown:
        raise ScenarioFormatError(f"top level: unknown fields {sorted(unknown)}")

    region = _require(doc, "region", "top level")
    if not isinstance(region, dict):
        raise ScenarioFormatError("region: expected an object")
    dx = _number(_require(region, "dx", "region"), "region.dx")
    dy = _number(region.get("dy", REGION_DEFAULTS["dy"]), "region.dy")
    dv = _number(region.get("dv", REGION_DEFAULTS["dv"]), "region.dv")

    defaults = dict(DEFAULTS)
    if not isinstance(doc.get("defaults") or {}, dict):
        raise ScenarioFormatError("defaults: expected an object")
    for key, value in (doc.get("defaults") or {}).items():
        if key not in DEFAULTS:
            raise ScenarioFormatError(f"defaults: unknown field '{key}'")
        defaults[key] = _number(value, f"defaults.{key}")

    users_doc = _require(doc, "users", "top level")
    if not isinstance(users_doc, list) or not users_doc:
        raise ScenarioFormatError("users: expected a nonempty list")
    users, channels, norm_users = [], [], []
    for m, entry in enumerate(users_doc):
        where = f"users[{m}]"
        if not isinstance(entry, dict):
            raise ScenarioFormatError(f"{where}: expected an object")
        if set(entry) - _USER_KEYS:
            raise ScenarioFormatError(f"{where}: unknown fields {sorted(set(entry) - _USER_KEYS)}")
        x = _number(_require(entry, "x", where), f"{where}.x")
        y = _number(_require(entry, "y", where), f"{where}.y")
        noise = _number(entry.get("noise_dbm", defaults["noise_dbm"]), f"{where}.noise_dbm")
        mu_sq_db = _number(entry.get("mu_sq_db", defaults["mu_sq_db"]), f"{where}.mu_sq_db")
        users.append(UserPosition(x=x, y=y))
        channels.append(_channel_from(defaults, noise, mu_sq_db))
        norm = {"x": x, "y": y}
        if "noise_dbm" in entry:
            norm["noise_dbm"] = noise
        if "mu_sq_db" in entry:
            norm["mu_sq_db"] = mu_sq_db
        norm_users.append(norm)

    try:
        scenario = Scenario(dx=dx, dy=dy, dv=dv, users=tuple(users), channels=tuple(channels))
    except ValueError as exc:
        raise ScenarioFormatError(str(exc)) from exc

    outage_doc = doc.get("outage")
    outage = None
    norm_outage = None
    if outage_doc is not None:
        if not isinstance(outage_doc, dict) or ("epsilon" in outage_doc) == ("epsilons" in outage_doc):
            raise ScenarioFormatError("outage: give exactly one of 'epsilon' or 'epsilons'")
        try:
            if "epsilon" in outage_doc:
                eps = _number(outage_doc["epsilon"], "outage.epsilon")
                outage = OutageSpec.shared(eps, scenario.n_users)
                norm_outage = {"epsilon": eps}
            else:
                eps_list = outage_doc["epsilons"]
                if not isinstance(eps_list, list) or len(eps_list) != scenario.n_users:
                    raise ScenarioFormatError(
                        f"outage.epsilons: expected {scenario.n_users} values"
                    )
                values = [_number(v, f"outage.epsilons[{i}]") for i, v in enumerate(eps_list)]
                outage = OutageSpec(epsilons=tuple(values))
                norm_outage = {"epsilons": values}
        except ValueError as exc:
            raise ScenarioFormatError(f"outage: {exc}") from exc

    tols = dict(TOLERANCE_DEFAULTS)
    if not isinstance(doc.get("tolerances") or {}, dict):
        raise ScenarioFormatError("tolerances: expected an object")
    for key, value in (doc.get("tolerances") or {}).items():
        if key not in TOLERANCE_DEFAULTS:
            raise ScenarioFormatError(f"tolerances: unknown field '{key}'")
        if key == "max_iter":
            tols[key] = int(_number(value, "tolerances.max_iter"))
        elif value is not None:
            tols[key] = _number(value, f"tolerances.{key}")
    try:
        tol_avg = SolverTolerances(eps_t=tols["eps_t"], eps_y=tols["eps_y"], max_iter=tols["max_iter"])
        tol_outage = SolverTolerances(eps_t=tols["eps_t"], eps_y=tols["eps_u"], max_iter=tols["max_iter"])
    except ValueError as exc:
        raise ScenarioFormatError(f"tolerances: {exc}") from exc

    document = {
        "schema": SCHEMA_VERSION,
        "region": {"dx": dx, "dy": dy, "dv": dv},
        "defaults": defaults,
        "users": norm_users,
    }
    if norm_outage is not None:
        document["outage"] = norm_outage
    document["tolerances"] = tols
    return ScenarioBundle(
        scenario=scenario,
        outage=outage,
        tol_avg=tol_avg,
        tol_outage=tol_outage,
        document=document,
        name=name,
    )


def load_scenario(path) -> ScenarioBundle:
    """Load and validate a scenario JSON file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario_dict(doc, name=path.stem)


def serialize_scenario(bundle: ScenarioBundle) -> str:
    """Normalized JSON text; parsing it again yields an identical Scenario."""
    return json.dumps(bundle.document, indent=2) + "\n"
