"""
JSON model documents: parsing, validation on load and canonical serialization.

A document carries the resolution model itself and, optionally, an
"envelope" block with the chamber, the order relation and a slope.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

from envelope import Chamber, PartialOrder, Slope
from json_utils import (
    ExactJSONError,
    dumps_canonical,
    loads_exact,
    parse_rational,
    parse_weight,
    rational_to_json,
    weight_to_json,
)
from localization import (
    AmbientFixedPoint,
    BoundaryComponent,
    Chart,
    Divisor,
    ModelFormatError,
    ResolutionModel,
    validate_model,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelDocument:
    model: ResolutionModel
    chamber: Optional[Chamber] = None
    order: Optional[PartialOrder] = None
    slope: Optional[Slope] = None


def _require(payload: Dict[str, Any], key: str, kind: type, where: str) -> Any:
    if key not in payload:
        raise ModelFormatError(f"Missing '{key}' in {where}")
    value = payload[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ModelFormatError(f"'{key}' in {where} must be a {kind.__name__}")
    return value


def _weights(values: Any, where: str) -> List:
    if not isinstance(values, list):
        raise ModelFormatError(f"tangent_weights of {where} must be a list")
    return [parse_weight(w) for w in values]


def parse_model(payload: Any) -> ModelDocument:
    """Build a ModelDocument from decoded JSON; shape errors raise ModelFormatError."""
    if not isinstance(payload, dict):
        raise ModelFormatError("A model document must be a JSON object")
    try:
        rank = _require(payload, "torus_rank", int, "model")
        components = [str(c) for c in _require(payload, "components", list, "model")]
        points = []
        for entry in _require(payload, "ambient_points", list, "model"):
            point_id = str(_require(entry, "id", str, "ambient point"))
            points.append(AmbientFixedPoint(point_id, tuple(_weights(entry.get("tangent_weights", []), point_id))))
        charts = []
        for entry in _require(payload, "charts", list, "model"):
            chart_id = str(_require(entry, "id", str, "chart"))
            boundary = entry.get("boundary_of", {})
            if not isinstance(boundary, dict):
                raise ModelFormatError(f"boundary_of of chart '{chart_id}' must be an object")
            try:
                boundary_of = {int(k): str(v) for k, v in boundary.items()}
            except ValueError as exc:
                raise ModelFormatError(f"boundary_of keys of chart '{chart_id}' must be direction indices") from exc
            charts.append(Chart(
                chart_id,
                tuple(_weights(entry.get("tangent_weights", []), chart_id)),
                str(_require(entry, "image_point", str, f"chart '{chart_id}'")),
                boundary_of,
            ))
        center = _require(payload, "center", str, "model")
        divisor_payload = payload.get("divisor", {})
        if not isinstance(divisor_payload, dict):
            raise ModelFormatError("'divisor' must be an object")
        divisor = Divisor({str(c): parse_rational(v) for c, v in divisor_payload.items()})
        model = ResolutionModel(
            torus_rank=rank,
            ambient_points=tuple(points),
            charts=tuple(charts),
            components=tuple(BoundaryComponent(c) for c in components),
            center=center,
            divisor=divisor,
            name=str(payload.get("name", "")),
        )
        chamber = order = slope = None
        envelope = payload.get("envelope")
        if envelope is not None:
            if not isinstance(envelope, dict):
                raise ModelFormatError("'envelope' must be an object")
            if "chamber" in envelope:
                chamber = Chamber(tuple(int(v) for v in envelope["chamber"]))
            if "order" in envelope:
                order = PartialOrder(tuple(pair) for pair in envelope["order"])
            if envelope.get("slope") is not None:
                slope_payload = envelope["slope"]
                slope = Slope(
                    int(slope_payload["n"]),
                    {str(k): parse_weight(v) for k, v in slope_payload.get("weights", {}).items()},
                )
                for point_id, w in sorted(slope.weights.items()):
                    if len(w) != rank:
                        raise ModelFormatError(
                            f"Slope weight at '{point_id}' has rank {len(w)}, expected torus_rank {rank}"
                        )
    except ExactJSONError as exc:
        raise ModelFormatError(str(exc)) from exc
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"Malformed model document: {exc}") from exc
    return ModelDocument(model, chamber, order, slope)


def loads_model(text: str, validate: bool = True) -> ModelDocument:
    try:
        payload = loads_exact(text)
    except ExactJSONError as exc:
        raise ModelFormatError(str(exc)) from exc
    except ValueError as exc:
        raise ModelFormatError(f"Invalid JSON: {exc}") from exc
    document = parse_model(payload)
    if validate:
        validate_model(document.model, order=document.order)
    return document


def load_model(path: str, validate: bool = True) -> ModelDocument:
    """Read and validate a model file."""
    logger.info("Loading model file %s", path)
    with open(path, "r", encoding="utf-8") as handle:
        return loads_model(handle.read(), validate=validate)


def model_to_payload(document: ModelDocument) -> Dict[str, Any]:
    model = document.model
    payload: Dict[str, Any] = {}
    if model.name:
        payload["name"] = model.name
    payload["torus_rank"] = model.torus_rank
    payload["components"] = sorted(model.component_ids)
    payload["ambient_points"] = [
        {"id": point.id, "tangent_weights": [weight_to_json(w) for w in point.tangent_weights]}
        for point in model.ambient_points
    ]
    payload["charts"] = [
        {
            "id": chart.id,
            "image_point": chart.image_point,
            "tangent_weights": [weight_to_json(w) for w in chart.tangent_weights],
            "boundary_of": {str(k): chart.boundary_of[k] for k in sorted(chart.boundary_of)},
        }
        for chart in model.charts
    ]
    payload["center"] = model.center
    payload["divisor"] = {c: rational_to_json(v) for c, v in sorted(model.divisor.multiplicities.items())}
    envelope: Dict[str, Any] = {}
    if document.chamber is not None:
        envelope["chamber"] = list(document.chamber.sigma)
    if document.order is not None:
        envelope["order"] = document.order.to_list()
    if document.slope is not None:
        envelope["slope"] = document.slope.to_dict()
    if envelope:
        payload["envelope"] = envelope
    return payload


def serialize_model(document: ModelDocument) -> str:
    """Canonical text; serialize(parse(text)) == text for canonical files."""
    return dumps_canonical(model_to_payload(document))


def save_model(document: ModelDocument, path: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(serialize_model(document), encoding="utf-8")
    logger.info("Model written to %s", target)
