"""Python access to the agrimon pipeline.

Timestamps are integer milliseconds since the epoch. Records come back as the
same dicts the HTTP API serves.
"""

from ._agrimon import (
    API_SCHEMA_VERSION,
    EARTH_RADIUS_M,
    ConfigError,
    RangeError,
    Store,
    StoreError,
    check_volume,
    detector_defaults,
    field_range,
    format_payload,
    haversine_m,
    parse_payload,
    run_simulation,
    validate_range,
)

__all__ = [
    "API_SCHEMA_VERSION",
    "EARTH_RADIUS_M",
    "ConfigError",
    "RangeError",
    "Store",
    "StoreError",
    "check_volume",
    "detector_defaults",
    "field_range",
    "format_payload",
    "haversine_m",
    "parse_payload",
    "run_simulation",
    "validate_range",
]
