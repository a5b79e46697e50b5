#pragma once

#include "agrimon/core.hpp"
#include "json.hpp"

// JSON shapes shared by the store logs, the HTTP API and run reports.
// Timestamps are integer milliseconds; absent optionals serialize as null.

namespace agrimon {

using Json = nlohmann::json;

Json to_json(const SensorReading& r);
SensorReading reading_from_json(const Json& j);

Json to_json(const AlertEvent& a);
AlertEvent alert_from_json(const Json& j);

Json to_json(const Rejection& r);
Rejection rejection_from_json(const Json& j);

}  // namespace agrimon
