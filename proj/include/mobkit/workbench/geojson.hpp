#pragma once

#include <filesystem>
#include <string>

#include "mobkit/workbench/queries.hpp"

namespace mobkit::workbench {

/// RFC 7946 FeatureCollection: one Feature per row, geometry from the first
/// geometry column, the other columns as properties. Throws DataError when
/// rows exist but none has a geometry.
std::string to_geojson(const ResultSet& rs);

/// Writes to_geojson(rs) to `path`. Throws DataError on I/O failure.
void export_geojson(const ResultSet& rs, const std::filesystem::path& path);

}  // namespace mobkit::workbench
