#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "mobkit/box.hpp"
#include "mobkit/geometry.hpp"
#include "mobkit/rtree.hpp"
#include "mobkit/tgeo.hpp"

namespace mobkit::workbench {

/// Malformed input data. `line()` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(const std::string& message, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct TripRow {
  std::int64_t vehicle_id;
  std::int64_t trip_id;
  TGeomPoint trip;
  /// trajectory(trip), cached at load time.
  Geometry traj;
};

struct VehicleRow {
  std::int64_t vehicle_id;
  std::string license;
  std::string vehicle_type;
};

struct LicenseRow {
  std::int64_t license_id;
  std::string license;
  std::int64_t vehicle_id;
};

struct InstantRow {
  std::int64_t instant_id;
  Timestamp instant;
};

struct PointRow {
  std::int64_t point_id;
  Geometry geom;
};

struct RegionRow {
  std::string name;
  Geometry polygon;
};

/// Row of the box-index test table: a timestamp and a spatial box.
struct BoxRow {
  Timestamp times;
  STBox box;
};

/// Everything the queries read. Trip row ids in `trip_index` are positions
/// in `trips`.
struct Database {
  std::vector<TripRow> trips;
  std::vector<VehicleRow> vehicles;
  std::vector<LicenseRow> licenses1;
  std::vector<LicenseRow> licenses2;
  std::vector<InstantRow> instants1;
  std::vector<PointRow> points1;
  std::vector<RegionRow> regions;
  std::vector<BoxRow> boxes;
  std::optional<RTree> trip_index;
  std::optional<RTree> box_index;

  /// Builds the R-tree over to_stbox(trip) for every trip.
  void build_trip_index(std::size_t workers = 1);
  /// Builds the R-tree over the box table.
  void build_box_index(std::size_t workers = 1);
};

/// Observation file: header `vehicle_id,trip_id,x,y,t`, one point per line.
/// Rows may come in any order; each (vehicle, trip) becomes one linear
/// sequence. Throws DataError with the line number of a bad row and on a
/// repeated timestamp within a trip. Output is ordered by (vehicle, trip).
std::vector<TripRow> ingest_trips(std::istream& in, Srid srid = std::nullopt);

/// Vehicle file: header `vehicle_id,license,vehicle_type`.
std::vector<VehicleRow> ingest_vehicles(std::istream& in);

/// Instant file: header `instant_id,instant`. Keeps the 10 lowest ids.
std::vector<InstantRow> ingest_instants(std::istream& in);

/// Point file: header `point_id,x,y`. Keeps the 10 lowest ids.
std::vector<PointRow> ingest_points(std::istream& in, Srid srid = std::nullopt);

/// Region file, tab-separated: header `name<TAB>geom`, geometry as (E)WKT.
std::vector<RegionRow> ingest_regions(std::istream& in);

/// Licenses1 is the first 10 vehicles by id, Licenses2 the next 10.
void derive_license_samples(Database& db);

/// Writes observations back in the ingest format, one line per instant.
void write_observations(std::ostream& out, const std::vector<TripRow>& trips);

/// Rows 1..rows: box i spans [i, i+0.5]^2 at 2025-08-11 12:00 + i minutes.
std::vector<BoxRow> generate_boxes(std::size_t rows);

struct SyntheticConfig {
  std::size_t vehicles = 20;
  std::size_t trips = 50;
  std::uint64_t seed = 1;
  /// Road grid: `grid` x `grid` nodes spaced `spacing` units apart.
  int grid = 6;
  double spacing = 100;
};

/// Deterministic trips on a road grid. Each vehicle has a home and a work
/// node and alternates home->work and work->home trips along Manhattan
/// routes, one trip per half-day, with short stops at some nodes. Also
/// fills vehicles, license samples, 10 instants, 10 grid-node points and
/// four quadrant regions.
Database generate_trips(const SyntheticConfig& config);

/// Tab-separated workspace directory holding every table in text form.
void save_database(const Database& db, const std::filesystem::path& dir);
Database load_database(const std::filesystem::path& dir);

}  // namespace mobkit::workbench
