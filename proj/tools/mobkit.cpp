#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "mobkit/error.hpp"
#include "mobkit/text_io.hpp"
#include "mobkit/workbench/eval.hpp"
#include "mobkit/workbench/geojson.hpp"
#include "mobkit/workbench/queries.hpp"
#include "mobkit/workbench/tables.hpp"

namespace wb = mobkit::workbench;

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wb::DataError("cannot open " + path);
  return in;
}

wb::Database load_or_empty(const std::string& dir) {
  if (std::filesystem::is_directory(dir)) return wb::load_database(dir);
  return {};
}

wb::QueryId query_id(const std::string& name) {
  auto id = wb::query_from_name(name);
  if (!id) throw CLI::ValidationError("--id", "unknown query '" + name + "' (Q3, Q5, Q5opt, Q7, Q10)");
  return *id;
}

void emit(const wb::ResultSet& rs, const std::string& out) {
  if (out.empty()) {
    wb::write_csv(std::cout, rs);
    return;
  }
  std::ofstream f(out);
  if (!f) throw wb::DataError("cannot write " + out);
  wb::write_csv(f, rs);
}

void print_report(const wb::BenchReport& r) {
  std::cerr << r.query_id << " " << r.variant << ": " << r.rows << " rows in "
            << static_cast<double>(r.wall_ns) / 1e6 << " ms (" << r.scale << ", " << r.workers << " workers)\n";
}

// Caret line under the failing offset of a parse error.
void print_parse_error(const std::string& text, const mobkit::ParseError& e) {
  std::cerr << "error: " << e.bare_message() << " at offset " << e.offset() << "\n  " << text << "\n  "
            << std::string(std::min(e.offset(), text.size()), ' ') << "^\n";
}

struct BenchRow {
  wb::BenchReport report;
  std::int64_t min_ns;
  std::int64_t mean_ns;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal and spatiotemporal types, an R-tree over stboxes, and a benchmark workbench"};
  app.require_subcommand(1);
  std::string db_dir = "mobility_db";
  app.add_option("--db", db_dir, "Workspace directory")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate an expression and print the result");
  std::string expr;
  eval->add_option("expr", expr, "Expression, e.g. duration('{1@2025-01-01, 2@2025-01-02}'::tint, true)")->required();

  auto* ingest = app.add_subcommand("ingest", "Load observation files into the workspace");
  std::string trips_file, vehicles_file, instants_file, points_file, regions_file;
  std::optional<std::int32_t> srid;
  ingest->add_option("--trips", trips_file, "CSV: vehicle_id,trip_id,x,y,t")->required();
  ingest->add_option("--vehicles", vehicles_file, "CSV: vehicle_id,license,vehicle_type");
  ingest->add_option("--instants", instants_file, "CSV: instant_id,instant");
  ingest->add_option("--points", points_file, "CSV: point_id,x,y");
  ingest->add_option("--regions", regions_file, "TSV: name<TAB>geom");
  ingest->add_option("--srid", srid, "SRID of the coordinates");

  auto* synth = app.add_subcommand("synth", "Generate synthetic tables");
  std::optional<std::size_t> rows;
  std::size_t vehicles = 20, trips = 50;
  std::uint64_t seed = 1;
  synth->add_option("--rows", rows, "Box-table rows (box i spans [i, i+0.5]^2)");
  auto* veh_opt = synth->add_option("--vehicles", vehicles, "Vehicles")->capture_default_str();
  auto* trip_opt = synth->add_option("--trips", trips, "Trips")->capture_default_str();
  synth->add_option("--seed", seed, "Seed")->capture_default_str();

  auto* index = app.add_subcommand("index", "Index management");
  index->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Build R-trees over trips and boxes");
  std::size_t workers = 1;
  index_build->add_option("--workers", workers, "Bulk-build workers")->capture_default_str();

  auto* query = app.add_subcommand("query", "Run a benchmark query");
  std::string id_name, out;
  bool use_index = false;
  query->add_option("--id", id_name, "Q3, Q5, Q5opt, Q7 or Q10")->required();
  query->add_flag("--use-index", use_index, "Route && through the R-tree");
  query->add_option("--out", out, "CSV output file (default stdout)");
  query->add_option("--workers", workers, "Worker threads")->capture_default_str();

  auto* report = app.add_subcommand("report", "Per-region travelled distance");
  report->add_option("--out", out, "CSV output file (default stdout)");

  auto* bench = app.add_subcommand("bench", "Time every query variant");
  bool all = false;
  std::size_t repeat = 5;
  bench->add_flag("--all", all, "Run every query")->required();
  bench->add_option("--repeat", repeat, "Runs per variant")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--out", out, "CSV output file");
  bench->add_option("--workers", workers, "Worker threads")->capture_default_str();

  auto* scan = app.add_subcommand("scan", "Overlap query against the box table");
  std::string stbox_text;
  scan->add_option("--stbox", stbox_text, "Query box literal")->required();
  scan->add_flag("--use-index", use_index, "Use the box R-tree");
  scan->add_option("--out", out, "CSV output file (default stdout)");

  auto* exp = app.add_subcommand("export", "Export results");
  exp->require_subcommand(1);
  auto* geojson = exp->add_subcommand("geojson", "Export a query result as GeoJSON");
  geojson->add_option("--query", id_name, "Q3, Q5, Q5opt, Q7, Q10 or regions")->required();
  geojson->add_option("--out", out, "Output path")->required();
  geojson->add_flag("--use-index", use_index, "Route && through the R-tree");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*eval) {
      try {
        std::cout << wb::format_result(wb::eval_expression(expr)) << '\n';
      } catch (const mobkit::ParseError& e) {
        print_parse_error(expr, e);
        return kDataError;
      }
    } else if (*ingest) {
      wb::Database db = load_or_empty(db_dir);
      auto in = open_input(trips_file);
      db.trips = wb::ingest_trips(in, srid);
      if (!vehicles_file.empty()) {
        auto vin = open_input(vehicles_file);
        db.vehicles = wb::ingest_vehicles(vin);
      } else {
        std::map<std::int64_t, bool> ids;
        for (const auto& t : db.trips) ids[t.vehicle_id] = true;
        db.vehicles.clear();
        for (const auto& [vid, _] : ids) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "B-%04lld", static_cast<long long>(vid));
          db.vehicles.push_back({vid, buf, "passenger"});
        }
      }
      wb::derive_license_samples(db);
      if (!instants_file.empty()) {
        auto iin = open_input(instants_file);
        db.instants1 = wb::ingest_instants(iin);
      }
      if (!points_file.empty()) {
        auto pin = open_input(points_file);
        db.points1 = wb::ingest_points(pin, srid);
      }
      if (!regions_file.empty()) {
        auto rin = open_input(regions_file);
        db.regions = wb::ingest_regions(rin);
      }
      db.trip_index.reset();
      wb::save_database(db, db_dir);
      std::size_t instants = 0;
      for (const auto& t : db.trips) instants += t.trip.instants().size();
      std::cout << "loaded " << db.trips.size() << " trips (" << instants << " instants) from "
                << db.vehicles.size() << " vehicles into " << db_dir << '\n';
    } else if (*synth) {
      bool want_trips = veh_opt->count() > 0 || trip_opt->count() > 0 || !rows;
      wb::Database db = load_or_empty(db_dir);
      if (rows) {
        if (*rows == 0) throw CLI::ValidationError("--rows", "must be at least 1");
        db.boxes = wb::generate_boxes(*rows);
        db.box_index.reset();
      }
      if (want_trips) {
        auto boxes = std::move(db.boxes);
        db = wb::generate_trips({vehicles, trips, seed});
        db.boxes = std::move(boxes);
      }
      wb::save_database(db, db_dir);
      std::cout << "workspace " << db_dir << ": " << db.trips.size() << " trips, " << db.vehicles.size()
                << " vehicles, " << db.boxes.size() << " boxes\n";
    } else if (*index_build) {
      wb::Database db = wb::load_database(db_dir);
      if (db.trips.empty() && db.boxes.empty()) throw wb::DataError("nothing to index; run ingest or synth first");
      auto start = std::chrono::steady_clock::now();
      if (!db.trips.empty()) db.build_trip_index(workers);
      if (!db.boxes.empty()) db.build_box_index(workers);
      auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      wb::save_database(db, db_dir);
      std::cout << "indexed " << db.trips.size() << " trips and " << db.boxes.size() << " boxes in " << ms
                << " ms\n";
    } else if (*query) {
      wb::Database db = wb::load_database(db_dir);
      auto r = wb::run_query(query_id(id_name), db, {use_index, workers});
      emit(r.result, out);
      print_report(r.report);
    } else if (*report) {
      emit(wb::region_report(wb::load_database(db_dir)), out);
    } else if (*bench) {
      wb::Database db = wb::load_database(db_dir);
      if (!db.trip_index) db.build_trip_index();
      std::vector<std::pair<wb::QueryId, bool>> plan = {
          {wb::QueryId::q3, false},  {wb::QueryId::q3, true},  {wb::QueryId::q5, false}, {wb::QueryId::q5opt, false},
          {wb::QueryId::q7, false},  {wb::QueryId::q7, true},  {wb::QueryId::q10, false}, {wb::QueryId::q10, true}};
      std::vector<BenchRow> results;
      for (auto [id, indexed] : plan) {
        BenchRow row{};
        std::int64_t total = 0;
        row.min_ns = INT64_MAX;
        for (std::size_t k = 0; k < repeat; ++k) {
          auto r = wb::run_query(id, db, {indexed, workers});
          if (k > 0 && r.report.rows != row.report.rows)
            throw wb::DataError("row count changed between runs of " + r.report.query_id);
          row.report = r.report;
          total += r.report.wall_ns;
          row.min_ns = std::min(row.min_ns, r.report.wall_ns);
        }
        row.mean_ns = total / static_cast<std::int64_t>(repeat);
        results.push_back(row);
      }
      auto write = [&](std::ostream& os) {
        os << "query,variant,scale,workers,rows,repeat,mean_ns,min_ns\n";
        for (const auto& r : results)
          os << r.report.query_id << ',' << r.report.variant << ',' << r.report.scale << ',' << r.report.workers
             << ',' << r.report.rows << ',' << repeat << ',' << r.mean_ns << ',' << r.min_ns << '\n';
      };
      if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw wb::DataError("cannot write " + out);
        write(f);
      }
      std::printf("%-6s %-10s %8s %14s %14s\n", "query", "variant", "rows", "mean ms", "min ms");
      for (const auto& r : results)
        std::printf("%-6s %-10s %8zu %14.3f %14.3f\n", r.report.query_id.c_str(), r.report.variant.c_str(),
                    r.report.rows, static_cast<double>(r.mean_ns) / 1e6, static_cast<double>(r.min_ns) / 1e6);
    } else if (*scan) {
      wb::Database db = wb::load_database(db_dir);
      if (db.boxes.empty()) throw wb::DataError("box table is empty; run synth --rows N first");
      mobkit::STBox q = [&] {
        try {
          return mobkit::parse(stbox_text, mobkit::TypeTag::stbox).as<mobkit::STBox>();
        } catch (const mobkit::ParseError& e) {
          print_parse_error(stbox_text, e);
          throw;
        }
      }();
      auto start = std::chrono::steady_clock::now();
      auto rs = wb::box_scan(db, q, use_index);
      auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
      emit(rs, out);
      std::cerr << (use_index ? "index" : "sequential") << " scan: " << rs.rows.size() << " rows of "
                << db.boxes.size() << " in " << static_cast<double>(ns) / 1e6 << " ms\n";
    } else if (*geojson) {
      wb::Database db = wb::load_database(db_dir);
      wb::ResultSet rs = id_name == "regions" ? wb::region_layer(db)
                                              : wb::run_query(query_id(id_name), db, {use_index, 1}).result;
      wb::export_geojson(rs, out);
      std::cout << "wrote " << rs.rows.size() << " features to " << out << '\n';
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const mobkit::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const mobkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
