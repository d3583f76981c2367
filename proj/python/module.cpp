#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mobkit/rtree.hpp"
#include "mobkit/text_io.hpp"
#include "mobkit/workbench/eval.hpp"
#include "mobkit/workbench/geojson.hpp"
#include "mobkit/workbench/queries.hpp"
#include "mobkit/workbench/tables.hpp"

namespace py = pybind11;
using namespace mobkit;
using namespace mobkit::workbench;

namespace {

py::object cell_object(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return py::none();
  if (const auto* i = std::get_if<std::int64_t>(&c)) return py::int_(*i);
  if (const auto* d = std::get_if<double>(&c)) return py::float_(*d);
  return py::str(cell_text(c));
}

py::tuple result_tuple(const ResultSet& rs) {
  py::list rows;
  for (const auto& row : rs.rows) {
    py::tuple t(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) t[i] = cell_object(row[i]);
    rows.append(t);
  }
  return py::make_tuple(rs.columns, rows);
}

QueryId query_id(const std::string& name) {
  auto id = query_from_name(name);
  if (!id) throw py::value_error("unknown query '" + name + "'");
  return *id;
}

ResultSet named_result(const Database& db, const std::string& name, bool use_index) {
  if (name == "regions") return region_layer(db);
  return run_query(query_id(name), db, {.use_index = use_index}).result;
}

STBox stbox_of(const std::string& text) { return parse(text, TypeTag::stbox).as<STBox>(); }

}  // namespace

PYBIND11_MODULE(_mobkit, m) {
  m.doc() = "Temporal and spatiotemporal types, an R-tree, and a BerlinMOD-style query workbench";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<InvalidValue>(m, "InvalidValue", error);
  py::register_exception<SridMismatch>(m, "SridMismatch", error);
  py::register_exception<DataError>(m, "DataError", error);
  py::register_exception<EvalError>(m, "EvalError", error);

  m.def(
      "eval",
      [](const std::string& expr) -> py::object {
        auto r = eval_expression(expr);
        if (!r) return py::none();
        return py::str(format_result(r));
      },
      py::arg("expr"), "Evaluates one expression; returns its text form, or None for NULL.");

  m.def(
      "normalize",
      [](const std::string& text, const std::string& type) {
        auto tag = tag_from_name(type);
        if (!tag) throw py::value_error("unknown type '" + type + "'");
        return serialize_ewkt(parse(text, *tag));
      },
      py::arg("text"), py::arg("type"), "Parses a literal of the named type and prints it canonically.");

  py::class_<RTree>(m, "RTree")
      .def(py::init([](std::size_t max_entries) { return RTree(RTreeConfig{max_entries, 0}); }),
           py::arg("max_entries") = 64)
      .def(
          "insert", [](RTree& t, const std::string& box, RowId row) { t.insert(stbox_of(box), row); }, py::arg("box"),
          py::arg("row"))
      .def(
          "search",
          [](const RTree& t, const std::string& box) {
            auto rows = t.search(stbox_of(box));
            std::sort(rows.begin(), rows.end());
            return rows;
          },
          py::arg("box"), "Sorted row ids whose boxes overlap `box`.")
      .def("audit", [](const RTree& t) { return t.audit().ok; })
      .def_property_readonly("depth", &RTree::depth)
      .def("__len__", &RTree::size);

  py::class_<Database>(m, "Database")
      .def_static(
          "synthetic",
          [](std::size_t vehicles, std::size_t trips, std::uint64_t seed) {
            return generate_trips({.vehicles = vehicles, .trips = trips, .seed = seed});
          },
          py::arg("vehicles") = 20, py::arg("trips") = 50, py::arg("seed") = 1)
      .def_static("load", &load_database, py::arg("path"))
      .def("save", [](const Database& db, const std::filesystem::path& p) { save_database(db, p); }, py::arg("path"))
      .def("build_index", &Database::build_trip_index, py::arg("workers") = 1)
      .def_property_readonly("trip_count", [](const Database& db) { return db.trips.size(); })
      .def_property_readonly("has_index", [](const Database& db) { return db.trip_index.has_value(); })
      .def(
          "query",
          [](const Database& db, const std::string& id, bool use_index, std::size_t workers) {
            QueryId qid = query_id(id);
            ResultSet rs;
            {
              py::gil_scoped_release release;
              rs = run_query(qid, db, {.use_index = use_index, .workers = workers}).result;
            }
            return result_tuple(rs);
          },
          py::arg("id"), py::arg("use_index") = false, py::arg("workers") = 1,
          "Runs Q3, Q5, Q5opt, Q7 or Q10; returns (columns, rows).")
      .def("region_report", [](const Database& db) { return result_tuple(region_report(db)); })
      .def(
          "geojson",
          [](const Database& db, const std::string& query, bool use_index) {
            return to_geojson(named_result(db, query, use_index));
          },
          py::arg("query"), py::arg("use_index") = false,
          "GeoJSON FeatureCollection text for a query id or 'regions'.")
      .def(
          "export_geojson",
          [](const Database& db, const std::string& query, const std::filesystem::path& path, bool use_index) {
            export_geojson(named_result(db, query, use_index), path);
          },
          py::arg("query"), py::arg("path"), py::arg("use_index") = false);
}
