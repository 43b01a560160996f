#include "cellmorph/errors.hpp"
#include "cellmorph/mask_io.hpp"
#include "cellmorph/morphometry.hpp"
#include "cellmorph/pairing.hpp"
#include "cellmorph/pipeline.hpp"
#include "cellmorph/stats.hpp"
#include "cellmorph/tessellation.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace cellmorph;

namespace {

using LabelArray = py::array_t<Label, py::array::c_style | py::array::forcecast>;

LabelMask mask_from_array(const LabelArray& a, Channel channel, double pitch) {
    if (a.ndim() != 2) throw DimensionMismatchError("label array must be 2-D");
    const auto h = static_cast<int>(a.shape(0));
    const auto w = static_cast<int>(a.shape(1));
    std::vector<Label> labels(a.data(), a.data() + a.size());
    return LabelMask(w, h, std::move(labels), channel, PixelScale::from_pitch(pitch));
}

LabelArray mask_to_array(const LabelMask& m) {
    LabelArray out({m.height(), m.width()});
    std::memcpy(out.mutable_data(), m.data().data(), m.pixel_count() * sizeof(Label));
    return out;
}

std::vector<Point> points_from(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw GeometryError("points must have shape (n, 2)");
    std::vector<Point> pts(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {a.at(i, 0), a.at(i, 1)};
    return pts;
}

py::tuple as_tuple(const Point& p) { return py::make_tuple(p.x, p.y); }

}  // namespace

PYBIND11_MODULE(_cellmorph, m) {
    m.doc() = "Morphometry of segmented cell and nucleus masks";
    m.attr("__version__") = CELLMORPH_VERSION;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidScaleError>(m, "InvalidScaleError", base);
    py::register_exception<MaskFormatError>(m, "MaskFormatError", base);
    py::register_exception<DimensionMismatchError>(m, "DimensionMismatchError", base);
    py::register_exception<NotFoundError>(m, "NotFoundError", base);
    py::register_exception<GeometryError>(m, "GeometryError", base);
    py::register_exception<StatsError>(m, "StatsError", base);
    py::register_exception<IoError>(m, "IoError", base);
    py::register_exception<ConfigError>(m, "ConfigError", base);

    py::enum_<Channel>(m, "Channel")
        .value("cytoplasm", Channel::cytoplasm)
        .value("nuclei", Channel::nuclei);

    py::class_<PixelScale>(m, "PixelScale")
        .def_readonly("pitch", &PixelScale::pitch)
        .def_readonly("area_per_px", &PixelScale::area_per_px)
        .def_static("from_pitch", &PixelScale::from_pitch, py::arg("pitch_um"))
        .def("__repr__", [](const PixelScale& s) {
            return "PixelScale(pitch=" + std::to_string(s.pitch) + ")";
        });
    m.def("derive_scale", &derive_scale, py::arg("scanned_area_mm2"), py::arg("width"),
          py::arg("height"));

    py::class_<LabelMask>(m, "LabelMask")
        .def(py::init(&mask_from_array), py::arg("labels"), py::arg("channel"),
             py::arg("pitch") = 0.625)
        .def_property_readonly("width", &LabelMask::width)
        .def_property_readonly("height", &LabelMask::height)
        .def_property_readonly("channel", &LabelMask::channel)
        .def_property_readonly("scale", &LabelMask::scale)
        .def("labels", &LabelMask::labels)
        .def("to_numpy", &mask_to_array);

    m.def(
        "load_mask",
        [](const std::filesystem::path& path, Channel channel, double pitch, bool strict) {
            return load_label_mask(path, channel, PixelScale::from_pitch(pitch),
                                   LoadOptions{strict});
        },
        py::arg("path"), py::arg("channel"), py::arg("pitch") = 0.625,
        py::arg("strict_labels") = false);
    m.def(
        "label_components",
        [](const LabelArray& grid) {
            if (grid.ndim() != 2) throw DimensionMismatchError("grid must be 2-D");
            const auto h = static_cast<int>(grid.shape(0));
            const auto w = static_cast<int>(grid.shape(1));
            auto out = label_components(w, h, {grid.data(), static_cast<std::size_t>(grid.size())});
            LabelArray a({h, w});
            std::memcpy(a.mutable_data(), out.data(), out.size() * sizeof(Label));
            return a;
        },
        py::arg("grid"));

    py::class_<SubjectFeatures>(m, "SubjectFeatures")
        .def_readonly("label", &SubjectFeatures::label)
        .def_readonly("area_px", &SubjectFeatures::area_px)
        .def_readonly("area_um2", &SubjectFeatures::area_um2)
        .def_readonly("perimeter_um", &SubjectFeatures::perimeter_um)
        .def_readonly("roundness", &SubjectFeatures::roundness)
        .def_property_readonly("centroid_px",
                               [](const SubjectFeatures& f) { return as_tuple(f.centroid_px); })
        .def_property_readonly("centroid_um",
                               [](const SubjectFeatures& f) { return as_tuple(f.centroid_um); })
        .def_readonly("boundary_touching", &SubjectFeatures::boundary_touching)
        .def_readonly("small", &SubjectFeatures::small)
        .def_readonly("roundness_clamped", &SubjectFeatures::roundness_clamped)
        .def_readonly("components", &SubjectFeatures::components);

    m.def(
        "compute_features",
        [](const LabelMask& mask, std::size_t min_size) {
            FeatureOptions o;
            o.min_subject_px = min_size;
            return compute_all_features(mask, o);
        },
        py::arg("mask"), py::arg("min_size") = 5);
    m.def("roundness", &roundness, py::arg("area"), py::arg("perimeter"));

    py::class_<CellNucleusPair>(m, "CellNucleusPair")
        .def_readonly("cell_label", &CellNucleusPair::cell_label)
        .def_readonly("nucleus_label", &CellNucleusPair::nucleus_label)
        .def_readonly("cell_area_um2", &CellNucleusPair::cell_area_um2)
        .def_readonly("nucleus_area_um2", &CellNucleusPair::nucleus_area_um2)
        .def_readonly("ratio", &CellNucleusPair::ratio)
        .def_readonly("overlap_px", &CellNucleusPair::overlap_px)
        .def_readonly("multi_nucleate", &CellNucleusPair::multi_nucleate);
    py::class_<PairingResult>(m, "PairingResult")
        .def_readonly("pairs", &PairingResult::pairs)
        .def_readonly("unpaired_nuclei", &PairingResult::unpaired_nuclei)
        .def_readonly("unpaired_cells", &PairingResult::unpaired_cells);
    m.def("pair_subjects", &pair_subjects, py::arg("cells"), py::arg("nuclei"));

    py::class_<Tessellation>(m, "Tessellation")
        .def_property_readonly("polygons",
                               [](const Tessellation& t) {
                                   py::list out;
                                   for (const auto& poly : t.polygons) {
                                       py::list verts;
                                       for (const auto& p : poly) verts.append(as_tuple(p));
                                       out.append(verts);
                                   }
                                   return out;
                               })
        .def_readonly("neighbors", &Tessellation::neighbors)
        .def_readonly("neighbor_counts", &Tessellation::neighbor_counts)
        .def_readonly("interior", &Tessellation::interior)
        .def_readonly("triangles", &Tessellation::triangles);
    m.def(
        "build_voronoi",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& seeds,
           std::array<double, 4> bounds) {
            const auto pts = points_from(seeds);
            return build_voronoi(pts, Rect{bounds[0], bounds[1], bounds[2], bounds[3]});
        },
        py::arg("seeds"), py::arg("bounds"),
        "Bounded Voronoi diagram; bounds is (x0, y0, x1, y1).");
    m.def(
        "voronoi_entropy",
        [](const Tessellation& t) {
            const auto e = voronoi_entropy(t);
            return py::make_tuple(e.entropy, e.histogram.counts, e.low_confidence);
        },
        py::arg("tessellation"), "Returns (entropy or None, class counts, low_confidence).");
    m.def(
        "polygon_csm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& v) {
            return polygon_csm(points_from(v)).csm;
        },
        py::arg("vertices"));
    m.def(
        "image_csm",
        [](const Tessellation& t) {
            const auto r = image_csm(t);
            return py::make_tuple(r.value, r.polygons, r.low_confidence);
        },
        py::arg("tessellation"), "Returns (mean csm or None, polygons used, low_confidence).");

    m.def("f_cdf", &f_cdf, py::arg("x"), py::arg("d1"), py::arg("d2"));
    py::class_<AnovaResult>(m, "AnovaResult")
        .def_readonly("f_stat", &AnovaResult::f_stat)
        .def_readonly("df_between", &AnovaResult::df_between)
        .def_readonly("df_within", &AnovaResult::df_within)
        .def_readonly("p_value", &AnovaResult::p_value)
        .def_readonly("group_means", &AnovaResult::group_means)
        .def_readonly("grand_mean", &AnovaResult::grand_mean);
    m.def("one_way_anova", &one_way_anova, py::arg("groups"));

    py::class_<RunSummary>(m, "RunSummary")
        .def_readonly("exit_code", &RunSummary::exit_code)
        .def_readonly("images_total", &RunSummary::images_total)
        .def_readonly("images_processed", &RunSummary::images_processed)
        .def_readonly("warnings", &RunSummary::warnings)
        .def_readonly("log", &RunSummary::log)
        .def_readonly("error", &RunSummary::error);
    m.def(
        "analyze",
        [](const std::filesystem::path& root, const std::filesystem::path& out,
           std::optional<std::filesystem::path> config, std::map<std::string, std::string> overrides) {
            RunConfig c;
            if (config) c = load_config(*config);
            if (!overrides.empty()) c = validate_config(overrides, c);
            c.root = root;
            c.out = out;
            py::gil_scoped_release release;
            return run_batch(c);
        },
        py::arg("root"), py::arg("out"), py::arg("config") = py::none(),
        py::arg("overrides") = std::map<std::string, std::string>{},
        "Runs the batch pipeline. `overrides` takes config keys such as pitch or jobs.");
}
