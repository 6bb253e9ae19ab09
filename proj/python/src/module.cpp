#include "aia/dtcwt.hpp"
#include "aia/error.hpp"
#include "aia/evaluator.hpp"
#include "aia/feature_file.hpp"
#include "aia/highlevel.hpp"
#include "aia/leae.hpp"
#include "aia/lowlevel.hpp"
#include "aia/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;

namespace {

aia::RgbImage to_image(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected an H x W x 3 uint8 array");
  aia::RgbImage img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

py::dict feature_file_dict(const aia::FeatureFile& f) {
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(f.size()), f.dim);
  for (std::size_t i = 0; i < f.size(); ++i) vectors.row(static_cast<Eigen::Index>(i)) = f.vectors[i].transpose();
  py::dict d;
  d["source"] = f.source;
  d["metadata"] = f.metadata;
  d["dim"] = f.dim;
  d["ids"] = f.ids;
  d["vectors"] = vectors;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the automatic image annotation core";

  py::register_exception<aia::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<aia::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<aia::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<aia::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def("f_measure", &aia::f_measure, py::arg("precision"), py::arg("recall"));

  m.def(
      "logentropy_weights",
      [](const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& phi) { return aia::logentropy_weights(phi); },
      py::arg("phi"), "N x M equilibrium weights of a binary annotation matrix.");

  m.def(
      "dtcwt_round_trip",
      [](const Eigen::MatrixXd& image, int levels) { return aia::dtcwt_inverse(aia::dtcwt_forward(image, levels)); },
      py::arg("image"), py::arg("levels") = 4);

  m.def(
      "dtcwt_final_level",
      [](const Eigen::MatrixXd& image, int levels) { return aia::dtcwt_forward(image, levels).final_level_matrices(); },
      py::arg("image"), py::arg("levels") = 4,
      "The 16 real matrices of the coarsest level: two lowpass pairs then six highpass pairs.");

  m.def("svd_values", &aia::svd_values, py::arg("matrix"));

  m.def(
      "extract_lowlevel", [](const py::array_t<std::uint8_t>& rgb) { return aia::extract_lowlevel(to_image(rgb)).fused; },
      py::arg("rgb"), "Fused low-level descriptor of an H x W x 3 uint8 image with default settings.");

  m.def(
      "fallback_descriptor", [](const py::array_t<std::uint8_t>& rgb) { return aia::fallback_descriptor(to_image(rgb)).vector; },
      py::arg("rgb"));

  m.def(
      "read_feature_file", [](const std::filesystem::path& p) { return feature_file_dict(aia::read_feature_file(p)); },
      py::arg("path"));

  m.def(
      "write_feature_file",
      [](const std::filesystem::path& p, const std::string& source, const std::string& metadata,
         const std::vector<std::string>& ids, const Eigen::MatrixXd& vectors) {
        if (static_cast<std::size_t>(vectors.rows()) != ids.size()) throw py::value_error("one vector row per id");
        aia::FeatureFile f;
        f.source = source;
        f.metadata = metadata;
        f.dim = static_cast<std::uint32_t>(vectors.cols());
        f.ids = ids;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) f.vectors.emplace_back(vectors.row(i).transpose());
        aia::write_feature_file(f, p);
      },
      py::arg("path"), py::arg("source"), py::arg("metadata"), py::arg("ids"), py::arg("vectors"));

  m.def(
      "ingest_features",
      [](const std::filesystem::path& p) {
        const aia::HighLevelSet set = aia::ingest_features(p);
        py::dict d;
        d["source"] = aia::to_string(set.source);
        d["dim"] = set.dim;
        d["warnings"] = set.warnings;
        py::dict vectors;
        for (const auto& [id, desc] : set.descriptors) vectors[py::str(id)] = desc.vector;
        d["vectors"] = vectors;
        return d;
      },
      py::arg("path"), "High-level vectors of an exporter file keyed by image id.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = aia::run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one command-line invocation in-process; returns (exit code, stdout, stderr).");
}
