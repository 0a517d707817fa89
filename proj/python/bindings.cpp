// Python bindings for the core operations. Score files cross the boundary as
// lists of (sample_id, score) pairs; arrays as lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dfdetect/checkpoint.hpp"
#include "dfdetect/error.hpp"
#include "dfdetect/fusion.hpp"
#include "dfdetect/manifest.hpp"
#include "dfdetect/metrics.hpp"
#include "dfdetect/model.hpp"
#include "dfdetect/synth.hpp"
#include "dfdetect/trainer.hpp"

namespace py = pybind11;
using namespace dfdetect;

namespace {

ScoreSet to_score_set(const std::string& model_id, const std::vector<std::pair<std::string, double>>& rows) {
  std::vector<ScoreEntry> entries;
  entries.reserve(rows.size());
  for (const auto& [id, s] : rows) entries.push_back({id, s});
  return ScoreSet(model_id, std::move(entries));
}

std::vector<std::pair<std::string, double>> to_rows(const ScoreSet& set) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& e : set.entries()) out.emplace_back(e.sample_id, e.score);
  return out;
}

py::dict record_dict(const SampleRecord& r) {
  py::dict d;
  d["sample_id"] = r.sample_id;
  d["label"] = std::string(to_string(r.label));
  d["split"] = std::string(to_string(r.split));
  if (const auto* v = std::get_if<std::vector<double>>(&r.source)) d["inline"] = *v;
  else d["path"] = std::get<std::filesystem::path>(r.source).string();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Real-vs-fake classifier toolkit: metrics, fusion, loss, toy models and synthetic data";

  // Library errors surface as dfdetect.Error (a ValueError) with a `code`
  // attribute holding the dotted reason code.
  static PyObject* error_type = PyErr_NewException("dfdetect.Error", PyExc_ValueError, nullptr);
  m.add_object("Error", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.code() + ": " + e.what());
      exc.attr("code") = e.code();
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  // data_ingest
  m.def("class_weight", &class_weight, py::arg("n_real"), py::arg("n_fake"));

  py::class_<DatasetManifest>(m, "Manifest")
      .def("__len__", &DatasetManifest::size)
      .def(
          "count",
          [](const DatasetManifest& man, const std::string& split, const std::optional<std::string>& label) {
            return label ? man.count(parse_split(split), parse_label(*label)) : man.count(parse_split(split));
          },
          py::arg("split"), py::arg("label") = py::none())
      .def("records",
           [](const DatasetManifest& man) {
             py::list out;
             for (const auto& r : man.records()) out.append(record_dict(r));
             return out;
           })
      .def("save", [](const DatasetManifest& man, const std::filesystem::path& p) { save_manifest(p, man); });

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def(
      "synth_dataset",
      [](std::uint64_t seed, std::size_t n_real, std::size_t n_fake, std::size_t dim, double separation,
         double label_noise) {
        SynthConfig c;
        c.seed = seed;
        c.n_real = n_real;
        c.n_fake = n_fake;
        c.dim = dim;
        c.separation = separation;
        c.label_noise = label_noise;
        return synth_dataset(c);
      },
      py::arg("seed") = 0, py::arg("n_real") = 500, py::arg("n_fake") = 500, py::arg("dim") = 8,
      py::arg("separation") = 6.0, py::arg("label_noise") = 0.0);

  // model_core
  py::class_<ClassifierModel>(m, "Model")
      .def_property_readonly("model_id", &ClassifierModel::model_id)
      .def_property_readonly("input_size", &ClassifierModel::input_size)
      .def("count_params", [](const ClassifierModel& mod, bool trainable_only) { return count_params(mod, trainable_only); },
           py::arg("trainable_only") = false)
      .def("forward",
           [](const ClassifierModel& mod, const std::vector<std::vector<double>>& batch) { return forward(mod, batch); })
      .def("save", [](const ClassifierModel& mod, const std::filesystem::path& p) { save_checkpoint(p, mod); });

  m.def(
      "build_model",
      [](const std::string& kind, std::vector<std::size_t> input_shape, std::size_t embed_dim, std::size_t head_hidden,
         std::uint64_t seed, bool trainable_backbone, const std::string& model_id) {
        if (input_shape.size() != 3) throw py::value_error("input_shape must be (height, width, channels)");
        BackboneSpec spec;
        spec.kind = parse_backbone_kind(kind);
        spec.input_shape = {input_shape[0], input_shape[1], input_shape[2]};
        spec.embed_dim = embed_dim;
        spec.seed = seed;
        spec.trainable = trainable_backbone;
        return build_model(spec, head_hidden, seed, model_id);
      },
      py::arg("kind") = "toy_mlp", py::arg("input_shape") = std::vector<std::size_t>{1, 1, 8},
      py::arg("embed_dim") = 16, py::arg("head_hidden") = 256, py::arg("seed") = 0,
      py::arg("trainable_backbone") = true, py::arg("model_id") = "model");
  m.def("load_checkpoint", [](const std::filesystem::path& p) { return load_checkpoint(p).model; });
  m.def("sigmoid", &sigmoid);

  // trainer
  m.def("weighted_bce",
        [](const std::vector<double>& s, const std::vector<int>& y, double w) { return weighted_bce(s, y, w); },
        py::arg("scores"), py::arg("labels"), py::arg("w_real") = 1.0);

  // metrics_eval
  m.def("roc_curve", [](const std::vector<double>& s, const std::vector<int>& y) {
    std::vector<std::tuple<double, double, double>> out;
    for (const auto& p : roc_curve(s, y).points) out.emplace_back(p.fpr, p.tpr, p.threshold);
    return out;
  });
  m.def("auc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc(roc_curve(s, y)); });
  m.def("eer", [](const std::vector<double>& s, const std::vector<int>& y) { return eer(roc_curve(s, y)); });
  m.def("f1_per_class", [](const std::vector<int>& pred, const std::vector<int>& truth) {
    const auto f = f1_per_class(pred, truth);
    return std::make_pair(f.real, f.fake);
  });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("model_id", &EvalReport::model_id)
      .def_readonly("f1_real", &EvalReport::f1_real)
      .def_readonly("f1_fake", &EvalReport::f1_fake)
      .def_readonly("accuracy", &EvalReport::accuracy)
      .def_readonly("eer", &EvalReport::eer)
      .def_readonly("auc", &EvalReport::auc)
      .def_readonly("threshold", &EvalReport::threshold)
      .def_readonly("n_real", &EvalReport::n_real)
      .def_readonly("n_fake", &EvalReport::n_fake)
      .def_readonly("warnings", &EvalReport::warnings)
      .def_property_readonly("confusion",
                             [](const EvalReport& r) {
                               py::dict d;
                               d["tp"] = r.confusion.tp;
                               d["fp"] = r.confusion.fp;
                               d["tn"] = r.confusion.tn;
                               d["fn"] = r.confusion.fn;
                               return d;
                             })
      .def("render", &render_report)
      .def("table_row", [](const EvalReport& r, const std::string& name) { return render_table_row(name, r); });

  m.def("evaluate",
        [](const std::vector<double>& s, const std::vector<int>& y, double t) { return evaluate(s, y, t); },
        py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);

  // ensemble_fusion
  m.def(
      "fuse",
      [](const std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>>& members) {
        std::vector<ScoreSet> sets;
        for (const auto& [id, rows] : members) sets.push_back(to_score_set(id, rows));
        const auto f = fuse(sets);
        return std::make_pair(f.member_ids, to_rows(f.scores));
      },
      py::arg("members"),
      "members: list of (model_id, [(sample_id, score), ...]); returns (member_ids, [(sample_id, score), ...])");
  m.def(
      "classify",
      [](const std::vector<std::pair<std::string, double>>& rows, double t) {
        return classify(to_score_set("scores", rows), t);
      },
      py::arg("scores"), py::arg("threshold") = 0.5);
}
