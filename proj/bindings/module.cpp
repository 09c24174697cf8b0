// Python bindings for the shapelab core: deterministic RNG, bit-vector
// stimuli, MLP training, generalization tests, and the statistics
// helpers. The image pipeline stays C++-side; the CLI covers it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapelab/models.hpp"
#include "shapelab/probes.hpp"
#include "shapelab/stats.hpp"
#include "shapelab/stimuli.hpp"

namespace py = pybind11;
using namespace shapelab;

PYBIND11_MODULE(_core, m) {
  m.doc() = "shapelab core: stimuli, models and statistics";

  py::register_exception<Error>(m, "ShapelabError", PyExc_RuntimeError);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("uniform_int", &Rng::uniform_int, py::arg("lo"), py::arg("hi"))
      .def("derive", &Rng::derive, py::arg("tag"))
      .def_property_readonly("seed", &Rng::seed);

  py::class_<Tensor>(m, "Tensor")
      .def_property_readonly("shape", &Tensor::shape)
      .def("size", &Tensor::size)
      .def("__len__", &Tensor::size)
      .def("__getitem__",
           [](const Tensor& t, int i) {
             if (i < 0 || i >= t.size()) throw py::index_error();
             return t[i];
           })
      .def("tolist", [](const Tensor& t) {
        std::vector<double> out(static_cast<std::size_t>(t.size()));
        for (int i = 0; i < t.size(); ++i) out[static_cast<std::size_t>(i)] = t[i];
        return out;
      });

  py::enum_<LabelAttribute>(m, "LabelAttribute")
      .value("SHAPE", LabelAttribute::kShape)
      .value("COLOR", LabelAttribute::kColor);

  py::class_<BitObject>(m, "BitObject")
      .def_readonly("label", &BitObject::label)
      .def_readonly("shape_id", &BitObject::shape_id)
      .def_readonly("color_id", &BitObject::color_id)
      .def_readonly("texture_id", &BitObject::texture_id)
      .def_readonly("shape_bits", &BitObject::shape_bits)
      .def_readonly("color_bits", &BitObject::color_bits)
      .def_readonly("texture_bits", &BitObject::texture_bits);

  py::class_<BitStimulusSet>(m, "BitStimulusSet")
      .def_readonly("n_categories", &BitStimulusSet::n_categories)
      .def_readonly("n_examples", &BitStimulusSet::n_examples)
      .def_readonly("items", &BitStimulusSet::items);

  m.def(
      "gen_bit_dataset",
      [](int n, int k, std::uint64_t seed, LabelAttribute label_attribute, bool allow_repeats) {
        DatasetOptions options;
        options.label_attribute = label_attribute;
        options.allow_repeats = allow_repeats;
        Rng rng = Rng(seed).derive(rng_stream::kData);
        return gen_bit_dataset(n, k, rng, options);
      },
      py::arg("n"), py::arg("k"), py::arg("seed"),
      py::arg("label_attribute") = LabelAttribute::kShape, py::arg("allow_repeats") = false);

  m.def("bit_features", &bit_features, py::arg("object"));
  m.def("bit_feature_rows", &bit_feature_rows, py::arg("objects"));

  py::class_<BitTrial>(m, "BitTrial");
  m.def("build_bit_trials", &build_bit_trials, py::arg("set"), py::arg("order"),
        py::arg("count"), py::arg("rng"));

  py::class_<MlpSpec>(m, "MlpSpec")
      .def(py::init<>())
      .def_readwrite("input_units", &MlpSpec::input_units)
      .def_readwrite("hidden_units", &MlpSpec::hidden_units)
      .def_readwrite("output_units", &MlpSpec::output_units)
      .def_readwrite("l2_coefficient", &MlpSpec::l2_coefficient);

  py::class_<Mlp>(m, "Mlp")
      .def(py::init<const MlpSpec&, Rng&>(), py::arg("spec"), py::arg("rng"))
      .def("hidden_activations", &Mlp::hidden_activations, py::arg("input"));

  py::class_<EpochStats>(m, "EpochStats")
      .def_readonly("epoch", &EpochStats::epoch)
      .def_readonly("loss", &EpochStats::loss)
      .def_readonly("data_loss", &EpochStats::data_loss)
      .def_readonly("train_accuracy", &EpochStats::train_accuracy)
      .def_readonly("per_class_accuracy", &EpochStats::per_class_accuracy);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_property(
          "learning_rate", [](const TrainConfig& c) { return c.optimizer.learning_rate; },
          [](TrainConfig& c, double v) { c.optimizer.learning_rate = v; });

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("trace", &TrainResult::trace)
      .def_readonly("best_epoch", &TrainResult::best_epoch)
      .def_readonly("best_train_loss", &TrainResult::best_train_loss);

  m.def("train",
        py::overload_cast<Mlp&, const BitStimulusSet&, const TrainConfig&>(&train),
        py::arg("model"), py::arg("set"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  py::class_<TestReport>(m, "TestReport")
      .def_readonly("accuracy", &TestReport::accuracy)
      .def_readonly("shares", &TestReport::shares)
      .def_readonly("trial_count", &TestReport::trial_count);

  m.def(
      "run_generalization_test",
      [](const Mlp& model, const std::vector<BitTrial>& trials, Rng& tie_rng) {
        return run_generalization_test(model, trials, tie_rng);
      },
      py::arg("model"), py::arg("trials"), py::arg("tie_rng"));

  m.def("bitflip_sensitivity", &bitflip_sensitivity, py::arg("model"), py::arg("object"),
        py::arg("attribute"), py::arg("max_flips"), py::arg("rng"), py::arg("repeats"));

  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("x", &CurvePoint::x)
      .def_readonly("mean", &CurvePoint::mean)
      .def_readonly("stddev", &CurvePoint::stddev)
      .def_readonly("n", &CurvePoint::n);

  m.def("pearson_r", &pearson_r, py::arg("x"), py::arg("y"));
  m.def("pearson_p", &pearson_p, py::arg("r"), py::arg("n"));
  m.def("spearman_rho", &spearman_rho, py::arg("x"), py::arg("y"));
  m.def("modified_hausdorff", &modified_hausdorff, py::arg("a"), py::arg("b"));
}
