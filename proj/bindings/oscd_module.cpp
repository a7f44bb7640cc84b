// Python bindings for the core operations: unknown scores, sample-level
// detection metrics, community-distortion metrics, diversity indices, the
// threshold grid, and the robustness statistics.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oscd/calibrate.hpp"
#include "oscd/community_metrics.hpp"
#include "oscd/robustness.hpp"
#include "oscd/sample_metrics.hpp"
#include "oscd/scoring.hpp"
#include "oscd/version.hpp"

namespace py = pybind11;

namespace {

oscd::BinaryScoredSet scored_set(const std::vector<double>& scores,
                                 const std::vector<bool>& is_unknown) {
    return oscd::make_binary_scored(scores, is_unknown);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "open-set community-distortion metrics and threshold calibration core";
    m.attr("__version__") = oscd::kToolVersion;

    py::register_exception<oscd::Error>(m, "OscdError");

    // scoring
    m.def("softmax", [](const std::vector<double>& z) { return oscd::softmax(z); }, py::arg("logits"));
    m.def("msp_score", [](const std::vector<double>& z) { return oscd::msp_score(z); },
          py::arg("logits"), "1 - max softmax probability; larger = more unknown");
    m.def("energy_score",
          [](const std::vector<double>& z, double t) { return oscd::energy_score(z, t); },
          py::arg("logits"), py::arg("temperature") = 1.0,
          "-T * logsumexp(logits / T); larger = more unknown");

    m.def("prototype_distance_score",
          [](const std::vector<double>& feature, const std::vector<std::vector<double>>& prototypes,
             const std::string& variant) {
              oscd::PrototypeSet protos;
              protos.prototypes = prototypes;
              return oscd::prototype_distance_score(feature, protos,
                                                    oscd::prototype_variant_from_string(variant));
          },
          py::arg("feature"), py::arg("prototypes"), py::arg("variant") = "raw");

    // sample-level metrics
    m.def("auroc",
          [](const std::vector<double>& s, const std::vector<bool>& u) {
              return oscd::auroc(scored_set(s, u));
          },
          py::arg("scores"), py::arg("is_unknown"));
    m.def("aupr",
          [](const std::vector<double>& s, const std::vector<bool>& u) {
              return oscd::aupr(scored_set(s, u));
          },
          py::arg("scores"), py::arg("is_unknown"));
    m.def("fpr_at_unknown_recall",
          [](const std::vector<double>& s, const std::vector<bool>& u, double target) {
              const auto r = oscd::fpr_at_unknown_recall(scored_set(s, u), target);
              return py::make_tuple(r.fpr, r.threshold);
          },
          py::arg("scores"), py::arg("is_unknown"), py::arg("target") = 0.95);
    m.def("confusion_at",
          [](const std::vector<double>& s, const std::vector<bool>& u, double threshold) {
              const auto c = oscd::confusion_at(scored_set(s, u), threshold);
              py::dict d;
              d["tp"] = c.tp;
              d["fp"] = c.fp;
              d["tn"] = c.tn;
              d["fn"] = c.fn;
              d["known_recall"] = c.known_recall;
              d["unknown_recall"] = c.unknown_recall;
              d["detection_f1"] = c.detection_f1;
              d["youden"] = c.youden;
              return d;
          },
          py::arg("scores"), py::arg("is_unknown"), py::arg("threshold"));

    // community metrics
    m.def("oscd",
          [](const std::vector<double>& p, const std::vector<double>& q) {
              return oscd::oscd_distance(p, q);
          },
          py::arg("true_abundance"), py::arg("predicted_abundance"),
          "Bray-Curtis distortion over K known taxa plus one unknown bin");
    m.def("oscd_directional",
          [](const std::vector<double>& p, const std::vector<double>& q) {
              const auto d = oscd::oscd_directional(p, q);
              return py::make_tuple(d.plus, d.minus);
          },
          py::arg("true_abundance"), py::arg("predicted_abundance"));
    m.def("shannon", [](const std::vector<double>& v) { return oscd::shannon_index(v); },
          py::arg("abundance"));
    m.def("simpson", [](const std::vector<double>& v) { return oscd::simpson_index(v); },
          py::arg("abundance"));
    m.def("pielou", [](const std::vector<double>& v) { return oscd::pielou_evenness(v); },
          py::arg("abundance"));
    m.def("richness", [](const std::vector<double>& v) { return oscd::richness(v); },
          py::arg("abundance"));
    m.def("topk_overlap",
          [](const std::vector<double>& p, const std::vector<double>& q, size_t k_top) {
              return oscd::topk_overlap(p, q, k_top);
          },
          py::arg("true_abundance"), py::arg("predicted_abundance"), py::arg("k_top") = 3);

    // calibration grid
    m.def("build_threshold_grid",
          [](const std::vector<double>& scores, size_t n_quantiles) {
              return oscd::build_grid(scores, n_quantiles).thresholds;
          },
          py::arg("scores"), py::arg("n_quantiles") = 401,
          "score quantiles plus extrema, deduplicated ascending");

    // robustness statistics
    m.def("paired_t_test",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const auto r = oscd::paired_t_test(a, b);
              return py::make_tuple(r.t, r.p, r.degenerate);
          },
          py::arg("a"), py::arg("b"));
    m.def("spearman",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              return oscd::spearman(x, y);
          },
          py::arg("x"), py::arg("y"));
    m.def("pearson",
          [](const std::vector<double>& x, const std::vector<double>& y) {
              return oscd::pearson(x, y);
          },
          py::arg("x"), py::arg("y"));
    m.def("student_t_cdf", &oscd::student_t_cdf, py::arg("t"), py::arg("dof"));
}
