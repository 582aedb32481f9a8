#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "entlab/acceptance.hpp"
#include "entlab/concavity.hpp"
#include "entlab/convex_body.hpp"
#include "entlab/density_model.hpp"
#include "entlab/entropy.hpp"
#include "entlab/error.hpp"
#include "entlab/experiment.hpp"
#include "entlab/inequality.hpp"
#include "entlab/parallel.hpp"
#include "entlab/positioning.hpp"
#include "entlab/report_io.hpp"

namespace py = pybind11;
using namespace entlab;
using Json = nlohmann::ordered_json;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const auto& v : j) out.append(to_python(v));
      return std::move(out);
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return std::move(out);
    }
    default:
      return py::none();
  }
}

py::dict report_dict(const InequalityReport& r) { return to_python(to_json(r)); }

py::list report_list(const std::vector<InequalityReport>& reports) {
  py::list out;
  for (const auto& r : reports) out.append(report_dict(r));
  return out;
}

py::dict two_sided(const TwoSidedReport& r) {
  py::dict out;
  out["lower"] = report_dict(r.lower);
  out["upper"] = report_dict(r.upper);
  return out;
}

py::dict entropy_dict(const EntropyEstimate& e) {
  py::dict out = to_python(to_json(e));
  out["sample_size"] = e.sample_size;
  out["bias_note"] = e.bias_note;
  return out;
}

EntropyOptions entropy_options(const std::string& route, std::size_t m, std::size_t m_outer, std::size_t m_inner,
                               int k) {
  EntropyOptions o;
  if (route == "automatic")
    o.route = EntropyOptions::Route::automatic;
  else if (route == "plugin")
    o.route = EntropyOptions::Route::plugin;
  else if (route == "knn")
    o.route = EntropyOptions::Route::knn;
  else if (route == "convolution")
    o.route = EntropyOptions::Route::convolution;
  else
    throw InvalidParameter("unknown entropy route '" + route + "'");
  o.m = m;
  o.knn_m = m;
  o.m_outer = m_outer;
  o.m_inner = m_inner;
  o.k = k;
  return o;
}

CheckOptions check_options(std::size_t m, std::size_t m_outer, std::size_t m_inner) {
  CheckOptions o;
  o.m = m;
  o.marginal.m = m;
  o.sum.m_outer = m_outer;
  o.sum.m_inner = m_inner;
  o.intermediate.m_outer = m_outer;
  o.intermediate.m_inner = m_inner;
  return o;
}

// Row-per-draw sample matrix.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> sample(const DensityModel& model, std::size_t m,
                                                                              std::uint64_t seed) {
  return draw_samples(model, RandomStream(seed), m).transpose();
}

}  // namespace

PYBIND11_MODULE(_entlab, m) {
  m.doc() = "Entropy inequalities for log-concave measures: models, estimators and checks.";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", base.ptr());
  py::register_exception<InfeasibleBody>(m, "InfeasibleBody", base.ptr());
  py::register_exception<EstimationFailure>(m, "EstimationFailure", base.ptr());
  py::register_exception<InternalInconsistency>(m, "InternalInconsistency", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<ConvexBody>(m, "ConvexBody")
      .def_property_readonly("dim", &ConvexBody::dim)
      .def_property_readonly("kind", &ConvexBody::kind)
      .def(
          "contains", [](const ConvexBody& b, const Vector& x) { return b.contains(x); }, py::arg("x"))
      .def("log_volume", [](const ConvexBody& b) { return log_volume(b); })
      .def("__repr__",
           [](const ConvexBody& b) { return "<ConvexBody " + b.kind() + " dim=" + std::to_string(b.dim()) + ">"; });

  m.def(
      "ball", [](const Vector& center, double radius) { return ConvexBody(Ball{center, radius}); }, py::arg("center"),
      py::arg("radius"));
  m.def(
      "box", [](const Vector& lower, const Vector& upper) { return ConvexBody(Box{lower, upper}); }, py::arg("lower"),
      py::arg("upper"));
  m.def(
      "simplex", [](const Matrix& vertices) { return ConvexBody(Simplex{vertices}); }, py::arg("vertices"),
      "Vertices as columns (n x (n+1)).");
  m.def(
      "ellipsoid", [](const Vector& center, const Matrix& shape) { return ConvexBody(Ellipsoid{center, shape}); },
      py::arg("center"), py::arg("shape"));
  m.def("unit_volume_ball", &unit_volume_ball, py::arg("n"));
  m.def("unit_cube", &unit_cube, py::arg("n"));
  m.def("standard_simplex", &standard_simplex, py::arg("n"));
  m.def("minkowski_sum", &minkowski_sum, py::arg("a"), py::arg("b"));

  py::class_<DensityModel>(m, "DensityModel")
      .def_readonly("name", &DensityModel::name)
      .def_readonly("dim", &DensityModel::dim)
      .def_property_readonly("family", [](const DensityModel& d) { return to_string(d.family); })
      .def_readonly("analytic_entropy", &DensityModel::analytic_entropy)
      .def_readonly("analytic_max_density", &DensityModel::analytic_max_density)
      .def_readonly("kappa", &DensityModel::kappa)
      .def_readonly("mean", &DensityModel::mean)
      .def_readonly("covariance", &DensityModel::covariance)
      .def_property_readonly("evaluable", &DensityModel::evaluable)
      .def_property_readonly("log_concave", &DensityModel::log_concave)
      .def(
          "log_density", [](const DensityModel& d, const Vector& x) { return d.log_density_at(x); }, py::arg("x"))
      .def("sample", &sample, py::arg("m"), py::arg("seed") = 0, "m draws as an (m, n) array.")
      .def("__repr__", [](const DensityModel& d) { return "<DensityModel " + d.name + ">"; });

  m.def("gaussian", py::overload_cast<const Vector&, const Matrix&>(&make_gaussian), py::arg("mean"),
        py::arg("covariance"));
  m.def("standard_gaussian", &make_standard_gaussian, py::arg("n"));
  m.def("exponential", &make_exponential, py::arg("rate") = 1.0);
  m.def("laplace", &make_laplace, py::arg("scale") = 1.0);
  m.def("gamma", &make_gamma, py::arg("shape"), py::arg("scale") = 1.0);
  m.def("uniform_interval", &make_uniform_interval, py::arg("lower") = 0.0, py::arg("upper") = 1.0);
  m.def("uniform_body", &uniform_body_model, py::arg("body"));
  m.def("product", &make_product, py::arg("factors"));
  m.def("power", &make_power, py::arg("factor"), py::arg("copies"));
  m.def(
      "affine_image",
      [](const DensityModel& d, const Matrix& linear, const Vector& shift) {
        return affine_image(d, AffineMap(linear, shift));
      },
      py::arg("model"), py::arg("linear"), py::arg("shift"));
  m.def(
      "convolve", [](const DensityModel& a, const DensityModel& b) { return convolve(a, b).model(); }, py::arg("left"),
      py::arg("right"), "Law of X + Y for independent X, Y.");
  m.def("zoo_model", &zoo_model, py::arg("name"), py::arg("n"));
  m.def("max_density", [](const DensityModel& d) { return max_density(d).value; }, py::arg("model"));
  m.def("kappa_convolution", &kappa_convolution, py::arg("k1"), py::arg("k2"));

  m.def("set_workers", &set_worker_count, py::arg("workers"));
  m.def("entropy_power", &entropy_power, py::arg("h"), py::arg("n"));
  m.def(
      "plugin_entropy",
      [](const DensityModel& d, std::size_t m_, std::uint64_t seed) {
        EntropyEstimate e;
        {
          py::gil_scoped_release release;
          e = plugin_entropy(d, RandomStream(seed), m_);
        }
        return entropy_dict(e);
      },
      py::arg("model"), py::arg("m") = 100000, py::arg("seed") = 0);
  m.def(
      "knn_entropy",
      [](const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& samples, int k) {
        const Matrix cols = samples.transpose();
        return entropy_dict(knn_entropy(cols, k));
      },
      py::arg("samples"), py::arg("k") = 5, "Samples as an (m, n) array.");
  m.def(
      "estimate_entropy",
      [](const DensityModel& d, std::uint64_t seed, const std::string& route, std::size_t m_, std::size_t m_outer,
         std::size_t m_inner, int k) {
        const EntropyOptions o = entropy_options(route, m_, m_outer, m_inner, k);
        EntropyEstimate e;
        {
          py::gil_scoped_release release;
          e = estimate_entropy(d, RandomStream(seed), o);
        }
        return entropy_dict(e);
      },
      py::arg("model"), py::arg("seed") = 0, py::arg("route") = "automatic", py::arg("m") = 20000,
      py::arg("m_outer") = 20000, py::arg("m_inner") = 256, py::arg("k") = 5);
  m.def(
      "relative_entropy_to_gaussian",
      [](const DensityModel& d, std::size_t m_, std::uint64_t seed) {
        return entropy_dict(relative_entropy_to_gaussian(d, RandomStream(seed), m_));
      },
      py::arg("model"), py::arg("m") = 100000, py::arg("seed") = 0);

  m.def(
      "ball_mass",
      [](const DensityModel& d, std::size_t m_, std::uint64_t seed) {
        const BallMass b = ball_mass(d, RandomStream(seed), m_);
        py::dict out;
        out["mass"] = b.mass;
        out["mass_se"] = b.mass_se;
        out["mass_root"] = b.mass_root;
        out["censored"] = b.censored;
        out["method"] = to_string(b.method);
        return out;
      },
      py::arg("model"), py::arg("m") = 100000, py::arg("seed") = 0,
      "Mass of the volume-one ball centered at the mean.");
  m.def(
      "normalize_max_density", [](const DensityModel& d) { return normalize_max_density(d).model; }, py::arg("model"));
  m.def(
      "isotropic_position",
      [](const DensityModel& d, std::uint64_t seed) { return isotropic_det1_position(d, RandomStream(seed)).model; },
      py::arg("model"), py::arg("seed") = 0);

  m.def(
      "check_entropy_sandwich", [](const DensityModel& d) { return two_sided(check_entropy_sandwich(d)); },
      py::arg("model"));
  m.def(
      "check_gaussian_sandwich", [](const DensityModel& d) { return two_sided(check_gaussian_sandwich(d)); },
      py::arg("model"));
  m.def(
      "concentration_profile",
      [](const DensityModel& d, std::size_t m_, const std::vector<double>& eps, std::uint64_t seed) {
        const ConcentrationProfile p = concentration_profile(d, RandomStream(seed), m_, eps);
        py::dict out;
        out["model"] = p.model;
        out["n"] = p.n;
        out["m"] = p.m;
        out["entropy"] = p.entropy;
        out["eps"] = p.eps_grid;
        out["empirical_tail"] = p.empirical_tail;
        out["tail_se"] = p.tail_se;
        out["bound"] = p.tail_bound;
        out["oracle_tail"] = p.oracle_tail;
        out["svg"] = profile_svg(p);
        return out;
      },
      py::arg("model"), py::arg("m") = 100000,
      py::arg("eps") = std::vector<double>{0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0}, py::arg("seed") = 0);
  m.def(
      "check_submodularity",
      [](const DensityModel& x, const DensityModel& y, const DensityModel& z, std::uint64_t seed, std::size_t m_outer,
         std::size_t m_inner) {
        return report_dict(check_submodularity(x, y, z, RandomStream(seed), check_options(100000, m_outer, m_inner)));
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("seed") = 0, py::arg("m_outer") = 20000,
      py::arg("m_inner") = 256);
  m.def(
      "check_epi",
      [](const DensityModel& x, const DensityModel& y, std::uint64_t seed, std::size_t m_outer, std::size_t m_inner) {
        return report_dict(check_epi(x, y, RandomStream(seed), check_options(100000, m_outer, m_inner)));
      },
      py::arg("x"), py::arg("y"), py::arg("seed") = 0, py::arg("m_outer") = 20000, py::arg("m_inner") = 256);
  m.def(
      "reverse_epi",
      [](const DensityModel& x, const DensityModel& y, std::uint64_t seed, std::size_t m_, std::size_t m_outer,
         double ceiling) {
        CheckOptions o = check_options(m_, m_outer, 256);
        o.reverse_epi_ceiling = ceiling;
        const ReverseEpiResult r = reverse_epi_pipeline(x, y, RandomStream(seed), o);
        py::dict out;
        out["report"] = report_dict(r.report);
        out["epi_side"] = report_dict(r.epi_side);
        out["c_hat"] = r.c_hat;
        out["c_hat_se"] = r.c_hat_se;
        py::list stages;
        for (const auto& s : r.stages) stages.append(to_python(to_json(s)));
        out["stages"] = stages;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("seed") = 0, py::arg("m") = 20000, py::arg("m_outer") = 4000,
      py::arg("ceiling") = 30.0);
  m.def(
      "check_kappa_entropy_lower",
      [](const DensityModel& d, const ConvexBody& body, double kappa, std::uint64_t seed) {
        return report_dict(check_kappa_entropy_lower(d, body, kappa, RandomStream(seed)));
      },
      py::arg("model"), py::arg("body"), py::arg("kappa"), py::arg("seed") = 0);
  m.def(
      "check_reverse_bm",
      [](const ConvexBody& a, const ConvexBody& b, std::uint64_t seed, std::size_t m_outer) {
        return report_dict(check_reverse_bm(a, b, RandomStream(seed), check_options(100000, m_outer, 256)));
      },
      py::arg("a"), py::arg("b"), py::arg("seed") = 0, py::arg("m_outer") = 20000);
  m.def(
      "hyperplane_scan",
      [](const std::vector<DensityModel>& models, std::size_t m_, std::uint64_t seed) {
        py::list out;
        for (const auto& row : hyperplane_scan(models, RandomStream(seed), m_)) {
          py::dict d;
          d["name"] = row.name;
          d["n"] = row.n;
          d["d_per_n"] = row.d_per_n;
          d["d_per_n_se"] = row.d_per_n_se;
          d["bound"] = row.bound;
          d["flagged"] = row.flagged;
          out.append(d);
        }
        return out;
      },
      py::arg("models"), py::arg("m") = 100000, py::arg("seed") = 0);

  m.def(
      "run_config",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        ExperimentConfig config = parse_config(text);
        if (seed) config.seed = *seed;
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run_checks(config);
        }
        return report_list(result.reports);
      },
      py::arg("text"), py::arg("seed") = py::none(), "Runs a YAML experiment; returns the report records.");
  m.def("list_suites", &list_suites);
  m.def(
      "run_acceptance",
      [](std::uint64_t seed, const std::vector<std::string>& suites) {
        std::vector<SuiteResult> results;
        {
          py::gil_scoped_release release;
          results = run_acceptance(AcceptanceOptions{seed, suites});
        }
        return report_list(flatten(results));
      },
      py::arg("seed") = 42, py::arg("suites") = std::vector<std::string>{});
}
