#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "acerac/ar_process.hpp"
#include "acerac/config.hpp"
#include "acerac/envs.hpp"
#include "acerac/harness.hpp"
#include "acerac/kron_gauss.hpp"
#include "acerac/mlp.hpp"

namespace py = pybind11;
using namespace acerac;

namespace {

// Python-side configs are flat {key: value} dicts using the config-file keys.
ExperimentConfig config_from(const py::dict& overrides) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : overrides) {
    const auto key = py::str(k).cast<std::string>();
    std::string text;
    if (py::isinstance<py::bool_>(v)) {
      text = v.cast<bool>() ? "true" : "false";
    } else if (py::isinstance<py::list>(v) || py::isinstance<py::tuple>(v)) {
      for (const auto& item : v) text += (text.empty() ? "" : ",") + py::str(item).cast<std::string>();
    } else if (py::isinstance<py::float_>(v)) {
      text = format_double(v.cast<double>());
    } else {
      text = py::str(v).cast<std::string>();
    }
    set_config_value(cfg, key, text);
  }
  return cfg;
}

py::dict entries_dict(const std::vector<std::pair<std::string, std::string>>& entries) {
  py::dict d;
  for (const auto& [k, v] : entries) d[py::str(k)] = v;
  return d;
}

Eigen::MatrixXd curve_array(const std::vector<CurvePoint>& curve) {
  Eigen::MatrixXd m(curve.size(), 3);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    m(i, 0) = static_cast<double>(curve[i].env_steps);
    m(i, 1) = curve[i].mean_test_return;
    m(i, 2) = curve[i].std_test_return;
  }
  return m;
}

KroneckerGaussian make_gaussian(const std::string& kind, int n, double alpha, const Eigen::MatrixXd& cov) {
  if (kind == "stationary") return build_stationary(n, alpha, cov);
  if (kind == "conditional") return build_conditional(n, alpha, cov);
  throw std::invalid_argument("kind must be 'stationary' or 'conditional', got '" + kind + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ACERAC actor-critic with autocorrelated exploration";
  m.attr("__version__") = code_version();

  m.def("default_config", [] { return entries_dict(config_entries(ExperimentConfig{})); },
        "Default configuration as a {key: text} dict.");
  m.def("resolve_config",
        [](const py::dict& overrides) { return entries_dict(resolved_entries(resolve(config_from(overrides)))); },
        py::arg("overrides") = py::dict(), "Resolved per-d parameters for the given overrides.");

  m.def(
      "train",
      [](const py::dict& overrides, int jobs, bool verbose) {
        const ExperimentConfig cfg = config_from(overrides);
        RunOptions opts;
        opts.jobs = jobs;
        if (verbose) {
          opts.log = [](const std::string& line) {
            py::gil_scoped_acquire gil;
            py::print(line);
          };
        }
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(cfg, opts);
        }
        py::list seeds;
        for (const auto& s : r.seeds) {
          py::dict d;
          d["seed"] = s.seed;
          d["ok"] = s.ok;
          d["error"] = s.error;
          d["curve"] = curve_array(s.curve);
          d["updates"] = s.updates;
          d["aborted_updates"] = s.aborted_updates;
          d["skipped_adam_steps"] = s.skipped_adam_steps;
          seeds.append(d);
        }
        return seeds;
      },
      py::arg("overrides") = py::dict(), py::arg("jobs") = 1, py::arg("verbose") = false,
      "Train every configured seed and write the run directory ('out'). Returns per-seed results; "
      "each curve is an (evals, 3) array of env_steps, mean and std test return.");

  m.def(
      "evaluate_checkpoint",
      [](const std::string& path, const std::string& env, int d, int episodes, std::uint64_t seed) {
        auto [net, theta] = load_params_file(path);
        const Environment e(make_env_spec(env, d));
        Rng rng = make_stream(seed, Stream::kEval);
        const EvalResult r = evaluate(net, theta, e, episodes, rng);
        py::dict out;
        out["mean"] = r.mean;
        out["std"] = r.std;
        out["returns"] = r.returns;
        return out;
      },
      py::arg("path"), py::arg("env") = "pendulum", py::arg("d") = 1, py::arg("episodes") = 5,
      py::arg("seed") = 0);

  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        auto [net, theta] = load_params_file(path);
        return py::make_tuple(net.widths(), theta);
      },
      "Returns (widths, params) of a saved network.");
  m.def(
      "mlp_forward",
      [](const std::vector<int>& widths, const Eigen::VectorXd& params, const Eigen::MatrixXd& x) {
        // rows are samples on the Python side
        return Eigen::MatrixXd(Mlp(widths).forward_batch(params, x.transpose()).transpose());
      },
      py::arg("widths"), py::arg("params"), py::arg("x"));

  m.def("read_curve", [](const std::string& path) { return curve_array(read_curve_csv(path)); });
  m.def("compare", [](const std::vector<std::string>& dirs) {
    const CompareReport rep = compare(dirs);
    py::list rows;
    for (const auto& r : rep.rows) {
      py::dict d;
      d["dir"] = r.dir;
      d["env"] = r.env;
      d["d"] = r.d;
      d["variant"] = r.variant;
      d["seeds"] = r.seeds;
      d["final_mean"] = r.final_mean;
      d["final_std"] = r.final_std;
      rows.append(d);
    }
    return py::make_tuple(rows, rep.problems);
  }, "Returns (rows, problems) for finished run directories.");

  m.def(
      "ar_noise",
      [](double alpha, const Eigen::MatrixXd& cov, int steps, std::uint64_t seed) {
        ArNoise noise(alpha, CovKernel(cov));
        Rng rng(seed);
        Eigen::MatrixXd out(steps, noise.dim());
        for (int t = 0; t < steps; ++t) {
          if (t == 0) {
            noise.reset(rng);
          } else {
            noise.step(rng);
          }
          out.row(t) = noise.xi().transpose();
        }
        return out;
      },
      py::arg("alpha"), py::arg("cov"), py::arg("steps"), py::arg("seed") = 0,
      "A (steps, dim) stationary AR(1) noise trajectory.");

  m.def(
      "window_log_density",
      [](const std::string& kind, int n, double alpha, const Eigen::MatrixXd& cov, const Eigen::VectorXd& x,
         const Eigen::VectorXd& mean) { return make_gaussian(kind, n, alpha, cov).log_density(x, mean); },
      py::arg("kind"), py::arg("n"), py::arg("alpha"), py::arg("cov"), py::arg("x"), py::arg("mean"));
  m.def(
      "window_covariance",
      [](const std::string& kind, int n, double alpha, const Eigen::MatrixXd& cov) {
        return make_gaussian(kind, n, alpha, cov).dense_covariance();
      },
      py::arg("kind"), py::arg("n"), py::arg("alpha"), py::arg("cov"));
}
