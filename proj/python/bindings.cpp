// SPDX-License-Identifier: Apache-2.0
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dcwhash/codes.hpp"
#include "dcwhash/data_io.hpp"
#include "dcwhash/distances.hpp"
#include "dcwhash/error.hpp"
#include "dcwhash/metrics.hpp"
#include "dcwhash/trainer.hpp"

namespace py = pybind11;
using namespace dcwhash;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) return Matrix(a.shape(0), 1, std::vector<double>(a.data(), a.data() + a.size()));
  if (a.ndim() != 2) throw py::value_error("expected a 1-D or 2-D array");
  return Matrix(a.shape(0), a.shape(1), std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> to_numpy(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), out.mutable_data());
  return out;
}

Mode parse_mode(const std::string& s) {
  if (s == "loss") return Mode::kLoss;
  if (s == "distance") return Mode::kDistance;
  throw py::value_error("mode must be 'loss' or 'distance'");
}

Activation parse_output(const std::string& s) {
  if (s == "sigmoid") return Activation::kReluHiddenSigmoidOut;
  if (s == "linear") return Activation::kReluHiddenLinearOut;
  throw py::value_error("decoder_output must be 'sigmoid' or 'linear'");
}

py::array_t<std::uint8_t> unpack(const CodeSet& c) {
  py::array_t<std::uint8_t> out({c.size(), c.bits()});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t b = 0; b < c.bits(); ++b) v(i, b) = c.bit(i, b);
  return out;
}

CodeSet pack(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& bits,
             std::optional<std::vector<std::uint32_t>> labels) {
  if (bits.ndim() != 2) throw py::value_error("expected an (n, m) bit array");
  CodeSet c(bits.shape(0), bits.shape(1));
  auto v = bits.unchecked<2>();
  for (py::ssize_t i = 0; i < v.shape(0); ++i)
    for (py::ssize_t b = 0; b < v.shape(1); ++b) c.set_bit(i, b, v(i, b) != 0);
  if (labels) c.set_labels(std::move(*labels));
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  py::register_exception<Error>(mod, "DcwhashError", PyExc_ValueError);
  py::register_exception<NumericError>(mod, "NumericError", PyExc_ArithmeticError);

  mod.def("wasserstein_1d", [](const Array& a, const Array& b, int p, const std::string& mode) {
        const Matrix x = to_matrix(a), y = to_matrix(b);
        return wasserstein_1d(x.values(), y.values(), p, parse_mode(mode));
      }, py::arg("a"), py::arg("b"), py::arg("p") = 2, py::arg("mode") = "loss");
  mod.def("dcw", [](const Array& d, const Array& f, int p, const std::string& mode) {
        return dcw(to_matrix(d), to_matrix(f), p, parse_mode(mode)).value;
      }, py::arg("d_sample"), py::arg("f_sample"), py::arg("p") = 2, py::arg("mode") = "loss");
  mod.def("dcw_grad", [](const Array& d, const Array& f, int p) {
        const auto g = dcw_backward(to_matrix(d), to_matrix(f), p);
        return py::make_tuple(g.loss, to_numpy(g.grad));
      }, py::arg("d_sample"), py::arg("f_sample"), py::arg("p") = 2,
      "Loss-mode value and its gradient w.r.t. f_sample.");
  mod.def("swd", [](const Array& d, const Array& f, std::size_t n_omega, std::uint64_t seed, int p,
                    const std::string& mode) {
        const Matrix a = to_matrix(d);
        return swd(a, to_matrix(f), sample_projections(a.cols(), n_omega, seed), p, parse_mode(mode));
      }, py::arg("d_sample"), py::arg("f_sample"), py::arg("n_omega") = 100, py::arg("seed") = 0,
      py::arg("p") = 2, py::arg("mode") = "loss");
  mod.def("swd_axes", [](const Array& d, const Array& f, int p, const std::string& mode) {
        const Matrix a = to_matrix(d);
        return swd(a, to_matrix(f), axis_projections(a.cols()), p, parse_mode(mode));
      }, py::arg("d_sample"), py::arg("f_sample"), py::arg("p") = 2, py::arg("mode") = "loss");
  mod.def("ot_exact", [](const Array& d, const Array& f, int p) {
        const auto r = ot_exact(to_matrix(d), to_matrix(f), p);
        return py::make_tuple(r.mean_cost, r.plan.permutation);
      }, py::arg("d_sample"), py::arg("f_sample"), py::arg("p") = 2,
      "Mean matched cost and the assignment (row of f -> row of d).");

  mod.def("sample_prior", [](std::size_t m, std::size_t n, double bernoulli_p, std::uint64_t seed,
                             std::uint64_t draw) {
        return to_numpy(sample_prior({m, bernoulli_p, seed}, n, draw));
      }, py::arg("m"), py::arg("n"), py::arg("bernoulli_p") = 0.5, py::arg("seed") = 0, py::arg("draw") = 0);

  py::class_<AutoencoderModel>(mod, "Model")
      .def_static("load", [](const std::string& path, const std::string& out) {
            return load_model(path, parse_output(out));
          }, py::arg("path"), py::arg("decoder_output") = "linear")
      .def("save", [](const AutoencoderModel& m, const std::string& path) { save_model(path, m); })
      .def("encode", [](const AutoencoderModel& m, const Array& x) { return to_numpy(encode_batch(m, to_matrix(x))); });

  mod.def("make_model", [](std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t m,
                           const std::string& out, std::uint64_t seed) {
        return make_autoencoder(input_dim, hidden, m, parse_output(out), seed);
      }, py::arg("input_dim"), py::arg("hidden"), py::arg("m"), py::arg("decoder_output") = "linear",
      py::arg("seed") = 0);

  mod.def("train", [](const Array& x, AutoencoderModel model, const std::string& matcher, std::size_t iters,
                      std::size_t batch, std::size_t recon_steps, double lr, int p, double bernoulli_p,
                      std::size_t n_omega, std::uint64_t seed) {
        TrainConfig cfg;
        cfg.matcher = parse_matcher(matcher);
        cfg.iterations = iters;
        cfg.batch_size = batch;
        cfg.recon_steps = recon_steps;
        cfg.lr = lr;
        cfg.p_norm = p;
        cfg.n_omega = n_omega;
        cfg.seed = seed;
        const std::size_t m = model.encoder.layers.back().bias.size();
        TrainResult r;
        {
          py::gil_scoped_release nogil;
          r = train(to_matrix(x), std::move(model), cfg, {m, bernoulli_p, seed});
        }
        py::dict trace;
        std::vector<double> recon, match, gnorm;
        for (const auto& t : r.trace.records) {
          recon.push_back(t.loss_recon);
          match.push_back(t.loss_match);
          gnorm.push_back(t.grad_norm);
        }
        trace["loss_recon"] = recon;
        trace["loss_match"] = match;
        trace["grad_norm"] = gnorm;
        return py::make_tuple(std::move(r.model), trace);
      }, py::arg("features"), py::arg("model"), py::arg("matcher") = "dcw", py::arg("iters") = 1000,
      py::arg("batch") = 128, py::arg("recon_steps") = 5, py::arg("lr") = 1e-3, py::arg("p") = 2,
      py::arg("bernoulli_p") = 0.5, py::arg("n_omega") = 100, py::arg("seed") = 0);

  mod.def("binarize", [](const Array& latent, double threshold) { return unpack(binarize(to_matrix(latent), threshold)); },
          py::arg("latent"), py::arg("threshold") = 0.5);
  mod.def("lsh_bits", [](const Array& x, std::size_t m, std::uint64_t seed, std::optional<Array> fit) {
        const Matrix data = to_matrix(x);
        return unpack(fit_lsh(fit ? to_matrix(*fit) : data, m, seed).encode(data));
      }, py::arg("features"), py::arg("m"), py::arg("seed") = 0, py::arg("fit_features") = py::none());
  mod.def("hamming_rank", [](py::array_t<std::uint8_t> query, const py::array_t<std::uint8_t>& db) {
        const CodeSet q = pack(query.reshape({1, -1}), std::nullopt), d = pack(db, std::nullopt);
        std::vector<std::uint32_t> idx, dist;
        for (const auto& nb : rank_database(q.code(0), d)) {
          idx.push_back(nb.index);
          dist.push_back(nb.distance);
        }
        return py::make_tuple(idx, dist);
      }, py::arg("query_bits"), py::arg("db_bits"));
  mod.def("evaluate", [](const py::array_t<std::uint8_t>& qbits, std::vector<std::uint32_t> qlabels,
                         const py::array_t<std::uint8_t>& dbits, std::vector<std::uint32_t> dlabels,
                         std::vector<std::size_t> ranks) {
        EvalOptions opt;
        opt.precision_ranks = std::move(ranks);
        const auto r = evaluate(pack(qbits, std::move(qlabels)), pack(dbits, std::move(dlabels)), opt);
        py::dict out;
        out["map"] = r.map;
        py::dict pr;
        for (const auto& [k, v] : r.precision_at) pr[py::int_(k)] = v;
        out["precision_at"] = pr;
        out["query_count"] = r.query_count;
        out["excluded_queries"] = r.excluded_queries;
        return out;
      }, py::arg("query_bits"), py::arg("query_labels"), py::arg("db_bits"), py::arg("db_labels"),
      py::arg("precision_ranks") = std::vector<std::size_t>{1000});
  mod.def("average_precision", [](std::vector<std::uint8_t> rel) { return average_precision(rel); });

  mod.def("load_features", [](const std::string& p) { return to_numpy(load_features(p)); });
  mod.def("save_features", [](const std::string& p, const Array& x) { save_features(p, to_matrix(x)); });
  mod.def("load_labels", &load_labels);
  mod.def("save_labels", &save_labels);
  mod.def("load_code_bits", [](const std::string& p) {
        const CodeSet c = load_codes(p);
        return py::make_tuple(unpack(c), c.labels());
      });
}
