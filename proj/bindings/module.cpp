#include "dczip/init_eval.hpp"
#include "dczip/inference.hpp"
#include "dczip/io.hpp"
#include "dczip/model.hpp"
#include "dczip/sampler.hpp"
#include "dczip/selection.hpp"
#include "dczip/sweep.hpp"
#include "dczip/version.hpp"
#include "dczip/zip.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace pybind11::literals;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Degree-corrected zero-inflated Poisson blockmodels for count-weighted networks";
    m.attr("__version__") = dczip::kVersion;

    py::register_exception<dczip::DataError>(m, "DataError");
    py::register_exception<dczip::NumericalError>(m, "NumericalError");

    py::enum_<dczip::SparsityMode>(m, "SparsityMode")
        .value("local", dczip::SparsityMode::local)
        .value("global_", dczip::SparsityMode::global);

    py::class_<dczip::WeightedDigraph>(m, "WeightedDigraph")
        .def(py::init<dczip::Matrix, std::optional<std::vector<std::string>>>(), "weights"_a,
             "node_labels"_a = std::nullopt)
        .def_property_readonly("n", &dczip::WeightedDigraph::n)
        .def_property_readonly("weights", &dczip::WeightedDigraph::weights)
        .def_property_readonly("node_labels", &dczip::WeightedDigraph::node_labels);

    py::class_<dczip::Partition>(m, "Partition")
        .def(py::init<std::vector<int>, int>(), "labels"_a, "K"_a)
        .def_readonly("labels", &dczip::Partition::labels)
        .def_readonly("K", &dczip::Partition::K)
        .def("community_sizes", &dczip::Partition::community_sizes);

    py::class_<dczip::BlockParams>(m, "BlockParams")
        .def(py::init<>())
        .def_readwrite("K", &dczip::BlockParams::K)
        .def_readwrite("pi", &dczip::BlockParams::pi)
        .def_readwrite("P", &dczip::BlockParams::P)
        .def_readwrite("Lambda", &dczip::BlockParams::Lambda)
        .def_readwrite("mu", &dczip::BlockParams::mu)
        .def_readwrite("nu", &dczip::BlockParams::nu)
        .def_readwrite("sparsity_mode", &dczip::BlockParams::sparsity_mode)
        .def_readwrite("degree_corrected", &dczip::BlockParams::degree_corrected)
        .def("validate", &dczip::BlockParams::validate, "require_symmetric"_a = true)
        .def_static("homogeneous", &dczip::BlockParams::homogeneous, "K"_a, "n"_a, "p"_a,
                    "lambda_"_a, "degree_corrected"_a = false);

    py::class_<dczip::VariationalState>(m, "VariationalState")
        .def(py::init([](dczip::Matrix tau) { return dczip::VariationalState{std::move(tau)}; }),
             "tau"_a)
        .def_readwrite("tau", &dczip::VariationalState::tau);

    py::class_<dczip::FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("max_outer_iters", &dczip::FitOptions::max_outer_iters)
        .def_readwrite("elbo_tol", &dczip::FitOptions::elbo_tol)
        .def_readwrite("estep_max_iters", &dczip::FitOptions::estep_max_iters)
        .def_readwrite("estep_tol", &dczip::FitOptions::estep_tol)
        .def_readwrite("ecm_max_iters", &dczip::FitOptions::ecm_max_iters)
        .def_readwrite("ecm_tol", &dczip::FitOptions::ecm_tol)
        .def_readwrite("symmetric_blocks", &dczip::FitOptions::symmetric_blocks)
        .def_readwrite("sparsity_mode", &dczip::FitOptions::sparsity_mode)
        .def_readwrite("degree_corrected", &dczip::FitOptions::degree_corrected)
        .def_readwrite("seed", &dczip::FitOptions::seed);

    py::class_<dczip::FitResult>(m, "FitResult")
        .def_readonly("params", &dczip::FitResult::params)
        .def_readonly("tau", &dczip::FitResult::tau)
        .def_readonly("partition", &dczip::FitResult::partition)
        .def_readonly("elbo_trace", &dczip::FitResult::elbo_trace)
        .def_readonly("converged", &dczip::FitResult::converged)
        .def_readonly("outer_iters", &dczip::FitResult::outer_iters)
        .def_readonly("warnings", &dczip::FitResult::warnings)
        .def_readonly("elbo_init", &dczip::FitResult::elbo_init)
        .def_readonly("best_elbo", &dczip::FitResult::best_elbo);

    py::class_<dczip::IclRow>(m, "IclRow")
        .def_readonly("k", &dczip::IclRow::k)
        .def_readonly("max_complete_ll", &dczip::IclRow::max_complete_ll)
        .def_readonly("block_penalty", &dczip::IclRow::block_penalty)
        .def_readonly("mixing_penalty", &dczip::IclRow::mixing_penalty)
        .def_readonly("icl", &dczip::IclRow::icl)
        .def_readonly("fit_elbo", &dczip::IclRow::fit_elbo)
        .def_readonly("fit_converged", &dczip::IclRow::fit_converged)
        .def_readonly("warnings", &dczip::IclRow::warnings);

    py::class_<dczip::IclTable>(m, "IclTable")
        .def_readonly("rows", &dczip::IclTable::rows)
        .def_readonly("k_hat", &dczip::IclTable::k_hat);

    m.def("zip_log_pmf", &dczip::zip_log_pmf, "w"_a, "p"_a, "rate"_a);
    m.def("compute_alpha", &dczip::compute_alpha, "a_ij"_a, "p_ab"_a, "rate"_a);
    m.def("sample_network", &dczip::sample_network, "params"_a, "n"_a, "seed"_a);
    m.def("expected_strengths", &dczip::expected_strengths, "params"_a);
    m.def("complete_log_likelihood", &dczip::complete_log_likelihood, "A"_a, "Z"_a, "params"_a);
    m.def("tau_from_partition", &dczip::tau_from_partition, "init"_a, "K"_a);
    m.def("hard_assign", &dczip::hard_assign, "tau"_a);
    m.def("update_pi", &dczip::update_pi, "tau"_a);
    m.def(
        "e_step",
        [](const dczip::WeightedDigraph& A, const dczip::VariationalState& tau,
           const dczip::BlockParams& params, const dczip::FitOptions& opts, double damping) {
            return dczip::e_step(A, tau, params, opts, damping, nullptr);
        },
        "A"_a, "tau"_a, "params"_a, "opts"_a = dczip::FitOptions{}, "damping"_a = 1.0);
    m.def(
        "ecm_m_step",
        [](const dczip::WeightedDigraph& A, const dczip::VariationalState& tau,
           const dczip::BlockParams& params, const dczip::FitOptions& opts) {
            return dczip::ecm_m_step(A, tau, params, opts, nullptr, nullptr);
        },
        "A"_a, "tau"_a, "params"_a, "opts"_a = dczip::FitOptions{});
    m.def("elbo", &dczip::elbo, "A"_a, "tau"_a, "params"_a);
    m.def(
        "fit_vem",
        [](const dczip::WeightedDigraph& A, int K, const dczip::Partition& init,
           const dczip::FitOptions& opts) { return dczip::fit_vem(A, K, init, opts, nullptr); },
        "A"_a, "K"_a, "init"_a, "opts"_a = dczip::FitOptions{});
    m.def("icl_score", &dczip::icl_score, "A"_a, "fit"_a, "k"_a, "degree_corrected"_a);
    m.def("select_k", &dczip::select_k, "A"_a, "k_min"_a, "k_max"_a, "opts"_a, "restarts"_a);
    m.def("kmeans_rows", &dczip::kmeans_rows, "A"_a, "K"_a, "seed"_a, "max_iters"_a = 100);
    m.def("kmeans_normalized_rows", &dczip::kmeans_normalized_rows, "A"_a, "K"_a, "seed"_a,
          "max_iters"_a = 100);
    m.def("spectral_partition", &dczip::spectral_partition, "A"_a, "K"_a, "seed"_a);
    m.def("nmi", &dczip::nmi, "p1"_a, "p2"_a);
    m.def("read_edge_list", &dczip::read_edge_list, "path"_a, "node_list"_a = std::nullopt);
    m.def("write_edge_list", &dczip::write_edge_list, "A"_a, "path"_a);
    m.def("read_params", &dczip::read_params, "path"_a);
    m.def("write_params", &dczip::write_params, "params"_a, "path"_a);
    m.def("write_fit", &dczip::write_fit, "fit"_a, "A"_a, "out_dir"_a);
}
