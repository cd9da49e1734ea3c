#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rsic/bellman.hpp"
#include "rsic/eigensolver.hpp"
#include "rsic/model.hpp"
#include "rsic/policy_oracle.hpp"
#include "rsic/propagator.hpp"
#include "rsic/simulator.hpp"

namespace py = pybind11;

PYBIND11_MODULE(rsic, m) {
    m.doc() = "Long-run risk-sensitive impulse control on finite Markov chains";

    py::class_<rsic::ModelSpec>(m, "ModelSpec")
        .def(py::init<>())
        .def_readwrite("states", &rsic::ModelSpec::states)
        .def_readwrite("generator", &rsic::ModelSpec::generator)
        .def_readwrite("running_cost", &rsic::ModelSpec::running_cost)
        .def_readwrite("impulse_set", &rsic::ModelSpec::impulse_set)
        .def_readwrite("shift_cost", &rsic::ModelSpec::shift_cost)
        .def_readwrite("exhaustion_chain", &rsic::ModelSpec::exhaustion_chain)
        .def_readwrite("grid_levels", &rsic::ModelSpec::grid_levels)
        .def("n", &rsic::ModelSpec::n)
        .def("impulse_count", &rsic::ModelSpec::impulse_count)
        .def("chain_length", &rsic::ModelSpec::chain_length)
        .def("finest_level", &rsic::ModelSpec::finest_level);

    m.def("model_from_json", &rsic::model_from_json, py::arg("text"),
          "Parse a model from a JSON string");
    m.def("load_model", &rsic::load_model, py::arg("path"), "Load a model from a JSON file");
    m.def("validate_model", &rsic::validate_model, py::arg("spec"),
          "List every validation violation (empty means valid)");
    m.def("normalize_running_cost", &rsic::normalize_running_cost, py::arg("raw"),
          "Return (raw - offset, offset) with offset = max |raw_x|");

    py::class_<rsic::WeightedKernel>(m, "WeightedKernel")
        .def_readonly("matrix", &rsic::WeightedKernel::matrix)
        .def_readonly("delta", &rsic::WeightedKernel::delta)
        .def_readonly("shift", &rsic::WeightedKernel::shift);
    m.def("weighted_kernel", &rsic::weighted_kernel, py::arg("spec"), py::arg("delta"),
          py::arg("shift") = 0.0, "exp(delta (Q + diag(f - shift)))");
    m.def("semigroup_type", py::overload_cast<const rsic::ModelSpec&>(&rsic::semigroup_type),
          py::arg("spec"), "Growth rate r(f) of the cost-weighted semigroup");

    py::class_<rsic::SolveOptions>(m, "SolveOptions")
        .def(py::init<>())
        .def_readwrite("tol", &rsic::SolveOptions::tol)
        .def_readwrite("max_iters", &rsic::SolveOptions::max_iters)
        .def_readwrite("degeneracy_margin", &rsic::SolveOptions::degeneracy_margin);

    py::class_<rsic::EigenSolution>(m, "EigenSolution")
        .def_readonly("m", &rsic::EigenSolution::m)
        .def_readonly("k", &rsic::EigenSolution::k)
        .def_readonly("delta", &rsic::EigenSolution::delta)
        .def_readonly("lam", &rsic::EigenSolution::lambda)
        .def_readonly("tilde_lambda", &rsic::EigenSolution::tilde_lambda)
        .def_readonly("w", &rsic::EigenSolution::w)
        .def_readonly("iterations", &rsic::EigenSolution::iterations)
        .def_readonly("cw_spread", &rsic::EigenSolution::cw_spread)
        .def_readonly("residual", &rsic::EigenSolution::residual);
    m.def("solve_one_step", &rsic::solve_one_step, py::arg("spec"), py::arg("m"), py::arg("k"),
          py::arg("opts") = rsic::SolveOptions{},
          "One-step eigenproblem on exhaustion level m with step 2^-k");

    py::class_<rsic::LadderEntry>(m, "LadderEntry")
        .def_readonly("m", &rsic::LadderEntry::m)
        .def_readonly("k", &rsic::LadderEntry::k)
        .def_readonly("delta", &rsic::LadderEntry::delta)
        .def_readonly("lam", &rsic::LadderEntry::lambda)
        .def_readonly("residual", &rsic::LadderEntry::residual)
        .def_readonly("iterations", &rsic::LadderEntry::iterations);

    py::class_<rsic::BellmanSolution>(m, "BellmanSolution")
        .def_readonly("lam", &rsic::BellmanSolution::lambda)
        .def_readonly("r_f", &rsic::BellmanSolution::r_f)
        .def_readonly("degenerate", &rsic::BellmanSolution::degenerate)
        .def_readonly("finest_k", &rsic::BellmanSolution::finest_k)
        .def_readonly("finest_delta", &rsic::BellmanSolution::finest_delta)
        .def_readonly("w", &rsic::BellmanSolution::w)
        .def_readonly("Mw", &rsic::BellmanSolution::Mw)
        .def_readonly("ladder", &rsic::BellmanSolution::ladder)
        .def_readonly("monotone_in_m", &rsic::BellmanSolution::monotone_in_m)
        .def_readonly("monotone_in_k", &rsic::BellmanSolution::monotone_in_k);
    m.def("solve", &rsic::lambda_full, py::arg("spec"), py::arg("opts") = rsic::SolveOptions{},
          "Full solve across every exhaustion level and grid level");
    m.def("bellman_residual", &rsic::bellman_residual, py::arg("spec"), py::arg("solution"),
          py::arg("horizon_steps"),
          "sup-norm gap between w and its re-derivation by stopping-value iteration");

    py::class_<rsic::Policy>(m, "Policy")
        .def(py::init<>())
        .def_readwrite("action", &rsic::Policy::action)
        .def_readwrite("level", &rsic::Policy::level);
    m.def("strategy_from_solution", &rsic::strategy_from_solution, py::arg("spec"),
          py::arg("solution"), py::arg("tol") = 1e-9,
          "Optimal stationary policy read off a nondegenerate solution");

    py::class_<rsic::PolicyValue>(m, "PolicyValue")
        .def_readonly("growth_rate", &rsic::PolicyValue::growth_rate)
        .def_readonly("rho", &rsic::PolicyValue::rho)
        .def_readonly("per_state", &rsic::PolicyValue::per_state)
        .def_readonly("reducible", &rsic::PolicyValue::reducible);
    m.def("policy_growth_rate", &rsic::policy_growth_rate, py::arg("spec"), py::arg("policy"),
          py::arg("k"), "Long-run growth rate of one fixed stationary policy");

    py::class_<rsic::OracleResult>(m, "OracleResult")
        .def_readonly("lam", &rsic::OracleResult::lambda)
        .def_readonly("best", &rsic::OracleResult::best)
        .def_readonly("enumerated", &rsic::OracleResult::enumerated)
        .def_readonly("reducible", &rsic::OracleResult::reducible);
    m.def("oracle_lambda", &rsic::oracle_lambda, py::arg("spec"), py::arg("k"),
          py::arg("level") = -1, py::arg("cap") = 1e6,
          "Brute-force optimum over all stationary policies");

    py::class_<rsic::SimConfig>(m, "SimConfig")
        .def(py::init<>())
        .def_readwrite("horizon", &rsic::SimConfig::horizon)
        .def_readwrite("trajectories", &rsic::SimConfig::trajectories)
        .def_readwrite("seed", &rsic::SimConfig::seed)
        .def_readwrite("start", &rsic::SimConfig::start)
        .def_readwrite("grid_k", &rsic::SimConfig::grid_k)
        .def_readwrite("decide_at_zero", &rsic::SimConfig::decide_at_zero)
        .def_readwrite("jump_time_mode", &rsic::SimConfig::jump_time_mode)
        .def_readwrite("bootstrap", &rsic::SimConfig::bootstrap)
        .def_readwrite("checkpoints", &rsic::SimConfig::checkpoints)
        .def_readwrite("threads", &rsic::SimConfig::threads);

    py::class_<rsic::ImpulseStats>(m, "ImpulseStats")
        .def_readonly("min_rate", &rsic::ImpulseStats::min_rate)
        .def_readonly("mean_rate", &rsic::ImpulseStats::mean_rate)
        .def_readonly("max_rate", &rsic::ImpulseStats::max_rate)
        .def_readonly("max_burst", &rsic::ImpulseStats::max_burst)
        .def_readonly("hard_cap", &rsic::ImpulseStats::hard_cap)
        .def_readonly("total_impulses", &rsic::ImpulseStats::total_impulses);

    py::class_<rsic::JEstimate>(m, "JEstimate")
        .def_readonly("point", &rsic::JEstimate::point)
        .def_readonly("std_error", &rsic::JEstimate::std_error)
        .def_readonly("trajectories", &rsic::JEstimate::trajectories)
        .def_readonly("horizon", &rsic::JEstimate::horizon)
        .def_readonly("ladder_T", &rsic::JEstimate::ladder_T)
        .def_readonly("ladder_point", &rsic::JEstimate::ladder_point)
        .def_readonly("impulses", &rsic::JEstimate::impulses)
        .def_readonly("exponents", &rsic::JEstimate::exponents);
    m.def("estimate_J", &rsic::estimate_J, py::arg("spec"), py::arg("policy"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Monte Carlo growth-rate estimate under a fixed policy");
}
