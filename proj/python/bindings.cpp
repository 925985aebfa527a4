#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fedtd/fedtd.hpp"

namespace py = pybind11;
using namespace fedtd;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw ParameterError("expected a 2-d array");
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
}

Vector to_vector(const Array& a) {
    if (a.ndim() != 1) throw ParameterError("expected a 1-d array");
    return Vector(a.data(), a.data() + a.size());
}

Array from_matrix(const Matrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.data().begin(), m.data().end(), out.mutable_data());
    return out;
}

Array from_vector(const Vector& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict trace_dict(const ErrorTrace& t) {
    py::dict d;
    d["initial_l2"] = t.initial_l2;
    d["initial_rmse"] = t.initial_rmse;
    d["steps"] = t.steps;
    d["l2"] = from_vector(t.l2);
    d["rmse"] = from_vector(t.rmse);
    return d;
}

}  // namespace

PYBIND11_MODULE(_fedtd, m) {
    m.doc() = "Federated TD(0) policy evaluation under model mismatch";
    m.attr("__version__") = std::string(library_version());

    py::class_<Mrp>(m, "Mrp")
        .def(py::init([](const Array& transition, const Array& reward, double gamma) {
                 Mrp mrp{to_matrix(transition), to_vector(reward), gamma};
                 mrp.validate();
                 return mrp;
             }),
             py::arg("transition"), py::arg("reward"), py::arg("gamma"))
        .def_property_readonly("transition", [](const Mrp& s) { return from_matrix(s.transition); })
        .def_property_readonly("reward", [](const Mrp& s) { return from_vector(s.reward); })
        .def_readonly("gamma", &Mrp::gamma)
        .def_property_readonly("n_states", &Mrp::n_states);

    m.def("generate_random_mrp", &generate_random_mrp, py::arg("n_states"), py::arg("gamma"), py::arg("seed"));
    m.def("solve_true_value", [](const Mrp& mrp) { return from_vector(solve_true_value(mrp).values); });
    m.def(
        "stationary_distribution",
        [](const Array& p, double tol) { return from_vector(stationary_distribution(to_matrix(p), tol)); },
        py::arg("transition"), py::arg("tol") = 1e-13);
    m.def(
        "mixing_time", [](const Array& p, double eps) { return estimate_mixing_time(to_matrix(p), eps); },
        py::arg("transition"), py::arg("epsilon"));
    m.def("spectral_norm", [](const Array& a) { return spectral_norm(to_matrix(a)); });
    m.def("project_row_to_simplex", [](const Array& row) {
        const auto v = to_vector(row);
        return from_vector(project_row_to_simplex(v));
    });
    m.def(
        "perturb_kernel",
        [](const Array& base, double delta, const std::string& norm, std::uint64_t seed) {
            return from_matrix(perturb_kernel(to_matrix(base), delta, parse_norm_kind(norm), seed));
        },
        py::arg("base"), py::arg("delta"), py::arg("norm") = "frobenius", py::arg("seed") = 0);

    py::class_<PerturbedEnsemble>(m, "PerturbedEnsemble")
        .def_property_readonly("kernels",
                               [](const PerturbedEnsemble& e) {
                                   py::list out;
                                   for (const auto& k : e.kernels) out.append(from_matrix(k));
                                   return out;
                               })
        .def_readonly("delta_target", &PerturbedEnsemble::delta_target)
        .def_property_readonly("delta_realized", [](const PerturbedEnsemble& e) { return from_vector(e.delta_realized); })
        .def_property_readonly("delta_spectral", [](const PerturbedEnsemble& e) { return from_vector(e.delta_spectral); })
        .def_readonly("lambda_realized", &PerturbedEnsemble::lambda_realized)
        .def("average_kernel", [](const PerturbedEnsemble& e) { return from_matrix(e.average_kernel()); })
        .def("__len__", &PerturbedEnsemble::size);

    m.def(
        "build_ensemble",
        [](const Mrp& mrp, std::size_t n_agents, double delta, const std::string& norm, std::uint64_t seed) {
            return build_ensemble(mrp, n_agents, delta, parse_norm_kind(norm), seed);
        },
        py::arg("mrp"), py::arg("n_agents"), py::arg("delta"), py::arg("norm") = "frobenius", py::arg("seed") = 0);

    m.def(
        "td_step",
        [](const Array& values, std::size_t state, double reward, std::size_t next_state, double alpha, double gamma) {
            const ValueTable v(to_vector(values));
            if (state >= v.size() || next_state >= v.size()) throw ParameterError("state index out of range");
            return from_vector(td_step(v, Transition{state, reward, next_state}, alpha, gamma).values);
        },
        py::arg("values"), py::arg("state"), py::arg("reward"), py::arg("next_state"), py::arg("alpha"),
        py::arg("gamma"));

    m.def(
        "server_aggregate",
        [](const Array& global, const std::vector<Array>& deltas, double beta) {
            std::vector<ValueTable> d;
            for (const auto& a : deltas) d.emplace_back(to_vector(a));
            return from_vector(server_aggregate(ValueTable(to_vector(global)), d, beta).values);
        },
        py::arg("global_values"), py::arg("deltas"), py::arg("beta"));

    m.def(
        "run_single_agent",
        [](const Mrp& mrp, const Array& kernel, double alpha, std::size_t steps, const std::string& regime,
           std::uint64_t seed, std::size_t log_stride, const std::string& iid_option) {
            TdConfig cfg;
            cfg.alpha = alpha;
            cfg.total_steps = steps;
            cfg.log_stride = log_stride;
            cfg.iid_option = parse_iid_option(iid_option);
            const Matrix k = to_matrix(kernel);
            ErrorTrace trace;
            {
                py::gil_scoped_release release;
                trace = run_single_agent(mrp, k, cfg, parse_regime(regime), seed);
            }
            return trace_dict(trace);
        },
        py::arg("mrp"), py::arg("kernel"), py::arg("alpha"), py::arg("steps"), py::arg("regime") = "markov",
        py::arg("seed") = 0, py::arg("log_stride") = 0, py::arg("iid_option") = "stationary");

    m.def(
        "run_fedtd",
        [](const Mrp& mrp, const PerturbedEnsemble& ensemble, std::size_t local_steps, std::size_t rounds,
           double alpha, double beta, const std::string& regime, std::uint64_t seed, std::size_t log_stride,
           const std::string& iid_option) {
            FedConfig cfg;
            cfg.n_agents = ensemble.size();
            cfg.local_steps = local_steps;
            cfg.rounds = rounds;
            cfg.alpha = alpha;
            cfg.beta = beta;
            cfg.log_stride = log_stride;
            cfg.iid_option = parse_iid_option(iid_option);
            ErrorTrace trace;
            {
                py::gil_scoped_release release;
                trace = run_fedtd(mrp, ensemble, cfg, parse_regime(regime), seed);
            }
            return trace_dict(trace);
        },
        py::arg("mrp"), py::arg("ensemble"), py::arg("local_steps"), py::arg("rounds"), py::arg("alpha"),
        py::arg("beta"), py::arg("regime") = "markov", py::arg("seed") = 0, py::arg("log_stride") = 0,
        py::arg("iid_option") = "stationary");

    py::class_<BoundParams>(m, "BoundParams")
        .def(py::init<>())
        .def_readwrite("alpha", &BoundParams::alpha)
        .def_readwrite("beta", &BoundParams::beta)
        .def_readwrite("gamma", &BoundParams::gamma)
        .def_readwrite("local_steps", &BoundParams::local_steps)
        .def_readwrite("n_agents", &BoundParams::n_agents)
        .def_readwrite("horizon", &BoundParams::horizon)
        .def_readwrite("delta_mismatch", &BoundParams::delta_mismatch)
        .def_readwrite("lambda_mismatch", &BoundParams::lambda_mismatch)
        .def_readwrite("n_states", &BoundParams::n_states)
        .def_readwrite("e0_norm", &BoundParams::e0_norm)
        .def_readwrite("delta_prob", &BoundParams::delta_prob)
        .def_readwrite("tau", &BoundParams::tau)
        .def_readwrite("c_p", &BoundParams::c_p)
        .def_readwrite("c_mu", &BoundParams::c_mu);

    m.def(
        "evaluate_bound",
        [](int theorem, double t, const BoundParams& p) {
            const auto b = evaluate_bound(theorem, t, p);
            return py::make_tuple(b.value, b.saturated);
        },
        py::arg("theorem"), py::arg("t"), py::arg("params"));
    m.def("fed_bound_terms", [](const BoundParams& p) {
        const auto t = fed_bound_terms(p);
        py::dict d;
        d["rho"] = t.rho;
        d["local_decay"] = t.local_decay;
        d["c"] = t.c;
        d["b1"] = t.b1;
        d["b2"] = t.b2;
        return d;
    });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("name", &ExperimentConfig::name)
        .def_readwrite("n_states", &ExperimentConfig::n_states)
        .def_readwrite("gamma", &ExperimentConfig::gamma)
        .def_readwrite("alpha", &ExperimentConfig::alpha)
        .def_readwrite("beta", &ExperimentConfig::beta)
        .def_readwrite("rounds", &ExperimentConfig::rounds)
        .def_readwrite("local_steps", &ExperimentConfig::local_steps)
        .def_readwrite("n_agents", &ExperimentConfig::n_agents)
        .def_readwrite("delta", &ExperimentConfig::delta)
        .def_property(
            "regime", [](const ExperimentConfig& c) { return std::string(to_string(c.regime)); },
            [](ExperimentConfig& c, const std::string& s) { c.regime = parse_regime(s); })
        .def_property(
            "iid_option", [](const ExperimentConfig& c) { return std::string(to_string(c.iid_option)); },
            [](ExperimentConfig& c, const std::string& s) { c.iid_option = parse_iid_option(s); })
        .def_property(
            "norm", [](const ExperimentConfig& c) { return std::string(to_string(c.norm_kind)); },
            [](ExperimentConfig& c, const std::string& s) { c.norm_kind = parse_norm_kind(s); })
        .def_property(
            "sweep", [](const ExperimentConfig& c) { return std::string(to_string(c.sweep)); },
            [](ExperimentConfig& c, const std::string& s) { c.sweep = parse_sweep_dimension(s); })
        .def_readwrite("sweep_values", &ExperimentConfig::sweep_values)
        .def_readwrite("seeds", &ExperimentConfig::seeds)
        .def_readwrite("master_seed", &ExperimentConfig::master_seed)
        .def_readwrite("log_stride", &ExperimentConfig::log_stride)
        .def_readwrite("emit_bounds", &ExperimentConfig::emit_bounds)
        .def_readwrite("delta_prob", &ExperimentConfig::delta_prob)
        .def("validate", &ExperimentConfig::validate);

    m.def(
        "run_sweep",
        [](const ExperimentConfig& config, const std::string& output_dir, unsigned threads, bool persist) {
            SweepOptions options{threads, output_dir, persist};
            std::vector<RunRecord> records;
            {
                py::gil_scoped_release release;
                records = run_sweep(config, options);
            }
            py::list out;
            for (const auto& r : records) {
                py::dict d;
                d["cell_index"] = r.cell_index;
                d["rounds"] = r.rounds;
                d["seeds"] = r.seeds;
                d["mean_rmse"] = from_vector(r.mean_rmse);
                d["std_rmse"] = from_vector(r.std_rmse);
                py::list per_seed;
                for (const auto& s : r.per_seed_rmse) per_seed.append(from_vector(s));
                d["per_seed_rmse"] = per_seed;
                d["bound_theorem"] = r.bound_theorem;
                d["bound_rmse"] = from_vector(r.bound_rmse);
                d["failure"] = r.failure;
                d["csv_path"] = r.csv_path.string();
                out.append(d);
            }
            return out;
        },
        py::arg("config"), py::arg("output_dir") = "results", py::arg("threads") = 1, py::arg("persist") = true);

    m.def("figure_ids", &figure_ids);
}
