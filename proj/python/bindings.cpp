#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qident/error.hpp"
#include "qident/estimate.hpp"
#include "qident/io.hpp"
#include "qident/qmatrix.hpp"
#include "qident/witness.hpp"

namespace py = pybind11;
using namespace qident;

namespace {

QMatrix to_q(const std::vector<std::vector<int>>& rows) { return QMatrix(rows); }

py::dict verdict_dict(const IdentifiabilityVerdict& v) {
    py::dict d;
    d["scenario"] = scenario_name(v.scenario);
    d["label"] = scenario_label(v.scenario);
    d["conditions"] = py::dict(py::arg("A") = v.conditions.A, py::arg("B") = v.conditions.B,
                               py::arg("C") = v.conditions.C, py::arg("D") = v.conditions.D,
                               py::arg("E") = v.conditions.E,
                               py::arg("generic_complete") = v.conditions.generic_complete);
    d["constraints"] = v.constraints;
    d["notes"] = v.notes;
    return d;
}

Model dina(const std::vector<std::vector<int>>& q, std::vector<double> s, std::vector<double> g,
           std::vector<double> p) {
    Model m;
    m.kind = ModelKind::Dina;
    m.q = to_q(q);
    m.params = DinaParams{std::move(s), std::move(g)};
    m.p = std::move(p);
    validate_model(m, false);
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "qident core";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "QidentError", PyExc_ValueError);

    m.def("check_dina", [](const std::vector<std::vector<int>>& q) { return verdict_dict(classify_dina(to_q(q))); });
    m.def("check_gdina", [](const std::vector<std::vector<int>>& q) { return verdict_dict(classify_gdina(to_q(q))); });
    m.def("generic_complete", [](const std::vector<std::vector<int>>& q) {
        return check_generic_completeness(to_q(q)).ok;
    });
    m.def("enumerate", [](int J, int K) {
        std::vector<std::vector<std::vector<int>>> out;
        for (const auto& q : enumerate_canonical(J, K)) out.push_back(q.to_vectors());
        return out;
    }, py::arg("J"), py::arg("K"));
    m.def("q_equivalent", [](const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
        return q_equivalent(to_q(a), to_q(b));
    });
    m.def("dina_distribution", [](const std::vector<std::vector<int>>& q, std::vector<double> s,
                                  std::vector<double> g, std::vector<double> p) {
        return full_distribution(dina(q, std::move(s), std::move(g), std::move(p)));
    });
    m.def("simulate_dina", [](const std::vector<std::vector<int>>& q, std::vector<double> s, std::vector<double> g,
                              std::vector<double> p, std::size_t n, std::uint64_t seed) {
        return simulate(dina(q, std::move(s), std::move(g), std::move(p)), n, seed).responses;
    });
    m.def("fit", [](const std::string& model, const std::vector<std::vector<int>>& q,
                    const std::vector<std::uint64_t>& responses, int restarts, std::uint64_t seed) {
        Dataset d;
        d.items = static_cast<int>(q.size());
        d.responses = responses;
        auto f = multistart_fit(parse_model(model), to_q(q), d.tabulate(), restarts, seed);
        return dump(to_json(f));
    }, py::arg("model"), py::arg("q"), py::arg("responses"), py::arg("restarts") = 10, py::arg("seed") = 1);
    m.def("q24_witnesses", [](std::vector<double> s, std::vector<double> g, std::vector<double> p) {
        std::vector<double> diffs;
        for (auto& w : dina_q24_two_solutions(DinaParams{std::move(s), std::move(g)}, p))
            diffs.push_back(w.certified_max_diff);
        return diffs;
    });
}
