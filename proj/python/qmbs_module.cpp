#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qmbs/errors.hpp"
#include "qmbs/ffspectra.hpp"
#include "qmbs/freeprob.hpp"
#include "qmbs/motzkin.hpp"
#include "qmbs/mps.hpp"
#include "qmbs/slider.hpp"

namespace py = pybind11;
using namespace qmbs;

namespace {

py::int_ to_py(const BigInt& x) { return py::int_(py::str(x.str())); }

py::dict spectrum_dict(const SchmidtSpectrum& s) {
    py::dict d;
    d["p"] = s.p;
    py::list mult;
    for (const auto& m : s.multiplicity) mult.append(to_py(m));
    d["multiplicity"] = mult;
    d["rank"] = to_py(s.rank);
    d["entropy_bits"] = s.entropy_bits;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qmbs, m) {
    m.doc() = "Spectra and ground states of quantum many-body chains";

    py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

    // slider
    m.def("one_minus_p_universal", &one_minus_p_universal, py::arg("N"), py::arg("d"), py::arg("beta") = 1);
    m.def(
        "kurtosis_theory",
        [](int r, int N, int d, int beta) {
            auto k = kurtosis_theory(r, N, d, beta);
            return py::dict(py::arg("classical") = k.classical, py::arg("iso") = k.iso, py::arg("quantum") = k.quantum);
        },
        py::arg("r"), py::arg("N"), py::arg("d") = 2, py::arg("beta") = 1);
    m.def(
        "mc_kurtoses",
        [](int N, int d, int r, int beta, long long trials, std::uint64_t seed, int threads) {
            McOptions opt{trials, seed, threads, 100};
            SliderMC mc;
            {
                py::gil_scoped_release release;
                mc = mc_kurtoses(ChainSpec{N, d, 2, beta, seed}, LocalKind::wishart(r, beta), opt);
            }
            py::dict out;
            const char* names[3] = {"classical", "iso", "quantum"};
            for (int e = 0; e < 3; ++e) {
                auto k = mc.kurtosis(e);
                out[names[e]] = py::make_tuple(k.value, k.error);
            }
            return out;
        },
        py::arg("N"), py::arg("d"), py::arg("r"), py::arg("beta") = 1, py::arg("trials") = 10000, py::arg("seed") = 0,
        py::arg("threads") = 1);

    // freeprob
    m.def("ie_parameter_anderson", &ie_parameter_anderson, py::arg("sigma"), py::arg("J"));
    m.def(
        "free_convolution_semicircle_arcsine",
        [](double variance, double J, const std::vector<double>& edges) {
            auto fc = free_convolve_analytic(SpectralLaw::semicircle(variance), SpectralLaw::arcsine(J), edges);
            std::vector<double> heights;
            for (int i = 0; i < fc.density.bins(); ++i) heights.push_back(fc.density.height(i));
            return py::make_tuple(heights, fc.raw_mass);
        },
        py::arg("variance"), py::arg("J"), py::arg("edges"),
        "Density heights on the given bin edges and the mass before normalization.");

    // motzkin
    m.def("motzkin_number", [](int n) { return to_py(motzkin_number(n)); }, py::arg("n"));
    m.def("motzkin_schmidt", [](int n) { return spectrum_dict(schmidt_spectrum_d3(n)); }, py::arg("n"));
    m.def("d4_schmidt", [](int n) { return spectrum_dict(d4_schmidt(n)); }, py::arg("n"));
    m.def("motzkin_state", &motzkin_state, py::arg("n"));

    // ffspectra
    m.def(
        "motzkin_gap",
        [](int n) {
            auto g = motzkin_gap(n);
            return py::make_tuple(g.lambda1, g.lambda2, g.sector);
        },
        py::arg("n"));
    m.def("motzkin_hamiltonian", [](int n) { return build_motzkin_H(n).to_dense(); }, py::arg("n"),
          "Dense Hamiltonian on 3^n states (small n only).");
    m.def(
        "degeneracy_recursion",
        [](int N, int d, int r) {
            auto rep = degeneracy_recursion(N, d, r);
            py::list D;
            for (const auto& x : rep.D) D.append(to_py(x));
            return py::make_tuple(regime_name(rep.regime), D);
        },
        py::arg("N"), py::arg("d"), py::arg("r"));
    m.def(
        "ff_ground_dim",
        [](int N, int d, int r, std::uint64_t seed) { return ground_dim_numeric(generic_ff_chain(N, d, r, seed)); },
        py::arg("N"), py::arg("d"), py::arg("r"), py::arg("seed") = 0);

    // mps
    m.def(
        "mps_ground_energy",
        [](int N, int d, int r, const std::vector<int>& chis, std::uint64_t seed, int max_sweeps) {
            ImagTimeOptions opt;
            opt.max_sweeps_per_stage = max_sweeps;
            std::vector<ChiPoint> pts;
            {
                py::gil_scoped_release release;
                pts = energy_vs_chi(N, d, ff_local_terms(random_projector_terms(N, d, r, seed)), chis, seed, opt);
            }
            std::vector<double> e;
            for (const auto& p : pts) e.push_back(p.energy);
            return e;
        },
        py::arg("N"), py::arg("d"), py::arg("r"), py::arg("chis"), py::arg("seed") = 0, py::arg("max_sweeps") = 2000,
        "Imaginary-time energies of a random projector chain, one per bond cap.");
    m.def(
        "motzkin_mps_schmidt",
        [](int n, int chi) {
            auto run = imaginary_time_ground(init_product_state(n, 3, chi), motzkin_local_terms(n));
            return py::make_tuple(run.final_energy, schmidt_at_bond(run.state, n / 2));
        },
        py::arg("n"), py::arg("chi") = 16, "Converged energy and mid-bond Schmidt values of the Motzkin chain.");
}
