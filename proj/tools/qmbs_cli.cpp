#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "qmbs/errors.hpp"
#include "qmbs/ffspectra.hpp"
#include "qmbs/freeprob.hpp"
#include "qmbs/motzkin.hpp"
#include "qmbs/mps.hpp"
#include "qmbs/slider.hpp"

#ifndef QMBS_VERSION
#define QMBS_VERSION "0.0.0"
#endif

using namespace qmbs;
using json = nlohmann::ordered_json;

namespace {

using Cell = std::variant<long long, double, std::string>;

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string fmt(const Cell& c) {
    if (auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto* d = std::get_if<double>(&c)) return fmt(*d);
    return std::get<std::string>(c);
}

struct Output {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void set(const std::string& k, const std::string& v) { meta.emplace_back(k, v); }
    void set(const std::string& k, double v) { meta.emplace_back(k, fmt(v)); }
    void set(const std::string& k, long long v) { meta.emplace_back(k, std::to_string(v)); }
    void set(const std::string& k, int v) { meta.emplace_back(k, std::to_string(v)); }
    void set(const std::string& k, bool v) { meta.emplace_back(k, v ? "true" : "false"); }
};

void write_csv(std::ostream& os, const Output& out) {
    for (const auto& [k, v] : out.meta) os << "# " << k << "=" << v << "\n";
    for (size_t i = 0; i < out.columns.size(); ++i) os << (i ? "," : "") << out.columns[i];
    os << "\n";
    for (const auto& row : out.rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt(row[i]);
        os << "\n";
    }
}

void write_json(std::ostream& os, const Output& out) {
    json j;
    j["meta"] = json::object();
    for (const auto& [k, v] : out.meta) j["meta"][k] = v;
    j["columns"] = out.columns;
    j["rows"] = json::array();
    for (const auto& row : out.rows) {
        json r = json::array();
        for (const auto& c : row) {
            if (auto* i = std::get_if<long long>(&c)) r.push_back(*i);
            else if (auto* d = std::get_if<double>(&c)) std::isfinite(*d) ? r.push_back(*d) : r.push_back(fmt(*d));
            else r.push_back(std::get<std::string>(c));
        }
        j["rows"].push_back(r);
    }
    os << j.dump(2) << "\n";
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            size_t pos = 0;
            int v = std::stoi(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParameterError("not an integer list: " + s);
        }
    }
    if (out.empty()) throw ParameterError("empty integer list");
    return out;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "I" || s == "1") return Scheme::I;
    if (s == "II" || s == "2") return Scheme::II;
    throw ParameterError("scheme must be I or II");
}

NoiseLaw parse_noise(const std::string& s) {
    if (s == "gaussian") return NoiseLaw::Gaussian;
    if (s == "semicircle") return NoiseLaw::Semicircle;
    throw ParameterError("noise must be gaussian or semicircle");
}

struct Common {
    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "csv";
    int threads = 1;
    std::string config;
};

std::uint64_t default_seed() {
    const char* env = std::getenv("QMBS_SEED");
    if (!env || !*env) return 0;
    std::uint64_t v = 0;
    auto r = std::from_chars(env, env + std::strlen(env), v);
    if (r.ec != std::errc() || *r.ptr != '\0') throw ParameterError("QMBS_SEED is not an unsigned integer");
    return v;
}

// Prepends "--key value" pairs from a JSON object so that later command-line flags win.
std::vector<std::string> config_args(const std::string& path, std::string& subcommand) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ParameterError(std::string("bad config: ") + e.what());
    }
    if (!j.is_object()) throw ParameterError("config must be a JSON object");
    std::vector<std::string> args;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "subcommand") {
            subcommand = it.value().get<std::string>();
            continue;
        }
        std::string val;
        const auto& v = it.value();
        if (v.is_string()) val = v.get<std::string>();
        else if (v.is_boolean()) val = v.get<bool>() ? "true" : "false";
        else if (v.is_array()) {
            for (size_t i = 0; i < v.size(); ++i) val += (i ? "," : "") + (v[i].is_string() ? v[i].get<std::string>() : v[i].dump());
        } else val = v.dump();
        args.push_back("--" + it.key());
        args.push_back(val);
    }
    return args;
}

// ---------------------------------------------------------------- subcommands

struct SliderArgs {
    int N = 5, d = 2, beta = 1, r = 0;
    long long trials = 0;
    int bins = 0;
};

Output run_ie_slider(const SliderArgs& a, const Common& c) {
    Output out;
    out.columns = {"method", "p", "one_minus_p", "error"};
    const double q = one_minus_p_universal(a.N, a.d, a.beta);
    out.rows.push_back({std::string("closed_form"), 1 - q, q, 0.0});
    if (a.trials > 0) {
        if (a.r < 1) throw ParameterError("--r is required with --trials");
        McOptions mc{a.trials, c.seed, c.threads, 100};
        auto est = p_from_departing(ChainSpec{a.N, a.d, 2, a.beta, c.seed}, LocalKind::wishart(a.r, a.beta), mc);
        out.rows.push_back({std::string("departing_terms"), 1 - est.value, est.value, est.error});
    }
    std::cerr << "1-p = " << fmt(std::round(q * 1e5) / 1e5) << "\n";
    return out;
}

Output run_ie_density(const SliderArgs& a, const Common& c) {
    if (a.r < 1) throw ParameterError("--r must be >= 1");
    DensityOptions opt;
    opt.mc = McOptions{a.trials > 0 ? a.trials : 2000, c.seed, c.threads, 100};
    opt.bins = a.bins;
    auto res = ie_density(ChainSpec{a.N, a.d, 2, a.beta, c.seed}, LocalKind::wishart(a.r, a.beta), opt);
    Output out;
    out.set("p", res.p);
    out.columns = {"center", "classical", "iso", "quantum", "ie"};
    for (int i = 0; i < res.quantum.bins(); ++i)
        out.rows.push_back({res.quantum.center(i), res.classical.height(i), res.iso.height(i), res.quantum.height(i),
                            res.ie.height(i)});
    return out;
}

struct AndersonArgs {
    int N = 500;
    double J = 1, sigma = 1;
    std::string noise = "semicircle", scheme = "I";
    int samples = 20, bins = 60, kmax = 8, trials = 200;
    double threshold = 5;
};

Output run_anderson_dos(const AndersonArgs& a, const Common& c) {
    AndersonSpec spec{a.N, a.J, a.sigma, parse_noise(a.noise)};
    if (a.samples < 1 || a.bins < 2) throw ParameterError("--samples >= 1 and --bins >= 2 required");
    std::vector<double> eigs;
    for (int s = 0; s < a.samples; ++s) {
        RngStream rng(c.seed, s);
        auto H = build_anderson(spec, rng);
        Vec ev = eigvals_sym(H.to_dense());
        eigs.insert(eigs.end(), ev.data(), ev.data() + ev.size());
    }
    const double reach = 2 * std::abs(a.J) + 2.5 * a.sigma + 0.5;
    auto edges = uniform_edges(-reach, reach, a.bins);
    Density exact = histogram(eigs, edges);
    auto free = free_convolve_analytic(SpectralLaw::semicircle(a.sigma * a.sigma), SpectralLaw::arcsine(a.J), edges);
    Output out;
    out.set("free_mass", free.raw_mass);
    out.set("free_failures", free.failures);
    out.set("ie_parameter", ie_parameter_anderson(a.sigma, a.J));
    out.columns = {"center", "exact", "free"};
    for (int i = 0; i < exact.bins(); ++i) out.rows.push_back({exact.center(i), exact.height(i), free.density.height(i)});
    return out;
}

Output run_anderson_degree(const AndersonArgs& a, const Common& c) {
    AndersonSpec spec{a.N, a.J, a.sigma, parse_noise(a.noise)};
    DegreeOptions opt{a.kmax, a.trials, a.threshold, 1e-9, c.seed};
    auto res = approximation_degree(spec, parse_scheme(a.scheme), opt);
    Output out;
    out.set("degree", res.degree);
    out.set("ie_parameter", ie_parameter_anderson(a.sigma, a.J));
    out.columns = {"word", "degree", "rotations", "value", "error", "nonzero"};
    for (const auto& w : res.words)
        out.rows.push_back({w.word.pattern, static_cast<long long>(w.word.degree), static_cast<long long>(w.word.rotations),
                            w.value.value, w.value.error, static_cast<long long>(w.nonzero)});
    std::cerr << "approximation degree = " << res.degree << "\n";
    return out;
}

std::string big_str(const BigInt& x) { return x.str(); }

Output spectrum_output(const SchmidtSpectrum& sp) {
    Output out;
    out.set("entropy_bits", sp.entropy_bits);
    out.set("rank", big_str(sp.rank));
    out.columns = {"m", "p_m", "multiplicity", "p_m_exact"};
    for (size_t m = 0; m < sp.p.size(); ++m)
        out.rows.push_back({static_cast<long long>(m), sp.p[m], big_str(sp.multiplicity[m]),
                            m < sp.exact.size() ? sp.exact[m].str() : std::string()});
    return out;
}

Output run_motzkin_entropy(int n) {
    auto sp = n > 4096 ? schmidt_spectrum_d3_logdomain(n) : schmidt_spectrum_d3(n);
    Output out = spectrum_output(sp);
    out.set("asymptotic_bits", entropy_asymptotics_d3(n));
    std::cerr << "S = " << fmt(std::round(sp.entropy_bits * 1e4) / 1e4) << " bits\n";
    return out;
}

Output run_d4_entropy(int n) {
    auto sp = d4_schmidt(n);
    Output out = spectrum_output(sp);
    out.set("asymptotic_bits", d4_entropy_asymptotic(n));
    std::cerr << "S = " << fmt(std::round(sp.entropy_bits * 1e4) / 1e4) << " bits\n";
    return out;
}

Output run_motzkin_gap(int nmin, int nmax) {
    if (nmin < 2 || nmax < nmin) throw ParameterError("need 2 <= n-min <= n-max");
    Output out;
    out.columns = {"n", "lambda1", "lambda2", "sector"};
    std::vector<double> xs, ys;
    for (int n = nmin; n <= nmax; ++n) {
        auto g = motzkin_gap(n);
        out.rows.push_back({static_cast<long long>(n), g.lambda1, g.lambda2, g.sector});
        xs.push_back(n);
        ys.push_back(g.lambda2);
    }
    if (xs.size() >= 3) {
        auto fit = loglog_fit(xs, ys);
        out.set("slope", fit.slope);
        out.set("intercept_ln", fit.intercept);
        out.set("slope_error", fit.slope_error);
    }
    return out;
}

Output run_ff_regimes(int d, int r, int N, bool numeric, const Common& c) {
    auto rep = degeneracy_recursion(N, d, r);
    Output out;
    out.set("regime", regime_name(rep.regime));
    out.set("predicted_ground_dim", big_str(predicted_ground_dim(rep)));
    if (numeric) out.set("numeric_ground_dim", ground_dim_numeric(generic_ff_chain(N, d, r, c.seed)));
    out.columns = {"n", "D_n", "closed_form"};
    for (size_t n = 0; n < rep.D.size(); ++n)
        out.rows.push_back({static_cast<long long>(n), big_str(rep.D[n]), n < rep.closed_form.size() ? rep.closed_form[n] : NAN});
    std::cerr << regime_name(rep.regime) << "\n";
    return out;
}

Output run_supertree(int nmax, int kmax) {
    if (nmax < 2 || nmax > 10 || kmax < 2 || kmax > 10) throw ParameterError("supertree sizes must lie in 2..10");
    Output out;
    out.columns = {"check", "n", "ok", "detail"};
    bool all = true;
    for (int n = 2; n <= nmax; ++n) {
        auto mass = supertree_preimage_mass(n);
        BigRational target(catalan(n), catalan(n - 1));
        bool ok = std::all_of(mass.begin(), mass.end(), [&](const auto& kv) { return kv.second == target; });
        all = all && ok;
        out.rows.push_back({std::string("preimage_mass"), static_cast<long long>(n), static_cast<long long>(ok), target.str()});
    }
    for (int k = 2; k <= kmax; ++k) {
        auto match = supertree_integral_matching(k);
        std::map<std::string, int> count;
        for (const auto& [b, a] : match) ++count[a];
        int lo = 1 << 30, hi = 0;
        for (const auto& [a, cnt] : count) lo = std::min(lo, cnt), hi = std::max(hi, cnt);
        bool ok = count.size() == static_cast<size_t>(catalan(k - 1)) && lo >= 1 && hi <= 4 &&
                  match.size() == static_cast<size_t>(catalan(k));
        all = all && ok;
        out.rows.push_back({std::string("integral_matching"), static_cast<long long>(k), static_cast<long long>(ok),
                            std::to_string(lo) + ".." + std::to_string(hi)});
    }
    out.set("all_ok", all);
    if (!all) throw NumericError("supertree verification failed");
    return out;
}

struct MpsArgs {
    std::string model = "ff";
    int N = 10, d = 4, r = 2, n = 8;
    std::string chis = "8";
    int max_sweeps = 2000;
    double tau_start = 0.1, tau_end = 1e-3;
    int stages = 5;
    bool schmidt = false;
    std::string init;  // empty: zero for motzkin, random for ff
};

Output run_mps_gs(const MpsArgs& a, const Common& c) {
    ImagTimeOptions opt;
    opt.tau_start = a.tau_start;
    opt.tau_end = a.tau_end;
    opt.stages = a.stages;
    opt.max_sweeps_per_stage = a.max_sweeps;
    std::vector<LocalTerm> terms;
    int N = a.N, d = a.d;
    if (a.model == "motzkin") {
        N = a.n, d = 3;
        terms = motzkin_local_terms(N);
    } else if (a.model == "ff") {
        terms = ff_local_terms(random_projector_terms(N, d, a.r, c.seed));
    } else {
        throw ParameterError("model must be ff or motzkin");
    }
    std::string init = a.init.empty() ? (a.model == "motzkin" ? "zero" : "random") : a.init;
    if (init != "zero" && init != "random") throw ParameterError("init must be zero or random");
    Output out;
    out.set("sites", N);
    out.set("initial_state", init);
    std::string sched;
    for (double t : tau_schedule(opt)) sched += (sched.empty() ? "" : ";") + fmt(t);
    out.set("tau_schedule", sched);
    out.columns = {"chi", "energy", "sweeps", "converged", "quality_warning"};
    MpsState last;
    for (int chi : parse_int_list(a.chis)) {
        RngStream rng(c.seed, 0);
        auto start = init == "zero" ? init_product_state(N, d, chi) : random_product_state(N, d, chi, rng);
        auto run = imaginary_time_ground(start, terms, opt);
        out.rows.push_back({static_cast<long long>(chi), run.final_energy, static_cast<long long>(run.sweeps),
                            static_cast<long long>(run.converged), static_cast<long long>(run.quality_warning)});
        last = std::move(run.state);
    }
    if (a.schmidt) {
        Vec lam = schmidt_at_bond(last, N / 2);
        std::string s;
        for (long long i = 0; i < lam.size(); ++i) s += (i ? ";" : "") + fmt(lam(i));
        out.set("mid_bond_schmidt", s);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum many-body spectra experiments"};
    app.set_version_flag("--version", QMBS_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    Common common;
    try {
        common.seed = default_seed();
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "master seed (default QMBS_SEED or 0)");
        sub->add_option("--out", common.out_path, "output file (default stdout)");
        sub->add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", common.threads, "worker cap")->check(CLI::PositiveNumber);
        sub->add_option("--config", common.config, "JSON file of flag values; flags win");
    };

    std::map<std::string, std::function<Output()>> handlers;

    SliderArgs sl;
    for (const char* name : {"ie-slider", "ie-density"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "ie-slider" ? "IE mixing parameter 1-p"
                                                                               : "IE density and ensemble histograms");
        sub->add_option("--N", sl.N, "chain length");
        sub->add_option("--d", sl.d, "local dimension");
        sub->add_option("--beta", sl.beta, "field: 1 real, 2 complex");
        sub->add_option("--r", sl.r, "Wishart rank of the local terms");
        sub->add_option("--trials", sl.trials, "Monte Carlo trials");
        sub->add_option("--bins", sl.bins, "histogram bins (0: automatic)");
        add_common(sub);
    }
    handlers["ie-slider"] = [&] { return run_ie_slider(sl, common); };
    handlers["ie-density"] = [&] { return run_ie_density(sl, common); };

    AndersonArgs an;
    for (const char* name : {"anderson-dos", "anderson-degree"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "anderson-dos" ? "Anderson density of states"
                                                                                : "approximation degree of a scheme");
        sub->add_option("--N", an.N, "sites");
        sub->add_option("--J", an.J, "hopping");
        sub->add_option("--sigma", an.sigma, "on-site noise width");
        sub->add_option("--noise", an.noise, "gaussian or semicircle");
        add_common(sub);
        if (std::string(name) == "anderson-dos") {
            sub->add_option("--samples", an.samples, "disorder samples");
            sub->add_option("--bins", an.bins, "histogram bins");
        } else {
            sub->add_option("--scheme", an.scheme, "I or II");
            sub->add_option("--kmax", an.kmax, "largest word degree");
            sub->add_option("--trials", an.trials, "samples per word");
            sub->add_option("--threshold", an.threshold, "significance in standard errors");
        }
    }
    handlers["anderson-dos"] = [&] { return run_anderson_dos(an, common); };
    handlers["anderson-degree"] = [&] { return run_anderson_degree(an, common); };

    int ent_n = 4;
    auto* me = app.add_subcommand("motzkin-entropy", "half-chain Schmidt spectrum of the Motzkin state");
    me->add_option("--n", ent_n, "chain length (even)");
    add_common(me);
    handlers["motzkin-entropy"] = [&] { return run_motzkin_entropy(ent_n); };

    auto* de = app.add_subcommand("d4-entropy", "half-chain Schmidt spectrum of the d=4 state");
    de->add_option("--n", ent_n, "half length");
    add_common(de);
    handlers["d4-entropy"] = [&] { return run_d4_entropy(ent_n); };

    int gap_min = 3, gap_max = 8;
    auto* mg = app.add_subcommand("motzkin-gap", "spectral gap of the Motzkin chain");
    mg->add_option("--n-min", gap_min, "smallest chain");
    mg->add_option("--n-max", gap_max, "largest chain");
    add_common(mg);
    handlers["motzkin-gap"] = [&] { return run_motzkin_gap(gap_min, gap_max); };

    int ff_d = 4, ff_r = 6, ff_N = 20;
    bool ff_numeric = false;
    auto* fr = app.add_subcommand("ff-regimes", "ground-space regime of generic projector chains");
    fr->add_option("--d", ff_d, "local dimension");
    fr->add_option("--r", ff_r, "projector rank");
    fr->add_option("--N", ff_N, "chain length");
    fr->add_flag("--numeric", ff_numeric, "also count the numeric kernel of a random instance");
    add_common(fr);
    handlers["ff-regimes"] = [&] { return run_ff_regimes(ff_d, ff_r, ff_N, ff_numeric, common); };

    int st_n = 8, st_k = 9;
    auto* st = app.add_subcommand("supertree-verify", "exact checks of the supertree map");
    st->add_option("--n-max", st_n, "largest size for the preimage mass");
    st->add_option("--k-max", st_k, "largest size for the integral matching");
    add_common(st);
    handlers["supertree-verify"] = [&] { return run_supertree(st_n, st_k); };

    MpsArgs mp;
    auto* mg2 = app.add_subcommand("mps-gs", "imaginary-time MPS ground-state energies");
    mg2->add_option("--model", mp.model, "ff or motzkin");
    mg2->add_option("--N", mp.N, "chain length (ff)");
    mg2->add_option("--d", mp.d, "local dimension (ff)");
    mg2->add_option("--r", mp.r, "projector rank (ff)");
    mg2->add_option("--n", mp.n, "chain length (motzkin)");
    mg2->add_option("--chi", mp.chis, "comma-separated bond caps");
    mg2->add_option("--max-sweeps", mp.max_sweeps, "sweep budget per stage");
    mg2->add_option("--tau-start", mp.tau_start, "first time step");
    mg2->add_option("--tau-end", mp.tau_end, "last time step");
    mg2->add_option("--stages", mp.stages, "number of time steps");
    mg2->add_option("--init", mp.init, "zero or random (default: zero for motzkin, random for ff)");
    mg2->add_flag("--schmidt", mp.schmidt, "report mid-bond Schmidt values at the largest cap");
    add_common(mg2);
    handlers["mps-gs"] = [&] { return run_mps_gs(mp, common); };

    // A config file is expanded in front of the user's flags; TakeLast then lets flags win.
    std::vector<std::string> args(argv + 1, argv + argc);
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] != "--config" && args[i].rfind("--config=", 0) != 0) continue;
        std::string path = args[i] == "--config" ? (i + 1 < args.size() ? args[i + 1] : "") : args[i].substr(9);
        std::string sub;
        try {
            auto extra = config_args(path, sub);
            auto pos = std::find_if(args.begin(), args.end(), [&](const std::string& s) { return handlers.count(s) > 0; });
            if (pos == args.end()) {
                if (sub.empty()) throw ParameterError("no subcommand given");
                args.insert(args.begin(), sub);
                pos = args.begin();
            }
            args.insert(pos + 1, extra.begin(), extra.end());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
        break;
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string name = app.get_subcommands().front()->get_name();
    try {
        auto t0 = std::chrono::steady_clock::now();
        Output out = handlers.at(name)();
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        Output full;
        full.set("version", std::string(QMBS_VERSION));
        full.set("subcommand", name);
        full.set("seed", std::to_string(common.seed));
        for (const auto* opt : app.get_subcommand(name)->get_options()) {
            if (opt->get_name().empty() || opt->get_single_name() == "help" || opt->get_single_name() == "config" ||
                opt->get_single_name() == "seed" || opt->get_single_name() == "out")
                continue;
            auto res = opt->results();
            std::string val = res.empty() ? opt->get_default_str() : res.back();
            if (opt->get_expected_max() == 0) val = opt->count() ? "true" : "false";
            full.set(opt->get_single_name(), val);
        }
        full.meta.insert(full.meta.end(), out.meta.begin(), out.meta.end());
        full.set("wall_time_s", wall);
        full.columns = std::move(out.columns);
        full.rows = std::move(out.rows);

        std::ofstream file;
        std::ostream* os = &std::cout;
        if (!common.out_path.empty()) {
            file.open(common.out_path);
            if (!file) throw ParameterError("cannot write " + common.out_path);
            os = &file;
        }
        if (common.format == "json") write_json(*os, full);
        else write_csv(*os, full);
        os->flush();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
