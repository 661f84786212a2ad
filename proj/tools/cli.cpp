#include "cli.hpp"

#include "wacrisk/errors.hpp"
#include "wacrisk/gain_synthesis.hpp"
#include "wacrisk/network_io.hpp"
#include "wacrisk/risk_engine.hpp"
#include "wacrisk/sdde_oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace wacrisk::cli {

namespace {

constexpr const char* kVersion = "0.3.0";

struct Params {
    std::string network, gains_file, out, modes_out, matrices_out, from_stats;
    double tau = 0.0, eta = 0.0, etap = 0.0;
    double mu = 0.0, kappa = 0.0;
    std::vector<double> mu_modes, kappa_modes;
    double tol = 1e-8;
    unsigned threads = 0;
    bool table_only = false;

    double s1 = 0, s2 = 0, k1 = 0, k2 = 0;

    std::optional<double> zeta, zeta_deg;
    double c = 1.5, eps = 0.1;

    double mu_min = -1.0, scan_mu_min = 0.0, mu_max = 1.0, kappa_min = 0.0, kappa_max = 5.0, step = 0.05;
    double mu_step = 0.0, kappa_step = 0.0;

    double h = 0.005, T = 30.0, burnin = 1.0 / 3.0;
    std::size_t paths = 1000, sample_every = 10;
    std::uint64_t seed = 1;
};

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

double zeta_of(const Params& p) {
    if (p.zeta && p.zeta_deg) throw ValidationError("give either --zeta or --zeta-deg, not both");
    if (p.zeta) return *p.zeta;
    if (p.zeta_deg) return *p.zeta_deg * std::numbers::pi / 180.0;
    throw ValidationError("a systemic set needs --zeta or --zeta-deg");
}

struct Loaded {
    NetworkModel model;
    LaplacianSpectrum spectrum;
    double d = 0.0;
    double J = 0.0;
};

Loaded load(const Params& p) {
    if (p.network.empty()) throw ValidationError("--network is required");
    Loaded l;
    l.model = load_network_json(p.network);
    l.spectrum = build_laplacian(l.model);
    l.d = l.model.damping_ratio();
    l.J = l.model.inertia();
    return l;
}

GainSpec gains_of(const Params& p, std::size_t n) {
    const bool lists = !p.mu_modes.empty() || !p.kappa_modes.empty();
    if (!p.gains_file.empty()) {
        if (lists) throw ValidationError("--gains cannot be combined with per-mode lists");
        return load_gains_json(p.gains_file);
    }
    if (lists) {
        auto expand = [n](const std::vector<double>& v) {
            Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            if (v.empty()) return out;
            if (v.size() != n) throw ValidationError("per-mode gain lists need one entry per generator");
            for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = v[i];
            return out;
        };
        return EigenGains{expand(p.mu_modes), expand(p.kappa_modes)};
    }
    return ConsensusGains{p.mu, p.kappa};
}

GainBox box_of(const Params& p, double mu_min) {
    return {mu_min, p.mu_max, p.kappa_min, p.kappa_max, p.mu_step > 0 ? p.mu_step : p.step,
            p.kappa_step > 0 ? p.kappa_step : p.step};
}

class Emitter {
public:
    Emitter(const Params& p, std::string sub, std::ostream& out) : p_(p), sub_(std::move(sub)), out_(out) {}

    void emit(const std::string& content, const std::string& path) {
        if (path.empty()) {
            out_ << content;
        } else {
            write_file_atomic(path, content);
            files_.push_back(path);
        }
    }

    void result(const std::string& key, nlohmann::json value) { results_[key] = std::move(value); }

    void finish() {
        if (files_.empty()) return;
        nlohmann::json m;
        m["subcommand"] = sub_;
        m["tool_version"] = kVersion;
        m["timestamp"] = iso_timestamp();
        m["inputs"] = {{"network", p_.network}, {"gains", p_.gains_file}, {"from_stats", p_.from_stats}};
        m["outputs"] = files_;
        nlohmann::json par;
        par["tau"] = p_.tau;
        par["eta"] = p_.eta;
        par["etap"] = p_.etap;
        par["mu"] = p_.mu;
        par["kappa"] = p_.kappa;
        par["mu_modes"] = p_.mu_modes;
        par["kappa_modes"] = p_.kappa_modes;
        par["tol"] = p_.tol;
        par["threads"] = p_.threads;
        par["table_only"] = p_.table_only;
        par["s"] = {p_.s1, p_.s2};
        par["k"] = {p_.k1, p_.k2};
        if (p_.zeta) par["zeta"] = *p_.zeta;
        if (p_.zeta_deg) par["zeta_deg"] = *p_.zeta_deg;
        par["c"] = p_.c;
        par["eps"] = p_.eps;
        par["grid"] = {{"mu_min", sub_ == "tradeoff" ? p_.scan_mu_min : p_.mu_min}, {"mu_max", p_.mu_max}, {"kappa_min", p_.kappa_min},
                       {"kappa_max", p_.kappa_max}, {"step", p_.step}, {"mu_step", p_.mu_step},
                       {"kappa_step", p_.kappa_step}};
        par["simulation"] = {{"h", p_.h},         {"T", p_.T},         {"paths", p_.paths},
                             {"seed", p_.seed},   {"burnin", p_.burnin}, {"sample_every", p_.sample_every}};
        m["parameters"] = par;
        if (!results_.empty()) m["results"] = results_;
        write_file_atomic(files_.front() + ".manifest.json", m.dump(2) + "\n");
    }

private:
    const Params& p_;
    std::string sub_;
    std::ostream& out_;
    std::vector<std::string> files_;
    nlohmann::json results_ = nlohmann::json::object();
};

std::string pair_csv(const PairStats& st) {
    std::ostringstream ss;
    ss << "i,j,sigma\n";
    for (const auto& p : st.pairs) ss << p.i << ',' << p.j << ',' << format_number(p.sigma) << '\n';
    return ss.str();
}

std::string risk_csv(const RiskProfile& rp) {
    std::ostringstream ss;
    ss << "i,j,sigma,risk\n";
    for (const auto& e : rp.entries) {
        ss << e.i << ',' << e.j << ',' << format_number(e.sigma) << ',' << format_number(e.risk) << '\n';
    }
    return ss.str();
}

PairStats stats_for(const Params& p, const Loaded& l) {
    const ModalSystem sys = resolve_gains(l.spectrum, gains_of(p, l.spectrum.size()));
    return sigma_pairs(sys, l.d, p.tau, {p.eta, p.etap}, l.J, p.tol);
}

void cmd_stability(const Params& p, Emitter& em) {
    const Loaded l = load(p);
    const ModalSystem sys = resolve_gains(l.spectrum, gains_of(p, l.spectrum.size()));
    StabilityOptions opts;
    opts.table_only = p.table_only;
    const NetworkVerdict v = network_stable(sys, l.d, p.tau, opts);
    std::ostringstream ss;
    ss << "mode_index,lambda,mu,kappa,s1,s2,k1,k2,region,stable\n";
    for (const auto& m : v.modes) {
        ss << m.mode << ',' << format_number(m.lambda) << ',' << format_number(m.mu) << ','
           << format_number(m.kappa) << ',' << format_number(m.scaled.s1) << ','
           << format_number(m.scaled.s2) << ',' << format_number(m.scaled.k1) << ','
           << format_number(m.scaled.k2) << ',' << to_string(m.verdict.region) << ','
           << (m.verdict.stable ? "true" : "false") << '\n';
    }
    em.result("stable", v.stable);
    em.emit(ss.str(), p.out);
}

void cmd_spectral(const Params& p, Emitter& em) {
    const ScaledParams sp{p.s1, p.s2, p.k1, p.k2};
    const SpectralEvaluation e = f_quadrature(sp, p.tol);
    if (e.diverging) throw InfeasibleError("spectral function diverges at this tuple");
    std::ostringstream ss;
    ss << "s1,s2,k1,k2,value,abs_error,truncation_point\n";
    ss << format_number(p.s1) << ',' << format_number(p.s2) << ',' << format_number(p.k1) << ','
       << format_number(p.k2) << ',' << format_number(e.value) << ','
       << format_number(e.abs_error_estimate) << ',' << format_number(e.truncation_point) << '\n';
    em.result("value", e.value);
    em.emit(ss.str(), p.out);
}

void cmd_stats(const Params& p, Emitter& em) {
    const Loaded l = load(p);
    const ModalSystem sys = resolve_gains(l.spectrum, gains_of(p, l.spectrum.size()));
    const PairStats st = sigma_pairs(sys, l.d, p.tau, {p.eta, p.etap}, l.J, p.tol);
    em.emit(pair_csv(st), p.out);
    if (!p.modes_out.empty()) {
        std::ostringstream ss;
        ss << "l,lambda,mu,kappa,frak_f\n";
        for (std::size_t i = 0; i < sys.size(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            ss << (i + 1) << ',' << format_number(sys.lambda(k)) << ',' << format_number(sys.mu(k))
               << ',' << format_number(sys.kappa(k)) << ',' << format_number(st.mode_weights(k)) << '\n';
        }
        em.emit(ss.str(), p.modes_out);
    }
}

void cmd_risk(const Params& p, Emitter& em) {
    const SystemicSet set(zeta_of(p), p.c, p.eps);
    PairStats st;
    if (!p.from_stats.empty()) {
        st.pairs = read_pair_csv(read_text_file(p.from_stats));
    } else {
        st = stats_for(p, load(p));
    }
    const RiskProfile rp = risk_profile(st, set);
    em.result("nu_eps", set.nu());
    em.emit(risk_csv(rp), p.out);
}

void cmd_synth(const Params& p, Emitter& em) {
    const Loaded l = load(p);
    SynthesisOptions opts;
    opts.gain_box = box_of(p, p.mu_min);
    opts.quad_tol = p.tol;
    opts.threads = p.threads;
    const SynthesisResult r = synthesize(l.spectrum, l.d, p.tau, {p.eta, p.etap}, l.J, opts);
    std::ostringstream ss;
    ss << "mode,lambda,mu,kappa,frak_f,grid_mu,grid_kappa,grid_frak_f\n";
    for (const auto& m : r.modes) {
        ss << m.mode << ',' << format_number(m.lambda) << ',' << format_number(m.mu) << ','
           << format_number(m.kappa) << ',' << format_number(m.weight) << ','
           << format_number(m.grid_mu) << ',' << format_number(m.grid_kappa) << ','
           << format_number(m.grid_weight) << '\n';
    }
    em.emit(ss.str(), p.out);
    if (!p.matrices_out.empty()) {
        auto rows = [](const Eigen::MatrixXd& A) {
            nlohmann::json j = nlohmann::json::array();
            for (Eigen::Index i = 0; i < A.rows(); ++i) {
                std::vector<double> row(static_cast<std::size_t>(A.cols()));
                for (Eigen::Index k = 0; k < A.cols(); ++k) row[static_cast<std::size_t>(k)] = A(i, k);
                j.push_back(row);
            }
            return j;
        };
        nlohmann::json j;
        j["M"] = rows(r.M);
        j["K"] = rows(r.K);
        j["mu"] = std::vector<double>(r.system.mu.data(), r.system.mu.data() + r.system.mu.size());
        j["kappa"] = std::vector<double>(r.system.kappa.data(), r.system.kappa.data() + r.system.kappa.size());
        em.emit(j.dump(2) + "\n", p.matrices_out);
    }
}

void cmd_tradeoff(const Params& p, Emitter& em, std::ostream& err) {
    const Loaded l = load(p);
    const SystemicSet set(zeta_of(p), p.c, p.eps);
    const TradeoffScan scan =
        tradeoff_scan(l.spectrum, l.d, p.tau, {p.eta, p.etap}, l.J, set, box_of(p, p.scan_mu_min), p.threads, p.tol);
    std::ostringstream ss;
    ss << "mu,kappa,stable,min_risk,xi_k,xi_m,product\n";
    for (const auto& r : scan.rows) {
        ss << format_number(r.mu) << ',' << format_number(r.kappa) << ',' << (r.stable ? "true" : "false")
           << ',' << format_number(r.min_risk) << ',' << format_number(r.xi_k) << ','
           << format_number(r.xi_m) << ',' << format_number(r.product) << '\n';
    }
    em.result("omega_hat", scan.omega_hat);
    em.emit(ss.str(), p.out);
    err << "omega_hat=" << format_number(scan.omega_hat) << '\n';
}

void cmd_simulate(const Params& p, Emitter& em) {
    const Loaded l = load(p);
    const ModalSystem sys = resolve_gains(l.spectrum, gains_of(p, l.spectrum.size()));
    SimConfig cfg;
    cfg.h = p.h;
    cfg.T = p.T;
    cfg.trajectories = p.paths;
    cfg.burn_in = p.burnin;
    cfg.seed = p.seed;
    cfg.sample_every = p.sample_every;
    cfg.threads = p.threads;
    const EnsembleStats e = simulate(sys, l.d, p.tau, {p.eta, p.etap}, l.J, cfg);
    std::ostringstream ss;
    ss << "i,j,sigma,variance,std_error\n";
    for (const auto& q : e.pairs) {
        ss << q.i << ',' << q.j << ',' << format_number(std::sqrt(std::max(0.0, q.variance))) << ','
           << format_number(q.variance) << ',' << format_number(q.std_error) << '\n';
    }
    em.result("h_used", e.h_used);
    em.result("rho_hat", e.rho_hat);
    em.emit(ss.str(), p.out);
}

void cmd_nu(const Params& p, std::ostream& out) {
    out << std::setprecision(6) << nu_epsilon(p.eps) << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Params p;
    CLI::App app{"Delay-aware wide-area control analysis for power networks", "wacrisk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto add_network = [&](CLI::App* s) {
        s->add_option("--network", p.network, "Network JSON file");
    };
    auto add_gains = [&](CLI::App* s) {
        s->add_option("--mu", p.mu, "Consensus phase gain (M = mu L)");
        s->add_option("--kappa", p.kappa, "Consensus frequency gain (K = kappa L)");
        s->add_option("--mu-modes", p.mu_modes, "Per-mode phase gains")->delimiter(',');
        s->add_option("--kappa-modes", p.kappa_modes, "Per-mode frequency gains")->delimiter(',');
        s->add_option("--gains", p.gains_file, "Gain JSON file (dense M, K or per-mode lists)");
    };
    auto add_noise = [&](CLI::App* s) {
        s->add_option("--tau", p.tau, "Communication delay (s)");
        s->add_option("--eta", p.eta, "Load-volatility diffusion");
        s->add_option("--etap", p.etap, "Measurement-noise diffusion");
    };
    auto add_set = [&](CLI::App* s) {
        s->add_option("--zeta", p.zeta, "Incoherence limit in radians");
        s->add_option("--zeta-deg", p.zeta_deg, "Incoherence limit in degrees");
        s->add_option("--c", p.c, "Safe-margin divisor (> 1)");
        s->add_option("--eps", p.eps, "Acceptance level in (0, 1)");
    };
    auto add_box = [&](CLI::App* s, double& mu_min) {
        s->add_option("--mu-min", mu_min, "Lower phase-gain bound");
        s->add_option("--mu-max", p.mu_max, "Upper phase-gain bound");
        s->add_option("--kappa-min", p.kappa_min, "Lower frequency-gain bound");
        s->add_option("--kappa-max", p.kappa_max, "Upper frequency-gain bound");
        s->add_option("--step", p.step, "Grid spacing for both gains");
        s->add_option("--mu-step", p.mu_step, "Phase-gain spacing (overrides --step)");
        s->add_option("--kappa-step", p.kappa_step, "Frequency-gain spacing (overrides --step)");
    };
    auto add_common = [&](CLI::App* s) {
        s->add_option("--out", p.out, "Output file (default stdout)");
        s->add_option("--threads", p.threads, "Worker threads (default WACRISK_THREADS or all cores)");
        s->add_option("--tol", p.tol, "Relative quadrature tolerance");
    };

    auto* stability = app.add_subcommand("stability", "Per-mode delay stability verdicts");
    add_network(stability);
    add_gains(stability);
    stability->add_option("--tau", p.tau, "Communication delay (s)");
    stability->add_flag("--table-only", p.table_only, "Use only the four tabulated stability sets");
    add_common(stability);

    auto* spectral = app.add_subcommand("spectral", "Evaluate the spectral function f(s;k)");
    spectral->add_option("--s1", p.s1)->required();
    spectral->add_option("--s2", p.s2)->required();
    spectral->add_option("--k1", p.k1);
    spectral->add_option("--k2", p.k2);
    add_common(spectral);

    auto* stats = app.add_subcommand("stats", "Stationary pair deviations");
    add_network(stats);
    add_gains(stats);
    add_noise(stats);
    stats->add_option("--modes-out", p.modes_out, "Per-mode weight CSV");
    add_common(stats);

    auto* risk = app.add_subcommand("risk", "Value-at-risk of phase incoherence per pair");
    add_network(risk);
    add_gains(risk);
    add_noise(risk);
    add_set(risk);
    risk->add_option("--from-stats", p.from_stats, "Reuse a pair CSV written by `stats`");
    add_common(risk);

    auto* synth = app.add_subcommand("synth", "Per-mode optimal gains");
    add_network(synth);
    add_noise(synth);
    add_box(synth, p.mu_min);
    synth->add_option("--matrices-out", p.matrices_out, "JSON file for the assembled M*, K*");
    add_common(synth);

    auto* tradeoff = app.add_subcommand("tradeoff", "Risk versus effective-resistance scan");
    add_network(tradeoff);
    add_noise(tradeoff);
    add_set(tradeoff);
    add_box(tradeoff, p.scan_mu_min);
    add_common(tradeoff);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo ensemble of the stochastic delay system");
    sim->set_help_flag("--help", "Print this help message and exit");
    add_network(sim);
    add_gains(sim);
    add_noise(sim);
    sim->add_option("--h", p.h, "Step size");
    sim->add_option("--T", p.T, "Horizon");
    sim->add_option("--paths", p.paths, "Trajectories");
    sim->add_option("--seed", p.seed, "Master seed");
    sim->add_option("--burnin", p.burnin, "Burn-in fraction of T");
    sim->add_option("--sample-every", p.sample_every, "Sampling stride in steps");
    add_common(sim);

    auto* nu = app.add_subcommand("nu", "Two-sided Gaussian quantile for acceptance level eps");
    nu->add_option("--eps", p.eps, "Acceptance level in (0, 1)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        Emitter em(p, sub->get_name(), out);
        if (sub == stability) cmd_stability(p, em);
        else if (sub == spectral) cmd_spectral(p, em);
        else if (sub == stats) cmd_stats(p, em);
        else if (sub == risk) cmd_risk(p, em);
        else if (sub == synth) cmd_synth(p, em);
        else if (sub == tradeoff) cmd_tradeoff(p, em, err);
        else if (sub == sim) cmd_simulate(p, em);
        else if (sub == nu) cmd_nu(p, out);
        em.finish();
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return 3;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "unexpected failure: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace wacrisk::cli
