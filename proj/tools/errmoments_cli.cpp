#include "errmoments/gauss.hpp"
#include "errmoments/io.hpp"
#include "errmoments/mc.hpp"
#include "errmoments/model.hpp"
#include "errmoments/moments.hpp"
#include "errmoments/planner.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace errmoments;

namespace {

constexpr const char* kVersion = "1.0.0";

// Exit codes: 0 ok, 1 validation error, 2 numeric inconsistency,
// 3 plan target not reachable within the ceiling.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitNotFound = 3;

std::uint64_t resolve_seed(bool seed_set, std::uint64_t seed_flag) {
    if (seed_set) return seed_flag;
    if (const char* env = std::getenv("ERRMOMENTS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw model_error("ERRMOMENTS_SEED is not a valid integer");
        }
    }
    return 0;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path,
                              "JSON configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "RNG seed (fallback: ERRMOMENTS_SEED)")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "worker threads");
}

fs::path out_file(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    return fs::path(opts.out_dir) / name;
}

void finish_manifest(const CommonOpts& opts, RunManifest manifest,
                     std::chrono::steady_clock::time_point t0) {
    manifest.seed = opts.seed;
    manifest.threads = opts.threads;
    manifest.version = kVersion;
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const fs::path path = out_file(opts, "manifest.json");
    std::ofstream out(path);
    write_manifest(out, manifest);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Analytic pipeline for whichever form the configuration is in.
MomentMatrix analytic_matrix(const Config& config, Mode mode) {
    switch (config.kind) {
    case Config::Kind::full: {
        MomentMatrix mm = mode == Mode::conditional
                              ? conditional_moment_matrix(
                                    reduce_conditional(config.spec))
                              : unconditional_moment_matrix(
                                    reduce_unconditional(config.spec));
        metrics_from_matrix(mm, config.spec.alpha0);
        return mm;
    }
    case Config::Kind::reduced_conditional: {
        if (mode != Mode::conditional)
            throw model_error("configuration is reduced-conditional; "
                              "unconditional moments need the full form");
        MomentMatrix mm = conditional_moment_matrix(config.rc);
        metrics_from_matrix(mm, config.alpha0);
        return mm;
    }
    case Config::Kind::reduced_unconditional: {
        if (mode != Mode::unconditional)
            throw model_error("configuration is reduced-unconditional; "
                              "conditional moments need the full form");
        MomentMatrix mm = unconditional_moment_matrix(config.ru);
        metrics_from_matrix(mm, config.alpha0);
        return mm;
    }
    }
    throw model_error("unreachable");
}

Mode parse_mode(const std::string& s) {
    if (s == "conditional") return Mode::conditional;
    if (s == "unconditional") return Mode::unconditional;
    throw model_error("--mode must be conditional or unconditional");
}

struct MomentRow {
    const char* name;
    double analytic;
    McMoment mc;
    bool first_moment;
};

int cmd_moments(const CommonOpts& opts, const std::string& mode_name) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config config = load_config(opts.config_path);
    const Mode mode = parse_mode(mode_name);
    const MomentMatrix mm = analytic_matrix(config, mode);

    const fs::path csv_path = out_file(opts, "moments.csv");
    {
        std::ofstream out(csv_path);
        out.precision(17);
        write_moment_csv(out, mm);
    }
    RunManifest manifest;
    manifest.subcommand = "moments";
    manifest.config_echo = slurp(opts.config_path);
    manifest.outputs.push_back(csv_path.string());

    std::cout.precision(6);
    double c = 0;
    switch (config.kind) {
    case Config::Kind::full:
        c = log_odds_threshold(config.spec.alpha0);
        break;
    case Config::Kind::reduced_conditional:
        c = config.rc.c;
        break;
    case Config::Kind::reduced_unconditional:
        c = config.ru.c;
        break;
    }
    std::cout << "mode: " << mode_name << "\n"
              << "c = " << c << "\n"
              << "E[estimate]  = " << mm.e_bayes_mix << "\n"
              << "E[true]      = " << mm.e_true_mix << "\n"
              << "bias         = " << mm.bias << "\n"
              << "dev variance = " << mm.dev_var << "\n"
              << "RMS          = " << mm.rms << "\n";

    if (config.asymptotic) {
        MomentMatrix lim = asymptotic_limits(*config.asymptotic, mode);
        metrics_from_matrix(lim, alpha0_from_threshold(config.asymptotic->c));
        const fs::path lim_path = out_file(opts, "asymptotic.csv");
        std::ofstream out(lim_path);
        out.precision(17);
        write_moment_csv(out, lim);
        manifest.outputs.push_back(lim_path.string());
        std::cout << "asymptotic RMS limit = " << lim.rms << "\n";
    }
    finish_manifest(opts, manifest, t0);
    return kExitOk;
}

int cmd_mc(const CommonOpts& opts, const std::string& mode_name, long t1,
           long t2) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config config = load_config(opts.config_path);
    if (config.kind != Config::Kind::full)
        throw model_error("mc needs the full configuration form");

    McConfig mc;
    mc.mode = parse_mode(mode_name);
    mc.t1 = t1;
    mc.t2 = mc.mode == Mode::conditional ? 1 : t2;
    mc.seed = opts.seed;
    mc.threads = opts.threads;
    mc.spec = config.spec;
    const McEstimates est = run(mc);

    const fs::path json_path = out_file(opts, "mc.json");
    {
        std::ofstream out(json_path);
        write_mc_json(out, mc, est);
    }
    RunManifest manifest;
    manifest.subcommand = "mc";
    manifest.config_echo = slurp(opts.config_path);
    manifest.outputs.push_back(json_path.string());
    finish_manifest(opts, manifest, t0);

    std::cout.precision(6);
    std::cout << "replications = " << est.replications << "\n"
              << "E[estimate]  = " << est.e_bayes_mix.mean << " (se "
              << est.e_bayes_mix.stderr_ << ")\n"
              << "E[true]      = " << est.e_true_mix.mean << " (se "
              << est.e_true_mix.stderr_ << ")\n"
              << "RMS          = " << est.rms << "\n"
              << "rejected     = " << est.rejected << "\n";
    return kExitOk;
}

int cmd_validate(const CommonOpts& opts, const std::string& mode_name, long t1,
                 long t2) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config config = load_config(opts.config_path);
    if (config.kind != Config::Kind::full)
        throw model_error("validate needs the full configuration form");
    const Mode mode = parse_mode(mode_name);
    const MomentMatrix mm = analytic_matrix(config, mode);

    McConfig mc;
    mc.mode = mode;
    mc.t1 = t1;
    mc.t2 = mode == Mode::conditional ? 1 : t2;
    mc.seed = opts.seed;
    mc.threads = opts.threads;
    mc.spec = config.spec;
    const McEstimates est = run(mc);

    const std::vector<MomentRow> rows = {
        {"e_bayes_0", mm.e_bayes[0], est.e_bayes[0], true},
        {"e_bayes_1", mm.e_bayes[1], est.e_bayes[1], true},
        {"e_true_0", mm.e_true[0], est.e_true[0], true},
        {"e_true_1", mm.e_true[1], est.e_true[1], true},
        {"e_bayes2_0", mm.e_bayes2[0], est.e_bayes2[0], false},
        {"e_bayes2_1", mm.e_bayes2[1], est.e_bayes2[1], false},
        {"e_bayes01", mm.e_bayes01, est.e_bayes01, false},
        {"e_true2_0", mm.e_true2[0], est.e_true2[0], false},
        {"e_true2_1", mm.e_true2[1], est.e_true2[1], false},
        {"e_true01", mm.e_true01, est.e_true01, false},
        {"e_cross_00", mm.e_cross[0][0], est.e_cross[0][0], false},
        {"e_cross_01", mm.e_cross[0][1], est.e_cross[0][1], false},
        {"e_cross_10", mm.e_cross[1][0], est.e_cross[1][0], false},
        {"e_cross_11", mm.e_cross[1][1], est.e_cross[1][1], false},
        {"bias", mm.bias, est.bias, true},
    };

    const fs::path csv_path = out_file(opts, "validate.csv");
    std::ofstream csv(csv_path);
    csv.precision(17);
    csv << "name,analytic,mc_mean,mc_stderr,z\n";
    std::cout.precision(6);
    std::cout << "name          analytic      mc_mean       mc_stderr     z\n";
    bool first_moment_inconsistent = false;
    for (const MomentRow& row : rows) {
        const double z = row.mc.stderr_ > 0
                             ? (row.mc.mean - row.analytic) / row.mc.stderr_
                             : 0.0;
        csv << row.name << ',' << row.analytic << ',' << row.mc.mean << ','
            << row.mc.stderr_ << ',' << z << '\n';
        std::cout << row.name << "  " << row.analytic << "  " << row.mc.mean
                  << "  " << row.mc.stderr_ << "  " << z
                  << (std::abs(z) > 3 ? "  [|z| > 3]" : "") << "\n";
        // the approximation carries inherent finite-sample error, so the
        // inconsistency trigger adds an absolute floor on top of 3 sigma
        if (row.first_moment &&
            std::abs(row.mc.mean - row.analytic) >
                std::max(3.0 * row.mc.stderr_, 0.01))
            first_moment_inconsistent = true;
    }
    std::cout << "analytic RMS = " << mm.rms << ", mc RMS = " << est.rms
              << "\n";
    const double reject_rate =
        (double)est.rejected / (double)est.replications;
    if (reject_rate > 0.001)
        std::cerr << "warning: degenerate-sample rejection rate "
                  << reject_rate << "\n";

    RunManifest manifest;
    manifest.subcommand = "validate";
    manifest.config_echo = slurp(opts.config_path);
    manifest.outputs.push_back(csv_path.string());
    finish_manifest(opts, manifest, t0);
    return first_moment_inconsistent ? kExitNumeric : kExitOk;
}

std::vector<int> parse_range(const std::string& text) {
    int lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0 || hi < lo)
        throw model_error("range must be lo:hi:step with positive step, got " +
                          text);
    std::vector<int> out;
    for (int v = lo; v <= hi; v += step) out.push_back(v);
    return out;
}

int cmd_surface(const CommonOpts& opts, const std::string& mode_name,
                double beta, double sep2, const std::string& p_range,
                const std::string& n_range) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mode mode = parse_mode(mode_name);
    const std::vector<int> ps = parse_range(p_range);
    const std::vector<int> ns = parse_range(n_range);

    const fs::path csv_path = out_file(opts, "surface.csv");
    std::ofstream out(csv_path);
    out.precision(17);
    out << "p,n,rms\n";
    for (int p : ps) {
        for (int n : ns) {
            if (n < 4 || n % 2 != 0)
                throw model_error("surface n values must be even and >= 4");
            MomentMatrix mm;
            if (mode == Mode::conditional) {
                ReducedConditional rc;
                rc.p = p;
                rc.n0 = rc.n1 = n / 2;
                rc.beta0 = rc.beta1 = beta;
                rc.c = 0;
                rc.delta2 = sep2;
                // prior centered on the true means
                rc.eta_m0_mu1 = sep2;
                rc.eta_m1_mu0 = sep2;
                rc.eta_m0mu0_mu0mu1 = 0;
                rc.eta_m1mu1_mu1mu0 = 0;
                mm = conditional_moment_matrix(rc);
            } else {
                ReducedUnconditional ru;
                ru.p = p;
                ru.n0 = ru.n1 = n / 2;
                ru.nu0 = ru.nu1 = beta * n / 2.0;
                ru.c = 0;
                ru.Delta2 = sep2;
                mm = unconditional_moment_matrix(ru);
            }
            metrics_from_matrix(mm, 0.5);
            out << p << ',' << n << ',' << mm.rms << '\n';
        }
    }
    RunManifest manifest;
    manifest.subcommand = "surface";
    manifest.outputs.push_back(csv_path.string());
    finish_manifest(opts, manifest, t0);
    std::cout << "wrote " << ps.size() * ns.size() << " rows to "
              << csv_path.string() << "\n";
    return kExitOk;
}

int cmd_plan(const CommonOpts& opts, const std::string& mode_name, double beta,
             std::vector<double> taus, std::vector<int> ps, bool safe,
             int n_max) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mode mode = parse_mode(mode_name);
    if (taus.empty())
        taus = mode == Mode::conditional
                   ? std::vector<double>{0.1, 0.09, 0.08, 0.07, 0.06, 0.05}
                   : std::vector<double>{0.025, 0.02, 0.015, 0.01, 0.005};
    if (ps.empty()) ps = {2, 4, 8, 16, 32, 64, 128};

    const fs::path csv_path = out_file(opts, "plan.csv");
    std::ofstream out(csv_path);
    out.precision(17);
    out << "tau,p,n_min,kappa_at_n_min,mode,beta\n";
    std::cout.precision(6);
    bool all_found = true;
    for (double tau : taus) {
        std::cout << "tau = " << tau << ":";
        for (int p : ps) {
            PlanQuery q;
            q.tau = tau;
            q.p = p;
            q.beta = beta;
            q.mode = mode;
            q.n_max = n_max;
            // the unconditional kappa curve dips below loose targets before
            // its peak, so that mode always verifies a horizon past the
            // crossing
            q.safe = safe || mode == Mode::unconditional;
            const PlanResult r = min_n(q);
            out << tau << ',' << p << ',' << (r.found ? r.n_min : -1) << ','
                << (r.found ? r.kappa_at_n_min : 0.0) << ',' << mode_name
                << ',' << beta << '\n';
            if (r.found)
                std::cout << ' ' << r.n_min;
            else {
                std::cout << " >" << n_max;
                all_found = false;
            }
        }
        std::cout << "\n";
    }
    RunManifest manifest;
    manifest.subcommand = "plan";
    manifest.outputs.push_back(csv_path.string());
    finish_manifest(opts, manifest, t0);
    if (!all_found) {
        std::cerr << "some cells exceeded the search ceiling n_max = " << n_max
                  << "\n";
        return kExitNotFound;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-sample moment engine for LDA error estimation"};
    app.require_subcommand(1);

    CommonOpts mo, vo, co, so, po;
    std::string m_mode = "conditional", v_mode = "conditional",
                c_mode = "unconditional", s_mode = "conditional",
                p_mode = "conditional";
    long v_t1 = 10000, v_t2 = 300, c_t1 = 300, c_t2 = 300;
    double s_beta = 1, s_sep2 = 4, p_beta = 1;
    std::string s_p_range, s_n_range;
    std::vector<double> p_taus;
    std::vector<int> p_ps;
    bool p_safe = false;
    int p_n_max = 10000;

    auto* moments = app.add_subcommand("moments", "analytic moment table");
    add_common(moments, mo, true);
    moments->add_option("--mode", m_mode, "conditional|unconditional");

    auto* validate = app.add_subcommand("validate", "analytic vs Monte Carlo");
    add_common(validate, vo, true);
    validate->add_option("--mode", v_mode, "conditional|unconditional");
    validate->add_option("--t1", v_t1, "inner replications");
    validate->add_option("--t2", v_t2, "outer replications");

    auto* mc = app.add_subcommand("mc", "Monte Carlo estimates only");
    add_common(mc, co, true);
    mc->add_option("--mode", c_mode, "conditional|unconditional");
    mc->add_option("--t1", c_t1, "inner replications");
    mc->add_option("--t2", c_t2, "outer replications");

    auto* surface = app.add_subcommand("surface", "RMS grid over (p, n)");
    add_common(surface, so, false);
    surface->add_option("--mode", s_mode, "conditional|unconditional");
    surface->add_option("--beta", s_beta, "nu/n ratio");
    surface->add_option("--delta2,--Delta2", s_sep2, "separation");
    surface->add_option("--p-range", s_p_range, "lo:hi:step")->required();
    surface->add_option("--n-range", s_n_range, "lo:hi:step")->required();

    auto* plan = app.add_subcommand("plan", "minimum sample size table");
    add_common(plan, po, false);
    plan->add_option("--mode", p_mode, "conditional|unconditional");
    plan->add_option("--beta", p_beta, "nu/n ratio");
    plan->add_option("--tau-list", p_taus, "RMS targets");
    plan->add_option("--p-list", p_ps, "dimensions");
    plan->add_flag("--safe", p_safe,
                   "verify a horizon past the crossing (always on for "
                   "unconditional mode)");
    plan->add_option("--n-max", p_n_max, "search ceiling");

    CLI11_PARSE(app, argc, argv);

    try {
        for (CommonOpts* opts : {&mo, &vo, &co, &so, &po})
            opts->seed = resolve_seed(opts->seed_set, opts->seed);
        if (moments->parsed()) return cmd_moments(mo, m_mode);
        if (validate->parsed()) return cmd_validate(vo, v_mode, v_t1, v_t2);
        if (mc->parsed()) return cmd_mc(co, c_mode, c_t1, c_t2);
        if (surface->parsed())
            return cmd_surface(so, s_mode, s_beta, s_sep2, s_p_range,
                               s_n_range);
        if (plan->parsed())
            return cmd_plan(po, p_mode, p_beta, p_taus, p_ps, p_safe, p_n_max);
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const model_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
