#include "errmoments/io.hpp"

#include <json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace errmoments {

namespace {

using nlohmann::json;

double get_number(const json& j, const char* field) {
    if (!j.contains(field))
        throw model_error(std::string("missing field `") + field + "`");
    const auto& v = j.at(field);
    if (!v.is_number())
        throw model_error(std::string("field `") + field +
                          "` must be a number");
    return v.get<double>();
}

int get_int(const json& j, const char* field) {
    if (!j.contains(field))
        throw model_error(std::string("missing field `") + field + "`");
    const auto& v = j.at(field);
    if (!v.is_number_integer())
        throw model_error(std::string("field `") + field +
                          "` must be an integer");
    return v.get<int>();
}

double get_number_or(const json& j, const char* field, double fallback) {
    return j.contains(field) ? get_number(j, field) : fallback;
}

Eigen::VectorXd get_vector(const json& j, const char* field, int p) {
    if (!j.contains(field))
        throw model_error(std::string("missing field `") + field + "`");
    const auto& v = j.at(field);
    if (!v.is_array() || (int)v.size() != p)
        throw model_error(std::string("field `") + field +
                          "` must be an array of length " + std::to_string(p));
    Eigen::VectorXd out(p);
    for (int i = 0; i < p; ++i) {
        if (!v[i].is_number())
            throw model_error(std::string("field `") + field +
                              "` must contain numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

// Accepts either a p x p array of rows or a flat row-major array of p*p.
Eigen::MatrixXd get_matrix(const json& j, const char* field, int p) {
    if (!j.contains(field))
        throw model_error(std::string("missing field `") + field + "`");
    const auto& v = j.at(field);
    if (!v.is_array())
        throw model_error(std::string("field `") + field +
                          "` must be an array");
    Eigen::MatrixXd out(p, p);
    if ((int)v.size() == p && v[0].is_array()) {
        for (int i = 0; i < p; ++i) {
            if (!v[i].is_array() || (int)v[i].size() != p)
                throw model_error(std::string("field `") + field +
                                  "` rows must have length " +
                                  std::to_string(p));
            for (int k = 0; k < p; ++k) out(i, k) = v[i][k].get<double>();
        }
    } else if ((int)v.size() == p * p) {
        for (int i = 0; i < p * p; ++i) out(i / p, i % p) = v[i].get<double>();
    } else {
        throw model_error(std::string("field `") + field + "` must be " +
                          std::to_string(p) + "x" + std::to_string(p) +
                          " (nested or row-major flat)");
    }
    return out;
}

AsymptoticProfile parse_asymptotic(const json& j) {
    AsymptoticProfile ap;
    ap.J0 = get_number(j, "J0");
    ap.J1 = get_number(j, "J1");
    ap.gamma0 = get_number_or(j, "gamma0", 0);
    ap.gamma1 = get_number_or(j, "gamma1", 0);
    ap.delta2_bar = get_number_or(j, "delta2_bar", 0);
    ap.Delta2_bar = get_number_or(j, "Delta2_bar", 0);
    ap.eta_m0_mu0 = get_number_or(j, "eta_m0_mu0", 0);
    ap.eta_m0_mu1 = get_number_or(j, "eta_m0_mu1", 0);
    ap.eta_m1_mu0 = get_number_or(j, "eta_m1_mu0", 0);
    ap.eta_m1_mu1 = get_number_or(j, "eta_m1_mu1", 0);
    ap.c = get_number_or(j, "c", 0);
    return ap;
}

} // namespace

Config parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw model_error(std::string("configuration is not valid JSON: ") +
                          e.what());
    }

    Config config;
    if (j.contains("reduced")) {
        const json& r = j.at("reduced");
        const std::string mode =
            r.contains("mode") ? r.at("mode").get<std::string>()
                               : "conditional";
        config.alpha0 = get_number_or(r, "alpha0", 0.5);
        if (mode == "conditional") {
            config.kind = Config::Kind::reduced_conditional;
            ReducedConditional& rc = config.rc;
            rc.p = get_int(r, "p");
            rc.n0 = get_int(r, "n0");
            rc.n1 = get_int(r, "n1");
            rc.beta0 = get_number(r, "beta0");
            rc.beta1 = get_number(r, "beta1");
            rc.c = r.contains("c") ? get_number(r, "c")
                                   : log_odds_threshold(config.alpha0);
            rc.delta2 = get_number(r, "delta2");
            rc.eta_m0_mu0 = get_number_or(r, "eta_m0_mu0", 0);
            rc.eta_m0_mu1 = get_number_or(r, "eta_m0_mu1", rc.delta2);
            rc.eta_m1_mu0 = get_number_or(r, "eta_m1_mu0", rc.delta2);
            rc.eta_m1_mu1 = get_number_or(r, "eta_m1_mu1", 0);
            rc.eta_m0mu0_mu0mu1 = get_number_or(r, "eta_m0mu0_mu0mu1", 0);
            rc.eta_m0mu0_m1mu0 = get_number_or(r, "eta_m0mu0_m1mu0", 0);
            rc.eta_m1mu1_m0mu1 = get_number_or(r, "eta_m1mu1_m0mu1", 0);
            rc.eta_m1mu1_mu1mu0 = get_number_or(r, "eta_m1mu1_mu1mu0", 0);
        } else if (mode == "unconditional") {
            config.kind = Config::Kind::reduced_unconditional;
            ReducedUnconditional& ru = config.ru;
            ru.p = get_int(r, "p");
            ru.n0 = get_int(r, "n0");
            ru.n1 = get_int(r, "n1");
            ru.nu0 = get_number(r, "nu0");
            ru.nu1 = get_number(r, "nu1");
            ru.c = r.contains("c") ? get_number(r, "c")
                                   : log_odds_threshold(config.alpha0);
            ru.Delta2 = get_number(r, "Delta2");
        } else {
            throw model_error("field `mode` must be conditional or "
                              "unconditional");
        }
    } else {
        config.kind = Config::Kind::full;
        FullModelSpec& s = config.spec;
        s.p = get_int(j, "p");
        s.mu0 = get_vector(j, "mu0", s.p);
        s.mu1 = get_vector(j, "mu1", s.p);
        s.sigma = get_matrix(j, "sigma", s.p);
        s.m0 = get_vector(j, "m0", s.p);
        s.m1 = get_vector(j, "m1", s.p);
        s.nu0 = get_number(j, "nu0");
        s.nu1 = get_number(j, "nu1");
        s.n0 = get_int(j, "n0");
        s.n1 = get_int(j, "n1");
        s.alpha0 = get_number_or(j, "alpha0", 0.5);
        s.validate();
        config.alpha0 = s.alpha0;
    }
    if (j.contains("asymptotic"))
        config.asymptotic = parse_asymptotic(j.at("asymptotic"));
    return config;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw model_error("cannot open configuration file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void write_moment_csv(std::ostream& out, const MomentMatrix& mm) {
    out << "name,value\n";
    auto row = [&](const char* name, double v) {
        out << name << ',' << v << '\n';
    };
    row("e_bayes_0", mm.e_bayes[0]);
    row("e_bayes_1", mm.e_bayes[1]);
    row("e_true_0", mm.e_true[0]);
    row("e_true_1", mm.e_true[1]);
    row("e_bayes2_0", mm.e_bayes2[0]);
    row("e_bayes2_1", mm.e_bayes2[1]);
    row("e_bayes01", mm.e_bayes01);
    row("e_true2_0", mm.e_true2[0]);
    row("e_true2_1", mm.e_true2[1]);
    row("e_true01", mm.e_true01);
    row("e_cross_00", mm.e_cross[0][0]);
    row("e_cross_01", mm.e_cross[0][1]);
    row("e_cross_10", mm.e_cross[1][0]);
    row("e_cross_11", mm.e_cross[1][1]);
    row("e_bayes_mix", mm.e_bayes_mix);
    row("e_true_mix", mm.e_true_mix);
    row("e_bayes2_mix", mm.e_bayes2_mix);
    row("e_true2_mix", mm.e_true2_mix);
    row("e_cross_mix", mm.e_cross_mix);
    row("bias", mm.bias);
    row("dev_var", mm.dev_var);
    row("rms", mm.rms);
}

void write_mc_json(std::ostream& out, const McConfig& config,
                   const McEstimates& est) {
    json j;
    j["config"]["mode"] =
        config.mode == Mode::conditional ? "conditional" : "unconditional";
    j["config"]["t1"] = config.t1;
    j["config"]["t2"] = config.t2;
    j["config"]["seed"] = config.seed;
    j["config"]["threads"] = config.threads;
    j["config"]["p"] = config.spec.p;
    j["config"]["n0"] = config.spec.n0;
    j["config"]["n1"] = config.spec.n1;
    j["config"]["nu0"] = config.spec.nu0;
    j["config"]["nu1"] = config.spec.nu1;
    j["config"]["alpha0"] = config.spec.alpha0;

    auto put = [&](const char* name, const McMoment& m) {
        j["moments"][name] = {{"mean", m.mean}, {"stderr", m.stderr_}};
    };
    put("e_bayes_0", est.e_bayes[0]);
    put("e_bayes_1", est.e_bayes[1]);
    put("e_true_0", est.e_true[0]);
    put("e_true_1", est.e_true[1]);
    put("e_bayes2_0", est.e_bayes2[0]);
    put("e_bayes2_1", est.e_bayes2[1]);
    put("e_bayes01", est.e_bayes01);
    put("e_true2_0", est.e_true2[0]);
    put("e_true2_1", est.e_true2[1]);
    put("e_true01", est.e_true01);
    put("e_cross_00", est.e_cross[0][0]);
    put("e_cross_01", est.e_cross[0][1]);
    put("e_cross_10", est.e_cross[1][0]);
    put("e_cross_11", est.e_cross[1][1]);
    put("e_bayes_mix", est.e_bayes_mix);
    put("e_true_mix", est.e_true_mix);
    put("e_bayes2_mix", est.e_bayes2_mix);
    put("e_true2_mix", est.e_true2_mix);
    put("e_cross_mix", est.e_cross_mix);
    put("bias", est.bias);
    put("delta2_hat", est.delta2_hat);
    j["dev_var"] = est.dev_var;
    j["rms"] = est.rms;
    j["delta2_hat_var"] = est.delta2_hat_var;
    j["replications"] = est.replications;
    j["rejected"] = est.rejected;
    j["seed"] = est.seed;
    j["elapsed_seconds"] = est.elapsed_seconds;
    out << j.dump(2) << '\n';
}

void write_manifest(std::ostream& out, const RunManifest& manifest) {
    json j;
    j["subcommand"] = manifest.subcommand;
    if (!manifest.config_echo.empty()) {
        try {
            j["config"] = json::parse(manifest.config_echo);
        } catch (const json::parse_error&) {
            j["config"] = manifest.config_echo;
        }
    }
    j["outputs"] = manifest.outputs;
    j["seed"] = manifest.seed;
    j["threads"] = manifest.threads;
    j["version"] = manifest.version;
    j["wall_seconds"] = manifest.wall_seconds;
    out << j.dump(2) << '\n';
}

} // namespace errmoments
