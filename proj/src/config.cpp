#include "leibniz/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "leibniz/errors.hpp"

namespace leibniz {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

MarginalConfig parse_marginal(const json& j, const std::string& where) {
    MarginalConfig c;
    if (!j.contains("kind")) throw ConfigError(where + ": missing marginal kind");
    c.kind = j.at("kind").get<std::string>();
    c.rate = get_or(j, "rate", 1.0);
    c.shape = get_or(j, "shape", 1.0);
    c.mu = get_or(j, "mu", 0.0);
    c.sigma = get_or(j, "sigma", 1.0);
    return c;
}

json marginal_to_json(const MarginalConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["rate"] = c.rate;
    j["shape"] = c.shape;
    j["mu"] = c.mu;
    j["sigma"] = c.sigma;
    return j;
}

}  // namespace

Marginal build_marginal(const MarginalConfig& c) {
    if (c.kind == "exponential") {
        if (!(c.rate > 0)) throw ConfigError("marginal.rate: must be positive");
        return make_exponential(c.rate);
    }
    if (c.kind == "gamma") {
        if (!(c.shape > 0)) throw ConfigError("marginal.shape: must be positive");
        return make_gamma(c.shape);
    }
    if (c.kind == "lognormal") {
        if (!(c.sigma > 0)) throw ConfigError("marginal.sigma: must be positive");
        return make_lognormal(c.mu, c.sigma);
    }
    if (c.kind == "uniform01") return make_uniform01();
    if (c.kind == "normal") {
        if (!(c.sigma > 0)) throw ConfigError("marginal.sigma: must be positive");
        return make_normal(c.mu, c.sigma);
    }
    if (c.kind == "ramp") return make_ramp();
    throw ConfigError("marginal.kind: unknown kind '" + c.kind + "'");
}

JointDensity2 build_joint(const DistributionConfig& c) {
    if (c.bivariate_lognormal) {
        if (!(c.rho > -1.0 && c.rho < 1.0))
            throw ConfigError("distribution.rho: must lie in (-1,1)");
        return make_bivariate_lognormal(c.rho);
    }
    if (c.marginals.size() != 2)
        throw ConfigError("distribution.marginals: exactly two marginals required");
    Copula cop;
    if (c.copula == "independence") {
        cop = make_independence();
    } else if (c.copula == "clayton") {
        if (!(c.alpha > 0)) throw ConfigError("distribution.alpha: Clayton needs alpha > 0");
        cop = make_clayton(c.alpha);
    } else if (c.copula == "fgm") {
        if (!(c.alpha >= -1.0 && c.alpha <= 1.0))
            throw ConfigError("distribution.alpha: FGM needs alpha in [-1,1]");
        cop = make_fgm(c.alpha);
    } else if (c.copula == "gaussian") {
        if (!(c.rho > -1.0 && c.rho < 1.0))
            throw ConfigError("distribution.rho: must lie in (-1,1)");
        cop = make_gaussian(c.rho);
    } else {
        throw ConfigError("distribution.copula: unknown kind '" + c.copula + "'");
    }
    return make_joint(cop, build_marginal(c.marginals[0]), build_marginal(c.marginals[1]));
}

std::string distribution_label(const DistributionConfig& c) {
    std::ostringstream os;
    if (c.bivariate_lognormal) {
        os << "lognormal_rho" << c.rho;
        return os.str();
    }
    os << c.copula;
    if (c.copula == "clayton" || c.copula == "fgm") os << "_a" << c.alpha;
    if (c.copula == "gaussian") os << "_rho" << c.rho;
    for (const auto& m : c.marginals) {
        os << "+" << m.kind;
        if (m.kind == "gamma") os << m.shape;
        if (m.kind == "exponential") os << m.rate;
    }
    return os.str();
}

Model build_model(const ModelConfig& c) {
    if (c.name == "max_threshold") {
        JointDensity2 d = build_joint(c.distribution);
        if (!(d.support(0).lo == 0.0 && d.support(0).hi == 1.0 && d.support(1).lo == 0.0 &&
              d.support(1).hi == 1.0))
            throw ConfigError("model.distribution: max_threshold needs support (0,1)^2");
        Model m = model_max_threshold(std::move(d));
        m.distribution_id = distribution_label(c.distribution);
        return m;
    }
    if (c.name == "log_inventory") {
        Model m = model_log_inventory(build_joint(c.distribution), c.q);
        m.distribution_id = distribution_label(c.distribution);
        return m;
    }
    if (c.name == "smooth_sum_log") {
        Model m = model_smooth_sum_log(build_joint(c.distribution));
        m.distribution_id = distribution_label(c.distribution);
        return m;
    }
    if (c.name == "san") {
        SanSpec spec;
        if (c.san_default_bridge && c.edges.empty()) {
            spec = san_bridge_default();
        } else {
            for (const auto& e : c.edges) spec.edges.push_back(build_marginal(e));
            spec.incidence = c.incidence;
            spec.transform_edges = c.transform_edges;
            if (spec.edges.empty()) throw ConfigError("model.edges: SAN needs edge laws");
            if (spec.incidence.empty()) throw ConfigError("model.incidence: SAN needs paths");
            for (const auto& row : spec.incidence)
                if (row.size() != spec.edges.size())
                    throw ConfigError("model.incidence: row width must match edge count");
            for (int e : spec.transform_edges)
                if (e < 0 || e >= static_cast<int>(spec.edges.size()))
                    throw ConfigError("model.transform_edges: index out of range");
        }
        return model_san(spec);
    }
    throw ConfigError("model.name: '" + c.name + "' is not a samplable 2D/SAN model");
}

AmericanOptionModel build_option(const OptionConfig& c) {
    AmericanOptionModel m;
    m.s0 = c.s0;
    m.strike = c.strike;
    m.rate = c.rate;
    m.sigma = c.sigma;
    m.dividends = c.dividends;
    m.dates = c.dates;
    m.thresholds = c.thresholds;
    m.validate();
    return m;
}

GG1Model build_gg1(const GG1Config& c) {
    if (c.n_customers < 1) throw ConfigError("gg1.n_customers: must be positive");
    GG1Model m;
    m.n_customers = c.n_customers;
    auto make_service = [](const std::string& kind, double a, double b, double cc,
                           const char* field) {
        if (kind == "const") {
            return std::pair(
                std::function<double(double, double)>([a](double, double) { return a; }),
                std::function<double(double, double)>([](double, double) { return 0.0; }));
        }
        if (kind == "affine") {
            return std::pair(std::function<double(double, double)>(
                                 [a, b, cc](double th, double x) { return a + b * x + cc * th; }),
                             std::function<double(double, double)>(
                                 [cc](double, double) { return cc; }));
        }
        throw ConfigError(std::string(field) + ": unknown service kind");
    };
    auto [sp, dsp] = make_service(c.plus_kind, c.plus_a, c.plus_b, c.plus_c, "gg1.plus_kind");
    auto [sm, dsm] = make_service(c.minus_kind, c.minus_a, c.minus_b, c.minus_c, "gg1.minus_kind");
    m.service_plus = sp;
    m.dtheta_service_plus = dsp;
    m.service_minus = sm;
    m.dtheta_service_minus = dsm;
    if (c.interarrival_kind == "exponential") {
        const double rate = c.interarrival_param;
        if (!(rate > 0)) throw ConfigError("gg1.interarrival_param: rate must be positive");
        m.interarrival = [rate](RandomStream& rng) { return rng.exponential(rate); };
        m.interarrival_id = "exponential";
    } else if (c.interarrival_kind == "deterministic") {
        const double v = c.interarrival_param;
        if (!(v >= 0)) throw ConfigError("gg1.interarrival_param: must be nonnegative");
        m.interarrival = [v](RandomStream&) { return v; };
        m.interarrival_id = "deterministic";
    } else {
        throw ConfigError("gg1.interarrival_kind: unknown kind");
    }
    if (c.performance == "mean_wait")
        m.perf = GG1Model::Perf::MeanWait;
    else if (c.performance == "total_wait")
        m.perf = GG1Model::Perf::TotalWait;
    else if (c.performance == "mean_system_time")
        m.perf = GG1Model::Perf::MeanSystemTime;
    else
        throw ConfigError("gg1.performance: unknown kind");
    return m;
}

void validate_pairing(const ModelConfig& m, const std::string& est) {
    static const std::vector<std::string> known = {"fd",     "leibniz_divergence",
                                                   "leibniz_integral", "ipa_lr",
                                                   "conditional_leibniz", "dpa"};
    if (std::find(known.begin(), known.end(), est) == known.end())
        throw ConfigError("estimators: unknown estimator '" + est + "'");
    const std::string& n = m.name;
    auto ok = [&](std::initializer_list<const char*> allowed) {
        for (const char* a : allowed)
            if (est == a) return;
        throw ConfigError("estimators: '" + est + "' is not supported for model '" + n + "'");
    };
    if (n == "max_threshold" || n == "log_inventory")
        ok({"fd", "leibniz_divergence", "leibniz_integral"});
    else if (n == "smooth_sum_log")
        ok({"fd", "ipa_lr", "leibniz_integral"});
    else if (n == "san")
        ok({"fd", "leibniz_integral"});
    else if (n == "american_option")
        ok({"fd", "conditional_leibniz"});
    else if (n == "gg1")
        ok({"fd", "dpa"});
    else
        throw ConfigError("model.name: unknown model '" + n + "'");
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    if (!j.contains("model")) throw ConfigError("model: missing");
    const json& jm = j.at("model");
    if (!jm.contains("name")) throw ConfigError("model.name: missing");
    cfg.model.name = jm.at("name").get<std::string>();
    cfg.model.q = get_or(jm, "q", 0.5);
    if (jm.contains("distribution")) {
        const json& jd = jm.at("distribution");
        cfg.model.distribution.copula = get_or<std::string>(jd, "copula", "independence");
        cfg.model.distribution.alpha = get_or(jd, "alpha", 1.0);
        cfg.model.distribution.rho = get_or(jd, "rho", 0.0);
        cfg.model.distribution.bivariate_lognormal =
            get_or(jd, "bivariate_lognormal", false);
        if (jd.contains("marginals"))
            for (const auto& mj : jd.at("marginals"))
                cfg.model.distribution.marginals.push_back(
                    parse_marginal(mj, "model.distribution.marginals"));
    }
    if (jm.contains("edges")) {
        cfg.model.san_default_bridge = false;
        for (const auto& ej : jm.at("edges"))
            cfg.model.edges.push_back(parse_marginal(ej, "model.edges"));
        if (jm.contains("incidence"))
            cfg.model.incidence = jm.at("incidence").get<std::vector<std::vector<int>>>();
        if (jm.contains("transform_edges"))
            cfg.model.transform_edges = jm.at("transform_edges").get<std::vector<int>>();
    }
    if (jm.contains("option")) {
        const json& jo = jm.at("option");
        cfg.model.option.s0 = get_or(jo, "s0", 100.0);
        cfg.model.option.strike = get_or(jo, "strike", 100.0);
        cfg.model.option.rate = get_or(jo, "rate", 0.05);
        cfg.model.option.sigma = get_or(jo, "sigma", 0.2);
        cfg.model.option.dividends = get_or(jo, "dividends", std::vector<double>{});
        cfg.model.option.dates = get_or(jo, "dates", std::vector<double>{});
        cfg.model.option.thresholds = get_or(jo, "thresholds", std::vector<double>{});
        cfg.model.option.k_index = get_or(jo, "k_index", 1);
    }
    if (jm.contains("gg1")) {
        const json& jg = jm.at("gg1");
        cfg.model.gg1.n_customers = get_or(jg, "n_customers", 5);
        cfg.model.gg1.plus_kind = get_or<std::string>(jg, "plus_kind", "affine");
        cfg.model.gg1.minus_kind = get_or<std::string>(jg, "minus_kind", "affine");
        cfg.model.gg1.plus_a = get_or(jg, "plus_a", 0.6);
        cfg.model.gg1.plus_b = get_or(jg, "plus_b", 0.2);
        cfg.model.gg1.plus_c = get_or(jg, "plus_c", 0.2);
        cfg.model.gg1.minus_a = get_or(jg, "minus_a", 0.4);
        cfg.model.gg1.minus_b = get_or(jg, "minus_b", 0.1);
        cfg.model.gg1.minus_c = get_or(jg, "minus_c", -0.1);
        cfg.model.gg1.interarrival_kind =
            get_or<std::string>(jg, "interarrival_kind", "exponential");
        cfg.model.gg1.interarrival_param = get_or(jg, "interarrival_param", 1.0);
        cfg.model.gg1.performance = get_or<std::string>(jg, "performance", "mean_wait");
    }

    cfg.theta = get_or(j, "theta", 1.0);
    if (!j.contains("estimators") || !j.at("estimators").is_array() ||
        j.at("estimators").empty())
        throw ConfigError("estimators: must be a non-empty list");
    for (const auto& e : j.at("estimators")) {
        cfg.estimators.push_back(e.get<std::string>());
        validate_pairing(cfg.model, cfg.estimators.back());
    }
    cfg.n_reps = get_or<long>(j, "n_reps", 10000);
    if (cfg.n_reps < 2) throw ConfigError("n_reps: must be at least 2");
    cfg.surface_reps = get_or<long>(j, "surface_reps", -1);
    cfg.fd_delta = get_or(j, "fd_delta", 0.02);
    if (!(cfg.fd_delta > 0)) throw ConfigError("fd_delta: must be positive");
    cfg.crn = get_or(j, "crn", true);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 123456789ULL);
    cfg.workers = get_or(j, "workers", 0);
    cfg.output_path = get_or<std::string>(j, "output_path", "");
    cfg.format = get_or<std::string>(j, "format", "csv");
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format: must be 'csv' or 'json'");
    cfg.with_oracle = get_or(j, "oracle", false);

    // sanity-build the model so config errors surface before any estimation
    if (cfg.model.name == "american_option")
        build_option(cfg.model.option);
    else if (cfg.model.name == "gg1")
        build_gg1(cfg.model.gg1);
    else
        build_model(cfg.model);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
    json j;
    json jm;
    jm["name"] = cfg.model.name;
    jm["q"] = cfg.model.q;
    {
        json jd;
        jd["copula"] = cfg.model.distribution.copula;
        jd["alpha"] = cfg.model.distribution.alpha;
        jd["rho"] = cfg.model.distribution.rho;
        jd["bivariate_lognormal"] = cfg.model.distribution.bivariate_lognormal;
        json arr = json::array();
        for (const auto& m : cfg.model.distribution.marginals) arr.push_back(marginal_to_json(m));
        jd["marginals"] = arr;
        jm["distribution"] = jd;
    }
    if (!cfg.model.edges.empty()) {
        json arr = json::array();
        for (const auto& e : cfg.model.edges) arr.push_back(marginal_to_json(e));
        jm["edges"] = arr;
        jm["incidence"] = cfg.model.incidence;
        jm["transform_edges"] = cfg.model.transform_edges;
    }
    if (cfg.model.name == "american_option") {
        json jo;
        jo["s0"] = cfg.model.option.s0;
        jo["strike"] = cfg.model.option.strike;
        jo["rate"] = cfg.model.option.rate;
        jo["sigma"] = cfg.model.option.sigma;
        jo["dividends"] = cfg.model.option.dividends;
        jo["dates"] = cfg.model.option.dates;
        jo["thresholds"] = cfg.model.option.thresholds;
        jo["k_index"] = cfg.model.option.k_index;
        jm["option"] = jo;
    }
    if (cfg.model.name == "gg1") {
        json jg;
        jg["n_customers"] = cfg.model.gg1.n_customers;
        jg["plus_kind"] = cfg.model.gg1.plus_kind;
        jg["minus_kind"] = cfg.model.gg1.minus_kind;
        jg["plus_a"] = cfg.model.gg1.plus_a;
        jg["plus_b"] = cfg.model.gg1.plus_b;
        jg["plus_c"] = cfg.model.gg1.plus_c;
        jg["minus_a"] = cfg.model.gg1.minus_a;
        jg["minus_b"] = cfg.model.gg1.minus_b;
        jg["minus_c"] = cfg.model.gg1.minus_c;
        jg["interarrival_kind"] = cfg.model.gg1.interarrival_kind;
        jg["interarrival_param"] = cfg.model.gg1.interarrival_param;
        jg["performance"] = cfg.model.gg1.performance;
        jm["gg1"] = jg;
    }
    j["model"] = jm;
    j["theta"] = cfg.theta;
    j["estimators"] = cfg.estimators;
    j["n_reps"] = cfg.n_reps;
    j["surface_reps"] = cfg.surface_reps;
    j["fd_delta"] = cfg.fd_delta;
    j["crn"] = cfg.crn;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    j["output_path"] = cfg.output_path;
    j["format"] = cfg.format;
    j["oracle"] = cfg.with_oracle;
    return j.dump(2) + "\n";
}

}  // namespace leibniz
