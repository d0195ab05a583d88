#include "sfmc/config.hpp"

#include <fstream>

namespace sfmc {

using nlohmann::json;

namespace {

template <typename T>
T require(const json& doc, const std::string& key) {
    if (!doc.contains(key)) throw ConfigError("missing config key: " + key);
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
}

template <typename T>
T optional_or(const json& doc, const std::string& key, T fallback) {
    if (!doc.contains(key)) return fallback;
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
}

ModelClassParams params_from_json(const json& doc) {
    ModelClassParams p;
    p.n1 = require<int>(doc, "n1");
    p.n2 = require<int>(doc, "n2");
    p.r = require<int>(doc, "r");
    p.k = require<int>(doc, "k");
    p.a_max = require<double>(doc, "a_max");
    if (doc.contains("x_min")) p.x_min = require<double>(doc, "x_min");
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid model class: ") + e.what());
    }
    return p;
}

json params_to_json(const ModelClassParams& p) {
    json doc{{"n1", p.n1}, {"n2", p.n2}, {"r", p.r}, {"k", p.k}, {"a_max", p.a_max}};
    if (p.x_min) doc["x_min"] = *p.x_min;
    return doc;
}

InitScheme init_scheme_from_name(const std::string& name) {
    if (name == "random_uniform") return InitScheme::random_uniform;
    if (name == "spectral_like") return InitScheme::spectral_like;
    throw ConfigError("unknown init scheme: " + name);
}

} // namespace

std::shared_ptr<const NoiseChannel> channel_from_json(const json& doc,
                                                      const ModelClassParams& params) {
    const auto type = require<std::string>(doc, "type");
    try {
        if (type == "gaussian") {
            std::optional<double> sigma_min;
            if (doc.contains("sigma_min")) sigma_min = require<double>(doc, "sigma_min");
            return std::make_shared<GaussianChannel>(require<double>(doc, "sigma"), sigma_min);
        }
        if (type == "laplace")
            return std::make_shared<LaplaceChannel>(require<double>(doc, "tau"));
        if (type == "poisson") {
            const double x_min =
                doc.contains("x_min") ? require<double>(doc, "x_min")
                                      : params.x_min.value_or(0.0);
            return std::make_shared<PoissonChannel>(x_min, optional_or(doc, "strict", true));
        }
        if (type == "onebit") {
            const auto link_name = require<std::string>(doc, "link");
            const double scale = optional_or(doc, "scale", 1.0);
            std::shared_ptr<const Link> link;
            if (link_name == "logistic")
                link = std::make_shared<LogisticLink>(scale);
            else if (link_name == "probit")
                link = std::make_shared<ProbitLink>(scale);
            else
                throw ConfigError("unknown one-bit link: " + link_name);
            return std::make_shared<OneBitChannel>(link, params.x_max());
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid channel parameters: ") + e.what());
    }
    throw ConfigError("unknown channel type: " + type);
}

json channel_to_json(const NoiseChannel& channel) {
    switch (channel.kind()) {
        case ChannelKind::gaussian: {
            const auto& g = static_cast<const GaussianChannel&>(channel);
            json doc{{"type", "gaussian"}, {"sigma", g.sigma()}};
            if (g.sigma_min()) doc["sigma_min"] = *g.sigma_min();
            return doc;
        }
        case ChannelKind::laplace: {
            const auto& l = static_cast<const LaplaceChannel&>(channel);
            return json{{"type", "laplace"}, {"tau", l.tau()}};
        }
        case ChannelKind::poisson: {
            const auto& p = static_cast<const PoissonChannel&>(channel);
            return json{{"type", "poisson"}, {"x_min", p.x_min()}, {"strict", p.strict()}};
        }
        case ChannelKind::one_bit: {
            const auto& o = static_cast<const OneBitChannel&>(channel);
            return json{{"type", "onebit"},
                        {"link", o.link().name()},
                        {"scale", o.link().scale()}};
        }
    }
    throw std::logic_error("unknown channel kind");
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig config;
    config.params = params_from_json(require<json>(doc, "params"));
    config.channel = channel_from_json(require<json>(doc, "channel"), config.params);

    if (doc.contains("constants")) {
        const json& c = doc.at("constants");
        config.consts.c_d = optional_or(c, "c_d", 1.0);
        config.consts.alpha = optional_or(c, "alpha", 1.0 / 16.0);
        config.consts.gamma_d_const =
            optional_or(c, "gamma", BoundConstants::default_gamma(config.consts.alpha));
    }
    try {
        config.consts.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid constants: ") + e.what());
    }

    if (doc.contains("estimator")) {
        const json& e = doc.at("estimator");
        config.estimator.max_iters = optional_or(e, "max_iters", config.estimator.max_iters);
        config.estimator.tol = optional_or(e, "tol", config.estimator.tol);
        config.estimator.step_size = optional_or(e, "step_size", config.estimator.step_size);
        config.estimator.k_budget = optional_or(e, "k_budget", 0);
        config.estimator.r_budget = optional_or(e, "r_budget", 0);
        config.estimator.restarts = optional_or(e, "restarts", config.estimator.restarts);
        config.estimator.init_scheme =
            init_scheme_from_name(optional_or<std::string>(e, "init", "random_uniform"));
    }
    try {
        config.estimator.validate(config.params);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid estimator config: ") + e.what());
    }

    config.estimator_names = optional_or(doc, "estimators", config.estimator_names);
    for (const auto& name : config.estimator_names)
        if (name != "zero" && name != "plugin" && name != "sparse_mle")
            throw ConfigError("unknown estimator: " + name);

    if (doc.contains("generator")) {
        const json& g = doc.at("generator");
        config.generator.type = optional_or<std::string>(g, "type", "class_uniform");
        config.generator.csv_path = optional_or<std::string>(g, "csv", "");
        if (config.generator.type != "class_uniform" && config.generator.type != "zero" &&
            config.generator.type != "fixed")
            throw ConfigError("unknown generator type: " + config.generator.type);
        if (config.generator.type == "fixed" && config.generator.csv_path.empty())
            throw ConfigError("fixed generator needs a csv path");
    }

    config.m_sweep = require<std::vector<std::int64_t>>(doc, "m_sweep");
    if (config.m_sweep.empty()) throw ConfigError("m_sweep must be nonempty");
    const std::int64_t cells =
        static_cast<std::int64_t>(config.params.n1) * config.params.n2;
    for (const auto m : config.m_sweep)
        if (m < 1 || m > cells) throw ConfigError("every m in m_sweep must lie in [1, n1*n2]");

    config.trials = optional_or(doc, "trials", config.trials);
    if (config.trials < 1) throw ConfigError("trials must be >= 1");
    config.master_seed = optional_or<std::uint64_t>(doc, "master_seed", config.master_seed);
    config.output_dir = optional_or<std::string>(doc, "output_dir", config.output_dir);
    config.threads = optional_or(doc, "threads", config.threads);
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
    return config;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

json config_echo(const ExperimentConfig& config) {
    json doc;
    doc["params"] = params_to_json(config.params);
    doc["channel"] = channel_to_json(*config.channel);
    doc["constants"] = json{{"c_d", config.consts.c_d},
                            {"alpha", config.consts.alpha},
                            {"gamma", config.consts.gamma_d_const}};
    doc["estimator"] = json{
        {"max_iters", config.estimator.max_iters},
        {"tol", config.estimator.tol},
        {"step_size", config.estimator.step_size},
        {"k_budget", config.estimator.k_budget},
        {"r_budget", config.estimator.r_budget},
        {"restarts", config.estimator.restarts},
        {"init", config.estimator.init_scheme == InitScheme::random_uniform ? "random_uniform"
                                                                            : "spectral_like"}};
    doc["estimators"] = config.estimator_names;
    json gen{{"type", config.generator.type}};
    if (!config.generator.csv_path.empty()) gen["csv"] = config.generator.csv_path;
    doc["generator"] = gen;
    doc["m_sweep"] = config.m_sweep;
    doc["trials"] = config.trials;
    doc["master_seed"] = config.master_seed;
    // output_dir and threads are run metadata, not part of the experiment:
    // results are thread-count invariant and the echo stays byte-stable
    return doc;
}

json bound_report_to_json(const BoundReport& report) {
    json doc{{"value", report.value},
             {"boundedness_term", report.boundedness_term},
             {"parametric_term", report.parametric_term},
             {"active_regime", regime_name(report.active_regime)},
             {"delta", report.delta}};
    if (report.channel_tag) doc["channel"] = channel_kind_name(*report.channel_tag);
    return doc;
}

} // namespace sfmc
