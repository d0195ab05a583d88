#include "sfmc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sfmc/packing.hpp"

namespace sfmc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
}

fs::path ensure_output_dir(const ExperimentConfig& config) {
    fs::path dir(config.output_dir);
    fs::create_directories(dir);
    return dir;
}

void write_sidecar(const ExperimentConfig& config, const fs::path& path) {
    write_text_file(path, config_echo(config).dump(2) + "\n");
}

Matrix random_class_member(const ModelClassParams& params, Rng& rng) {
    Matrix d(params.n1, params.r);
    Matrix a(params.r, params.n2);
    if (params.x_min) {
        // positive-rate class: nonnegative factors with an offset row keep
        // every entry of D*A at or above x_min
        for (int i = 0; i < params.n1; ++i) {
            d(i, 0) = 1.0;
            for (int c = 1; c < params.r; ++c) d(i, c) = rng.uniform01();
        }
        for (int j = 0; j < params.n2; ++j)
            a(0, j) = rng.uniform(*params.x_min, params.a_max);
        const int budget = params.k - params.n2;
        if (budget > 0 && params.r > 1) {
            std::vector<int> cells(static_cast<std::size_t>(params.r - 1) * params.n2);
            std::iota(cells.begin(), cells.end(), 0);
            for (int t = 0; t < budget && t < static_cast<int>(cells.size()); ++t) {
                const int pick =
                    t + static_cast<int>(rng.next_u64() % (cells.size() - t));
                std::swap(cells[t], cells[pick]);
                a(1 + cells[t] / params.n2, cells[t] % params.n2) =
                    rng.uniform(0.0, params.a_max);
            }
        }
    } else {
        for (auto& v : d.data()) v = rng.uniform(-1.0, 1.0);
        std::vector<int> cells(static_cast<std::size_t>(params.r) * params.n2);
        std::iota(cells.begin(), cells.end(), 0);
        for (int t = 0; t < params.k && t < static_cast<int>(cells.size()); ++t) {
            const int pick = t + static_cast<int>(rng.next_u64() % (cells.size() - t));
            std::swap(cells[t], cells[pick]);
            a.data()[cells[t]] = rng.uniform(-params.a_max, params.a_max);
        }
    }
    return product(FactorPair{std::move(d), std::move(a)});
}

json certificate_to_json(const TsybakovCertificate& cert) {
    return json{{"separation_ok", cert.separation_ok},
                {"required_separation", cert.required_separation},
                {"achieved_separation", cert.achieved_separation},
                {"kl_budget_ok", cert.kl_budget_ok},
                {"avg_kl", cert.avg_kl},
                {"budget", cert.budget},
                {"alpha", cert.alpha},
                {"cardinality", cert.cardinality}};
}

json code_to_json(const BinaryCode& code) {
    json words = json::array();
    for (const auto& w : code.codewords) {
        std::string bits(w.size(), '0');
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i]) bits[i] = '1';
        words.push_back(bits);
    }
    return json{{"length", code.length},
                {"min_distance", code.min_distance},
                {"cardinality", code.cardinality()},
                {"codewords", words}};
}

} // namespace

MatrixGenerator make_generator(const ExperimentConfig& config) {
    const ModelClassParams params = config.params;
    if (config.generator.type == "zero") {
        Matrix fixed = params.x_min ? Matrix::constant(params.n1, params.n2, *params.x_min)
                                    : Matrix(params.n1, params.n2);
        return [fixed](Rng&) { return fixed; };
    }
    if (config.generator.type == "fixed") {
        Matrix fixed = read_csv_file(config.generator.csv_path);
        if (fixed.rows() != params.n1 || fixed.cols() != params.n2)
            throw ConfigError("fixed generator matrix has the wrong shape");
        return [fixed](Rng&) { return fixed; };
    }
    return [params](Rng& rng) { return random_class_member(params, rng); };
}

Estimator make_estimator(const ExperimentConfig& config, const std::string& name) {
    if (name == "zero")
        return [](const ObservationSet& obs, const ModelClassParams& params, Rng&) {
            return estimate_zero(obs, params);
        };
    if (name == "plugin")
        return [](const ObservationSet& obs, const ModelClassParams& params, Rng&) {
            return estimate_plugin(obs, params);
        };
    if (name == "sparse_mle") {
        auto channel = config.channel;
        const EstimatorConfig cfg = config.estimator;
        return [channel, cfg](const ObservationSet& obs, const ModelClassParams& params,
                              Rng& rng) {
            return estimate_sparse_mle(obs, params, *channel, cfg, rng);
        };
    }
    throw ConfigError("unknown estimator: " + name);
}

int cmd_bound(const ExperimentConfig& config, std::ostream& log) {
    const fs::path dir = ensure_output_dir(config);
    std::ostringstream csv;
    csv << "m,lower_bound,regime,large_sample_rate,small_sample_rate,upper_bound_rate\n";
    json reports = json::array();
    for (const auto m : config.m_sweep) {
        BoundReport report;
        double upper = 0.0;
        try {
            report = corollary_bound(*config.channel, config.params, m, config.consts);
            upper = upper_bound_rate(*config.channel, config.params, m);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        // Poisson has no quadratic-KL coefficient; sqrt(x_min) plays the
        // same role in its large-sample rate column.
        const double mu = config.channel->quadratic_mu(config.params)
                              .value_or(std::sqrt(config.params.x_min.value_or(1.0)));
        csv << m << ',' << fmt(report.value) << ',' << regime_name(report.active_regime)
            << ',' << fmt(large_sample_rate(config.params, mu, m)) << ','
            << fmt(small_sample_rate(config.params)) << ',' << fmt(upper) << '\n';
        json entry = bound_report_to_json(report);
        entry["m"] = m;
        entry["upper_bound_rate"] = upper;
        reports.push_back(entry);
    }
    write_text_file(dir / "bound.csv", csv.str());
    write_text_file(dir / "bound.json", reports.dump(2) + "\n");
    write_sidecar(config, dir / "bound_config.json");
    log << "wrote " << (dir / "bound.csv").string() << "\n";
    return kExitOk;
}

int cmd_pack(const ExperimentConfig& config, std::ostream& log) {
    const fs::path dir = ensure_output_dir(config);
    const std::int64_t m = config.m_sweep.front();
    const bool poisson = config.channel->kind() == ChannelKind::poisson;

    std::vector<PackingSet> packings;
    try {
        if (poisson) {
            Rng rng_a = derive_stream(config.master_seed, 0);
            Rng rng_b = derive_stream(config.master_seed, 1);
            packings.push_back(
                build_poisson_sparse_packing(config.params, m, config.consts, rng_a));
            packings.push_back(
                build_poisson_dictionary_packing(config.params, m, config.consts, rng_b));
        } else {
            const auto mu = config.channel->quadratic_mu(config.params);
            if (!mu) throw ConfigError("channel provides no quadratic-KL coefficient");
            Rng rng_a = derive_stream(config.master_seed, 0);
            Rng rng_b = derive_stream(config.master_seed, 1);
            packings.push_back(
                build_sparse_packing(config.params, m, *mu, config.consts, rng_a));
            packings.push_back(
                build_dictionary_packing(config.params, m, *mu, config.consts, rng_b));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    bool all_ok = true;
    for (const auto& ps : packings) {
        const TsybakovCertificate cert = verify_tsybakov(
            ps, *config.channel, config.params, m, config.consts.alpha, config.threads);
        all_ok = all_ok && cert.all_ok();

        const fs::path pack_dir = dir / ("pack_" + packing_kind_name(ps.kind));
        fs::create_directories(pack_dir);
        for (std::size_t i = 0; i < ps.elements.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "element_%04zu.csv", i);
            write_csv_file(ps.elements[i], (pack_dir / name).string());
        }
        json manifest{{"kind", packing_kind_name(ps.kind)},
                      {"m", m},
                      {"amplitude", ps.amplitude},
                      {"copies_per_bit", ps.copies_per_bit},
                      {"reference_index", ps.reference_index},
                      {"min_sq_separation", ps.min_sq_separation},
                      {"separation_floor", ps.separation_floor},
                      {"branch_min", ps.branch_min},
                      {"code", code_to_json(ps.code)},
                      {"certificate", certificate_to_json(cert)},
                      {"config", config_echo(config)}};
        write_text_file(pack_dir / "manifest.json", manifest.dump(2) + "\n");
        log << packing_kind_name(ps.kind) << ": cardinality " << ps.cardinality()
            << ", separation " << fmt(cert.achieved_separation) << " (required "
            << fmt(cert.required_separation) << "), avg KL " << fmt(cert.avg_kl)
            << " (budget " << fmt(cert.budget) << ") -> "
            << (cert.all_ok() ? "ok" : "FAILED") << "\n";
    }
    return all_ok ? kExitOk : kExitVerificationFailure;
}

int cmd_risk(const ExperimentConfig& config, std::ostream& log) {
    const fs::path dir = ensure_output_dir(config);
    const MatrixGenerator generator = make_generator(config);

    std::ostringstream csv;
    csv << "m,estimator,risk_mean,risk_stderr,lower_bound,upper_bound_rate\n";
    for (const auto m : config.m_sweep) {
        double lower = 0.0;
        double upper = 0.0;
        try {
            lower = corollary_bound(*config.channel, config.params, m, config.consts).value;
            upper = upper_bound_rate(*config.channel, config.params, m);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        for (const auto& name : config.estimator_names) {
            const Estimator estimator = make_estimator(config, name);
            const RiskEstimate risk =
                monte_carlo_risk(generator, estimator, *config.channel, config.params, m,
                                 config.trials, config.master_seed, config.threads);
            csv << m << ',' << name << ',' << fmt(risk.mean) << ',' << fmt(risk.std_error)
                << ',' << fmt(lower) << ',' << fmt(upper) << '\n';
            log << "m=" << m << " " << name << ": risk " << fmt(risk.mean) << " +/- "
                << fmt(risk.std_error) << " (" << risk.failures << " failed trials)\n";
        }
    }
    write_text_file(dir / "risk.csv", csv.str());
    write_sidecar(config, dir / "risk_config.json");
    log << "wrote " << (dir / "risk.csv").string() << "\n";
    return kExitOk;
}

int cmd_kl_check(const ExperimentConfig& config, std::ostream& log) {
    const NoiseChannel& channel = *config.channel;
    const ModelClassParams& params = config.params;

    double lo;
    double hi;
    double envelope_coeff; // kl(x,y) <= envelope_coeff * (x-y)^2 + slack
    if (channel.kind() == ChannelKind::poisson) {
        if (!params.x_min) throw ConfigError("poisson kl-check requires x_min");
        lo = *params.x_min;
        hi = std::max(params.x_max(), lo * 2.0);
        envelope_coeff = 1.0 / *params.x_min;
    } else {
        const auto mu = channel.quadratic_mu(params);
        if (!mu) throw ConfigError("channel provides no quadratic-KL coefficient");
        lo = -params.x_max();
        hi = params.x_max();
        envelope_coeff = 1.0 / (2.0 * (*mu) * (*mu));
    }

    constexpr int kGrid = 51;
    double worst_slack = -std::numeric_limits<double>::infinity();
    double worst_neg = 0.0;
    double worst_diag = 0.0;
    for (int a = 0; a < kGrid; ++a) {
        const double x = lo + (hi - lo) * a / (kGrid - 1);
        worst_diag = std::max(worst_diag, std::abs(channel.kl(x, x)));
        for (int b = 0; b < kGrid; ++b) {
            const double y = lo + (hi - lo) * b / (kGrid - 1);
            const double v = channel.kl(x, y);
            worst_neg = std::min(worst_neg, v);
            const double d = x - y;
            worst_slack = std::max(worst_slack, v - envelope_coeff * d * d);
        }
    }

    const bool ok = worst_slack <= 1e-12 && worst_neg >= 0.0 && worst_diag == 0.0;
    log << "channel " << channel.name() << " on [" << fmt(lo) << ", " << fmt(hi) << "]\n"
        << "worst quadratic-envelope slack: " << fmt(worst_slack) << "\n"
        << "worst negative KL: " << fmt(worst_neg) << "\n"
        << "worst |kl(x,x)|: " << fmt(worst_diag) << "\n"
        << (ok ? "kl-check ok" : "kl-check FAILED") << "\n";
    return ok ? kExitOk : kExitVerificationFailure;
}

} // namespace sfmc
