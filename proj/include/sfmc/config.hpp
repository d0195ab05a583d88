#ifndef SFMC_CONFIG_HPP
#define SFMC_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sfmc/bounds.hpp"
#include "sfmc/channels.hpp"
#include "sfmc/estimators.hpp"
#include "sfmc/model.hpp"

namespace sfmc {

/// Invalid or inconsistent experiment configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// How Monte-Carlo trials draw the true matrix.
struct GeneratorSpec {
    /// "class_uniform" (random member of the model class), "zero" (zero
    /// matrix; the constant-x_min matrix for positive-rate classes) or
    /// "fixed" (a matrix loaded from csv_path).
    std::string type = "class_uniform";
    std::string csv_path;
};

struct ExperimentConfig {
    ModelClassParams params;
    std::shared_ptr<const NoiseChannel> channel;
    BoundConstants consts;
    EstimatorConfig estimator;
    std::vector<std::string> estimator_names = {"zero", "plugin", "sparse_mle"};
    GeneratorSpec generator;
    std::vector<std::int64_t> m_sweep;
    int trials = 100;
    std::uint64_t master_seed = 1;
    std::string output_dir = ".";
    int threads = 1;
};

/// Parses and validates a config document; throws ConfigError with a
/// human-readable message on any problem. See README for the schema.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);

/// Channel record {type, parameters}; one-bit channels derive their domain
/// half-width from the model class (r * a_max).
std::shared_ptr<const NoiseChannel> channel_from_json(const nlohmann::json& doc,
                                                      const ModelClassParams& params);
nlohmann::json channel_to_json(const NoiseChannel& channel);

/// Full round-trippable echo of the configuration, written next to every
/// CSV artifact as an audit trail.
nlohmann::json config_echo(const ExperimentConfig& config);

/// Term-by-term breakdown of an evaluated bound.
nlohmann::json bound_report_to_json(const BoundReport& report);

} // namespace sfmc

#endif // SFMC_CONFIG_HPP
