#ifndef SFMC_COMMANDS_HPP
#define SFMC_COMMANDS_HPP

#include <ostream>

#include "sfmc/config.hpp"
#include "sfmc/sim.hpp"

namespace sfmc {

/// CLI exit codes: 0 success, 1 verification failure, 2 config error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Lower/upper bound table over the m sweep; writes bound.csv plus a JSON
/// config echo into output_dir.
int cmd_bound(const ExperimentConfig& config, std::ostream& log);

/// Builds the packing pair matched to the channel (zero-reference sparse +
/// dictionary, or their positive-rate variants for Poisson), writes one
/// directory of element CSVs and a manifest per packing, and verifies the
/// reduction-theorem certificate. Nonzero exit if any certificate flag is
/// false.
int cmd_pack(const ExperimentConfig& config, std::ostream& log);

/// Monte-Carlo risk table per (m, estimator) with bound overlays; writes
/// risk.csv plus a JSON config echo.
int cmd_risk(const ExperimentConfig& config, std::ostream& log);

/// Grid verification of the channel's KL properties (nonnegativity,
/// kl(x,x) = 0, quadratic envelope); prints the worst-case slack.
int cmd_kl_check(const ExperimentConfig& config, std::ostream& log);

/// Trial generator described by the config's generator spec.
MatrixGenerator make_generator(const ExperimentConfig& config);

/// Named estimator ("zero" | "plugin" | "sparse_mle") bound to the config's
/// channel and estimator settings.
Estimator make_estimator(const ExperimentConfig& config, const std::string& name);

} // namespace sfmc

#endif // SFMC_COMMANDS_HPP
