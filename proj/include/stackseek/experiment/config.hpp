#ifndef STACKSEEK_EXPERIMENT_CONFIG_HPP
#define STACKSEEK_EXPERIMENT_CONFIG_HPP

#include "stackseek/scenarios/energy.hpp"
#include "stackseek/scenarios/illustrative.hpp"
#include "stackseek/scenarios/testbed.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace stackseek::experiment {

/// Every field-level problem found while reading a config.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

enum class Scenario { kIllustrative, kTestbed, kEnergy };
const char* to_string(Scenario s);

struct ExperimentConfig {
  Scenario scenario = Scenario::kTestbed;
  std::string name = "run";       // file prefix
  long iterations = 1000;         // K
  std::uint64_t seed = 1;
  std::string out = "out";
  int replicates = 1;
  bool paper_sign = false;
  bool parallel_inner = false;

  ScheduleParams<double> schedule{};
  ToleranceRule<double> inner_tol{};
  ViSolveParams<double> inner{};

  // Illustrative scenario: the leader runs one of the three regimes.
  scenarios::RegimeKind regime = scenarios::RegimeKind::kExact;
  double regime_eta = 0.1;
  std::vector<double> cycle{0.5, 1.5};
  double oracle_hi = 5.0;  // upper end of the 1-D grid oracle
  double grid_step = 1e-4;

  // Stationarity profile; unset means on for the testbed (analytic selection)
  // and off for the energy scenario (each point costs a Tikhonov path).
  std::optional<bool> profile;
  std::optional<double> fd_step;

  scenarios::IllustrativeConfig illustrative{};
  scenarios::TestbedConfig testbed{};
  scenarios::EnergyConfig energy = scenarios::default_energy_config();
};

/// Flattened key -> raw value view of a config file. Sections become dotted
/// prefixes; JSON objects are flattened the same way, arrays become
/// space-separated lists with ';' between rows.
std::map<std::string, std::string> read_flat(const std::string& text, bool json);

ExperimentConfig parse_config_text(const std::string& text, bool json = false);
/// Reads `path`; JSON when the file starts with '{'.
ExperimentConfig parse_config(const std::string& path);

/// Throws ConfigError listing every violated rule.
void validate(const ExperimentConfig& cfg);

std::vector<std::string> known_keys();

}  // namespace stackseek::experiment

#endif  // STACKSEEK_EXPERIMENT_CONFIG_HPP
