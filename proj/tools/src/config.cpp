#include "cartan_sync_cli/config.hpp"

#include <json.hpp>

#include "cartan_sync/error.hpp"
#include "cartan_sync/harness.hpp"
#include "cartan_sync/sync.hpp"

namespace cartan_sync::cli {
namespace {

using nlohmann::json;

[[noreturn]] void Invalid(const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); }

std::vector<double> NumberList(const json& j, const char* key) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (const json& x : j) {
      if (!x.is_number()) Invalid(std::string("'") + key + "' entries must be numbers");
      out.push_back(x.get<double>());
    }
  } else {
    Invalid(std::string("'") + key + "' must be a number or a list of numbers");
  }
  if (out.empty()) Invalid(std::string("'") + key + "' must not be empty");
  return out;
}

std::optional<double> LambdaEntry(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "auto") return std::nullopt;
    Invalid("lambda must be \"auto\" or a number");
  }
  if (!j.is_number()) Invalid("lambda must be \"auto\" or a number");
  const double x = j.get<double>();
  if (!(x >= 1.0)) Invalid("lambda values must be >= 1");
  return x;
}

int IntValue(const json& j, const char* key) {
  if (!j.is_number_integer()) Invalid(std::string("'") + key + "' must be an integer");
  return j.get<int>();
}

}  // namespace

ExperimentConfig ParseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    Invalid(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) Invalid("config must be a JSON object");

  ExperimentConfig c;
  try {
    if (!j.contains("group")) Invalid("config needs a 'group'");
    const json& g = j.at("group");
    c.group.kind = ParseGroupKind(g.at("kind").get<std::string>());
    c.group.d = IntValue(g.at("d"), "d");
    c.group.l = c.group.kind == GroupKind::kMMG ? IntValue(g.at("l"), "l") : 0;
    if (c.group.d < 1 || (c.group.kind == GroupKind::kMMG && c.group.l < 1)) Invalid("group dimensions must be positive");

    if (!j.contains("n")) Invalid("config needs 'n'");
    c.n = IntValue(j.at("n"), "n");
    if (c.n < 2) Invalid("n must be at least 2");

    if (j.contains("methods")) {
      const json& m = j.at("methods");
      if (m.is_string()) {
        c.methods.push_back(m.get<std::string>());
      } else if (m.is_array()) {
        for (const json& x : m) c.methods.push_back(x.get<std::string>());
      } else {
        Invalid("'methods' must be a string or a list of strings");
      }
    }

    if (j.contains("noise")) {
      const json& nz = j.at("noise");
      if (!nz.is_object()) Invalid("'noise' must be an object");
      if (nz.contains("sigma_rot")) c.sigma_rot = NumberList(nz.at("sigma_rot"), "sigma_rot");
      if (nz.contains("sigma_trans")) c.sigma_trans = NumberList(nz.at("sigma_trans"), "sigma_trans");
      if (nz.contains("outlier_rate")) c.outlier_rate = NumberList(nz.at("outlier_rate"), "outlier_rate");
      if (nz.contains("p")) c.p = NumberList(nz.at("p"), "p");
      if (nz.contains("snr_db")) c.snr_db = NumberList(nz.at("snr_db"), "snr_db");
      if (nz.contains("sigma_ratio")) c.sigma_ratio = NumberList(nz.at("sigma_ratio"), "sigma_ratio").front();
    }
    if (j.contains("snr_db")) c.snr_db = NumberList(j.at("snr_db"), "snr_db");
    if (j.contains("sigma_ratio")) c.sigma_ratio = NumberList(j.at("sigma_ratio"), "sigma_ratio").front();

    if (j.contains("lambda")) {
      const json& l = j.at("lambda");
      c.lambda.clear();
      if (l.is_array()) {
        for (const json& x : l) c.lambda.push_back(LambdaEntry(x));
      } else {
        c.lambda.push_back(LambdaEntry(l));
      }
      if (c.lambda.empty()) Invalid("'lambda' must not be empty");
    }
    if (j.contains("lambda_budget")) c.lambda_budget = IntValue(j.at("lambda_budget"), "lambda_budget");
    if (j.contains("align_budget")) c.align_budget = IntValue(j.at("align_budget"), "align_budget");
    if (j.contains("trials_per_cell")) c.trials_per_cell = IntValue(j.at("trials_per_cell"), "trials_per_cell");
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_integer()) Invalid("'seed' must be an integer");
      c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
  } catch (const json::exception& e) {
    Invalid(std::string("config field has the wrong type: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfigInvalid) throw;
    Invalid(e.what());
  }

  if (c.lambda_budget < 1) Invalid("lambda_budget must be at least 1");
  if (c.trials_per_cell < 1) Invalid("trials_per_cell must be at least 1");
  if (!(c.sigma_ratio >= 0.0)) Invalid("sigma_ratio must be nonnegative");
  for (const std::string& m : c.methods) CheckMethod(m, c.group);
  for (const Cell& cell : ExpandCells(c)) {
    NoiseSpec spec{cell.sigma_rot, cell.sigma_trans, cell.outlier_rate, cell.p, 0};
    try {
      spec.Validate();
    } catch (const Error& e) {
      Invalid(e.what());
    }
  }
  return c;
}

std::vector<Cell> ExpandCells(const ExperimentConfig& c) {
  std::vector<Cell> cells;
  const std::vector<std::optional<double>> snrs =
      c.snr_db.empty() ? std::vector<std::optional<double>>{std::nullopt}
                       : std::vector<std::optional<double>>(c.snr_db.begin(), c.snr_db.end());
  const std::vector<double> no_sigma{0.0};
  const auto& rot = c.snr_db.empty() ? c.sigma_rot : no_sigma;
  const auto& trans = c.snr_db.empty() ? c.sigma_trans : no_sigma;
  for (double p : c.p) {
    for (const auto& snr : snrs) {
      for (double sr : rot) {
        for (double st : trans) {
          for (double out : c.outlier_rate) {
            cells.push_back({static_cast<int>(cells.size()), sr, st, out, p, snr});
          }
        }
      }
    }
  }
  return cells;
}

void CheckMethod(const std::string& method, const GroupSpec& group) {
  const bool se = group.kind == GroupKind::kSE;
  const bool mmg = group.kind == GroupKind::kMMG;
  bool ok = false;
  if (method == "contraction-spectral") {
    ok = se || mmg;
  } else if (method == "contraction-pd" || method == "separation" || method == "se-spectral") {
    ok = se;
  } else if (method == "separation-mmg") {
    ok = mmg;
  } else if (method.rfind("plugin:", 0) == 0) {
    LookupCompactSolver(method.substr(7));
    ok = se || mmg;
  } else {
    Invalid("unknown method '" + method + "'");
  }
  if (!ok) Invalid("method '" + method + "' does not apply to " + group.ToString());
}

std::uint64_t TruthSeed(std::uint64_t seed, int trial) {
  return Substream(seed, 0x7472757468ULL, static_cast<std::uint64_t>(trial))();
}

std::uint64_t NoiseSeed(std::uint64_t seed, int cell, int trial) {
  return Substream(seed, 0x1000ULL + static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial))();
}

}  // namespace cartan_sync::cli
