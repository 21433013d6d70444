#include "nonlocal/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "nonlocal/causality.hpp"
#include "nonlocal/dynamics.hpp"
#include "nonlocal/nosignal.hpp"
#include "nonlocal/protocol.hpp"

namespace nonlocal::cli {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Schema helpers. All parsing happens before any computation starts.

json parse_config(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + " must be an object");
}

void allow_keys(const json& j, const std::string& path,
                std::initializer_list<std::string_view> keys) {
  require_object(j, path);
  const std::set<std::string_view> allowed(keys);
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + path);
    }
  }
}

void require_keys(const json& j, const std::string& path,
                  std::initializer_list<std::string_view> keys) {
  for (auto key : keys) {
    if (!j.contains(key)) {
      throw ConfigError(path + " is missing '" + std::string(key) + "'");
    }
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path + " must be finite");
  return v;
}

double number_or(const json& j, std::string_view key, const std::string& path,
                 double fallback) {
  return j.contains(key) ? number(j.at(key), path + "." + std::string(key)) : fallback;
}

std::uint64_t unsigned_integer(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) {
    throw ConfigError(path + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path + " must be true or false");
  return j.get<bool>();
}

std::vector<double> number_list(const json& j, const std::string& path) {
  if (j.is_number()) return {number(j, path)};
  if (!j.is_array() || j.empty()) {
    throw ConfigError(path + " must be a number or a non-empty array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::array<double, 2> site_pair(const json& j, const std::string& path) {
  if (j.is_number()) {
    const double v = number(j, path);
    return {v, v};
  }
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(path + " must be a number or a [A, B] pair");
  }
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

std::array<double, 2> interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(path + " must be [min, max]");
  return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

BlochAxis axis(const json& j, const std::string& path) {
  allow_keys(j, path, {"theta", "azimuth"});
  require_keys(j, path, {"theta", "azimuth"});
  BlochAxis a{number(j.at("theta"), path + ".theta"),
              number(j.at("azimuth"), path + ".azimuth")};
  try {
    MeasurementSetting{path, a}.validate();
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  return a;
}

std::array<BlochAxis, 2> settings_pair(const json& j, const std::string& path) {
  allow_keys(j, path, {"A", "B"});
  require_keys(j, path, {"A", "B"});
  return {axis(j.at("A"), path + ".A"), axis(j.at("B"), path + ".B")};
}

std::uint64_t resolve_seed(const json& config, Seed override_seed) {
  if (override_seed) return *override_seed;
  return config.contains("seed") ? unsigned_integer(config.at("seed"), "seed") : 0;
}

std::uint64_t positive_shots(const json& j, const std::string& path) {
  const auto shots = unsigned_integer(j, path);
  if (shots == 0) throw ConfigError(path + " must be >= 1");
  return shots;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& stream) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(stream);
  auto logger = std::make_shared<spdlog::logger>("nonlocal", sink);
  logger->set_pattern("%l: %v");
  logger->set_level(spdlog::level::info);
  if (const char* env = std::getenv("NONLOCAL_LOG")) {
    const std::string level(env);
    if (level == "error") logger->set_level(spdlog::level::err);
    if (level == "debug") logger->set_level(spdlog::level::debug);
  }
  return logger;
}

// ---------------------------------------------------------------------------
// correlations

const std::string kModeA = "boson_A";
const std::string kModeB = "boson_B";
const std::string kSpinA = "spin_A";
const std::string kSpinB = "spin_B";

// The boson superposition swapped onto the spin pair.
StateVector swapped_pair(double phi) {
  auto space = make_space({SubsystemSpec::mode(kModeA, 2, Site::A),
                           SubsystemSpec::mode(kModeB, 2, Site::B),
                           SubsystemSpec::two_level(kSpinA, Site::A),
                           SubsystemSpec::two_level(kSpinB, Site::B)});
  auto state = prepare_superposition(space, kModeA, kModeB, phi);
  state = apply_local(state, swap_unitary(*space, kModeA, kSpinA));
  return apply_local(state, swap_unitary(*space, kModeB, kSpinB));
}

}  // namespace

std::string cmd_correlations(const std::string& text, Seed seed_override,
                             Format format) {
  const json config = parse_config(text);
  allow_keys(config, "config", {"phi", "settings", "shots", "seed"});
  require_keys(config, "config", {"phi"});
  const double phi = number(config.at("phi"), "phi");
  std::array<BlochAxis, 2> axes{BlochAxis::x(), BlochAxis::x()};
  if (config.contains("settings")) axes = settings_pair(config.at("settings"), "settings");
  const std::uint64_t shots =
      config.contains("shots") ? positive_shots(config.at("shots"), "shots") : 100000;
  const std::uint64_t seed = resolve_seed(config, seed_override);

  const std::vector<MeasurementSetting> settings = {{kSpinA, axes[0]}, {kSpinB, axes[1]}};
  const auto dist = outcome_distribution(swapped_pair(phi), settings);
  const auto counts = sample_counts(dist, shots, seed);
  const auto freq = counts.frequencies();

  if (format == Format::json) {
    json rows = json::array();
    for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
      const auto o = outcome_of(i, 2);
      rows.push_back({{"outcome_A", o[0]},
                      {"outcome_B", o[1]},
                      {"count", counts.counts[i]},
                      {"exact_probability", dist.probabilities[i]},
                      {"frequency", freq[i]}});
    }
    json j = {{"phi", phi},
              {"setting_A", setting_label(settings[0])},
              {"setting_B", setting_label(settings[1])},
              {"shots", shots},
              {"seed", seed},
              {"rows", rows}};
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "setting_A,setting_B,outcome_A,outcome_B,count,exact_probability,frequency\n";
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    const auto o = outcome_of(i, 2);
    out << setting_label(settings[0]) << ',' << setting_label(settings[1]) << ','
        << o[0] << ',' << o[1] << ',' << counts.counts[i] << ','
        << format_double(dist.probabilities[i]) << ',' << format_double(freq[i]) << '\n';
  }
  return out.str();
}

std::string cmd_estimate_phase(const std::string& text, Seed seed_override,
                               Format format) {
  const json config = parse_config(text);
  allow_keys(config, "config", {"phi_true", "shots", "exact", "seed"});
  require_keys(config, "config", {"phi_true"});
  const auto phis = number_list(config.at("phi_true"), "phi_true");
  const bool exact = config.contains("exact") && boolean(config.at("exact"), "exact");
  if (!exact && !config.contains("shots")) {
    throw ConfigError("sampled phase estimation needs 'shots'");
  }
  const std::uint64_t shots =
      config.contains("shots") ? positive_shots(config.at("shots"), "shots") : 0;
  const std::uint64_t seed = resolve_seed(config, seed_override);

  struct Row {
    double phi, phi_hat, error;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const auto state = swapped_pair(phis[i]);
    const auto xx = outcome_distribution(
        state, {{kSpinA, BlochAxis::x()}, {kSpinB, BlochAxis::x()}});
    const auto xy = outcome_distribution(
        state, {{kSpinA, BlochAxis::x()}, {kSpinB, BlochAxis::y()}});
    double phi_hat = 0.0;
    if (exact) {
      phi_hat = estimate_phase(xx, xy);
    } else {
      phi_hat = estimate_phase(sample_counts(xx, shots, seed + 2 * i),
                               sample_counts(xy, shots, seed + 2 * i + 1));
    }
    rows.push_back({phis[i], phi_hat, std::abs(wrap_phase(phi_hat - phis[i]))});
  }

  const std::string mode = exact ? "exact" : "sampled";
  if (format == Format::json) {
    json j = json::array();
    for (const auto& r : rows) {
      j.push_back({{"phi_true", r.phi},
                   {"phi_hat", r.phi_hat},
                   {"abs_error", r.error},
                   {"mode", mode},
                   {"shots", shots},
                   {"seed", seed}});
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "phi_true,phi_hat,abs_error,mode,shots,seed\n";
  for (const auto& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.phi_hat) << ','
        << format_double(r.error) << ',' << mode << ',' << shots << ',' << seed << '\n';
  }
  return out.str();
}

namespace {

ScenarioConfig parse_scenario(const json& j, const std::string& path,
                              std::uint64_t default_seed) {
  allow_keys(j, path,
             {"model", "phi", "chi", "boson_charge", "drive", "settings", "shots",
              "seed", "clock_shift_enabled", "clock_frequency", "kick_timing"});
  require_keys(j, path, {"model"});
  ScenarioConfig c;
  if (!j.at("model").is_string()) throw ConfigError(path + ".model must be a string");
  try {
    c.model = model_from_string(j.at("model").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  c.phi = number_or(j, "phi", path, 0.0);
  c.chi = number_or(j, "chi", path, 0.0);
  c.boson_charge = number_or(j, "boson_charge", path, -1.0);
  if (j.contains("settings")) {
    const auto axes = settings_pair(j.at("settings"), path + ".settings");
    c.axis_a = axes[0];
    c.axis_b = axes[1];
  }
  if (j.contains("shots")) c.shots = positive_shots(j.at("shots"), path + ".shots");
  c.seed = j.contains("seed") ? unsigned_integer(j.at("seed"), path + ".seed")
                              : default_seed;
  if (j.contains("clock_shift_enabled")) {
    c.clock_shift_enabled =
        boolean(j.at("clock_shift_enabled"), path + ".clock_shift_enabled");
  }
  if (j.contains("clock_frequency")) {
    c.clock_frequency = number(j.at("clock_frequency"), path + ".clock_frequency");
  }
  if (j.contains("kick_timing")) {
    const auto& t = j.at("kick_timing");
    if (t == "before_swap") {
      c.kick_timing = KickTiming::before_swap;
    } else if (t == "after_swap") {
      c.kick_timing = KickTiming::after_swap;
    } else {
      throw ConfigError(path + ".kick_timing must be before_swap or after_swap");
    }
  }
  if (j.contains("drive")) {
    const auto& d = j.at("drive");
    const std::string dp = path + ".drive";
    allow_keys(d, dp, {"amplitude", "phase", "duration", "truncation", "coupling"});
    if (d.contains("amplitude")) c.drive.amplitude = site_pair(d.at("amplitude"), dp + ".amplitude");
    if (d.contains("phase")) c.drive.phase = site_pair(d.at("phase"), dp + ".phase");
    if (d.contains("duration")) c.drive.duration = site_pair(d.at("duration"), dp + ".duration");
    if (d.contains("truncation")) {
      const auto t = unsigned_integer(d.at("truncation"), dp + ".truncation");
      if (t < 2 || t > 512) throw ConfigError(dp + ".truncation must lie in [2, 512]");
      c.drive.truncation = static_cast<int>(t);
    }
    c.drive.coupling = number_or(d, "coupling", dp, c.drive.coupling);
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return c;
}

}  // namespace

std::string cmd_nosignal(const std::string& text, Seed seed_override, Format format,
                         std::ostream& log) {
  const json config = parse_config(text);
  allow_keys(config, "config", {"scenarios", "seed"});
  require_keys(config, "config", {"scenarios"});
  const auto& list = config.at("scenarios");
  if (!list.is_array() || list.empty()) {
    throw ConfigError("scenarios must be a non-empty array");
  }
  const std::uint64_t seed = resolve_seed(config, seed_override);
  std::vector<ScenarioConfig> scenarios;
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto c = parse_scenario(list[i], "scenarios[" + std::to_string(i) + "]", seed + i);
    if (seed_override) c.seed = *seed_override + i;
    scenarios.push_back(c);
  }

  auto logger = make_logger(log);
  std::vector<ScenarioReport> reports;
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& c = scenarios[i];
    if (c.model == Model::charged_full &&
        (drive_truncation_insufficient(c.drive.amplitude[0], c.drive.truncation) ||
         drive_truncation_insufficient(c.drive.amplitude[1], c.drive.truncation))) {
      logger->warn("scenario {}: drive truncation {} is tight for |alpha| = ({}, {})", i,
                   c.drive.truncation, c.drive.amplitude[0], c.drive.amplitude[1]);
    }
    logger->debug("scenario {}: model {} chi {}", i, to_string(c.model), c.chi);
    reports.push_back(run_scenario(c));
    const auto& r = reports.back();
    rows.push_back({c.model, c.phi, c.chi, c.boson_charge, r.tv_joint, r.tv_marginal_a,
                    r.tv_marginal_b});
  }

  if (format == Format::csv) return sweep_to_csv(rows);
  json j;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(json::parse(report_to_json(r, -1)));
  return j.dump(2) + "\n";
}

std::string cmd_causality(const std::string& text, Format format) {
  const json config = parse_config(text);
  allow_keys(config, "config", {"A", "B", "O", "seed"});
  require_keys(config, "config", {"A", "B", "O"});
  auto region = [&](const char* name) {
    const auto& r = config.at(name);
    allow_keys(r, name, {"x", "t"});
    require_keys(r, name, {"x", "t"});
    const auto x = interval(r.at("x"), std::string(name) + ".x");
    const auto t = interval(r.at("t"), std::string(name) + ".t");
    SpacetimeRegion region{x[0], x[1], t[0], t[1]};
    try {
      region.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string(name) + ": " + e.what());
    }
    return region;
  };
  const auto a = region("A");
  const auto b = region("B");
  const auto o = region("O");
  const auto verdict = jamming_allowed(a, b, o);
  if (format == Format::json) return verdict_to_json(verdict) + "\n";
  std::ostringstream out;
  out << "allowed,margin,witness_x,witness_t\n";
  out << (verdict.allowed ? "true" : "false") << ',' << format_double(verdict.margin)
      << ',';
  if (verdict.witness) {
    out << format_double(verdict.witness->x) << ',' << format_double(verdict.witness->t);
  } else {
    out << ',';
  }
  out << '\n';
  return out.str();
}

std::string cmd_rotation_fidelity(const std::string& text, Format format,
                                  std::ostream& log) {
  const json config = parse_config(text);
  allow_keys(config, "config", {"alpha", "g", "t", "pulse_area", "truncation", "seed"});
  require_keys(config, "config", {"alpha", "truncation"});
  if (config.contains("t") == config.contains("pulse_area")) {
    throw ConfigError("give exactly one of 't' or 'pulse_area'");
  }
  const auto& alpha_json = config.at("alpha");
  if (!alpha_json.is_array() || alpha_json.empty()) {
    throw ConfigError("alpha must be a non-empty array");
  }
  std::vector<Complex> alphas;
  for (std::size_t i = 0; i < alpha_json.size(); ++i) {
    const std::string path = "alpha[" + std::to_string(i) + "]";
    const auto& a = alpha_json[i];
    if (a.is_array()) {
      if (a.size() != 2) throw ConfigError(path + " must be a number or [re, im]");
      alphas.emplace_back(number(a[0], path + "[0]"), number(a[1], path + "[1]"));
    } else {
      alphas.emplace_back(number(a, path), 0.0);
    }
  }
  const double g = number_or(config, "g", "config", 1.0);
  if (g == 0.0) throw ConfigError("g must be nonzero");
  const auto trunc = unsigned_integer(config.at("truncation"), "truncation");
  if (trunc < 2 || trunc > 2048) throw ConfigError("truncation must lie in [2, 2048]");
  const int d = static_cast<int>(trunc);
  const bool fixed_area = config.contains("pulse_area");
  const double area_or_t = fixed_area ? number(config.at("pulse_area"), "pulse_area")
                                      : number(config.at("t"), "t");

  auto logger = make_logger(log);
  std::vector<std::pair<double, RotationFidelity>> rows;
  for (const auto& alpha : alphas) {
    const double r = std::abs(alpha);
    const double t = fixed_area ? (r == 0.0 ? 0.0 : area_or_t / (r * g)) : area_or_t;
    if (drive_truncation_insufficient(r, d)) {
      logger->warn("truncation {} is insufficient for |alpha| = {}", d, r);
    }
    rows.emplace_back(t, rotation_fidelity(alpha, d, g, t));
  }

  if (format == Format::json) {
    json j = json::array();
    for (const auto& [t, r] : rows) {
      j.push_back({{"alpha_re", r.alpha.real()},
                   {"alpha_im", r.alpha.imag()},
                   {"t", t},
                   {"fidelity", r.fidelity},
                   {"deficit", r.deficit},
                   {"truncation_deficit", r.truncation_deficit},
                   {"truncation_warning", r.truncation_warning}});
    }
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "alpha_re,alpha_im,t,fidelity,deficit,truncation_deficit,truncation_warning\n";
  for (const auto& [t, r] : rows) {
    out << format_double(r.alpha.real()) << ',' << format_double(r.alpha.imag()) << ','
        << format_double(t) << ',' << format_double(r.fidelity) << ','
        << format_double(r.deficit) << ',' << format_double(r.truncation_deficit) << ','
        << (r.truncation_warning ? "true" : "false") << '\n';
  }
  return out.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-boson nonlocality and no-signaling simulator", "nonlocal_cli"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
  };
  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON config file")->required();
    sub->add_option("--seed", opts.seed, "PRNG seed (overrides the config)");
    sub->add_option("--out", opts.out, "output path (default stdout)");
    sub->add_option("--format", opts.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  };
  auto* correlations = app.add_subcommand("correlations", "coincidence statistics");
  auto* estimate = app.add_subcommand("estimate-phase", "recover phi from xx/xy counts");
  auto* nosignal = app.add_subcommand("nosignal", "kick vs no-kick scenario reports");
  auto* causality = app.add_subcommand("causality", "jamming criterion verdict");
  auto* rotation = app.add_subcommand("rotation-fidelity", "coherent-drive rotation fidelity");
  for (auto* sub : {correlations, estimate, nosignal, causality, rotation}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    std::ifstream in(opts.config);
    if (!in) throw ConfigError("cannot read config '" + opts.config + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    const Format format = opts.format == "json" ? Format::json : Format::csv;

    std::string result;
    if (correlations->parsed()) {
      result = cmd_correlations(text, opts.seed, format);
    } else if (estimate->parsed()) {
      result = cmd_estimate_phase(text, opts.seed, format);
    } else if (nosignal->parsed()) {
      result = cmd_nosignal(text, opts.seed, format, err);
    } else if (causality->parsed()) {
      result = cmd_causality(text, format);
    } else {
      result = cmd_rotation_fidelity(text, format, err);
    }

    if (opts.out.empty()) {
      out << result;
    } else {
      std::ofstream file(opts.out, std::ios::binary);
      if (!file) throw ConfigError("cannot write '" + opts.out + "'");
      file << result;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvariantViolation& e) {
    err << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return kExitInvariant;
  }
}

}  // namespace nonlocal::cli
