#pragma once

#include "qdat/currents.hpp"
#include "qdat/interaction.hpp"
#include "qdat/io.hpp"
#include "qdat/kernel_algebra.hpp"
#include "qdat/kernel_numeric.hpp"
#include "qdat/transaction.hpp"

#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qdat {

enum class Command { Identities, Kernel, Emission, Transact };

inline Command parse_command(const std::string& name) {
  if (name == "identities") return Command::Identities;
  if (name == "kernel") return Command::Kernel;
  if (name == "emission") return Command::Emission;
  if (name == "transact") return Command::Transact;
  throw ValidationError("scenario: unknown command: " + name);
}

inline std::string command_label(Command c) {
  switch (c) {
    case Command::Identities:
      return "identities";
    case Command::Kernel:
      return "kernel";
    case Command::Emission:
      return "emission";
    case Command::Transact:
      return "transact";
  }
  return "?";
}

/// A validated scenario document plus the run controls that the command line
/// may override.
struct Scenario {
  Command command;
  Json doc;
  std::uint64_t seed = 0;
  std::optional<std::string> out;
};

namespace detail {

inline const Json& require_key(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError("scenario: missing required key " + where + "." + key);
  return j.at(key);
}

inline double require_number(const Json& j, const char* key, const std::string& where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_number()) throw ValidationError("scenario: " + where + "." + key + " must be a number");
  return v.get<double>();
}

inline std::int64_t require_int(const Json& j, const char* key, const std::string& where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_number_integer())
    throw ValidationError("scenario: " + where + "." + key + " must be an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t require_uint(const Json& j, const char* key, const std::string& where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ValidationError("scenario: " + where + "." + key + " must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

inline std::string require_string(const Json& j, const char* key, const std::string& where) {
  const Json& v = require_key(j, key, where);
  if (!v.is_string()) throw ValidationError("scenario: " + where + "." + key + " must be a string");
  return v.get<std::string>();
}

}  // namespace detail

inline SpacetimeGrid parse_grid(const Json& j, const std::string& where = "$.grid") {
  if (!j.is_object()) throw ValidationError("scenario: " + where + " must be an object");
  const double extent = detail::require_number(j, "spatial_extent", where);
  const std::int64_t modes = detail::require_int(j, "num_modes", where);
  const Json& time = detail::require_key(j, "time", where);
  const std::int64_t count = detail::require_int(time, "count", where + ".time");
  const double t_min = detail::require_number(time, "min", where + ".time");
  const double t_max = detail::require_number(time, "max", where + ".time");
  if (count < 2 || count > 1 << 20)
    throw ValidationError("scenario: " + where + ".time.count out of range");
  return SpacetimeGrid::uniform(extent, static_cast<int>(modes), static_cast<int>(count), t_min,
                                t_max);
}

inline Json grid_to_json(const SpacetimeGrid& grid) {
  return Json{{"spatial_extent", grid.spatial_extent()},
              {"num_modes", grid.num_modes()},
              {"time", Json{{"count", grid.time_count()},
                            {"min", grid.times().front()},
                            {"max", grid.times().back()}}}};
}

inline Current parse_current(const Json& j, const SpacetimeGrid& grid,
                             const std::string& where = "$.current") {
  if (!j.is_object()) throw ValidationError("scenario: " + where + " must be an object");
  const std::string kind = detail::require_string(j, "kind", where);
  const std::string label = j.value("label", std::string("j"));
  if (kind == "point_event") {
    return make_point_event(grid, detail::require_number(j, "strength", where),
                            detail::require_number(j, "t0", where),
                            detail::require_number(j, "x0", where), label);
  }
  if (kind == "gaussian_pulse") {
    return make_gaussian_pulse(grid, detail::require_number(j, "strength", where),
                               detail::require_number(j, "t0", where),
                               detail::require_number(j, "x0", where),
                               detail::require_number(j, "sigma_t", where),
                               detail::require_number(j, "sigma_x", where), label);
  }
  if (kind == "oscillating_source") {
    return make_oscillating_source(grid, detail::require_number(j, "strength", where),
                                   detail::require_number(j, "x0", where),
                                   detail::require_number(j, "sigma_x", where),
                                   detail::require_number(j, "omega0", where), label);
  }
  throw ValidationError("scenario: " + where + ".kind is not a known source kind: " + kind);
}

/// Structural validation of a scenario document. Domain validation happens
/// when the referenced objects are constructed during the run.
inline Scenario parse_scenario(const Json& doc) {
  if (!doc.is_object()) throw ValidationError("scenario: top level must be an object");
  Scenario sc{parse_command(detail::require_string(doc, "command", "$")), doc, 0, std::nullopt};
  if (doc.contains("seed")) sc.seed = detail::require_uint(doc, "seed", "$");
  if (doc.contains("out")) sc.out = detail::require_string(doc, "out", "$");
  switch (sc.command) {
    case Command::Identities:
      break;
    case Command::Kernel:
      detail::require_key(doc, "grid", "$");
      detail::require_key(doc, "kernel", "$");
      break;
    case Command::Emission:
      detail::require_key(doc, "grid", "$");
      detail::require_key(doc, "current", "$");
      detail::require_uint(doc, "trials", "$");
      break;
    case Command::Transact:
      detail::require_key(doc, "grid", "$");
      detail::require_key(doc, "absorbers", "$");
      detail::require_number(doc, "coupling_e", "$");
      detail::require_uint(doc, "trials", "$");
      break;
  }
  return sc;
}

struct RunResult {
  Json report;
  std::optional<std::string> csv;
};

inline RunResult run_identities(const Scenario&) {
  const IdentitySuiteReport suite = verify_identity_suite();
  Json checks = Json::array();
  for (const IdentityCheck& c : suite.checks)
    checks.push_back(Json{{"name", c.name}, {"statement", c.statement}, {"holds", c.holds}});
  Json report{{"command", "identities"}, {"checks", checks}, {"all_hold", suite.all_hold()}};
  return {report, std::nullopt};
}

inline RunResult run_kernel(const Scenario& sc) {
  const SpacetimeGrid grid = parse_grid(sc.doc.at("grid"));
  const std::string kernel_name = detail::require_string(sc.doc, "kernel", "$");
  const auto parsed = parse_kernel_name(kernel_name);
  if (!parsed) throw ValidationError("scenario: unknown kernel name: " + kernel_name);
  const std::string route = sc.doc.value("route", std::string("components"));

  Json report{{"command", "kernel"}, {"kernel", kernel_name}, {"route", route},
              {"grid", grid_to_json(grid)}};
  KernelField field(grid);
  if (route == "components") {
    field = eval_kernel(*parsed, grid);
  } else if (route == "momentum") {
    if (*parsed != KernelName::Feynman)
      throw ValidationError("scenario: the momentum route only builds the time-ordered kernel");
    const double epsilon = detail::require_number(sc.doc, "epsilon", "$");
    FrequencyLattice lattice = conjugate_lattice(grid);
    if (sc.doc.contains("lattice")) {
      const Json& lj = sc.doc.at("lattice");
      lattice.spacing = detail::require_number(lj, "spacing", "$.lattice");
      lattice.cutoff = detail::require_number(lj, "cutoff", "$.lattice");
    }
    field = eval_feynman_momentum(grid, epsilon, lattice);
    const KernelField reference = eval_kernel(KernelName::Feynman, grid);
    report["epsilon"] = epsilon;
    report["lattice"] = Json{{"spacing", lattice.spacing}, {"cutoff", lattice.cutoff}};
    const double scale = max_abs(reference);
    report["residual_vs_components"] = residual(field, reference) / (scale > 0.0 ? scale : 1.0);
  } else {
    throw ValidationError("scenario: unknown kernel route: " + route);
  }
  report["max_abs"] = max_abs(field);

  if (sc.doc.contains("convergence_study")) {
    const Json& sj = sc.doc.at("convergence_study");
    if (!sj.is_array() || sj.empty())
      throw ValidationError("scenario: convergence_study must be a nonempty array");
    std::vector<double> epsilons;
    for (const auto& e : sj) {
      if (!e.is_number()) throw ValidationError("scenario: convergence_study entries are numbers");
      epsilons.push_back(e.get<double>());
    }
    const FeynmanStudy study = feynman_momentum_convergence(epsilons);
    Json stages = Json::array();
    for (const FeynmanStage& st : study.stages)
      stages.push_back(Json{{"epsilon", st.epsilon},
                            {"spacing", st.lattice.spacing},
                            {"cutoff", st.lattice.cutoff},
                            {"residual", st.residual}});
    report["convergence_study"] = Json{{"stages", stages},
                                       {"orders", study.decade_orders},
                                       {"monotone_decreasing", study.monotone_decreasing()}};
  }

  std::ostringstream csv;
  write_csv(field, csv);
  return {report, csv.str()};
}

inline RunResult run_emission(const Scenario& sc) {
  const SpacetimeGrid grid = parse_grid(sc.doc.at("grid"));
  const Current current = parse_current(sc.doc.at("current"), grid);
  const std::uint64_t trials = detail::require_uint(sc.doc, "trials", "$");
  if (trials < 1) throw ValidationError("scenario: trials must be at least 1");
  int max_count = -1;
  if (sc.doc.contains("max_count")) {
    max_count = static_cast<int>(detail::require_int(sc.doc, "max_count", "$"));
    if (max_count < 0) throw ValidationError("scenario: max_count must be nonnegative");
  }
  const EmissionStats stats = emission_stats(current, trials, sc.seed, max_count);
  Json histogram = Json::array();
  for (std::uint64_t c : stats.histogram.counts) histogram.push_back(c);
  Json report{{"command", "emission"},
              {"grid", grid_to_json(grid)},
              {"current", Json{{"kind", sc.doc.at("current").at("kind")}, {"label", current.label}}},
              {"nbar", stats.nbar},
              {"persistence", stats.persistence},
              {"pmf", stats.pmf.probabilities},
              {"pmf_tail", stats.pmf.tail},
              {"histogram", histogram},
              {"trials", trials},
              {"seed", sc.seed}};
  std::ostringstream csv;
  write_csv(current, csv);
  return {report, csv.str()};
}

inline RunResult run_transact(const Scenario& sc) {
  EnsembleConfig config{parse_grid(sc.doc.at("grid")), {}, {}, 0.0, 1.0, 0, sc.seed,
                        Phasing::Feynman, 100};

  const Json& aj = sc.doc.at("absorbers");
  if (!aj.is_array() || aj.empty())
    throw ValidationError("scenario: $.absorbers must be a nonempty array");
  for (std::size_t i = 0; i < aj.size(); ++i) {
    const std::string where = "$.absorbers[" + std::to_string(i) + "]";
    const Json& a = aj.at(i);
    Absorber absorber;
    absorber.id = detail::require_string(a, "id", where);
    absorber.window.first_mode = static_cast<int>(detail::require_int(a, "first_mode", where));
    absorber.window.last_mode = static_cast<int>(detail::require_int(a, "last_mode", where));
    absorber.weight = a.value("weight", 1.0);
    config.absorbers.absorbers.push_back(std::move(absorber));
  }

  const bool has_offer = sc.doc.contains("offer");
  const bool has_modes = sc.doc.contains("offer_modes");
  if (has_offer == has_modes)
    throw ValidationError("scenario: provide exactly one of $.offer or $.offer_modes");
  if (has_offer) {
    const Json& oj = sc.doc.at("offer");
    if (!oj.is_array() || oj.size() != config.absorbers.absorbers.size())
      throw ValidationError("scenario: $.offer needs one entry per absorber");
    std::vector<Complex> amplitudes(oj.size());
    for (std::size_t i = 0; i < oj.size(); ++i) {
      const std::string where = "$.offer[" + std::to_string(i) + "]";
      const Json& o = oj.at(i);
      const std::string id = detail::require_string(o, "absorber", where);
      std::size_t slot = config.absorbers.absorbers.size();
      for (std::size_t a = 0; a < config.absorbers.absorbers.size(); ++a)
        if (config.absorbers.absorbers[a].id == id) slot = a;
      if (slot == config.absorbers.absorbers.size())
        throw ValidationError("scenario: " + where + " names an unknown absorber: " + id);
      if (o.contains("re") || o.contains("im")) {
        amplitudes[slot] = Complex(detail::require_number(o, "re", where),
                                   detail::require_number(o, "im", where));
      } else {
        amplitudes[slot] = std::polar(detail::require_number(o, "modulus", where),
                                      o.value("phase", 0.0));
      }
    }
    config.offer = make_offer(std::move(amplitudes));
  } else {
    const Json& mj = sc.doc.at("offer_modes");
    if (!mj.is_array())
      throw ValidationError("scenario: $.offer_modes must be an array over nonzero modes");
    std::vector<Complex> psi(mj.size());
    for (std::size_t i = 0; i < mj.size(); ++i) {
      const std::string where = "$.offer_modes[" + std::to_string(i) + "]";
      psi[i] = Complex(detail::require_number(mj.at(i), "re", where),
                       detail::require_number(mj.at(i), "im", where));
    }
    config.offer = project_offer(psi, config.absorbers, config.grid);
  }

  config.coupling_e = detail::require_number(sc.doc, "coupling_e", "$");
  config.weight_g = sc.doc.value("weight_g", 1.0);
  config.trials = detail::require_uint(sc.doc, "trials", "$");
  config.seed = sc.seed;
  config.phasing = parse_phasing(sc.doc.value("phasing", std::string("feynman")));
  if (sc.doc.contains("factorization_pairs"))
    config.factorization_pairs =
        static_cast<int>(detail::require_int(sc.doc, "factorization_pairs", "$"));

  const EnsembleReport result = run_trials(config);
  Json winners = Json::object();
  for (std::size_t i = 0; i < result.winner_counts.size(); ++i)
    winners[config.absorbers.absorbers[i].id] = result.winner_counts[i];
  Json report{{"command", "transact"},
              {"grid", grid_to_json(config.grid)},
              {"coupling_e", result.coupling_e},
              {"weight_g", result.weight_g},
              {"trials", result.trials},
              {"seed", result.seed},
              {"phasing", result.phasing == Phasing::Feynman ? "feynman" : "dyson"},
              {"nu", Json{{"count", result.nu_count},
                          {"rate", result.nu_rate},
                          {"stderr", result.nu_rate_stderr}}},
              {"winners", winners},
              {"factorization_residual", result.factorization_residual}};
  return {report, std::nullopt};
}

/// Runs a parsed scenario. Reports depend only on the scenario content and
/// the seed, never on wall time or environment.
inline RunResult run_scenario(const Scenario& sc) {
  switch (sc.command) {
    case Command::Identities:
      return run_identities(sc);
    case Command::Kernel:
      return run_kernel(sc);
    case Command::Emission:
      return run_emission(sc);
    case Command::Transact:
      return run_transact(sc);
  }
  throw ValidationError("scenario: unknown command");
}

}  // namespace qdat
