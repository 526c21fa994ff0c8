#include "qdat/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

namespace {

int fail(int code, const std::string& message) {
  const qdat::Json err{{"error", qdat::Json{{"code", code}, {"message", message}}}};
  std::cerr << qdat::canonical_dump(err) << "\n";
  return code;
}

void print_summary(const qdat::Json& report, const std::string& out_path) {
  const std::string command = report.value("command", std::string("?"));
  if (command == "identities") {
    std::size_t held = 0;
    for (const auto& c : report.at("checks"))
      if (c.at("holds").get<bool>()) ++held;
    std::cout << "identities: " << held << "/" << report.at("checks").size() << " hold\n";
  } else if (command == "kernel") {
    std::cout << "kernel " << report.at("kernel").get<std::string>() << " ("
              << report.at("route").get<std::string>()
              << "): max_abs=" << report.at("max_abs").get<double>() << "\n";
  } else if (command == "emission") {
    std::cout << "emission: nbar=" << report.at("nbar").get<double>()
              << " persistence=" << report.at("persistence").get<double>() << "\n";
  } else if (command == "transact") {
    std::cout << "transact: nu_rate=" << report.at("nu").at("rate").get<double>()
              << " factorization_residual="
              << report.at("factorization_residual").get<double>() << "\n";
  }
  std::cout << "report written to " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"direct-action kernel algebra, emission statistics and transactional ensembles"};
  app.get_formatter()->column_width(28);
  std::string command;
  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool quiet = false;

  app.add_option("command", command, "one of: identities, kernel, emission, transact")
      ->check(CLI::IsMember({"identities", "kernel", "emission", "transact"}));
  auto* scenario_opt =
      app.add_option("--scenario", scenario_path, "scenario JSON file (see docs/scenarios.md)");
  auto* out_opt = app.add_option("--out", out_path, "report path (default report.json)");
  auto* seed_opt = app.add_option("--seed", seed, "override the scenario seed");
  app.add_flag("--quiet", quiet, "suppress the console summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(2, std::string("argument error: ") + e.what());
  }

  try {
    qdat::Json doc;
    if (scenario_opt->count() > 0) {
      std::ifstream is(scenario_path);
      if (!is) throw qdat::IoError("cannot open scenario file: " + scenario_path);
      try {
        is >> doc;
      } catch (const std::exception& e) {
        throw qdat::ValidationError(std::string("scenario: invalid JSON: ") + e.what());
      }
    } else if (command == "identities") {
      doc = qdat::Json{{"command", "identities"}};
    } else {
      throw qdat::ValidationError("a scenario file is required (--scenario PATH)");
    }

    qdat::Scenario scenario = qdat::parse_scenario(doc);
    if (!command.empty() && qdat::parse_command(command) != scenario.command)
      throw qdat::ValidationError("scenario command does not match the command line");
    if (seed_opt->count() > 0) scenario.seed = seed;

    std::string out = scenario.out.value_or("report.json");
    if (out_opt->count() > 0) out = out_path;

    const qdat::RunResult result = qdat::run_scenario(scenario);
    qdat::emit_report(result.report, out);
    if (result.csv) {
      std::string csv_path = out;
      if (csv_path.size() >= 5 && csv_path.compare(csv_path.size() - 5, 5, ".json") == 0)
        csv_path.resize(csv_path.size() - 5);
      csv_path += ".csv";
      qdat::write_text_file(csv_path, *result.csv);
      if (!quiet) std::cout << "samples written to " << csv_path << "\n";
    }
    if (!quiet) print_summary(result.report, out);
    return 0;
  } catch (const qdat::ValidationError& e) {
    return fail(2, e.what());
  } catch (const qdat::NumericalError& e) {
    return fail(3, e.what());
  } catch (const qdat::IoError& e) {
    return fail(4, e.what());
  } catch (const std::exception& e) {
    return fail(2, std::string("unexpected error: ") + e.what());
  }
}
