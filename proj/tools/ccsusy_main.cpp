#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ccsusy/commands.hpp"
#include "ccsusy/errors.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::string format;
};

int dispatch(const std::string& command, const GlobalArgs& args,
             const std::string& preset_name) {
  using namespace ccsusy;
  CommandOptions opts;
  opts.out_dir = args.out_dir;
  opts.format = args.format;

  CommandOutcome outcome;
  if (command == "figdata") {
    outcome = run_figdata(preset_name, opts);
  } else {
    if (args.config_path.empty())
      throw ConfigError("--config PATH is required for this command");
    const RunConfig cfg = parse_config_file(args.config_path);
    if (command == "potential")
      outcome = run_potential(cfg, opts);
    else if (command == "smatrix")
      outcome = run_smatrix(cfg, opts);
    else if (command == "boundstates")
      outcome = run_boundstates(cfg, opts);
    else if (command == "verify")
      outcome = run_verify(cfg, opts);
  }

  std::cout << outcome.message << "\n";
  for (const auto& f : outcome.files) std::cout << "  wrote " << f << "\n";
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ccsusy: exactly-solvable coupled-channel scattering models built as "
      "supersymmetric partners of the zero potential"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  app.add_option("--config", args.config_path, "JSON run configuration file");
  app.add_option("--out", args.out_dir, "output directory (overrides outputs.directory)");
  app.add_option("--format", args.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  app.add_subcommand("potential", "write the transformed potential on the radial grid");
  app.add_subcommand("smatrix", "write eigenphase shifts and the mixing parameter");
  app.add_subcommand("boundstates", "scan for bound states below all thresholds");
  app.add_subcommand("verify",
                     "cross-check closed forms against direct integration; exit 3 on failure");
  auto* figdata =
      app.add_subcommand("figdata", "write the potential and eigenphase tables of a preset");
  std::string preset_name;
  figdata->add_option("name", preset_name, "preset name: fig1, fig2 or fig3")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), args, preset_name);
  } catch (const ccsusy::SingularSigma& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ccsusy::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ccsusy::PreconditionViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
