// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include "polarshape/core.hpp"

#include <iostream>
#include <vector>

int main(int argc, char** argv) {
  namespace cli = polarshape::cli;
  CLI::App app{"polarshape: shape-from-polarization toolkit"};
  app.require_subcommand(1);

  const std::vector<cli::Command> commands{
      cli::add_synth(app),  cli::add_normals(app), cli::add_integrate(app),
      cli::add_deform(app), cli::add_eval(app),    cli::add_labels(app),
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (const auto& command : commands) {
      if (command.app->parsed()) command.run();
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
