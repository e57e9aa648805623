// Copyright (C) 2026 The polarshape Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>

#include <functional>
#include <stdexcept>

namespace polarshape::cli {

/// Bad flag combination detected after parsing; exits with code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A registered subcommand and the action to run when it was selected.
struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

Command add_synth(CLI::App& app);
Command add_normals(CLI::App& app);
Command add_integrate(CLI::App& app);
Command add_deform(CLI::App& app);
Command add_eval(CLI::App& app);
Command add_labels(CLI::App& app);

}  // namespace polarshape::cli
