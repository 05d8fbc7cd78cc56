#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cavbec/model.hpp"

namespace cavbec {

/// Arithmetic over numbers and the symbols kappa, omega_m, omega_b, zeta,
/// chi_xzpf, gamma and pi (all rad/s, read from `sys`). Supports + - * /
/// and parentheses: "kappa/2", "0.7*chi_xzpf", "-0.5*kappa".
double eval_expression(const std::string& text, const System& sys);

/// "lo:hi:n" (inclusive linspace) or a single expression.
std::vector<double> parse_grid(const std::string& text, const System& sys);

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 config error, 2 numerical failure, 3 validation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavbec
