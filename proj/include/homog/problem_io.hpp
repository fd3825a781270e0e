#pragma once

#include "homog/coeffs.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace homog {

/// A problem definition plus the free-form [run] parameters.
struct Problem {
  CoefficientSet cs;
  nlohmann::json run = nlohmann::json::object();
};

/// Builds a problem from the parsed tree of a problem file:
///
///   name = "..."            (optional)
///   length = 6.283...       (optional slow period)
///   [bstruct] d, n, m, B = [B_1, ..., B_d], each m rows of n entries
///   [A] entries = [[...], ...] | scalar = "expr" | diag = [...]
///   [a.1] ... [b.1] ... [V] ... [G] ...   (same forms, n x n)
///   [run] ...                             (command parameters)
///
/// An entry is an expression string, a number, or a [re, im] pair of either.
/// Throws ProblemError or ParseError.
Problem problem_from_json(const nlohmann::json& root);

/// Reads a .toml (or .json) problem file. Throws ProblemError on I/O errors.
Problem load_problem_file(const std::filesystem::path& path);

}  // namespace homog
