#pragma once

#include "homog/experiments.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace homog {

using Json = nlohmann::ordered_json;

/// Finite doubles as numbers; inf, -inf and nan as the strings "inf", "-inf", "nan".
Json number_json(double v);
/// [re, im].
Json complex_json(Complex z);
/// Row-major array of rows of [re, im].
Json matrix_json(const CMatrix& m);
/// Array of [re, im].
Json field_json(const CVector& v);
Json point_json(const Point& p);

Json to_json(const ValidationReport& rep);
/// Keyed by slow node index as a decimal string.
Json to_json(const HomogenizedCoefficients& hc);
Json to_json(const ConvergenceReport& rep);
Json to_json(const SpectrumReport& rep);
/// Corrector values at every cell node: lambda1 and lambda0 per node.
Json to_json(const CellCorrectors& corr);

/// Pretty-printed, trailing newline. Identical input gives identical text.
std::string dump(const Json& j);

/// eps,err_L2,err_W1_corrected,err_W1_uncorrected with %.17g values.
std::string convergence_csv(const ConvergenceReport& rep);
/// eps,j,lambda_eps,lambda_0,gap with %.17g values.
std::string spectrum_csv(const SpectrumReport& rep);

/// Writes text, creating parent directories. Throws Error on I/O failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace homog
